"""
Database Management for the Verification Report Archive

This module handles the SQLite connection, session management and the
repository that stores and retrieves verification runs.
"""

import logging
from contextlib import contextmanager
from typing import Any, Dict, List, Optional

from sqlalchemy import Engine, create_engine, select
from sqlalchemy.orm import sessionmaker

from config.manager import get_config
from db.models import Base, CheckRecord, VerificationRun
from lib.messages import LogMessages

# Set up logging
logger = logging.getLogger(__name__)


class DatabaseError(Exception):
    """Custom exception for database-related errors."""
    pass


class DatabaseManager:
    """
    Database connection and session management class.

    The archive is optional: nothing else in the toolkit needs it, so a
    manager is created only when a run is archived or the service reports
    archive health.
    """

    def __init__(self, config_manager=None, url: Optional[str] = None):
        """
        Initialize the database manager.

        Args:
            config_manager: Configuration manager instance (optional)
            url (str, optional): Explicit SQLAlchemy URL, overriding the configuration
        """
        self.config = config_manager or get_config()
        self.url = url or self.config.get_database_url()
        self.engine: Optional[Engine] = None
        self.session_factory = None
        self._initialized = False

    @classmethod
    def for_path(cls, path: str, config_manager=None) -> 'DatabaseManager':
        """Manager for an SQLite file, as given to verify --archive."""
        return cls(config_manager, url=f"sqlite:///{path}")

    def initialize(self) -> bool:
        """
        Initialize the database connection and create tables.

        Returns:
            bool: True if initialization successful, False otherwise
        """
        try:
            echo = bool(self.config.get_database_config().get('echo', False))
            logger.info(f"Initializing report archive at: {self.url}")

            self.engine = create_engine(self.url, echo=echo)
            with self.engine.connect():
                logger.debug("Database connection test successful")

            self.session_factory = sessionmaker(bind=self.engine, expire_on_commit=False)
            self._create_tables()

            self._initialized = True
            return True

        except Exception as e:
            logger.error(f"Database initialization failed: {e}")
            self._initialized = False
            return False

    def _create_tables(self):
        """Create database tables if they don't exist."""
        try:
            Base.metadata.create_all(self.engine)
        except Exception as e:
            logger.error(f"Failed to create database tables: {e}")
            raise DatabaseError(f"Table creation failed: {e}")

    def is_initialized(self) -> bool:
        """Check if database is initialized."""
        return self._initialized and self.engine is not None

    def get_session(self):
        """
        Get a new database session.

        Raises:
            DatabaseError: If database is not initialized
        """
        if not self.is_initialized():
            raise DatabaseError("Database not initialized. Call initialize() first.")

        return self.session_factory()

    @contextmanager
    def session_scope(self):
        """
        Context manager for database sessions with automatic commit/rollback.

        Usage:
            with db_manager.session_scope() as session:
                session.add(run)
        """
        session = self.get_session()
        try:
            yield session
            session.commit()
        except Exception as e:
            session.rollback()
            logger.error(f"Database session error: {e}")
            raise
        finally:
            session.close()

    def close(self):
        """Close database connections and clean up resources."""
        if self.engine:
            self.engine.dispose()
            logger.debug("Database connections closed")

        self._initialized = False

    def health_check(self) -> Dict[str, Any]:
        """
        Perform database health check.

        Returns:
            dict: Health check results
        """
        if not self.is_initialized():
            return {
                'status': 'unhealthy',
                'error': 'Database not initialized'
            }

        try:
            with self.session_scope() as session:
                run_count = session.query(VerificationRun).count()

            return {
                'status': 'healthy',
                'run_count': run_count,
                'database_url': self.url
            }
        except Exception as e:
            return {
                'status': 'unhealthy',
                'error': str(e)
            }


class ReportRepository:
    """
    Data access layer for verification runs.
    """

    def __init__(self, db_manager: DatabaseManager):
        """
        Initialize the report repository.

        Args:
            db_manager: Database manager instance
        """
        self.db_manager = db_manager

    def save_run(self, suite: str, seed: int, reports: List[Dict[str, Any]]) -> int:
        """
        Store a suite run.

        Args:
            suite (str): Suite name
            seed (int): Seed the suite ran with
            reports (list): Dumped CheckReport dictionaries, in suite order

        Returns:
            int: Identifier of the stored run

        Raises:
            DatabaseError: If the run cannot be stored
        """
        passed = not any(r['severity'] == 'error' and not r['passed'] for r in reports)
        try:
            with self.db_manager.session_scope() as session:
                run = VerificationRun(suite=suite, seed=int(seed), passed=passed)
                run.checks = [CheckRecord.from_report(report, position) for position, report in enumerate(reports)]
                session.add(run)
                session.flush()
                run_id = run.id
            logger.info(LogMessages.RUN_ARCHIVED.format(run_id=run_id, checks=len(reports)))
            return run_id
        except Exception as e:
            logger.error(f"Failed to archive run of suite {suite}: {e}")
            raise DatabaseError(f"Failed to archive run: {e}")

    def get_run(self, run_id: int) -> Optional[Dict[str, Any]]:
        """
        Get a run and its checks by identifier.

        Returns:
            dict or None: The run if found, None otherwise
        """
        try:
            with self.db_manager.session_scope() as session:
                run = session.get(VerificationRun, run_id)
                return run.to_dict() if run else None
        except Exception as e:
            logger.error(f"Failed to get run {run_id}: {e}")
            raise DatabaseError(f"Failed to retrieve run: {e}")

    def list_runs(self, suite: Optional[str] = None, limit: int = 50) -> List[Dict[str, Any]]:
        """
        Runs newest first, without their checks.

        Args:
            suite (str, optional): Restrict to one suite
            limit (int): Maximum number of runs
        """
        try:
            with self.db_manager.session_scope() as session:
                query = select(VerificationRun).order_by(VerificationRun.created_at.desc(),
                                                         VerificationRun.id.desc()).limit(limit)
                if suite is not None:
                    query = query.where(VerificationRun.suite == suite)
                runs = session.scalars(query).all()
                return [{key: value for key, value in run.to_dict().items() if key != 'checks'} for run in runs]
        except Exception as e:
            logger.error(f"Failed to list runs: {e}")
            raise DatabaseError(f"Failed to list runs: {e}")

    def latest_run(self, suite: str) -> Optional[Dict[str, Any]]:
        """Most recent run of a suite with its checks, or None."""
        runs = self.list_runs(suite, limit=1)
        return self.get_run(runs[0]['id']) if runs else None


def open_archive(path: Optional[str] = None, config_manager=None) -> ReportRepository:
    """
    Initialize an archive and return its repository.

    Raises:
        DatabaseError: If the archive cannot be opened
    """
    if path:
        manager = DatabaseManager.for_path(path, config_manager)
    else:
        manager = DatabaseManager(config_manager)
    if not manager.initialize():
        raise DatabaseError(f"Cannot open report archive at {manager.url}")
    return ReportRepository(manager)


# Export main classes and functions
__all__ = ['DatabaseManager', 'ReportRepository', 'DatabaseError', 'open_archive']
