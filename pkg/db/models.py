"""
SQLAlchemy Models for the Verification Report Archive

A VerificationRun is one execution of a named suite; each of its
CheckRecord rows is one CheckReport.
"""

import json
from datetime import datetime, timezone

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Index, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship
from sqlalchemy.sql import func


# Create the declarative base
Base = declarative_base()


class BaseModel(Base):
    """
    Abstract base model with a creation timestamp and dict conversion.
    """
    __abstract__ = True

    created_at = Column(DateTime, nullable=False, default=func.now(), server_default=func.now())

    def to_dict(self):
        """
        Convert model instance to dictionary.

        Returns:
            dict: Dictionary representation of the model
        """
        return {
            column.name: getattr(self, column.name)
            for column in self.__table__.columns
        }

    def __repr__(self):
        """String representation of the model."""
        class_name = self.__class__.__name__
        return f"<{class_name}({self.to_dict()})>"


class VerificationRun(BaseModel):
    """
    One verification suite execution.

    passed is True only when no blocking check failed.
    """
    __tablename__ = 'verification_runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    suite = Column(String(50), nullable=False)
    seed = Column(Integer, nullable=False)
    passed = Column(Boolean, nullable=False)

    checks = relationship('CheckRecord', back_populates='run', cascade='all, delete-orphan',
                          order_by='CheckRecord.position', lazy='selectin')

    __table_args__ = (
        Index('idx_runs_suite_created', 'suite', 'created_at'),
    )

    def __init__(self, suite, seed, passed, created_at=None):
        self.suite = suite
        self.seed = seed
        self.passed = passed
        self.created_at = created_at or datetime.now(timezone.utc)

    def to_dict(self):
        """
        Convert the run and its checks to a dictionary with an ISO timestamp.

        Returns:
            dict: Dictionary representation of the run
        """
        return {
            'id': self.id,
            'suite': self.suite,
            'seed': self.seed,
            'passed': self.passed,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'checks': [check.to_dict() for check in self.checks]
        }

    def __str__(self):
        return f"VerificationRun(id={self.id}, suite='{self.suite}', passed={self.passed})"


class CheckRecord(BaseModel):
    """A stored CheckReport; the witness is kept as JSON text."""
    __tablename__ = 'check_records'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('verification_runs.id', ondelete='CASCADE'), nullable=False)
    position = Column(Integer, nullable=False)
    check_name = Column(String(200), nullable=False)
    passed = Column(Boolean, nullable=False)
    worst_case = Column(Float, nullable=True)
    tolerance = Column(Float, nullable=False)
    severity = Column(String(10), nullable=False, default='error')
    samples_used = Column(Integer, nullable=False, default=0)
    wall_time = Column(Float, nullable=False, default=0.0)
    witness = Column(Text, nullable=False, default='[]')

    run = relationship('VerificationRun', back_populates='checks')

    __table_args__ = (
        Index('idx_checks_run', 'run_id'),
        Index('idx_checks_name', 'check_name'),
    )

    @classmethod
    def from_report(cls, report: dict, position: int) -> 'CheckRecord':
        """Build a record from a dumped CheckReport dictionary."""
        worst = report['worst_case']
        return cls(
            position=position,
            check_name=report['check_name'],
            passed=bool(report['passed']),
            worst_case=None if worst is None or worst != worst else float(worst),
            tolerance=float(report['tolerance']),
            severity=report.get('severity', 'error'),
            samples_used=int(report.get('samples_used', 0)),
            wall_time=float(report.get('wall_time', 0.0)),
            witness=json.dumps(report.get('witness', []))
        )

    def to_dict(self):
        return {
            'check_name': self.check_name,
            'passed': self.passed,
            'worst_case': self.worst_case,
            'tolerance': self.tolerance,
            'severity': self.severity,
            'samples_used': self.samples_used,
            'wall_time': self.wall_time,
            'witness': json.loads(self.witness)
        }

    def __str__(self):
        return f"CheckRecord(check_name='{self.check_name}', passed={self.passed})"


# Export the models and base for easy importing
__all__ = ['Base', 'BaseModel', 'VerificationRun', 'CheckRecord']
