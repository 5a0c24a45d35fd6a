"""
Configuration Manager for the Heat-Kernel Pricing Toolkit

Settings come from config/settings.yaml, then config/<env>.yaml (or an inline
section named after the environment), then PRICING_* and SERVER_* variables.
"""

import os
import yaml
import logging
from pathlib import Path
from typing import Dict, Any, Optional

# Set up logging
logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent


class ConfigManager:
    """
    Layered pricing settings with dot-path access.
    """

    def __init__(self, config_file: Optional[str] = None, env: Optional[str] = None, verbose: bool = True):
        """
        Args:
            config_file (str, optional): settings file; defaults to config/settings.yaml
            env (str, optional): overrides section; defaults to $PRICING_ENV or development
            verbose (bool): log which layers were applied
        """
        self.config_file = config_file or str(CONFIG_DIR / "settings.yaml")
        self.env = env or os.getenv('PRICING_ENV', 'development')
        self.verbose = verbose
        self.config = {}
        self._load_config()

    def _load_config(self):
        """Load configuration from YAML file."""
        messages = []

        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    self.config = yaml.safe_load(f) or {}
                messages.append(f"Loaded configuration from {self.config_file}")
            else:
                messages.append(f"Configuration file {self.config_file} not found, using defaults")
                self.config = self._get_default_config()

            # Environment-specific overrides
            env_config_file = Path(self.config_file).parent / f"{self.env}.yaml"
            if env_config_file.exists():
                with open(env_config_file, 'r', encoding='utf-8') as f:
                    env_config = yaml.safe_load(f) or {}
                self._merge_config(self.config, env_config)
                messages.append(f"Applied {self.env} environment overrides from {env_config_file}")
            elif isinstance(self.config.get(self.env), dict):
                self._merge_config(self.config, self.config[self.env])
                messages.append(f"Applied inline {self.env} overrides")

            env_overrides = self._apply_env_overrides()
            if env_overrides:
                messages.append(f"Applied environment variable overrides: {', '.join(env_overrides)}")

            if self.verbose and messages:
                logger.info("Configuration loading: " + " | ".join(messages))

        except Exception as e:
            if self.verbose:
                logger.error(f"Error loading configuration: {e} | Using default configuration")

            self.config = self._get_default_config()

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration values."""
        return {
            'app': {
                'name': 'Heat-Kernel Pricing Toolkit',
                'version': '1.0.0',
                'description': 'Weighted heat kernel pricing kernels'
            },
            'quadrature': {
                'gauss_hermite_nodes': 64,
                'gauss_hermite_max_nodes': 256,
                'legendre_nodes': 128,
                'epsabs': 1e-10,
                'epsrel': 1e-9,
                'limit': 200,
                'escalation_rtol': 1e-10
            },
            'horizon': {
                'epsilon_fraction': 1e-9
            },
            'simulation': {
                'default_paths': 100000,
                'workers': 1,
                'chunk_size': 4096
            },
            'verification': {
                'paths': 100000,
                'sde_paths': 256,
                'sde_step_fraction': 1e-3,
                'fd_step_fraction': 1e-4,
                'pde_dx': 1e-2,
                'supermartingale_tolerance': 1e-10,
                'equivalence_tolerance': 1e-8,
                'seed': 20101112
            },
            'options': {
                'scan_points': 512,
                'root_xtol': 1e-12,
                'max_sign_changes': 8,
                'bracket_width_sd': 14.0
            },
            'output': {
                'format': 'csv',
                'significant_digits': 15
            },
            'server': {
                'host': '0.0.0.0',
                'port': 5000,
                'debug': False,
                'threaded': True
            },
            'database': {
                'type': 'sqlite',
                'filename': 'reports.db',
                'echo': False
            },
            'logging': {
                'level': 'INFO',
                'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            }
        }

    def _merge_config(self, base: Dict[str, Any], override: Dict[str, Any]):
        """Merge override into base in place; nested sections merge key by key."""
        for key, value in override.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._merge_config(base[key], value)
            else:
                base[key] = value

    def _apply_env_overrides(self):
        """Apply environment variable overrides."""
        applied_overrides = []

        if os.getenv('PRICING_LOG_LEVEL'):
            self.config.setdefault('logging', {})['level'] = os.getenv('PRICING_LOG_LEVEL').upper()
            applied_overrides.append('PRICING_LOG_LEVEL')

        for env_name, section, key in (
            ('PRICING_GH_NODES', 'quadrature', 'gauss_hermite_nodes'),
            ('PRICING_WORKERS', 'simulation', 'workers'),
            ('SERVER_PORT', 'server', 'port'),
        ):
            raw = os.getenv(env_name)
            if not raw:
                continue
            try:
                self.config.setdefault(section, {})[key] = int(raw)
                applied_overrides.append(env_name)
            except ValueError:
                if self.verbose:
                    logger.warning(f"Invalid {env_name} value: {raw}")

        if os.getenv('SERVER_HOST'):
            self.config.setdefault('server', {})['host'] = os.getenv('SERVER_HOST')
            applied_overrides.append('SERVER_HOST')

        if os.getenv('PRICING_DB_FILENAME'):
            self.config.setdefault('database', {})['filename'] = os.getenv('PRICING_DB_FILENAME')
            applied_overrides.append('PRICING_DB_FILENAME')

        return applied_overrides

    def get(self, key_path: str, default: Any = None) -> Any:
        """Value at a dot path such as 'quadrature.epsabs', or default when any key is missing."""
        keys = key_path.split('.')
        value = self.config

        try:
            for key in keys:
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def get_quadrature_config(self) -> Dict[str, Any]:
        """Get quadrature settings."""
        return self.get('quadrature', {})

    def get_simulation_config(self) -> Dict[str, Any]:
        """Get path simulation settings."""
        return self.get('simulation', {})

    def get_verification_config(self) -> Dict[str, Any]:
        """Get verification harness settings."""
        return self.get('verification', {})

    def get_option_config(self) -> Dict[str, Any]:
        """Get generic option pricer settings."""
        return self.get('options', {})

    def get_output_config(self) -> Dict[str, Any]:
        """Get output formatting settings."""
        return {
            'format': self.get('output.format', 'csv'),
            'significant_digits': self.get('output.significant_digits', 15)
        }

    def get_horizon_epsilon_fraction(self) -> float:
        """Fraction of U kept clear of the horizon by every evaluation."""
        return float(self.get('horizon.epsilon_fraction', 1e-9))

    def get_server_config(self) -> Dict[str, Any]:
        """
        Get server configuration for Flask app.run().

        Returns:
            dict: Server configuration parameters
        """
        return {
            'host': self.get('server.host', '0.0.0.0'),
            'port': self.get('server.port', 5000),
            'debug': self.get('server.debug', False),
            'threaded': self.get('server.threaded', True)
        }

    def get_app_info(self) -> Dict[str, Any]:
        """Name, version and description shown by the service home page."""
        return {
            'name': self.get('app.name', 'Heat-Kernel Pricing Toolkit'),
            'version': self.get('app.version', '1.0.0'),
            'description': self.get('app.description', ''),
            'environment': self.env
        }

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging level and format."""
        return {
            'level': self.get('logging.level', 'INFO'),
            'format': self.get('logging.format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        }

    def get_database_config(self) -> Dict[str, Any]:
        """Get report archive database configuration."""
        return self.get('database', {})

    def get_database_url(self) -> str:
        """SQLAlchemy URL of the report archive; only sqlite is supported."""
        db_config = self.get_database_config()
        db_type = db_config.get('type', 'sqlite')

        if db_type == 'sqlite':
            filename = db_config.get('filename', 'reports.db')
            return f"sqlite:///{filename}"
        raise ValueError(f"Unsupported database type: {db_type}")

    def reload_config(self):
        """Reload configuration from files."""
        self._load_config()
        if self.verbose:
            logger.info("Configuration reloaded")

    def __str__(self) -> str:
        return f"ConfigManager(env={self.env}, file={self.config_file})"

    def __repr__(self) -> str:
        return f"ConfigManager(env='{self.env}', config_file='{self.config_file}', loaded_keys={list(self.config.keys())})"


# Global configuration instance
config = ConfigManager(verbose=False)


def get_config() -> ConfigManager:
    """
    Get the global configuration instance.

    Returns:
        ConfigManager: Global configuration manager
    """
    return config


def reload_config():
    """Reload the global configuration."""
    config.reload_config()


def configure_logging(config_manager: Optional[ConfigManager] = None, level: Optional[str] = None):
    """
    Configure the root logger from the logging section.

    Diagnostics go to stderr so tabular output on stdout stays clean.
    """
    settings = (config_manager or config).get_logging_config()
    logging.basicConfig(
        level=getattr(logging, str(level or settings['level']).upper(), logging.INFO),
        format=settings['format'],
        force=True
    )
