"""
Unit tests for the configuration manager.
"""

import logging
import os
import tempfile
import unittest
from unittest.mock import patch

from config.manager import ConfigManager, configure_logging
from pricing.quadrature import QuadratureSettings


class TestConfigManager(unittest.TestCase):
    """Test cases for ConfigManager."""

    def setUp(self):
        """Set up a temporary configuration directory."""
        self.temp_dir = tempfile.TemporaryDirectory()
        self.config_file = os.path.join(self.temp_dir.name, 'settings.yaml')
        with open(self.config_file, 'w', encoding='utf-8') as f:
            f.write("quadrature:\n"
                    "  gauss_hermite_nodes: 32\n"
                    "  epsabs: 1.0e-8\n"
                    "server:\n"
                    "  port: 5000\n"
                    "database:\n"
                    "  type: sqlite\n"
                    "  filename: archive.db\n"
                    "production:\n"
                    "  server:\n"
                    "    port: 8080\n")

    def tearDown(self):
        """Clean up test fixtures."""
        self.temp_dir.cleanup()

    def test_dot_path_lookup(self):
        manager = ConfigManager(self.config_file, env='development', verbose=False)
        self.assertEqual(manager.get('quadrature.gauss_hermite_nodes'), 32)
        self.assertEqual(manager.get('quadrature.missing', 'default'), 'default')
        self.assertEqual(manager.get('server.port.value', 1), 1)

    def test_inline_environment_overrides(self):
        self.assertEqual(ConfigManager(self.config_file, env='development', verbose=False).get('server.port'), 5000)
        self.assertEqual(ConfigManager(self.config_file, env='production', verbose=False).get('server.port'), 8080)

    def test_environment_file_overrides(self):
        with open(os.path.join(self.temp_dir.name, 'testing.yaml'), 'w', encoding='utf-8') as f:
            f.write("quadrature:\n  epsabs: 1.0e-12\n")
        manager = ConfigManager(self.config_file, env='testing', verbose=False)
        self.assertEqual(manager.get('quadrature.epsabs'), 1e-12)
        self.assertEqual(manager.get('quadrature.gauss_hermite_nodes'), 32)

    def test_environment_variables(self):
        env = {'PRICING_GH_NODES': '96', 'PRICING_LOG_LEVEL': 'debug', 'SERVER_PORT': 'not-a-port'}
        with patch.dict(os.environ, env):
            manager = ConfigManager(self.config_file, env='development', verbose=False)
        self.assertEqual(manager.get('quadrature.gauss_hermite_nodes'), 96)
        self.assertEqual(manager.get_logging_config()['level'], 'DEBUG')
        self.assertEqual(manager.get('server.port'), 5000)

    def test_missing_file_uses_defaults(self):
        manager = ConfigManager(os.path.join(self.temp_dir.name, 'absent.yaml'), env='development', verbose=False)
        self.assertEqual(manager.get('quadrature.gauss_hermite_nodes'), 64)
        self.assertEqual(manager.get_horizon_epsilon_fraction(), 1e-9)

    def test_database_url(self):
        manager = ConfigManager(self.config_file, env='development', verbose=False)
        self.assertEqual(manager.get_database_url(), 'sqlite:///archive.db')
        manager.config['database']['type'] = 'postgresql'
        with self.assertRaises(ValueError):
            manager.get_database_url()

    def test_quadrature_settings_from_config(self):
        settings = QuadratureSettings.from_config(ConfigManager(self.config_file, env='development', verbose=False))
        self.assertEqual(settings.gauss_hermite_nodes, 32)
        self.assertEqual(settings.epsabs, 1e-8)
        self.assertEqual(settings.legendre_nodes, QuadratureSettings().legendre_nodes)


class TestConfigureLogging(unittest.TestCase):
    """Test cases for configure_logging."""

    def tearDown(self):
        configure_logging(level='WARNING')

    def test_level_override(self):
        configure_logging(level='debug')
        self.assertEqual(logging.getLogger().level, logging.DEBUG)

    def test_level_from_config(self):
        manager = ConfigManager(verbose=False)
        manager.config['logging'] = {'level': 'ERROR'}
        configure_logging(manager)
        self.assertEqual(logging.getLogger().level, logging.ERROR)


if __name__ == '__main__':
    unittest.main()
