"""
Heat-Kernel Pricing Service - Class-Based Implementation

A Flask application exposing bond, yield-curve and bond-option pricing.
Request bodies go through the same marshmallow RunConfig schema as the CLI.
"""

import logging
from typing import Optional

from flask import Flask, jsonify, request
from marshmallow import ValidationError

from app.pricing import (BOND_COLUMNS, CURVE_COLUMNS, OPTION_COLUMNS, bond_rows, option_rows, quadrature_settings,
                         yield_curve_rows)
from config.manager import get_config
from db.database import DatabaseManager
from lib.messages import ErrorMessages, LogMessages, ResponseTemplates, SuccessMessages, WelcomeMessages
from lib.schemas import run_config_schema
from lib.validators import RequestValidator
from pricing.errors import PricingError

# Set up logging
logger = logging.getLogger(__name__)


class PricingServer:
    """
    Pricing Flask Server Class

    Prices discount bonds, yield curves and bond calls for a model given in
    the request body.
    """

    # HTTP Status Code Constants
    HTTP_OK = 200
    HTTP_BAD_REQUEST = 400
    HTTP_NOT_FOUND = 404
    HTTP_METHOD_NOT_ALLOWED = 405
    HTTP_UNPROCESSABLE = 422
    HTTP_INTERNAL_SERVER_ERROR = 500

    def __init__(self, config_manager=None, archive_path: Optional[str] = None):
        """
        Initialize the Flask app and configure routes.

        Args:
            config_manager: Configuration manager instance (optional)
            archive_path (str, optional): SQLite report archive reported by /health
        """
        self.app = Flask(__name__)
        self.request_validator = RequestValidator()
        self.config = config_manager or get_config()

        if archive_path:
            self.db_manager = DatabaseManager.for_path(archive_path, self.config)
        else:
            self.db_manager = DatabaseManager(self.config)
        if not self.db_manager.initialize():
            logger.warning("Report archive unavailable; /health will report it as unhealthy")

        self._setup_routes()
        self._setup_error_handlers()

    def _setup_routes(self):
        """Set up all Flask routes."""
        self.app.add_url_rule('/', 'home', self.home, methods=['GET'])
        self.app.add_url_rule('/health', 'health_check', self.health_check, methods=['GET'])
        self.app.add_url_rule('/bond', 'price_bond', self.price_bond, methods=['POST'])
        self.app.add_url_rule('/yield-curve', 'yield_curve', self.yield_curve, methods=['POST'])
        self.app.add_url_rule('/option', 'price_option', self.price_option, methods=['POST'])

    def _setup_error_handlers(self):
        """Set up error handlers."""
        self.app.errorhandler(404)(self.not_found)
        self.app.errorhandler(405)(self.method_not_allowed)
        self.app.errorhandler(500)(self.internal_error)

    def home(self):
        """Home endpoint - basic GET request."""
        return jsonify(ResponseTemplates.success_response(
            message=WelcomeMessages.WELCOME_MESSAGE,
            data={
                'app': self.config.get_app_info(),
                'endpoints': WelcomeMessages.ENDPOINTS_INFO
            }
        ))

    def health_check(self):
        """Health check endpoint; a missing archive degrades but does not fail the service."""
        archive = self.db_manager.health_check()
        return jsonify(ResponseTemplates.success_response(
            message=SuccessMessages.HEALTH_CHECK,
            data={
                'status': 'healthy' if archive['status'] == 'healthy' else 'degraded',
                'version': self.config.get_app_info()['version'],
                'archive': archive
            }
        ))

    def _priced(self, command, produce, columns, message):
        """
        Validate the body as a RunConfig for command and price it.

        produce(config, settings) returns the rows.
        """
        try:
            is_valid, error_msg, data = self.request_validator.validate_json_request(request)
            if not is_valid:
                return jsonify(ResponseTemplates.error_response(
                    ErrorMessages.VALIDATION_ERROR,
                    error_msg
                )), self.HTTP_BAD_REQUEST
            if not isinstance(data, dict):
                return jsonify(ResponseTemplates.error_response(
                    ErrorMessages.VALIDATION_ERROR,
                    ErrorMessages.INVALID_JSON
                )), self.HTTP_BAD_REQUEST

            try:
                config = run_config_schema.load(dict(data, command=command))
            except ValidationError as e:
                logger.info(LogMessages.VALIDATION_ERROR_LOG.format(errors=e.messages))
                return jsonify(ResponseTemplates.validation_error_response(e.messages)), self.HTTP_BAD_REQUEST

            try:
                rows = produce(config, quadrature_settings(config['quadrature']))
            except PricingError as e:
                logger.warning(LogMessages.PRICING_ERROR_LOG.format(error=e))
                return jsonify(ResponseTemplates.numerical_error_response(e)), self.HTTP_UNPROCESSABLE

            return jsonify(ResponseTemplates.success_response(
                message=message,
                data={'columns': list(columns), 'rows': rows}
            ))

        except Exception as e:
            logger.error(LogMessages.REQUEST_ERROR_LOG.format(error=e))
            return jsonify(ResponseTemplates.error_response(
                ErrorMessages.INTERNAL_SERVER_ERROR,
                ErrorMessages.INTERNAL_SERVER_ERROR_MESSAGE
            )), self.HTTP_INTERNAL_SERVER_ERROR

    def price_bond(self):
        """Bond prices - POST {model, t, T, L}."""
        return self._priced(
            'price-bond',
            lambda config, settings: bond_rows(config['model'], config['t'], config['T'], config['L'], settings),
            BOND_COLUMNS, SuccessMessages.BONDS_PRICED)

    def yield_curve(self):
        """Yield curve - POST {model, t, T list, L}."""
        return self._priced(
            'yield-curve',
            lambda config, settings: yield_curve_rows(config['model'], config['t'], config['T'], config['L'][0],
                                                      settings),
            CURVE_COLUMNS, SuccessMessages.CURVE_BUILT)

    def price_option(self):
        """Bond calls - POST {model, options} or {model, s, t, T, K, L}."""
        return self._priced(
            'price-option',
            lambda config, settings: option_rows(config['model'], config['options'], settings),
            OPTION_COLUMNS, SuccessMessages.OPTIONS_PRICED)

    # Error handlers
    def not_found(self, error):
        """Handle 404 errors."""
        return jsonify(ResponseTemplates.error_response(
            ErrorMessages.NOT_FOUND,
            ErrorMessages.NOT_FOUND_MESSAGE
        )), self.HTTP_NOT_FOUND

    def method_not_allowed(self, error):
        """Handle 405 errors."""
        return jsonify(ResponseTemplates.error_response(
            ErrorMessages.METHOD_NOT_ALLOWED,
            ErrorMessages.METHOD_NOT_ALLOWED_MESSAGE
        )), self.HTTP_METHOD_NOT_ALLOWED

    def internal_error(self, error):
        """Handle 500 errors."""
        return jsonify(ResponseTemplates.error_response(
            ErrorMessages.INTERNAL_SERVER_ERROR,
            ErrorMessages.INTERNAL_SERVER_ERROR_MESSAGE
        )), self.HTTP_INTERNAL_SERVER_ERROR

    def run(self, debug=None, host=None, port=None):
        """Run the Flask application using configuration values."""
        server_config = self.config.get_server_config()

        if debug is not None:
            server_config['debug'] = debug
        if host is not None:
            server_config['host'] = host
        if port is not None:
            server_config['port'] = port

        print(WelcomeMessages.SERVER_STARTING)
        print("Available endpoints:")
        for endpoint in WelcomeMessages.AVAILABLE_ENDPOINTS:
            print(endpoint)
        print()
        print(WelcomeMessages.SERVER_RUNNING.format(
            host=server_config['host'],
            port=server_config['port']
        ))
        logger.info(LogMessages.SERVER_STARTED.format(host=server_config['host'], port=server_config['port']))

        try:
            self.app.run(**server_config)
        except OSError as e:
            logger.error(LogMessages.SERVER_ERROR.format(error=e))
            raise

    def get_app(self):
        """Get the Flask app instance (useful for testing)."""
        return self.app
