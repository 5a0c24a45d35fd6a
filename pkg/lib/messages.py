"""
Centralized Error Messages and Response Messages

This module contains the error messages, success messages, log messages and
response templates shared by the pricing CLI and the pricing service.
"""


class ErrorMessages:
    """
    Centralized error messages for the application.

    All error messages are defined here to ensure consistency
    and make maintenance easier.
    """

    # Model Validation Errors
    UNKNOWN_FAMILY = "Unknown model family: {family}"
    SIGMA_NOT_POSITIVE = "sigma must be a positive number"
    HORIZON_NOT_POSITIVE = "U must be a positive number"
    ETA_OUT_OF_RANGE = "eta must be greater than 1/2"
    PRIOR_WEIGHTS = "Atom weights must be nonnegative and sum to 1"
    MEASURE_INVALID = "measure must be 'P' or 'B'"

    # Time And Strike Validation Errors
    TIME_NOT_NUMBER = "{name} must be a finite number"
    TIME_NEGATIVE = "{name} must be nonnegative"
    TIME_PAST_HORIZON = "{name} must be smaller than U={horizon}"
    TIMES_NOT_ORDERED = "Times must satisfy {order}"
    GRID_EMPTY = "Grid must contain at least one point"
    GRID_NOT_INCREASING = "Grid must be strictly increasing"
    GRID_SPEC_INVALID = "Invalid grid specification: {spec}"
    STRIKE_NOT_POSITIVE = "Strikes must be positive"
    OPTION_FAMILY = "Bond options are priced for the quadratic and generic families only"
    SINGLE_LEVEL = "A yield curve takes exactly one information level L"
    PATHS_NOT_POSITIVE = "Number of paths must be at least 1"
    FORMAT_INVALID = "format must be 'csv' or 'json'"

    # Request Validation Errors
    CONTENT_TYPE_JSON = "Content-Type must be application/json"
    INVALID_JSON = "Invalid JSON data"
    JSON_PARSE_ERROR = "JSON parsing error: {error}"
    CONFIG_READ_ERROR = "Cannot read config file {path}: {error}"
    VALIDATION_FAILED = "Validation failed"

    # Numerical Errors
    NUMERICAL_FAILURE = "Numerical failure"
    UNKNOWN_SUITE = "Unknown verification suite {name!r}; known suites: {known}"

    # HTTP Errors
    NOT_FOUND = "Not Found"
    NOT_FOUND_MESSAGE = "The requested resource was not found"
    METHOD_NOT_ALLOWED = "Method Not Allowed"
    METHOD_NOT_ALLOWED_MESSAGE = "The method is not allowed for the requested URL"
    INTERNAL_SERVER_ERROR = "Internal Server Error"
    INTERNAL_SERVER_ERROR_MESSAGE = "An unexpected error occurred"

    # General Errors
    VALIDATION_ERROR = "Validation Error"


class SuccessMessages:
    """
    Centralized success messages for the application.
    """

    BONDS_PRICED = "Bonds priced successfully"
    CURVE_BUILT = "Yield curve built successfully"
    OPTIONS_PRICED = "Options priced successfully"
    HEALTH_CHECK = "Service is healthy"


class ResponseTemplates:
    """
    Response templates for consistent API responses.
    """

    @staticmethod
    def error_response(error_type, message, details=None, status_code=None):
        """
        Create standardized error response.

        Args:
            error_type (str): Type of error
            message (str): Error message
            details (dict, optional): Additional error details
            status_code (int, optional): HTTP status code

        Returns:
            dict: Standardized error response
        """
        response = {
            'error': error_type,
            'message': message
        }

        if details:
            response['details'] = details

        if status_code:
            response['status_code'] = status_code

        return response

    @staticmethod
    def success_response(message, data=None, timestamp=None):
        """
        Create standardized success response.

        Args:
            message (str): Success message
            data (dict, optional): Response data
            timestamp (str, optional): Response timestamp

        Returns:
            dict: Standardized success response
        """
        from datetime import datetime

        response = {
            'message': message
        }

        if data is not None:
            if isinstance(data, dict):
                response.update(data)
            else:
                response['data'] = data

        if timestamp is None:
            timestamp = datetime.now().isoformat()
        response['timestamp'] = timestamp

        return response

    @staticmethod
    def validation_error_response(errors):
        """
        Create validation error response.

        Args:
            errors (dict): Field name to message(s)

        Returns:
            dict: Validation error response
        """
        return {
            'error': ErrorMessages.VALIDATION_FAILED,
            'details': errors
        }

    @staticmethod
    def numerical_error_response(error):
        """
        Create the response for a PricingError raised while computing.

        Args:
            error (PricingError): The numerical failure

        Returns:
            dict: Numerical failure response
        """
        return {
            'error': ErrorMessages.NUMERICAL_FAILURE,
            'message': str(error),
            'details': error.to_dict()
        }


class WelcomeMessages:
    """
    Welcome and informational messages.
    """

    WELCOME_MESSAGE = "Welcome to the Heat-Kernel Pricing Service"
    SERVER_STARTING = "Starting Heat-Kernel Pricing Service..."
    SERVER_RUNNING = "Server running on http://{host}:{port}"

    ENDPOINTS_INFO = {
        'GET /': 'This endpoint',
        'GET /health': 'Health check',
        'POST /bond': 'Discount bond prices for a model and maturities',
        'POST /yield-curve': 'Bond prices and yields over a maturity grid',
        'POST /option': 'Bond call prices with case labels'
    }

    AVAILABLE_ENDPOINTS = [
        "  GET  /              - Home page",
        "  GET  /health        - Health check",
        "  POST /bond          - Price discount bonds",
        "  POST /yield-curve   - Build a yield curve",
        "  POST /option        - Price bond calls"
    ]


class LogMessages:
    """
    Log messages for debugging and monitoring.
    """

    QUADRATURE_ESCALATED = "Gauss-Hermite estimate unsettled, retrying with {nodes} nodes"
    SIMULATION_STARTED = "Simulating {paths} paths on {points} grid points under {measure} in {chunks} chunks"
    WEIGHT_CHECKED = "Weight {weight}: valid={valid}, max violation {violation:.3g}"
    OPTION_PRICED = "Option priced via case {label}: {price:.15g}"
    CHECK_FINISHED = "Check {name}: passed={passed}, worst case {worst:.4g} (tolerance {tolerance:.3g})"
    SUITE_STARTED = "Running suite {name}: {tasks} tasks, seed {seed}, {workers} workers"
    SUITE_FINISHED = "Suite {name} finished: {checks} checks, {failed} failed"
    RUN_ARCHIVED = "Verification run {run_id} archived ({checks} checks)"

    COMMAND_STARTED = "Command {command} started"
    COMMAND_FAILED = "Command {command} failed with exit code {code}: {error}"
    REQUEST_ERROR_LOG = "Request error: {error}"
    VALIDATION_ERROR_LOG = "Validation error: {errors}"
    PRICING_ERROR_LOG = "Pricing error: {error}"

    SERVER_STARTED = "Server started successfully on {host}:{port}"
    SERVER_ERROR = "Server error: {error}"
