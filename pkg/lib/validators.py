"""
Validation Classes for the Pricing Toolkit

This module contains validation logic for model parameters, times, grids
and strikes shared by the CLI, the marshmallow schemas and the service.
"""

import math

from lib.messages import ErrorMessages


class ModelValidator:
    """
    Model parameter validation.

    Every validator returns (is_valid, error_message).
    """

    FAMILIES = ('quadratic', 'expquad', 'generic')

    @staticmethod
    def _is_number(value):
        return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)

    @classmethod
    def validate_sigma(cls, sigma):
        if not cls._is_number(sigma) or sigma <= 0:
            return False, ErrorMessages.SIGMA_NOT_POSITIVE
        return True, None

    @classmethod
    def validate_horizon(cls, horizon):
        if not cls._is_number(horizon) or horizon <= 0:
            return False, ErrorMessages.HORIZON_NOT_POSITIVE
        return True, None

    @classmethod
    def validate_eta(cls, eta):
        if not cls._is_number(eta) or eta <= 0.5:
            return False, ErrorMessages.ETA_OUT_OF_RANGE
        return True, None

    @classmethod
    def validate_family(cls, family):
        if family not in cls.FAMILIES:
            return False, ErrorMessages.UNKNOWN_FAMILY.format(family=family)
        return True, None

    @staticmethod
    def validate_measure(measure):
        if measure not in ('P', 'B'):
            return False, ErrorMessages.MEASURE_INVALID
        return True, None

    @classmethod
    def validate_atoms(cls, atoms):
        """
        Validate a list of [value, weight] pairs.

        Weights must be nonnegative and sum to 1 within 1e-12.
        """
        if not isinstance(atoms, (list, tuple)) or not atoms:
            return False, ErrorMessages.PRIOR_WEIGHTS
        total = 0.0
        for atom in atoms:
            if not isinstance(atom, (list, tuple)) or len(atom) != 2:
                return False, ErrorMessages.PRIOR_WEIGHTS
            value, weight = atom
            if not cls._is_number(value) or not cls._is_number(weight) or weight < 0:
                return False, ErrorMessages.PRIOR_WEIGHTS
            total += weight
        if abs(total - 1.0) > 1e-12:
            return False, ErrorMessages.PRIOR_WEIGHTS
        return True, None


class TimeValidator:
    """
    Time, grid and strike validation against a horizon U.
    """

    @staticmethod
    def validate_time(value, horizon, name='t'):
        if not ModelValidator._is_number(value):
            return False, ErrorMessages.TIME_NOT_NUMBER.format(name=name)
        if value < 0:
            return False, ErrorMessages.TIME_NEGATIVE.format(name=name)
        if value >= horizon:
            return False, ErrorMessages.TIME_PAST_HORIZON.format(name=name, horizon=horizon)
        return True, None

    @classmethod
    def validate_order(cls, times, horizon):
        """
        Check named times are individually valid and nondecreasing.

        Args:
            times (list): (name, value) pairs in their required order

        Returns:
            tuple: (is_valid, errors_dict)
        """
        errors = {}
        for name, value in times:
            is_valid, error_msg = cls.validate_time(value, horizon, name)
            if not is_valid:
                errors[name] = error_msg
        if errors:
            return False, errors
        values = [value for _, value in times]
        if any(later < earlier for earlier, later in zip(values, values[1:])):
            order = ' <= '.join(name for name, _ in times)
            return False, {'order': ErrorMessages.TIMES_NOT_ORDERED.format(order=order)}
        return True, {}

    @staticmethod
    def validate_grid(grid, horizon=None, strict=True):
        if not grid:
            return False, ErrorMessages.GRID_EMPTY
        if not all(ModelValidator._is_number(point) for point in grid):
            return False, ErrorMessages.GRID_SPEC_INVALID.format(spec=grid)
        if strict and any(later <= earlier for earlier, later in zip(grid, grid[1:])):
            return False, ErrorMessages.GRID_NOT_INCREASING
        if horizon is not None and (grid[0] < 0 or grid[-1] >= horizon):
            return False, ErrorMessages.TIME_PAST_HORIZON.format(name='grid', horizon=horizon)
        return True, None

    @staticmethod
    def validate_strikes(strikes):
        if not strikes or not all(ModelValidator._is_number(k) and k > 0 for k in strikes):
            return False, ErrorMessages.STRIKE_NOT_POSITIVE
        return True, None

    @staticmethod
    def parse_grid_spec(spec):
        """
        Parse 'start:stop:count' (inclusive, evenly spaced) or '1,2,3'.

        Returns:
            tuple: (is_valid, error_message, points)
        """
        if isinstance(spec, (list, tuple)):
            return True, None, [float(v) for v in spec]
        text = str(spec).strip()
        try:
            if ':' in text:
                start, stop, count = text.split(':')
                count = int(count)
                if count < 1:
                    raise ValueError(spec)
                if count == 1:
                    return True, None, [float(start)]
                start, stop = float(start), float(stop)
                step = (stop - start) / (count - 1)
                return True, None, [start + i * step for i in range(count - 1)] + [stop]
            points = [float(v) for v in text.split(',') if v.strip()]
        except ValueError:
            return False, ErrorMessages.GRID_SPEC_INVALID.format(spec=spec), None
        if not points:
            return False, ErrorMessages.GRID_EMPTY, None
        return True, None, points


class RequestValidator:
    """
    HTTP request validation class.
    """

    @staticmethod
    def validate_json_request(request):
        """
        Validate that request contains valid JSON.

        Args:
            request: Flask request object

        Returns:
            tuple: (is_valid, error_message, data)
        """
        if not request.is_json:
            return False, ErrorMessages.CONTENT_TYPE_JSON, None

        try:
            data = request.get_json()
            if data is None:
                return False, ErrorMessages.INVALID_JSON, None
            return True, None, data
        except Exception as e:
            return False, ErrorMessages.JSON_PARSE_ERROR.format(error=str(e)), None


class ValidationError(Exception):
    """
    Configuration or request validation failure.

    Attributes:
        message (str): Error message
        errors (dict): Dictionary of field-specific errors
        status_code (int): HTTP status code
    """

    def __init__(self, message, errors=None, status_code=400):
        super().__init__(message)
        self.message = message
        self.errors = errors or {}
        self.status_code = status_code

    def to_dict(self):
        """Convert exception to dictionary for JSON response."""
        result = {
            'error': ErrorMessages.VALIDATION_ERROR,
            'message': self.message
        }

        if self.errors:
            result['details'] = self.errors

        return result
