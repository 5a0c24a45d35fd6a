"""
Marshmallow Schemas for the Pricing Toolkit

This module defines the canonical JSON encodings of models, option specs,
run configurations and check reports. Nested schemas load to validated
dictionaries; ModelSchema and OptionSpecSchema build domain objects in
their post_load hooks.
"""

from dataclasses import fields as dataclass_fields

from marshmallow import (EXCLUDE, Schema, ValidationError, fields, post_load, pre_load, validate,
                         validates_schema)

from lib.messages import ErrorMessages
from lib.validators import ModelValidator, TimeValidator
from pricing.closed_form import ExpQuadraticModel, QuadraticModel, time_function_from_dict
from pricing.errors import PricingError
from pricing.options import OptionSpec
from pricing.process import InformationModel, prior_from_dict
from pricing.quadrature import QuadratureSettings
from pricing.specs import KernelModel, terminal_from_dict, weight_from_dict

DEFAULT_PRIOR = {'type': 'atoms', 'atoms': [[0.0, 0.5], [1.0, 0.5]]}
COMMANDS = ('price-bond', 'yield-curve', 'price-option', 'simulate', 'verify')

_REQUIRED_BY_TYPE = {
    'prior': {'atoms': ('atoms',), 'gaussian': ('mean', 'variance'), 'uniform': ('lo', 'hi')},
    'weight': {'affine': (), 'power': ('eta',), 'horizon_exponential': ('rate',),
               'scaled': ('factor', 'inner'), 'sum': ('left', 'right'), 'product': ('left', 'right')},
    'terminal': {'quadratic': (), 'exponential_quadratic': (), 'exponential_linear': ('mu',)},
    'time_function': {'exponential': ('rate',), 'power': ('alpha',), 'constant': ('value',)},
}


def _require(kind, data):
    """Raise unless the fields required by data['type'] are present."""
    missing = [name for name in _REQUIRED_BY_TYPE[kind][data['type']] if data.get(name) is None]
    if missing:
        raise ValidationError({name: ['Missing data for required field.'] for name in missing})


def _drop_none(data):
    return {key: value for key, value in data.items() if value is not None}


class PriorLawSchema(Schema):
    """{"type": "atoms", "atoms": [[value, weight], ...]} | gaussian | uniform."""

    type = fields.String(required=True, validate=validate.OneOf(list(_REQUIRED_BY_TYPE['prior'])))
    atoms = fields.List(fields.List(fields.Float(), validate=validate.Length(equal=2)), load_default=None)
    mean = fields.Float(load_default=None)
    variance = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    lo = fields.Float(load_default=None)
    hi = fields.Float(load_default=None)

    class Meta:
        unknown = EXCLUDE

    @validates_schema
    def validate_variant(self, data, **kwargs):
        _require('prior', data)
        if data['type'] == 'atoms':
            is_valid, error_msg = ModelValidator.validate_atoms(data['atoms'])
            if not is_valid:
                raise ValidationError({'atoms': [error_msg]})
        if data['type'] == 'uniform' and not data['lo'] < data['hi']:
            raise ValidationError({'hi': ['hi must exceed lo']})

    @post_load
    def strip_unused(self, data, **kwargs):
        return _drop_none(data)


class WeightFunctionSchema(Schema):
    """Weight leaves and their scaled, sum and product combinations."""

    type = fields.String(required=True, validate=validate.OneOf(list(_REQUIRED_BY_TYPE['weight'])))
    eta = fields.Float(load_default=None)
    rate = fields.Float(load_default=None, validate=validate.Range(min=0))
    factor = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    inner = fields.Nested(lambda: WeightFunctionSchema(), load_default=None)
    left = fields.Nested(lambda: WeightFunctionSchema(), load_default=None)
    right = fields.Nested(lambda: WeightFunctionSchema(), load_default=None)

    class Meta:
        unknown = EXCLUDE

    @validates_schema
    def validate_variant(self, data, **kwargs):
        _require('weight', data)
        if data['type'] == 'power':
            is_valid, error_msg = ModelValidator.validate_eta(data['eta'])
            if not is_valid:
                raise ValidationError({'eta': [error_msg]})

    @post_load
    def strip_unused(self, data, **kwargs):
        return _drop_none(data)


class TerminalFunctionSchema(Schema):
    """{"type": "quadratic" | "exponential_quadratic"} | {"type": "exponential_linear", "mu": ...}."""

    type = fields.String(required=True, validate=validate.OneOf(list(_REQUIRED_BY_TYPE['terminal'])))
    mu = fields.Float(load_default=None)

    class Meta:
        unknown = EXCLUDE

    @validates_schema
    def validate_variant(self, data, **kwargs):
        _require('terminal', data)

    @post_load
    def strip_unused(self, data, **kwargs):
        return _drop_none(data)


class TimeFunctionSchema(Schema):
    """g0/g1 encodings: exponential(rate), power(alpha), constant(value)."""

    type = fields.String(required=True, validate=validate.OneOf(list(_REQUIRED_BY_TYPE['time_function'])))
    rate = fields.Float(load_default=None, validate=validate.Range(min=0))
    alpha = fields.Float(load_default=None, validate=validate.Range(min=0))
    value = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))

    class Meta:
        unknown = EXCLUDE

    @validates_schema
    def validate_variant(self, data, **kwargs):
        _require('time_function', data)

    @post_load
    def strip_unused(self, data, **kwargs):
        return _drop_none(data)


class TimeFunctionField(fields.Field):
    """A TimeFunctionSchema object or the string 'special'."""

    def _deserialize(self, value, attr, data, **kwargs):
        if value == 'special':
            return value
        if not isinstance(value, dict):
            raise ValidationError("Expected an object or the string 'special'")
        return TimeFunctionSchema().load(value)


class ModelSchema(Schema):
    """
    Model families: quadratic, expquad (g0, g1 or 'special') and generic (F, w, measure).

    Loads to QuadraticModel, ExpQuadraticModel or KernelModel.
    """

    family = fields.String(load_default='quadratic', validate=validate.OneOf(list(ModelValidator.FAMILIES)))
    sigma = fields.Float(load_default=1.0)
    U = fields.Float(load_default=10.0)
    prior = fields.Nested(PriorLawSchema, load_default=None)
    eta = fields.Float(load_default=None)
    g0 = TimeFunctionField(load_default=None)
    g1 = TimeFunctionField(load_default=None)
    F = fields.Nested(TerminalFunctionSchema, load_default=None)
    w = fields.Nested(WeightFunctionSchema, load_default=None)
    measure = fields.String(load_default='B')

    class Meta:
        unknown = EXCLUDE

    @validates_schema
    def validate_model(self, data, **kwargs):
        errors = {}
        for name, validator in (('sigma', ModelValidator.validate_sigma), ('U', ModelValidator.validate_horizon),
                                ('measure', ModelValidator.validate_measure)):
            is_valid, error_msg = validator(data[name])
            if not is_valid:
                errors[name] = [error_msg]
        family = data['family']
        if family == 'expquad':
            is_valid, error_msg = ModelValidator.validate_eta(data['eta'])
            if not is_valid:
                errors['eta'] = [error_msg]
            if data['g0'] is None or data['g0'] == 'special':
                errors['g0'] = ["g0 must be an exponential, power or constant time function"]
            if data['g1'] is None:
                errors['g1'] = ["g1 is required (a time function or 'special')"]
        if family == 'generic':
            for name in ('F', 'w'):
                if data[name] is None:
                    errors[name] = ['Missing data for required field.']
        if errors:
            raise ValidationError(errors)

    @post_load
    def make_model(self, data, **kwargs):
        try:
            process = InformationModel(data['sigma'], data['U'], prior_from_dict(data['prior'] or DEFAULT_PRIOR))
            family = data['family']
            U = data['U']
            if family == 'quadratic':
                return QuadraticModel(process)
            if family == 'expquad':
                special = data['g1'] == 'special'
                return ExpQuadraticModel(process, data['eta'], time_function_from_dict(data['g0'], U),
                                         None if special else time_function_from_dict(data['g1'], U),
                                         special_g1=special)
            return KernelModel(process, terminal_from_dict(data['F'], U), weight_from_dict(data['w'], U),
                               measure=data['measure'])
        except PricingError as e:
            raise ValidationError({'model': [str(e)]}) from e


class OptionSpecSchema(Schema):
    """{s, t, T, K, L_s}; a call with maturity t on the bond maturing at T."""

    s = fields.Float(required=True)
    t = fields.Float(required=True)
    T = fields.Float(required=True)
    K = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False,
                                                            error=ErrorMessages.STRIKE_NOT_POSITIVE))
    L_s = fields.Float(load_default=0.0)

    class Meta:
        unknown = EXCLUDE

    @pre_load
    def accept_short_level(self, data, **kwargs):
        if isinstance(data, dict) and 'L' in data and 'L_s' not in data:
            data = dict(data)
            data['L_s'] = data.pop('L')
        return data

    @post_load
    def make_spec(self, data, **kwargs):
        return OptionSpec(**data)


def _as_list(value):
    if value is None:
        return None
    return list(value) if isinstance(value, (list, tuple)) else [value]


class RunConfigSchema(Schema):
    """
    One CLI run: command, model, command parameters, output and seed.

    T, K and L accept a number or a list. grid accepts a 'start:stop:count'
    or comma-separated string, or a list.
    """

    command = fields.String(required=True, validate=validate.OneOf(list(COMMANDS)))
    model = fields.Nested(ModelSchema, load_default=lambda: ModelSchema().load({}))
    s = fields.Float(load_default=None)
    t = fields.Float(load_default=0.0)
    T = fields.Raw(load_default=None)
    K = fields.Raw(load_default=None)
    L = fields.Raw(load_default=lambda: [0.0])
    options = fields.List(fields.Nested(OptionSpecSchema), load_default=None)
    grid = fields.Raw(load_default=None)
    paths = fields.Integer(load_default=None, validate=validate.Range(min=1, error=ErrorMessages.PATHS_NOT_POSITIVE))
    seed = fields.Integer(load_default=None)
    measure = fields.String(load_default='B', validate=validate.OneOf(['P', 'B'], error=ErrorMessages.MEASURE_INVALID))
    format = fields.String(load_default='csv', validate=validate.OneOf(['csv', 'json'],
                                                                       error=ErrorMessages.FORMAT_INVALID))
    out = fields.String(load_default=None)
    suite = fields.String(load_default='default')
    archive = fields.String(load_default=None)
    workers = fields.Integer(load_default=None, validate=validate.Range(min=1))
    quadrature = fields.Dict(keys=fields.String(), values=fields.Number(), load_default=dict)

    class Meta:
        unknown = EXCLUDE

    @pre_load
    def normalize_lists(self, data, **kwargs):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for name in ('T', 'K', 'L'):
            if name in data and data[name] is None:
                del data[name]
            elif name in data:
                data[name] = _as_list(data[name])
        return data

    @validates_schema
    def validate_command(self, data, **kwargs):
        U = data['model'].horizon
        command = data['command']
        errors = {}

        known = {field.name for field in dataclass_fields(QuadratureSettings)}
        unknown = sorted(set(data['quadrature']) - known)
        if unknown:
            errors['quadrature'] = [f"Unknown quadrature settings: {', '.join(unknown)}"]

        for name in ('T', 'K', 'L'):
            values = data.get(name)
            if values is not None and not all(ModelValidator._is_number(v) for v in _as_list(values)):
                errors[name] = [ErrorMessages.TIME_NOT_NUMBER.format(name=name)]
        if errors:
            raise ValidationError(errors)

        if command in ('price-bond', 'yield-curve'):
            maturities = data.get('T')
            if not maturities:
                raise ValidationError({'T': ['Missing data for required field.']})
            for T in maturities:
                is_valid, order_errors = TimeValidator.validate_order([('t', data['t']), ('T', T)], U)
                if not is_valid:
                    errors.update(order_errors)
            if command == 'yield-curve':
                is_valid, error_msg = TimeValidator.validate_grid(maturities)
                if not is_valid:
                    errors['T'] = [error_msg]
                elif maturities[0] <= data['t']:
                    errors['T'] = [ErrorMessages.TIMES_NOT_ORDERED.format(order='t < T')]
                if len(data['L']) != 1:
                    errors['L'] = [ErrorMessages.SINGLE_LEVEL]

        if command == 'price-option':
            if isinstance(data['model'], ExpQuadraticModel):
                raise ValidationError({'model': [ErrorMessages.OPTION_FAMILY]})
            for spec in self._option_specs(data):
                is_valid, order_errors = TimeValidator.validate_order(
                    [('s', spec['s']), ('t', spec['t']), ('T', spec['T'])], U)
                if not is_valid:
                    errors.update(order_errors)
                is_valid, error_msg = TimeValidator.validate_strikes([spec['K']])
                if not is_valid:
                    errors['K'] = [error_msg]

        if command == 'simulate':
            is_valid, error_msg, points = TimeValidator.parse_grid_spec(data.get('grid') or '0')
            if is_valid:
                is_valid, error_msg = TimeValidator.validate_grid(points, U)
            if not is_valid:
                errors['grid'] = [error_msg]

        if errors:
            raise ValidationError(errors)

    @staticmethod
    def _option_specs(data):
        """Option specs from the options list or the s/t/T/K/L cross product."""
        if data.get('options'):
            return [spec.to_dict() for spec in data['options']]
        missing = [name for name in ('s', 'T', 'K') if not data.get(name) and data.get(name) != 0.0]
        if missing:
            raise ValidationError({name: ['Missing data for required field.'] for name in missing})
        return [{'s': data['s'], 't': data['t'], 'T': T, 'K': K, 'L_s': L}
                for T in data['T'] for K in data['K'] for L in data['L']]

    @post_load
    def make_run_config(self, data, **kwargs):
        if data['command'] == 'price-option':
            data['options'] = [OptionSpec(**spec) for spec in self._option_specs(data)]
        if data['command'] == 'simulate':
            data['grid'] = TimeValidator.parse_grid_spec(data.get('grid') or '0')[2]
        return data


class CheckReportSchema(Schema):
    """Serialization of verification reports."""

    check_name = fields.String(required=True)
    passed = fields.Boolean(required=True)
    worst_case = fields.Float(required=True, allow_nan=True)
    tolerance = fields.Float(required=True)
    witness = fields.List(fields.Raw(), required=True)
    samples_used = fields.Integer(required=True)
    wall_time = fields.Float(required=True)
    severity = fields.String(required=True, validate=validate.OneOf(['error', 'info']))
    details = fields.Dict(load_default=dict)

    class Meta:
        ordered = True


# Schema instances for easy importing
run_config_schema = RunConfigSchema()
check_report_schema = CheckReportSchema()


def dump_reports(reports):
    """Serialize CheckReport objects to a list of dictionaries."""
    return check_report_schema.dump([report.to_dict() for report in reports], many=True)


def format_validation_error(validation_error):
    """
    Format Marshmallow validation error for API response.

    Args:
        validation_error: Marshmallow ValidationError

    Returns:
        dict: Formatted error response
    """
    return {
        'error': ErrorMessages.VALIDATION_ERROR,
        'message': ErrorMessages.VALIDATION_FAILED,
        'details': validation_error.messages
    }


__all__ = [
    'PriorLawSchema', 'WeightFunctionSchema', 'TerminalFunctionSchema', 'TimeFunctionSchema',
    'ModelSchema', 'OptionSpecSchema', 'RunConfigSchema', 'CheckReportSchema',
    'run_config_schema', 'check_report_schema',
    'dump_reports', 'format_validation_error', 'DEFAULT_PRIOR', 'COMMANDS'
]
