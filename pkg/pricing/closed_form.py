"""
Closed-form quadratic and exponential-quadratic models.

Quadratic model: F(x) = x^2 with the affine weight U - t - u, giving
f(t, x) = (U - t)^3/12 + (U - t)^2 x^2/4.

Exponential-quadratic model: F(tau, x) = exp(x^2/(2(U - tau))) with the
power weight. Its pricing kernel is built from
f~(t, x) = g0(t) + g1(t) (U - t)^eta exp(x^2/(2(U - t))), which rests on
the bridge martingale h(t, x) = (U - t)^(1/2) exp(x^2/(2(U - t))).
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pricing.errors import DomainError, RangeError
from pricing.process import InformationModel, information_premium
from pricing.specs import KernelModel

logger = logging.getLogger(__name__)

EXPONENT_CAP = 700.0

MONOTONICITY_GRID = 257


class TimeFunction(ABC):
    """Positive function of time with an analytic derivative."""

    @abstractmethod
    def __call__(self, t):
        pass

    @abstractmethod
    def derivative(self, t):
        pass

    @abstractmethod
    def to_dict(self):
        pass


class ExponentialDecay(TimeFunction):
    """exp(-rate*t)."""

    def __init__(self, rate: float):
        if not rate >= 0.0:
            raise DomainError("exponential decay needs rate >= 0")
        self.rate = float(rate)

    def __call__(self, t):
        return np.exp(-self.rate * np.asarray(t, dtype=float))

    def derivative(self, t):
        return -self.rate * self(t)

    def to_dict(self):
        return {'type': 'exponential', 'rate': self.rate}


class PowerDecay(TimeFunction):
    """(U - t)^alpha with alpha > 0."""

    def __init__(self, alpha: float, horizon: float):
        if not alpha > 0.0:
            raise DomainError("power decay needs alpha > 0")
        self.alpha = float(alpha)
        self.horizon = float(horizon)

    def __call__(self, t):
        return (self.horizon - np.asarray(t, dtype=float)) ** self.alpha

    def derivative(self, t):
        return -self.alpha * (self.horizon - np.asarray(t, dtype=float)) ** (self.alpha - 1.0)

    def to_dict(self):
        return {'type': 'power', 'alpha': self.alpha}


class ConstantLevel(TimeFunction):
    """A positive constant (the nonincreasing limit)."""

    def __init__(self, value: float):
        if not value > 0.0:
            raise DomainError("constant level must be positive")
        self.value = float(value)

    def __call__(self, t):
        return self.value * np.ones_like(np.asarray(t, dtype=float))

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def to_dict(self):
        return {'type': 'constant', 'value': self.value}


class SpecialG1(TimeFunction):
    """(U - t)^-(eta - 1/2): the choice that makes the exponential part a pure martingale."""

    def __init__(self, eta: float, horizon: float):
        self.eta = float(eta)
        self.horizon = float(horizon)

    def __call__(self, t):
        return (self.horizon - np.asarray(t, dtype=float)) ** (-(self.eta - 0.5))

    def derivative(self, t):
        return (self.eta - 0.5) * (self.horizon - np.asarray(t, dtype=float)) ** (-(self.eta + 0.5))

    def to_dict(self):
        return 'special'


def time_function_from_dict(data, horizon: float) -> Optional[TimeFunction]:
    """Build g0/g1 from JSON; the string 'special' maps to None (handled by the model)."""
    if data == 'special' or data is None:
        return None
    kind = data.get('type')
    if kind == 'exponential':
        return ExponentialDecay(data['rate'])
    if kind == 'power':
        return PowerDecay(data['alpha'], horizon)
    if kind == 'constant':
        return ConstantLevel(data['value'])
    raise DomainError(f"Unknown time function type: {kind!r}")


def _check_positive_nonincreasing(func: TimeFunction, name: str, horizon: float):
    grid = np.linspace(0.0, horizon * (1.0 - 1e-6), MONOTONICITY_GRID)
    values = np.asarray(func(grid), dtype=float)
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise DomainError(f"{name} must be positive on [0, U)")
    if np.any(np.diff(values) > 1e-12 * np.maximum(1.0, np.abs(values[:-1]))):
        raise DomainError(f"{name} must be nonincreasing on [0, U)")


@dataclass(frozen=True)
class QuadraticModel:
    """F(x) = x^2 with w(t, u) = U - t - u."""

    process: InformationModel

    @property
    def horizon(self) -> float:
        return self.process.horizon

    def kernel(self) -> KernelModel:
        return KernelModel.quadratic(self.process)


@dataclass(frozen=True)
class ExpQuadraticModel:
    """
    Exponential-quadratic family.

    g0 and g1 must be positive and nonincreasing on [0, U). With special_g1
    the g1 field is ignored and g1(t) = (U - t)^-(eta - 1/2) is used.
    """

    process: InformationModel
    eta: float
    g0: TimeFunction
    g1: Optional[TimeFunction] = None
    special_g1: bool = False

    def __post_init__(self):
        if not self.eta > 0.5:
            raise DomainError("eta must exceed 1/2")
        _check_positive_nonincreasing(self.g0, 'g0', self.horizon)
        if not self.special_g1:
            if self.g1 is None:
                raise DomainError("g1 is required unless special_g1 is set")
            _check_positive_nonincreasing(self.g1, 'g1', self.horizon)

    @property
    def horizon(self) -> float:
        return self.process.horizon

    @property
    def effective_g1(self) -> TimeFunction:
        return SpecialG1(self.eta, self.horizon) if self.special_g1 else self.g1

    def kernel(self) -> KernelModel:
        return KernelModel.exponential_quadratic(self.process, self.eta)


def _remaining(process: InformationModel, t):
    process.guard(t)
    return process.horizon - np.asarray(t, dtype=float)


def _ordered(process: InformationModel, t, T):
    process.guard(t)
    process.guard(T, 'T')
    if np.any(np.asarray(T) < np.asarray(t)):
        raise DomainError("bond maturity T precedes valuation time t")


def _scalar(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _gaussian_growth(x, remaining):
    """exp(x^2/(2(U - t))) with the overflow cap."""
    exponent = np.asarray(x, dtype=float) ** 2 / (2.0 * remaining)
    if np.any(exponent > EXPONENT_CAP):
        raise RangeError(f"x^2/(2(U - t)) = {np.max(exponent):.6g} exceeds the cap {EXPONENT_CAP}")
    return np.exp(exponent)


def quad_f(model: QuadraticModel, t, x):
    """f(t, x) = (U - t)^3/12 + (U - t)^2 x^2/4."""
    R = _remaining(model.process, t)
    x = np.asarray(x, dtype=float)
    return _scalar(R ** 3 / 12.0 + R ** 2 * x ** 2 / 4.0)


def quad_conditional_second_moment(model: QuadraticModel, u, t, x):
    """E_B[L_{t+u}^2 | L_t = x] = u(U-t-u)/(U-t) + ((U-t-u)/(U-t))^2 x^2."""
    if np.any(np.asarray(u) < 0.0):
        raise DomainError("u must be nonnegative")
    model.process.guard(np.asarray(t) + np.asarray(u), 't + u')
    R = _remaining(model.process, t)
    ratio = (R - u) / R
    return _scalar(u * ratio + ratio ** 2 * np.asarray(x, dtype=float) ** 2)


def quad_conditional_second_moment_printed(model: QuadraticModel, u, t, x):
    """The same moment with the mean ratio left unsquared, as it is sometimes printed."""
    R = _remaining(model.process, t)
    ratio = (R - u) / R
    return _scalar(u * ratio + ratio * np.asarray(x, dtype=float) ** 2)


def quad_bond_price(model: QuadraticModel, t, T, x):
    """Discount bond price in the quadratic model."""
    _ordered(model.process, t, T)
    U = model.horizon
    R = U - np.asarray(t, dtype=float)
    left = U - np.asarray(T, dtype=float)
    x = np.asarray(x, dtype=float)
    numerator = left ** 3 / 12.0 + 0.25 * (T - t) * left ** 3 / R + 0.25 * left ** 4 * x ** 2 / R ** 2
    price = np.where(np.asarray(T) == np.asarray(t), 1.0, numerator / quad_f(model, t, x))
    return _scalar(price)


def quad_short_rate(model: QuadraticModel, t, x):
    """r = x^2 / [(U - t)((U - t)/3 + x^2)/4]."""
    R = _remaining(model.process, t)
    x = np.asarray(x, dtype=float)
    return _scalar(x ** 2 / (0.25 * R * (R / 3.0 + x ** 2)))


def quad_market_price_of_risk(model: QuadraticModel, t, x):
    """lambda = sigma U/(U - t) E[X | L_t = x] - (U - t)^2 x / (2 f(t, x))."""
    R = _remaining(model.process, t)
    x = np.asarray(x, dtype=float)
    premium = information_premium(model.process, t, x)
    return _scalar(premium - 0.5 * R ** 2 * x / quad_f(model, t, x))


def expquad_f_tilde(model: ExpQuadraticModel, t, x):
    """f~(t, x) = g0(t) + g1(t) (U - t)^eta exp(x^2/(2(U - t)))."""
    R = _remaining(model.process, t)
    growth = _gaussian_growth(x, R)
    if model.special_g1:
        scale = np.sqrt(R)
    else:
        scale = model.g1(t) * R ** model.eta
    return _scalar(model.g0(t) + scale * growth)


def expquad_bond_price(model: ExpQuadraticModel, t, T, x):
    """P_tT = [g0(T) + g1(T) (U - T)^(eta - 1/2) (U - t)^(1/2) exp(x^2/(2(U - t)))] / f~(t, x)."""
    _ordered(model.process, t, T)
    U = model.horizon
    R = U - np.asarray(t, dtype=float)
    left = U - np.asarray(T, dtype=float)
    growth = _gaussian_growth(x, R)
    g1_term = 1.0 if model.special_g1 else model.g1(T) * left ** (model.eta - 0.5)
    numerator = model.g0(T) + g1_term * np.sqrt(R) * growth
    price = np.where(np.asarray(T) == np.asarray(t), 1.0, numerator / expquad_f_tilde(model, t, x))
    return _scalar(price)


def expquad_short_rate(model: ExpQuadraticModel, t, x):
    """
    r = [-g0'(t) + G(t) E (((eta - 1/2)/(U - t)) - g1'(t)/g1(t))] / f~(t, x)

    with G = g1 (U - t)^eta and E = exp(x^2/(2(U - t))). With the special g1
    the second term vanishes and r = -g0'(t)/(g0(t) + (U - t)^(1/2) E).
    """
    R = _remaining(model.process, t)
    growth = _gaussian_growth(x, R)
    if model.special_g1:
        return _scalar(-model.g0.derivative(t) / (model.g0(t) + np.sqrt(R) * growth))
    g1 = model.g1(t)
    G = g1 * R ** model.eta
    drift = (model.eta - 0.5) / R - model.g1.derivative(t) / g1
    return _scalar((-model.g0.derivative(t) + G * growth * drift) / expquad_f_tilde(model, t, x))


def expquad_market_price_of_risk(model: ExpQuadraticModel, t, x):
    """lambda = sigma U/(U - t) E[X | L_t = x] - d/dx f~ / f~."""
    R = _remaining(model.process, t)
    x = np.asarray(x, dtype=float)
    growth = _gaussian_growth(x, R)
    G = np.sqrt(R) if model.special_g1 else model.g1(t) * R ** model.eta
    slope = G * growth * x / R
    premium = information_premium(model.process, t, x)
    return _scalar(premium - slope / expquad_f_tilde(model, t, x))


def expquad_heat_kernel(eta: float, horizon: float, t, x):
    """
    Weighted heat kernel of the exponential-quadratic pair.

    Integrating ((U-t)/(U-t-u))^(1/2) exp(x^2/(2(U-t))) against
    (U-t-u)^(eta-1/2) over (0, U-t) gives (U-t)^(eta+1/2) exp(x^2/(2(U-t))) / eta.
    """
    R = horizon - np.asarray(t, dtype=float)
    return _scalar(R ** (eta + 0.5) * _gaussian_growth(x, R) / eta)


def expquad_heat_kernel_printed(eta: float, horizon: float, t, x):
    """(U-t)^eta exp(x^2/(2(U-t))) / (eta - 1/2); disagrees with direct integration."""
    R = horizon - np.asarray(t, dtype=float)
    return _scalar(R ** eta * _gaussian_growth(x, R) / (eta - 0.5))


def bridge_martingale(horizon: float, t, x):
    """h(t, x) = (U - t)^(1/2) exp(x^2/(2(U - t)))."""
    R = horizon - np.asarray(t, dtype=float)
    return _scalar(np.sqrt(R) * _gaussian_growth(x, R))


def weighted_heat_kernel(model: KernelModel, t, x):
    """Closed-form f for a tagged KernelModel."""
    if model.closed_form_tag == 'quadratic':
        return quad_f(QuadraticModel(model.process), t, x)
    if model.closed_form_tag == 'exponential_quadratic':
        model.process.guard(t)
        return expquad_heat_kernel(model.eta, model.horizon, t, x)
    raise DomainError("model carries no closed-form tag")
