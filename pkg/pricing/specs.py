"""
Model specifications: weight functions, terminal functions and kernel models.

A weight function w(t, u) is admissible when it is nonnegative and
w(t, u - s) <= w(t - s, u) for 0 <= s <= min(t, u). Leaves can be combined
with scaling, sums and products, which preserve admissibility.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from pricing.errors import DomainError
from pricing.process import InformationModel, LrbDensitySpec

logger = logging.getLogger(__name__)

CLOSED_FORM_TAGS = ('quadratic', 'exponential_quadratic')


class WeightFunction(ABC):
    """w(t, u) on {t >= 0, u >= 0, t + u <= U}."""

    serializable = True

    @abstractmethod
    def __call__(self, t, u):
        """Vectorized evaluation."""

    @abstractmethod
    def to_dict(self) -> dict:
        """Canonical JSON representation."""

    def leaves(self):
        """Leaf weights of a composite tree."""
        return [self]

    def horizons(self):
        return {leaf.horizon for leaf in self.leaves() if getattr(leaf, 'horizon', None) is not None}

    def __add__(self, other):
        return SumWeight(self, other)

    def __mul__(self, other):
        if isinstance(other, WeightFunction):
            return ProductWeight(self, other)
        return ScaledWeight(float(other), self)

    __rmul__ = __mul__


class AffineWeight(WeightFunction):
    """w(t, u) = U - t - u."""

    def __init__(self, horizon: float):
        self.horizon = float(horizon)

    def __call__(self, t, u):
        return np.maximum(self.horizon - np.asarray(t, dtype=float) - np.asarray(u, dtype=float), 0.0)

    def to_dict(self):
        return {'type': 'affine'}

    def __repr__(self):
        return f"AffineWeight(U={self.horizon})"


class PowerWeight(WeightFunction):
    """w(t, u) = (U - t - u)^(eta - 1/2), eta > 1/2."""

    def __init__(self, horizon: float, eta: float):
        if not eta > 0.5:
            raise DomainError("power weight needs eta > 1/2")
        self.horizon = float(horizon)
        self.eta = float(eta)

    def __call__(self, t, u):
        base = np.maximum(self.horizon - np.asarray(t, dtype=float) - np.asarray(u, dtype=float), 0.0)
        return base ** (self.eta - 0.5)

    def to_dict(self):
        return {'type': 'power', 'eta': self.eta}

    def __repr__(self):
        return f"PowerWeight(U={self.horizon}, eta={self.eta})"


class HorizonWeight(WeightFunction):
    """w(t, u) = profile(t + u) for a nonincreasing profile."""

    serializable = False

    def __init__(self, profile: Callable, name: str = 'horizon_function'):
        self.profile = profile
        self.name = name

    def __call__(self, t, u):
        return np.asarray(self.profile(np.asarray(t, dtype=float) + np.asarray(u, dtype=float)), dtype=float)

    def to_dict(self):
        return {'type': self.name}

    def __repr__(self):
        return f"HorizonWeight({self.name})"


class ExponentialHorizonWeight(HorizonWeight):
    """w(t, u) = exp(-rate*(t + u))."""

    serializable = True

    def __init__(self, rate: float):
        if not rate >= 0.0:
            raise DomainError("horizon_exponential weight needs rate >= 0")
        self.rate = float(rate)
        super().__init__(lambda v: np.exp(-self.rate * v), 'horizon_exponential')

    def to_dict(self):
        return {'type': 'horizon_exponential', 'rate': self.rate}

    def __repr__(self):
        return f"ExponentialHorizonWeight(rate={self.rate})"


class ScaledWeight(WeightFunction):
    def __init__(self, factor: float, inner: WeightFunction):
        if not factor > 0.0:
            raise DomainError("scaled weight needs a positive factor")
        self.factor = float(factor)
        self.inner = inner
        self.serializable = inner.serializable

    def __call__(self, t, u):
        return self.factor * self.inner(t, u)

    def leaves(self):
        return self.inner.leaves()

    def to_dict(self):
        return {'type': 'scaled', 'factor': self.factor, 'inner': self.inner.to_dict()}

    def __repr__(self):
        return f"ScaledWeight({self.factor}, {self.inner!r})"


class SumWeight(WeightFunction):
    def __init__(self, left: WeightFunction, right: WeightFunction):
        self.left = left
        self.right = right
        self.serializable = left.serializable and right.serializable

    def __call__(self, t, u):
        return self.left(t, u) + self.right(t, u)

    def leaves(self):
        return self.left.leaves() + self.right.leaves()

    def to_dict(self):
        return {'type': 'sum', 'left': self.left.to_dict(), 'right': self.right.to_dict()}

    def __repr__(self):
        return f"SumWeight({self.left!r}, {self.right!r})"


class ProductWeight(WeightFunction):
    def __init__(self, left: WeightFunction, right: WeightFunction):
        self.left = left
        self.right = right
        self.serializable = left.serializable and right.serializable

    def __call__(self, t, u):
        return self.left(t, u) * self.right(t, u)

    def leaves(self):
        return self.left.leaves() + self.right.leaves()

    def to_dict(self):
        return {'type': 'product', 'left': self.left.to_dict(), 'right': self.right.to_dict()}

    def __repr__(self):
        return f"ProductWeight({self.left!r}, {self.right!r})"


class CustomWeight(WeightFunction):
    """Arbitrary callable w(t, u); not serializable and not assumed admissible."""

    serializable = False

    def __init__(self, func: Callable, name: str = 'custom'):
        self.func = func
        self.name = name

    def __call__(self, t, u):
        t, u = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
        return np.asarray(self.func(t, u), dtype=float) * np.ones_like(t)

    def to_dict(self):
        return {'type': 'custom', 'name': self.name}

    def __repr__(self):
        return f"CustomWeight({self.name})"


def weight_from_dict(data: dict, horizon: float) -> WeightFunction:
    """Build a weight function from its canonical JSON representation."""
    kind = data.get('type')
    if kind == 'affine':
        return AffineWeight(horizon)
    if kind == 'power':
        return PowerWeight(horizon, data['eta'])
    if kind == 'horizon_exponential':
        return ExponentialHorizonWeight(data['rate'])
    if kind == 'scaled':
        return ScaledWeight(data['factor'], weight_from_dict(data['inner'], horizon))
    if kind == 'sum':
        return SumWeight(weight_from_dict(data['left'], horizon), weight_from_dict(data['right'], horizon))
    if kind == 'product':
        return ProductWeight(weight_from_dict(data['left'], horizon), weight_from_dict(data['right'], horizon))
    raise DomainError(f"Unknown weight type: {kind!r}")


class TerminalFunction(ABC):
    """Positive terminal function F(tau, x) fed into the propagator."""

    @abstractmethod
    def __call__(self, tau, x):
        """Vectorized evaluation."""

    @abstractmethod
    def to_dict(self) -> dict:
        """Canonical JSON representation."""

    def growth(self, tau, gap=None) -> float:
        """
        Coefficient g with F(tau, x) = O(exp(g*x^2/2)); 0 for sub-Gaussian growth.

        gap, when given, is U - tau computed without cancellation.
        """
        return 0.0

    def reduced(self, tau, x):
        """F(tau, x) * exp(-growth(tau)*x^2/2)."""
        return self(tau, x)


class QuadraticTerminal(TerminalFunction):
    """F(x) = x^2."""

    def __call__(self, tau, x):
        return np.asarray(x, dtype=float) ** 2

    def to_dict(self):
        return {'type': 'quadratic'}

    def __repr__(self):
        return "QuadraticTerminal()"


class ExpQuadraticTerminal(TerminalFunction):
    """F(tau, x) = exp(gamma_tau * x^2 / 2) with gamma_tau = 1/(U - tau)."""

    def __init__(self, horizon: float):
        self.horizon = float(horizon)

    def growth(self, tau, gap=None):
        return 1.0 / (self.horizon - tau if gap is None else gap)

    def __call__(self, tau, x):
        return np.exp(0.5 * self.growth(tau) * np.asarray(x, dtype=float) ** 2)

    def reduced(self, tau, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def to_dict(self):
        return {'type': 'exponential_quadratic'}

    def __repr__(self):
        return f"ExpQuadraticTerminal(U={self.horizon})"


class ExpLinearTerminal(TerminalFunction):
    """F(x) = exp(-mu*x)."""

    def __init__(self, mu: float):
        self.mu = float(mu)

    def __call__(self, tau, x):
        return np.exp(-self.mu * np.asarray(x, dtype=float))

    def to_dict(self):
        return {'type': 'exponential_linear', 'mu': self.mu}

    def __repr__(self):
        return f"ExpLinearTerminal(mu={self.mu})"


def terminal_from_dict(data: dict, horizon: float) -> TerminalFunction:
    """Build a terminal function from its canonical JSON representation."""
    kind = data.get('type')
    if kind == 'quadratic':
        return QuadraticTerminal()
    if kind == 'exponential_quadratic':
        return ExpQuadraticTerminal(horizon)
    if kind == 'exponential_linear':
        return ExpLinearTerminal(data['mu'])
    raise DomainError(f"Unknown terminal function type: {kind!r}")


@dataclass(frozen=True)
class KernelModel:
    """
    Information process, terminal function and weight function.

    measure 'B' builds the pricing kernel as M_t * f(t, L_t) from the bridge
    propagator; measure 'P' uses f(t, L_t) directly with the Levy random
    bridge propagator of the information process.
    """

    process: InformationModel
    terminal: TerminalFunction
    weight: WeightFunction
    closed_form_tag: Optional[str] = None
    measure: str = 'B'
    lrb: Optional[LrbDensitySpec] = None

    def __post_init__(self):
        U = self.process.horizon
        if self.measure not in ('B', 'P'):
            raise DomainError("kernel measure must be 'B' or 'P'")
        for horizon in self.weight.horizons():
            if horizon != U:
                raise DomainError(f"weight horizon {horizon} differs from U={U}")
        if getattr(self.terminal, 'horizon', U) != U:
            raise DomainError("terminal function horizon differs from U")
        if self.measure == 'P':
            if self.closed_form_tag is not None:
                raise DomainError("closed forms exist for bridge-measure kernels only")
            if isinstance(self.terminal, ExpQuadraticTerminal):
                raise DomainError("exponential-quadratic terminal functions need the bridge measure")
            if self.lrb is None:
                object.__setattr__(self, 'lrb', LrbDensitySpec.brownian(U))
        if self.closed_form_tag is not None:
            self._check_tag()

    def _check_tag(self):
        tag = self.closed_form_tag
        if tag not in CLOSED_FORM_TAGS:
            raise DomainError(f"Unknown closed-form tag: {tag!r}")
        if tag == 'quadratic':
            matches = isinstance(self.terminal, QuadraticTerminal) and type(self.weight) is AffineWeight
        else:
            matches = isinstance(self.terminal, ExpQuadraticTerminal) and type(self.weight) is PowerWeight
        if not matches:
            raise DomainError(f"closed-form tag {tag!r} does not match the (F, w) pair")

    @property
    def horizon(self) -> float:
        return self.process.horizon

    @property
    def eta(self) -> Optional[float]:
        return getattr(self.weight, 'eta', None)

    @classmethod
    def quadratic(cls, process: InformationModel) -> 'KernelModel':
        return cls(process, QuadraticTerminal(), AffineWeight(process.horizon), 'quadratic')

    @classmethod
    def exponential_quadratic(cls, process: InformationModel, eta: float) -> 'KernelModel':
        return cls(process, ExpQuadraticTerminal(process.horizon), PowerWeight(process.horizon, eta),
                   'exponential_quadratic')

    def without_closed_form(self) -> 'KernelModel':
        return KernelModel(self.process, self.terminal, self.weight, None, self.measure, self.lrb)

    def to_dict(self) -> dict:
        data = self.process.to_dict()
        data.update({
            'family': 'generic',
            'F': self.terminal.to_dict(),
            'w': self.weight.to_dict(),
            'measure': self.measure
        })
        return data
