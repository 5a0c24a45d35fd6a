"""
Numerical quadrature for the pricing core.

Gaussian expectations use probabilists' Gauss-Hermite rules with node
doubling until two successive estimates agree. Time integrals use
scipy's adaptive vector quadrature with an endpoint substitution that
removes algebraic singularities at the upper limit.
"""

import logging
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from lib.messages import LogMessages
from pricing.errors import DomainError, QuadratureError

logger = logging.getLogger(__name__)

SQRT_TWO_PI = np.sqrt(2.0 * np.pi)

# Gaussian mass beyond this many standard deviations is treated as zero.
WINDOW_SD = 12.0


@dataclass(frozen=True)
class QuadratureSettings:
    """Quadrature budgets and tolerances shared by every numerical routine."""

    gauss_hermite_nodes: int = 64
    gauss_hermite_max_nodes: int = 256
    legendre_nodes: int = 128
    epsabs: float = 1e-10
    epsrel: float = 1e-9
    limit: int = 200
    escalation_rtol: float = 1e-10
    horizon_epsilon_fraction: float = 1e-9

    @classmethod
    def from_config(cls, config_manager=None) -> 'QuadratureSettings':
        """Build settings from the quadrature and horizon configuration sections."""
        if config_manager is None:
            from config.manager import get_config
            config_manager = get_config()

        section = config_manager.get_quadrature_config() or {}
        known = {f.name for f in fields(cls)}
        values = {key: value for key, value in section.items() if key in known}
        values['horizon_epsilon_fraction'] = config_manager.get_horizon_epsilon_fraction()
        return cls(**values).with_overrides()

    def with_overrides(self, **overrides) -> 'QuadratureSettings':
        """Return a copy with the non-None overrides applied and types normalized."""
        updates = {key: value for key, value in overrides.items() if value is not None}
        merged = replace(self, **updates)
        return replace(
            merged,
            gauss_hermite_nodes=int(merged.gauss_hermite_nodes),
            gauss_hermite_max_nodes=max(int(merged.gauss_hermite_max_nodes), int(merged.gauss_hermite_nodes)),
            legendre_nodes=int(merged.legendre_nodes),
            epsabs=float(merged.epsabs),
            epsrel=float(merged.epsrel),
            limit=int(merged.limit),
            escalation_rtol=float(merged.escalation_rtol),
            horizon_epsilon_fraction=float(merged.horizon_epsilon_fraction),
        )


@lru_cache(maxsize=1)
def default_settings() -> QuadratureSettings:
    """Settings built from the global configuration (cached; see reset_default_settings)."""
    return QuadratureSettings.from_config()


def reset_default_settings():
    """Forget the cached settings after the global configuration is reloaded."""
    default_settings.cache_clear()


@lru_cache(maxsize=32)
def hermite_rule(n: int):
    """Nodes and weights for E[g(Z)], Z standard normal (weights sum to 1)."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(n)
    weights = weights / SQRT_TWO_PI
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=32)
def legendre_rule(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = roots_legendre(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _collapse(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _tilted_law(mean, variance, tilt):
    """
    Absorb exp(tilt*y^2/2) into the Gaussian weight.

    exp(tilt*y^2/2) * N(y; m, v) = exp(log_scale) * N(y; m', v') with
    v' = v/(1 - tilt*v) and m' = m/(1 - tilt*v).
    """
    if not tilt:
        return mean, variance, np.zeros_like(mean)
    shrink = 1.0 - tilt * variance
    if np.any(shrink <= 0.0):
        raise QuadratureError(
            "Integrand grows faster than the Gaussian weight decays (tilt*variance >= 1)",
            estimate=np.inf, error_bound=np.inf
        )
    log_scale = -0.5 * np.log(shrink) + 0.5 * tilt * mean ** 2 / shrink
    return mean / shrink, variance / shrink, log_scale


def _hermite_estimate(func, mean, variance, log_scale, n):
    nodes, weights = hermite_rule(n)
    y = mean[..., None] + np.sqrt(variance)[..., None] * nodes
    values = np.asarray(func(y), dtype=float)
    return np.exp(log_scale) * np.sum(values * weights, axis=-1)


def _converged(fine, coarse, settings):
    gap = np.abs(fine - coarse)
    return bool(np.all(gap <= np.maximum(settings.escalation_rtol * np.abs(fine), settings.epsabs)))


def gaussian_expectation(func: Callable, mean, variance, settings: Optional[QuadratureSettings] = None,
                         tilt: float = 0.0, breakpoints: Optional[Sequence[float]] = None,
                         log_offset=0.0):
    """
    E[func(Y) * exp(tilt*Y^2/2)] for Y ~ Normal(mean, variance).

    With tilt = 0 this is the plain expectation. A positive tilt is used for
    integrands growing like exp(tilt*y^2/2): the caller passes the reduced
    function func = g(y)*exp(-tilt*y^2/2) and the growth is absorbed into the
    Gaussian weight, so no overflowing factor is ever formed.

    Args:
        func: vectorized callable; receives an array whose last axis runs over nodes
        mean, variance: scalars or broadcastable arrays
        settings: quadrature budgets (global configuration when omitted)
        tilt: growth coefficient absorbed into the weight
        breakpoints: locations of kinks or jumps of func; switches to piecewise
            Gauss-Legendre on a +/-12 sd window (scalar mean only)
        log_offset: log of a factor divided out of the result before it is
            exponentiated; broadcastable against mean

    Returns:
        float or ndarray shaped like the broadcast of mean and variance

    Raises:
        QuadratureError: successive node doublings still disagree at the node cap
    """
    settings = settings or default_settings()
    mean, variance = np.broadcast_arrays(np.asarray(mean, dtype=float), np.asarray(variance, dtype=float))
    if np.any(variance < 0.0):
        raise DomainError("Gaussian expectation requested with negative variance")
    mean, variance, log_scale = _tilted_law(mean, variance, tilt)
    log_scale = log_scale - np.asarray(log_offset, dtype=float)

    if breakpoints is not None:
        if mean.ndim != 0:
            raise DomainError("Piecewise Gaussian expectation needs a scalar mean")
        value = _piecewise_expectation(func, float(mean), float(variance), breakpoints, settings)
        return float(np.exp(log_scale) * value)

    n = settings.gauss_hermite_nodes
    coarse = _hermite_estimate(func, mean, variance, log_scale, max(n // 2, 2))
    while True:
        fine = _hermite_estimate(func, mean, variance, log_scale, n)
        if _converged(fine, coarse, settings):
            return _collapse(fine)
        if n >= settings.gauss_hermite_max_nodes:
            gap = float(np.max(np.abs(fine - coarse)))
            raise QuadratureError(
                f"Gauss-Hermite estimate did not settle by {n} nodes",
                estimate=_collapse(fine), error_bound=gap
            )
        logger.debug(LogMessages.QUADRATURE_ESCALATED.format(nodes=min(2 * n, settings.gauss_hermite_max_nodes)))
        coarse, n = fine, min(2 * n, settings.gauss_hermite_max_nodes)


def _legendre_pieces(func, edges, n):
    nodes, weights = legendre_rule(n)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        y = 0.5 * (hi + lo) + half * nodes
        total += half * np.sum(weights * func(y))
    return total


def _piecewise_expectation(func, mean, variance, breakpoints, settings):
    if variance == 0.0:
        return float(func(np.asarray([mean]))[0])

    sd = np.sqrt(variance)
    lo, hi = mean - WINDOW_SD * sd, mean + WINDOW_SD * sd
    inner = sorted(float(b) for b in breakpoints if lo < b < hi)
    edges = [lo] + inner + [hi]

    def weighted(y):
        z = (y - mean) / sd
        return np.asarray(func(y), dtype=float) * np.exp(-0.5 * z * z) / (SQRT_TWO_PI * sd)

    n = settings.legendre_nodes
    coarse = _legendre_pieces(weighted, edges, max(n // 2, 2))
    fine = _legendre_pieces(weighted, edges, n)
    if abs(fine - coarse) > max(settings.escalation_rtol * abs(fine), settings.epsabs):
        refined = _legendre_pieces(weighted, edges, 2 * n)
        if abs(refined - fine) > max(settings.epsrel * abs(refined), settings.epsabs):
            raise QuadratureError(
                "Piecewise Gauss-Legendre expectation did not settle",
                estimate=refined, error_bound=abs(refined - fine)
            )
        return float(refined)
    return float(fine)


def adaptive_integral(func: Callable, lo: float, hi: float, settings: Optional[QuadratureSettings] = None,
                      points: Optional[Sequence[float]] = None):
    """
    Adaptive Gauss-Kronrod integral of a (possibly vector-valued) function.

    Raises:
        QuadratureError: subdivision limit reached or non-finite values met
    """
    settings = settings or default_settings()
    if points is not None:
        points = [p for p in points if lo < p < hi] or None

    estimate, error, info = integrate.quad_vec(
        func, lo, hi,
        epsabs=settings.epsabs,
        epsrel=settings.epsrel,
        limit=settings.limit,
        norm='max',
        points=points,
        full_output=True
    )
    estimate = np.asarray(estimate, dtype=float)
    if info.status != 0 or not np.all(np.isfinite(estimate)):
        raise QuadratureError(
            f"Adaptive quadrature failed on [{lo}, {hi}] (status {info.status})",
            estimate=_collapse(estimate), error_bound=float(error)
        )
    return _collapse(estimate)


def integrate_to_endpoint(func: Callable, lo: float, hi: float, settings: Optional[QuadratureSettings] = None,
                          pass_gap: bool = False):
    """
    Integral of func over (lo, hi) through u = hi - (hi - lo) v^2.

    The substitution turns an integrand behaving like (hi - u)^(a - 1) into
    one behaving like v^(2a - 1), which the adaptive rule handles for a > 0.
    Neither endpoint is evaluated. With pass_gap, func is called as
    func(u, hi - u) with the gap computed without cancellation.
    """
    span = hi - lo
    if span <= 0.0:
        return 0.0

    def substituted(v):
        gap = span * v * v
        u = hi - gap
        value = func(u, gap) if pass_gap else func(u)
        return value * (2.0 * span * v)

    return adaptive_integral(substituted, 0.0, 1.0, settings)
