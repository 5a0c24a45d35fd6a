"""
Weighted heat kernels and generic pricing.

f(t, x) = integral over u in (0, U - t) of p(u, t, x) * w(t, u), where the
propagator p(u, t, x) = E[F(t + u, L_{t+u}) | L_t = x] is taken under the
bridge measure (Gauss-Hermite against the bridge law) or, for P-measure
models, against the Levy random bridge transition density.
"""

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from lib.messages import LogMessages
from pricing.differential import derivative
from pricing.errors import DomainError, QuadratureError
from pricing.process import (bridge_conditional_law, information_premium, lrb_transition_density)
from pricing.quadrature import (QuadratureSettings, default_settings, gaussian_expectation,
                                integrate_to_endpoint, legendre_rule)
from pricing.specs import KernelModel, WeightFunction

logger = logging.getLogger(__name__)

# Window half-width, in conditional standard deviations, for P-measure expectations.
LRB_WINDOW_SD = 12.0
LRB_PIECE_SD = 4.0

VALIDITY_TOLERANCE = 1e-12


def _lrb_window(model: KernelModel, t: float, u: float, x: float):
    """Intervals carrying the LRB transition law from (t, x) over a step u."""
    U = model.horizon
    remaining = U - t
    terminal = model.process.terminal_law()
    atoms = terminal.atoms()
    sd = np.sqrt(u * (remaining - u) / remaining)
    if atoms is not None:
        ends = atoms[0][atoms[1] > 0.0]
    else:
        ends = np.asarray(terminal.support_bounds())
    centres = x + u * (ends - x) / remaining
    intervals = sorted((c - LRB_WINDOW_SD * sd, c + LRB_WINDOW_SD * sd) for c in centres)
    merged = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    if atoms is None:
        merged = [[merged[0][0], merged[-1][1]]]
    return merged, sd


def _lrb_pieces(func, merged, sd, n):
    nodes, weights = legendre_rule(n)
    total = 0.0
    for lo, hi in merged:
        count = max(1, int(np.ceil((hi - lo) / (LRB_PIECE_SD * sd))))
        edges = np.linspace(lo, hi, count + 1)
        half = 0.5 * np.diff(edges)
        y = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * nodes
        values = np.asarray(func(y.ravel()), dtype=float).reshape(y.shape)
        total += np.sum(half[:, None] * weights * values)
    return total


def lrb_expectation(model: KernelModel, func: Callable, t: float, u: float, x: float,
                    settings: Optional[QuadratureSettings] = None) -> float:
    """E_P[func(L_{t+u}) | L_t = x] against the Levy random bridge transition density."""
    settings = settings or default_settings()
    if u <= 0.0:
        return float(np.asarray(func(np.asarray([x])), dtype=float)[0])
    terminal = model.process.terminal_law()
    merged, sd = _lrb_window(model, t, u, x)

    def integrand(y):
        return np.asarray(func(y), dtype=float) * lrb_transition_density(model.lrb, terminal, t, t + u, x, y)

    n = settings.legendre_nodes
    coarse = _lrb_pieces(integrand, merged, sd, max(n // 4, 2))
    fine = _lrb_pieces(integrand, merged, sd, max(n // 2, 2))
    if abs(fine - coarse) > max(settings.epsrel * abs(fine), settings.epsabs):
        refined = _lrb_pieces(integrand, merged, sd, n)
        if abs(refined - fine) > max(settings.epsrel * abs(refined), settings.epsabs):
            raise QuadratureError("LRB expectation did not settle", estimate=refined,
                                  error_bound=abs(refined - fine))
        return float(refined)
    return float(fine)


def conditional_expectation(model: KernelModel, func: Callable, t: float, T: float, x,
                            settings: Optional[QuadratureSettings] = None, tilt: float = 0.0,
                            breakpoints: Optional[Sequence[float]] = None, log_offset=0.0):
    """
    E[func(L_T) | L_t = x] under the model's pricing measure (t <= T < U).

    For bridge-measure models func may be a reduced integrand and tilt its
    growth coefficient, and log_offset is divided out before exponentiating
    (see gaussian_expectation).
    """
    if model.measure == 'B':
        mean, variance = bridge_conditional_law(model.process, t, T, x)
        if breakpoints is not None and np.ndim(mean) > 0:
            offsets = np.broadcast_to(np.asarray(log_offset, dtype=float), np.shape(mean))
            return np.array([gaussian_expectation(func, m, v, settings, tilt, breakpoints, o)
                             for m, v, o in zip(np.ravel(mean), np.ravel(variance), np.ravel(offsets))
                             ]).reshape(np.shape(mean))
        return gaussian_expectation(func, mean, variance, settings, tilt, breakpoints, log_offset)

    if tilt or np.any(np.asarray(log_offset) != 0.0):
        raise DomainError("growth tilt is only available under the bridge measure")
    model.process.guard(T, 'T')
    xs = np.asarray(x, dtype=float)
    values = [lrb_expectation(model, func, t, T - t, float(value), settings) for value in xs.ravel()]
    result = np.asarray(values).reshape(xs.shape)
    return float(result) if result.ndim == 0 else result


def kernel_growth(model: KernelModel, t: float) -> float:
    """Coefficient g with f(t, x) = O(exp(g*x^2/2)); 0 for P-measure kernels."""
    return model.terminal.growth(t) if model.measure == 'B' else 0.0


def _propagator(model: KernelModel, u, t: float, x, settings: QuadratureSettings, gap=None, reduce: float = 0.0):
    """
    p(u, t, x) * exp(-reduce*x^2/2) without the horizon guard.

    gap = U - t - u when known exactly. The reduction is applied in log
    space, so it cancels the growth of p before anything is exponentiated.
    """
    U = model.horizon
    terminal = model.terminal
    tau = t + u
    remaining = U - t
    if gap is None:
        gap = remaining - u
    if model.measure == 'P':
        xs = np.asarray(x, dtype=float)
        values = [lrb_expectation(model, lambda y: terminal(tau, y), t, u, float(value), settings)
                  for value in xs.ravel()]
        result = np.asarray(values).reshape(xs.shape)
        return float(result) if result.ndim == 0 else result

    x = np.asarray(x, dtype=float)
    mean = x * gap / remaining
    variance = np.full(mean.shape, u * gap / remaining)
    return gaussian_expectation(lambda y: terminal.reduced(tau, y), mean, variance, settings,
                                tilt=terminal.growth(tau, gap), log_offset=0.5 * reduce * x ** 2)


def eval_propagator(model: KernelModel, u: float, t: float, x, settings: Optional[QuadratureSettings] = None):
    """
    p(u, t, x) = E[F(t + u, L_{t+u}) | L_t = x].

    Raises:
        DomainError: u <= 0 or t < 0
        HorizonError: t + u too close to U
    """
    settings = settings or default_settings()
    if not u > 0.0:
        raise DomainError("propagator needs u > 0")
    model.process.guard(t)
    model.process.guard(t + u, 't + u')
    value = _propagator(model, u, t, x, settings)
    if np.any(np.asarray(value) <= 0.0):
        raise QuadratureError("propagator evaluated to a non-positive value", estimate=value)
    return value


def _time_integral(model: KernelModel, t: float, x, weight_at: Callable, offset: float, span: float,
                   settings: QuadratureSettings, reduce: float = 0.0):
    """Integral over u in (0, span) of p(u + offset, t, x) * exp(-reduce*x^2/2) * weight_at(u)."""
    def integrand(u, gap):
        return _propagator(model, u + offset, t, x, settings, gap, reduce) * weight_at(u)

    return integrate_to_endpoint(integrand, 0.0, span, settings, pass_gap=True)


def eval_reduced_heat_kernel(model: KernelModel, t: float, x, settings: Optional[QuadratureSettings] = None):
    """
    f(t, x) * exp(-g*x^2/2) with g = kernel_growth(model, t).

    Stays finite where f itself overflows, as it does for
    exponential-quadratic kernels far from the origin.

    Raises:
        HorizonError: t too close to U
        QuadratureError: the time integral did not converge or is not positive
    """
    settings = settings or default_settings()
    model.process.guard(t)
    weight = model.weight
    value = _time_integral(model, t, x, lambda u: weight(t, u), 0.0, model.horizon - t, settings,
                           kernel_growth(model, t))
    if np.any(np.asarray(value) <= 0.0):
        raise QuadratureError(f"weighted heat kernel is not positive at t={t!r}", estimate=value)
    return value


def eval_weighted_heat_kernel(model: KernelModel, t: float, x, settings: Optional[QuadratureSettings] = None,
                              use_closed_form: bool = False):
    """
    f(t, x) by adaptive quadrature over u in (0, U - t).

    With use_closed_form and a closed-form tag the analytic expression is
    returned instead.

    Raises:
        HorizonError: t too close to U
        QuadratureError: the time integral did not converge
    """
    settings = settings or default_settings()
    model.process.guard(t)
    if use_closed_form and model.closed_form_tag is not None:
        from pricing import closed_form
        return closed_form.weighted_heat_kernel(model, t, x)

    reduced = eval_reduced_heat_kernel(model, t, x, settings)
    growth = kernel_growth(model, t)
    if not growth:
        return reduced
    return reduced * np.exp(0.5 * growth * np.asarray(x, dtype=float) ** 2)


def price_bond_generic(model: KernelModel, t: float, T: float, x, settings: Optional[QuadratureSettings] = None):
    """
    P_tT = [integral over u in (T - t, U - t) of p(u, t, x) w(T, u - (T - t))] / f(t, x).

    Raises:
        DomainError: T < t
        HorizonError: T too close to U
    """
    settings = settings or default_settings()
    model.process.guard(t)
    model.process.guard(T, 'T')
    if T < t:
        raise DomainError("bond maturity T precedes valuation time t")
    if T == t:
        x = np.asarray(x, dtype=float)
        return 1.0 if x.ndim == 0 else np.ones_like(x)

    growth = kernel_growth(model, t)
    return bond_numerator(model, t, T, x, settings, growth) / eval_reduced_heat_kernel(model, t, x, settings)


def bond_numerator(model: KernelModel, t: float, T: float, x, settings: Optional[QuadratureSettings] = None,
                   reduce: float = 0.0):
    """E[f(T, L_T) | L_t = x] * exp(-reduce*x^2/2) written as a single time integral; no guards."""
    settings = settings or default_settings()
    weight = model.weight
    return _time_integral(model, t, x, lambda u: weight(T, u), T - t, model.horizon - T, settings, reduce)


def price_bond_printed_weight(model: KernelModel, t: float, T: float, x,
                              settings: Optional[QuadratureSettings] = None):
    """Bond price with the weight evaluated at w(T, u - T - t); kept for the errata comparison."""
    settings = settings or default_settings()
    model.process.guard(T, 'T')
    weight = model.weight

    def shifted(u):
        return weight(T, u + (T - t) - T - t)

    numerator = _time_integral(model, t, x, shifted, T - t, model.horizon - T, settings, kernel_growth(model, t))
    return numerator / eval_reduced_heat_kernel(model, t, x, settings)


def _check_payoff(payoff: Callable, mean: float, spread: float):
    probe = mean + spread * np.linspace(-8.0, 8.0, 161)
    values = np.asarray(payoff(probe), dtype=float)
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise DomainError("payoff must be finite and nonnegative")


def price_asset_generic(model: KernelModel, t: float, T: float, x: float, payoff: Callable,
                        settings: Optional[QuadratureSettings] = None,
                        breakpoints: Optional[Sequence[float]] = None) -> float:
    """
    H_t = E[f(T, L_T) * payoff(L_T) | L_t = x] / f(t, x).

    The density process M cancels between numerator and denominator for
    bridge-measure models, so the outer expectation is taken under B.
    payoff is vectorized; breakpoints mark its jumps or kinks.
    """
    settings = settings or default_settings()
    model.process.guard(t)
    model.process.guard(T, 'T')
    if T < t:
        raise DomainError("payment time T precedes valuation time t")
    x = float(x)
    if T == t:
        return float(np.asarray(payoff(np.asarray([x])), dtype=float)[0])

    U = model.horizon
    spread = np.sqrt((T - t) * (U - T) / (U - t)) + abs(x)
    _check_payoff(payoff, x * (U - T) / (U - t), spread)

    # f(T, y) = reduced(T, y) * exp(growth(T)*y^2/2); the growth goes into the Gaussian weight
    # and exp(growth(t)*x^2/2) cancels against the denominator in log space.
    def integrand(y):
        y = np.asarray(y, dtype=float)
        kernel = eval_reduced_heat_kernel(model, T, y.ravel(), settings).reshape(y.shape)
        return np.asarray(payoff(y), dtype=float) * kernel

    numerator = conditional_expectation(model, integrand, t, T, x, settings, kernel_growth(model, T), breakpoints,
                                        0.5 * kernel_growth(model, t) * x * x)
    return float(numerator / eval_reduced_heat_kernel(model, t, x, settings))


def check_weight_validity(weight: WeightFunction, grid_density: int, horizon: Optional[float] = None) -> dict:
    """
    Check w(t, u - s) <= w(t - s, u) and w >= 0 on a uniform grid.

    The grid covers {0 <= s <= min(t, u), t + u <= U}. Violations are measured
    relative to max(1, |w|).

    Returns:
        dict: valid, max_violation, witness (s, t, u) of the worst violation
    """
    if grid_density < 2:
        raise DomainError("grid_density must be at least 2")
    horizons = weight.horizons()
    U = float(horizon if horizon is not None else (max(horizons) if horizons else 1.0))

    points = np.linspace(0.0, U, grid_density)
    t, u, s = np.meshgrid(points, points, points, indexing='ij')
    admissible = (t + u <= U + 1e-15) & (s <= np.minimum(t, u))
    t, u, s = t[admissible], u[admissible], s[admissible]

    left = np.asarray(weight(t, u - s), dtype=float)
    right = np.asarray(weight(t - s, u), dtype=float)
    violation = (left - right) / np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))

    worst = int(np.argmax(violation))
    max_violation = float(max(violation[worst], 0.0))
    witness = (float(s[worst]), float(t[worst]), float(u[worst]))

    tu = (t + u <= U)
    for leaf in weight.leaves():
        leaf_values = np.asarray(leaf(t[tu], u[tu]), dtype=float)
        negative = -float(np.min(leaf_values)) if leaf_values.size else 0.0
        if negative > max_violation:
            index = int(np.argmin(leaf_values))
            max_violation = negative
            witness = (0.0, float(t[tu][index]), float(u[tu][index]))

    valid = max_violation <= VALIDITY_TOLERANCE
    logger.debug(LogMessages.WEIGHT_CHECKED.format(weight=weight, valid=valid, violation=max_violation))
    return {'valid': valid, 'max_violation': max_violation, 'witness': witness}


def _default_step(model: KernelModel, step: Optional[float]) -> float:
    return step if step is not None else 1e-2 * model.horizon


def _kernel_derivatives(model, t, x, step, settings):
    def in_t(tt):
        return eval_weighted_heat_kernel(model, tt, x, settings)

    def in_x(xx):
        return eval_weighted_heat_kernel(model, t, xx, settings)

    f_t = derivative(in_t, t, step, 1, lower=0.0, upper=model.process.last_time)
    f_x = derivative(in_x, x, step, 1)
    f_xx = derivative(in_x, x, step, 2)
    return f_t, f_x, f_xx


def generic_short_rate(model: KernelModel, t: float, x: float, settings: Optional[QuadratureSettings] = None,
                       step: Optional[float] = None) -> float:
    """
    r = -(f_t + drift*f_x + f_xx/2) / f.

    The drift of L is -x/(U - t) under the bridge measure and
    theta - x/(U - t) under P, theta being the information premium.
    """
    settings = settings or default_settings()
    model.process.guard(t)
    step = _default_step(model, step)
    f = eval_weighted_heat_kernel(model, t, x, settings)
    f_t, f_x, f_xx = _kernel_derivatives(model, t, x, step, settings)
    drift = -x / (model.horizon - t)
    if model.measure == 'P':
        drift += information_premium(model.process, t, x)
    return float(-(f_t + drift * f_x + 0.5 * f_xx) / f)


def generic_market_price_of_risk(model: KernelModel, t: float, x: float,
                                 settings: Optional[QuadratureSettings] = None,
                                 step: Optional[float] = None) -> float:
    """lambda = theta - f_x/f under the bridge measure, -f_x/f under P."""
    settings = settings or default_settings()
    model.process.guard(t)
    step = _default_step(model, step)
    f = eval_weighted_heat_kernel(model, t, x, settings)
    f_x = derivative(lambda xx: eval_weighted_heat_kernel(model, t, xx, settings), x, step, 1)
    premium = information_premium(model.process, t, x) if model.measure == 'B' else 0.0
    return float(premium - f_x / f)
