"""
Property checks and oracle comparisons for pricing kernels.

Every check returns CheckReport objects whose passed flag is worst_case <=
tolerance. Supermartingale and equivalence errors are measured relative to
max(1, |reference|).
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad

from lib.messages import LogMessages
from pricing.closed_form import (ExpQuadraticModel, QuadraticModel, bridge_martingale, expquad_bond_price,
                                 expquad_f_tilde, expquad_heat_kernel, expquad_heat_kernel_printed, quad_bond_price,
                                 quad_conditional_second_moment, quad_conditional_second_moment_printed, quad_f)
from pricing.differential import derivative
from pricing.errors import DomainError
from pricing.kernels import (check_weight_validity, conditional_expectation, eval_reduced_heat_kernel,
                             eval_weighted_heat_kernel, kernel_growth, price_bond_generic, price_bond_printed_weight)
from pricing.options import (OptionSpec, lrb_option_price_generic, positive_part_integral, printed_case_two_integral,
                             quad_option_coeffs, quad_option_price)
from pricing.process import (AtomicPrior, InformationModel, bridge_conditional_law, information_premium,
                             measure_change_martingale, simulate_paths)
from pricing.quadrature import QuadratureSettings, default_settings, gaussian_expectation
from pricing.specs import KernelModel, WeightFunction
from verification.report import CheckReport

logger = logging.getLogger(__name__)

SUPERMARTINGALE_TOLERANCE = 1e-10
EQUIVALENCE_TOLERANCE = 1e-8
PDE_TOLERANCE = 1e-6
STANDARD_ERRORS = 3.0
SDE_RMS_TOLERANCE = 1e-2
MARTINGALE_TOLERANCE = 1e-9
OPTION_TOLERANCE = 1e-6

AnyModel = Union[KernelModel, QuadraticModel, ExpQuadraticModel]


@dataclass(frozen=True)
class StateFunction:
    """
    f(t, x) of a pricing kernel together with its Gaussian growth.

    reduced(t, y) = f(t, y) * exp(-tilt(t) * y^2 / 2) stays bounded, which
    keeps conditional expectations of exponential-quadratic kernels finite.
    """

    name: str
    process: InformationModel
    value: Callable
    reduced: Callable
    tilt: Callable
    measure: str = 'B'
    kernel: Optional[KernelModel] = None

    @property
    def horizon(self) -> float:
        return self.process.horizon


def state_function(model: AnyModel, settings: Optional[QuadratureSettings] = None,
                   use_closed_form: bool = True) -> StateFunction:
    """Resolve the f(t, x) that a check should test for any supported model type."""
    settings = settings or default_settings()

    if isinstance(model, QuadraticModel):
        return StateFunction('quadratic', model.process, lambda t, x: quad_f(model, t, x),
                             lambda t, y: quad_f(model, t, y), lambda t: 0.0)

    if isinstance(model, ExpQuadraticModel):
        U = model.horizon

        def reduced(t, y):
            y = np.asarray(y, dtype=float)
            scale = expquad_f_tilde(model, t, 0.0) - model.g0(t)
            return model.g0(t) * np.exp(-0.5 * y ** 2 / (U - t)) + scale

        return StateFunction('expquad', model.process, lambda t, x: expquad_f_tilde(model, t, x), reduced,
                             lambda t: 1.0 / (U - t))

    if not isinstance(model, KernelModel):
        raise DomainError(f"Unsupported model type: {type(model).__name__}")

    U = model.horizon
    if use_closed_form and model.closed_form_tag == 'exponential_quadratic':
        eta = model.eta
        return StateFunction('kernel.exponential_quadratic', model.process,
                             lambda t, x: expquad_heat_kernel(eta, U, t, x),
                             lambda t, y: np.full(np.shape(y), (U - t) ** (eta + 0.5) / eta),
                             lambda t: 1.0 / (U - t), model.measure, model)

    def value(t, x):
        return eval_weighted_heat_kernel(model, t, x, settings, use_closed_form=use_closed_form)

    def tilt(t):
        return kernel_growth(model, t)

    def reduced(t, y):
        y = np.asarray(y, dtype=float)
        if tilt(t):
            values = eval_reduced_heat_kernel(model, t, y.ravel(), settings)
        else:
            values = value(t, y.ravel())
        return np.asarray(values, dtype=float).reshape(y.shape)

    name = f"kernel.{model.closed_form_tag or 'generic'}"
    return StateFunction(name, model.process, value, reduced, tilt, model.measure, model)


def _relative_gap(value, reference):
    value = np.asarray(value, dtype=float)
    reference = np.asarray(reference, dtype=float)
    return np.abs(value - reference) / np.maximum(1.0, np.abs(reference))


def _ordered_pairs(time_pairs: Iterable[Tuple[float, float]], horizon: float) -> List[Tuple[float, float]]:
    pairs = [(float(s), float(t)) for s, t in time_pairs]
    for s, t in pairs:
        if not 0.0 <= s < t < horizon:
            raise DomainError(f"time pair ({s}, {t}) must satisfy 0 <= s < t < U")
    return pairs


def _log_outcome(report: CheckReport) -> CheckReport:
    logger.info(LogMessages.CHECK_FINISHED.format(name=report.check_name, passed=report.passed,
                                                  worst=report.worst_case, tolerance=report.tolerance))
    return report


def check_supermartingale(model: AnyModel, time_pairs: Sequence[Tuple[float, float]], x_grid: Sequence[float],
                          method: str = 'quadrature', n_paths: int = 100000, seed: int = 0,
                          tolerance: Optional[float] = None, settings: Optional[QuadratureSettings] = None,
                          name: Optional[str] = None) -> CheckReport:
    """
    Check E[f(t, L_t) | L_s = x] <= f(s, x) over time pairs and a state grid.

    quadrature: conditional expectations by Gauss-Hermite (bridge measure) or
    the Levy random bridge density (P-measure kernels), tolerance 1e-10.
    mc: one set of standard normals shared by every (s, t, x), a violation is
    a sample mean above f(s, x) by more than three standard errors.

    Raises:
        DomainError: bad time pairs, unknown method, or mc on a P-measure kernel
        QuadratureError: a conditional expectation did not converge
    """
    started = time.perf_counter()
    settings = settings or default_settings()
    state = state_function(model, settings)
    pairs = _ordered_pairs(time_pairs, state.horizon)
    xs = np.asarray(x_grid, dtype=float)
    check_name = name or f"supermartingale.{state.name}.{method}"

    if method == 'quadrature':
        tolerance = SUPERMARTINGALE_TOLERANCE if tolerance is None else tolerance
        worst, witness = -np.inf, ()
        for s, t in pairs:
            if state.measure == 'B':
                mean, variance = bridge_conditional_law(state.process, s, t, xs)
                expected = gaussian_expectation(lambda y: state.reduced(t, y), mean, variance, settings,
                                                tilt=state.tilt(t))
            else:
                expected = conditional_expectation(state.kernel, lambda y: state.value(t, y), s, t, xs, settings)
            current = np.asarray(state.value(s, xs), dtype=float)
            excess = (np.asarray(expected) - current) / np.maximum(1.0, np.abs(current))
            index = int(np.argmax(excess))
            if excess[index] > worst:
                worst, witness = float(excess[index]), (s, t, float(xs[index]))
        return _log_outcome(CheckReport.build(check_name, max(worst, 0.0), tolerance,
                                              witness, len(pairs) * xs.size, started,
                                              details={'method': method, 'max_excess': worst}))

    if method != 'mc':
        raise DomainError(f"Unknown supermartingale method: {method!r}")
    if state.measure != 'B':
        raise DomainError("Monte Carlo supermartingale checks need a bridge-measure kernel")

    tolerance = 0.0 if tolerance is None else tolerance
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    normals = rng.standard_normal(int(n_paths))
    worst, witness = -np.inf, ()
    for s, t in pairs:
        current = np.atleast_1d(np.asarray(state.value(s, xs), dtype=float))
        for index, x in enumerate(xs):
            mean, variance = bridge_conditional_law(state.process, s, t, float(x))
            samples = np.asarray(state.value(t, mean + np.sqrt(variance) * normals), dtype=float)
            error = samples.std(ddof=1) / np.sqrt(samples.size)
            excess = (samples.mean() - current[index] - STANDARD_ERRORS * error) / max(1.0, abs(current[index]))
            if excess > worst:
                worst, witness = float(excess), (s, t, float(x))
    return _log_outcome(CheckReport.build(check_name, max(worst, 0.0), tolerance,
                                          witness, int(n_paths), started,
                                          details={'method': method, 'max_excess': worst, 'seed': int(seed)}))


def pde_left_side(f: Callable, t: float, xs: np.ndarray, horizon: float, steps: Tuple[float, float]) -> np.ndarray:
    """(x/(U - t)) f_x - f_xx/2 - f_t by Richardson-checked differences."""
    dt, dx = steps
    upper = horizon * (1.0 - 1e-9)
    f_t = derivative(lambda tt: np.asarray(f(tt, xs), dtype=float), t, dt, 1, lower=0.0, upper=upper)
    f_x = derivative(lambda xx: np.asarray(f(t, xx), dtype=float), xs, dx, 1)
    f_xx = derivative(lambda xx: np.asarray(f(t, xx), dtype=float), xs, dx, 2)
    return xs / (horizon - t) * f_x - 0.5 * f_xx - f_t


def check_pde_inequality(f: Callable, grid: Tuple[Sequence[float], Sequence[float]], horizon: float,
                         steps: Optional[Tuple[float, float]] = None, expected: Optional[Callable] = None,
                         tolerance: float = PDE_TOLERANCE, name: str = 'pde_inequality') -> CheckReport:
    """
    Finite-difference check of (x/(U - t)) f_x - f_xx/2 - f_t >= 0.

    worst_case is the largest negative excursion of the left side and, when
    an expected left side is supplied, the largest deviation from it. Points
    where the left side vanishes are listed in details and do not fail the
    check; details['strict'] says whether the inequality was strict away
    from x = 0.

    Raises:
        StepSizeError: the Richardson check rejected the steps
    """
    started = time.perf_counter()
    if steps is None:
        steps = (1e-4 * horizon, 1e-4 * horizon)
    times = np.asarray(grid[0], dtype=float)
    xs = np.asarray(grid[1], dtype=float)
    if np.any(times < 0.0) or np.any(times >= horizon):
        raise DomainError("PDE grid times must lie in [0, U)")

    minimum, minimum_at = np.inf, ()
    deviation, zero_points, strict = 0.0, [], True
    for t in times:
        lhs = np.atleast_1d(pde_left_side(f, float(t), xs, horizon, steps))
        index = int(np.argmin(lhs))
        if lhs[index] < minimum:
            minimum, minimum_at = float(lhs[index]), (float(t), float(xs[index]))
        near_zero = np.abs(lhs) <= tolerance
        zero_points.extend((float(t), float(x)) for x in xs[near_zero])
        if np.any(near_zero & (np.abs(xs) > 1e-8)):
            strict = False
        if expected is not None:
            target = np.asarray(expected(t, xs), dtype=float)
            deviation = max(deviation, float(np.max(np.abs(lhs - target) / np.maximum(1.0, np.abs(target)))))

    worst = max(0.0, -minimum, deviation)
    return _log_outcome(CheckReport.build(
        name, worst, tolerance, minimum_at, times.size * xs.size, started,
        details={'min_lhs': minimum, 'strict': strict, 'zero_points': zero_points[:50],
                 'max_expected_deviation': deviation if expected is not None else None,
                 'steps': list(steps)}))


def _premium_slope(model: InformationModel, t: float, ell: np.ndarray, h: float = 1e-5) -> np.ndarray:
    return (information_premium(model, t, ell + h) - information_premium(model, t, ell - h)) / (2.0 * h)


def _integrate_density_sde(model: InformationModel, times: np.ndarray, paths: np.ndarray):
    """
    Integrate d log M = -theta dW - theta^2 dt / 2 along exact P-paths.

    The innovation increments dW = dL - (theta - L/(U - t)) dt are rebuilt
    from the path with a trapezoidal drift; the stochastic integral uses the
    trapezoidal (Stratonovich) sum with its Ito correction.

    Returns:
        tuple: (log M on the grid, rebuilt dW increments)
    """
    U = model.horizon
    log_m = np.zeros_like(paths)
    increments = np.empty((paths.shape[0], times.size - 1))
    theta = np.asarray(information_premium(model, times[0], paths[:, 0]), dtype=float)
    slope = _premium_slope(model, times[0], paths[:, 0])
    for k in range(times.size - 1):
        dt = times[k + 1] - times[k]
        nxt = paths[:, k + 1]
        theta_next = np.asarray(information_premium(model, times[k + 1], nxt), dtype=float)
        slope_next = _premium_slope(model, times[k + 1], nxt)
        drift = theta - paths[:, k] / (U - times[k])
        drift_next = theta_next - nxt / (U - times[k + 1])
        dL = nxt - paths[:, k]
        increments[:, k] = dL - 0.5 * (drift + drift_next) * dt
        log_m[:, k + 1] = (log_m[:, k]
                           - 0.5 * (theta + theta_next) * dL
                           + 0.25 * (slope + slope_next) * dt
                           + 0.5 * (theta * drift + theta_next * drift_next) * dt
                           - 0.25 * (theta ** 2 + theta_next ** 2) * dt)
        theta, slope = theta_next, slope_next
    return log_m, increments


def check_measure_change(model: InformationModel, t_grid: Sequence[float], n_paths: int, seed: int,
                         sde_paths: int = 256, step_fraction: float = 1e-3,
                         martingale: Optional[Callable] = None, name: str = 'measure_change') -> CheckReport:
    """
    Validate the density process M_t of the bridge measure.

    Sub-checks: (i) E_P[M_t] = 1 within three standard errors on t_grid;
    (ii) M obtained by integrating its SDE on a step of step_fraction*U
    matches the closed form with pathwise RMS <= 1e-2; (iii) the rebuilt
    innovation increments have unit variance per unit time within three
    standard errors. worst_case is the largest sub-check statistic divided
    by its tolerance, so the report passes at tolerance 1.

    martingale(model, t, ell) replaces the closed form, for bug injection.
    """
    started = time.perf_counter()
    martingale = martingale or measure_change_martingale
    times = np.asarray(t_grid, dtype=float)
    model.guard(times, 't_grid')

    ensemble = simulate_paths(model, times, n_paths, 'P', seed)
    mean_z, mean_at = 0.0, ()
    for column, t in enumerate(times):
        values = np.asarray(martingale(model, float(t), ensemble.values[:, column]), dtype=float)
        error = values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else 0.0
        gap = abs(values.mean() - 1.0)
        z = gap / error if error > 0.0 else (0.0 if gap <= 1e-12 else np.inf)
        if z > mean_z or not mean_at:
            mean_z, mean_at = float(z), (float(t),)

    step = step_fraction * model.horizon
    count = int(np.ceil(times.max() / step - 1e-9))
    fine = np.linspace(0.0, count * step, count + 1)
    if fine[-1] > model.last_time:
        fine = fine[fine <= model.last_time]
    sde = simulate_paths(model, fine, sde_paths, 'P', seed + 1)
    log_m, increments = _integrate_density_sde(model, fine, sde.values)
    closed = np.column_stack([np.asarray(martingale(model, float(t), sde.values[:, k]), dtype=float)
                              for k, t in enumerate(fine)])
    checkpoints = np.argmin(np.abs(fine[:, None] - times[None, :]), axis=0)
    rms = float(np.sqrt(np.mean((np.exp(log_m[:, checkpoints]) - closed[:, checkpoints]) ** 2)))

    scaled = (increments / np.sqrt(np.diff(fine))).ravel()
    variance = scaled.var(ddof=1)
    var_z = abs(variance - 1.0) / np.sqrt(2.0 / (scaled.size - 1))

    statistics = {'mean': mean_z / STANDARD_ERRORS, 'sde': rms / SDE_RMS_TOLERANCE, 'innovation': var_z / STANDARD_ERRORS}
    worst_key = max(statistics, key=statistics.get)
    failed = [key for key, value in statistics.items() if value > 1.0]
    witness = mean_at if worst_key == 'mean' else (float(fine[-1]),)
    return _log_outcome(CheckReport.build(
        name, statistics[worst_key], 1.0, witness, int(n_paths) + int(sde_paths), started,
        details={'mean_z': mean_z, 'sde_rms': rms, 'innovation_variance': float(variance),
                 'innovation_z': float(var_z), 'failed_subchecks': failed, 'seed': int(seed),
                 'sde_step': step}))


def _standard_grid(horizon: float, n_times: int, n_states: int):
    times = np.linspace(0.0, 0.9 * horizon, n_times)
    states = np.linspace(-3.0, 3.0, n_states)
    return times, states


def _bond_pairs(times: np.ndarray) -> List[Tuple[float, float]]:
    return [(float(t), float(T)) for t in times for T in times if T > t]


def _equivalence_report(name, closed, generic, witnesses, samples, started, severity='error',
                        tolerance=EQUIVALENCE_TOLERANCE, **details):
    gaps = _relative_gap(closed, generic)
    index = int(np.argmax(gaps))
    return _log_outcome(CheckReport.build(name, float(gaps.ravel()[index]), tolerance, witnesses[index], samples,
                                          started, severity, details))


def _quadratic_equivalence(model: QuadraticModel, times, states, settings) -> List[CheckReport]:
    generic = model.kernel().without_closed_form()
    reports = []

    started = time.perf_counter()
    closed, numeric, witnesses = [], [], []
    for t in times:
        closed.extend(np.atleast_1d(quad_f(model, t, states)))
        numeric.extend(np.atleast_1d(eval_weighted_heat_kernel(generic, t, states, settings)))
        witnesses.extend((float(t), float(x)) for x in states)
    reports.append(_equivalence_report('closed_form.quadratic.f', closed, numeric, witnesses, len(closed), started))

    started = time.perf_counter()
    closed, numeric, witnesses = [], [], []
    for t, T in _bond_pairs(times):
        closed.extend(np.atleast_1d(quad_bond_price(model, t, T, states)))
        numeric.extend(np.atleast_1d(price_bond_generic(generic, t, T, states, settings)))
        witnesses.extend((t, T, float(x)) for x in states)
    reports.append(_equivalence_report('closed_form.quadratic.bond', closed, numeric, witnesses, len(closed),
                                       started))
    return reports


def _expquad_equivalence(model: ExpQuadraticModel, times, states, settings) -> List[CheckReport]:
    U = model.horizon
    generic = model.kernel().without_closed_form()
    state = state_function(model, settings)
    reports = []

    started = time.perf_counter()
    closed, printed, numeric, witnesses = [], [], [], []
    for t in times:
        closed.extend(np.atleast_1d(expquad_heat_kernel(model.eta, U, t, states)))
        printed.extend(np.atleast_1d(expquad_heat_kernel_printed(model.eta, U, t, states)))
        numeric.extend(np.atleast_1d(eval_weighted_heat_kernel(generic, t, states, settings)))
        witnesses.extend((float(t), float(x)) for x in states)
    reports.append(_equivalence_report('closed_form.expquad.kernel', closed, numeric, witnesses, len(closed),
                                       started, eta=model.eta))
    reports.append(_equivalence_report('closed_form.expquad.kernel_printed_constant', printed, numeric, witnesses,
                                       len(printed), started, severity='info', eta=model.eta))

    started = time.perf_counter()
    closed, numeric, witnesses = [], [], []
    for t, T in _bond_pairs(times):
        mean, variance = bridge_conditional_law(model.process, t, T, states)
        expected = gaussian_expectation(lambda y: state.reduced(T, y), mean, variance, settings, tilt=state.tilt(T))
        closed.extend(np.atleast_1d(expquad_bond_price(model, t, T, states)))
        numeric.extend(np.atleast_1d(expected / np.asarray(expquad_f_tilde(model, t, states))))
        witnesses.extend((t, T, float(x)) for x in states)
    reports.append(_equivalence_report('closed_form.expquad.bond', closed, numeric, witnesses, len(closed),
                                       started, special_g1=model.special_g1))
    return reports


def check_closed_form_equivalence(catalogue: Sequence[Union[QuadraticModel, ExpQuadraticModel]],
                                  grid: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
                                  settings: Optional[QuadratureSettings] = None) -> List[CheckReport]:
    """
    Compare each closed form with the generic quadrature engine.

    Quadratic models: f and P_tT. Exponential-quadratic models: the weighted
    heat kernel and the f~ bond price, plus an informational report on the
    printed kernel constant (U - t)^eta / (eta - 1/2).
    """
    settings = settings or default_settings()
    reports = []
    for model in catalogue:
        times, states = grid if grid is not None else _standard_grid(model.horizon, 10, 7)
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        if isinstance(model, QuadraticModel):
            reports.extend(_quadratic_equivalence(model, times, states, settings))
        elif isinstance(model, ExpQuadraticModel):
            reports.extend(_expquad_equivalence(model, times, states, settings))
        else:
            raise DomainError(f"No closed form for {type(model).__name__}")
    return reports


def _option_ladder(strikes: Sequence[float], s: float, t: float, T: float,
                   states: Sequence[float]) -> List[OptionSpec]:
    return [OptionSpec(s, t, T, float(K), float(L)) for K in strikes for L in states]


def check_errata(model: Optional[QuadraticModel] = None, settings: Optional[QuadratureSettings] = None,
                 eta: float = 1.0) -> List[CheckReport]:
    """
    Corrected formulas against quadrature, with the printed variants as info.

    Covers the conditional second moment, the bond weight argument, the
    two-root option integral and the exponential-quadratic kernel constant.
    """
    settings = settings or default_settings()
    if model is None:
        model = QuadraticModel(InformationModel(1.0, 10.0, _two_atoms()))
    U = model.horizon
    reports = []

    started = time.perf_counter()
    cases = [(u, t, x) for t in (0.0, 2.0, 5.0) for u in (0.5, 2.0, 4.0) for x in (-1.5, 0.5, 2.0)]
    oracle = []
    for u, t, x in cases:
        mean, variance = bridge_conditional_law(model.process, t, t + u, x)
        oracle.append(gaussian_expectation(lambda y: y ** 2, mean, variance, settings))
    corrected = [quad_conditional_second_moment(model, u, t, x) for u, t, x in cases]
    printed = [quad_conditional_second_moment_printed(model, u, t, x) for u, t, x in cases]
    reports.append(_equivalence_report('errata.second_moment', corrected, oracle, cases, len(cases), started))
    reports.append(_equivalence_report('errata.second_moment_printed', printed, oracle, cases, len(cases), started,
                                       severity='info'))

    started = time.perf_counter()
    kernel = model.kernel().without_closed_form()
    cases = [(t, T, x) for t, T in ((1.0, 3.0), (2.0, 5.0), (4.0, 8.0)) for x in (-1.0, 0.0, 1.5)]
    corrected = [price_bond_generic(kernel, t, T, x, settings) for t, T, x in cases]
    printed = [price_bond_printed_weight(kernel, t, T, x, settings) for t, T, x in cases]
    closed = [quad_bond_price(model, t, T, x) for t, T, x in cases]
    reports.append(_equivalence_report('errata.bond_weight_argument', corrected, closed, cases, len(cases), started))
    reports.append(_equivalence_report('errata.bond_weight_argument_printed', printed, closed, cases, len(cases),
                                       started, severity='info'))

    started = time.perf_counter()
    specs = (_option_ladder((0.1, 0.2, 0.3), 0.0, 2.0, 5.0, (0.0, 1.0))
             + _option_ladder((0.25, 0.35), 1.0, 3.0, 6.0, (-0.5, 1.5)))
    corrected, printed, oracle, witnesses = [], [], [], []
    for spec in specs:
        coeffs = quad_option_coeffs(model, spec)
        if coeffs.effective_c == 0.0 or coeffs.discriminant <= 0.0:
            continue
        corrected.append(positive_part_integral(coeffs)[0])
        printed.append(printed_case_two_integral(coeffs))
        oracle.append(_positive_part_by_quadrature(coeffs))
        witnesses.append((spec.s, spec.t, spec.T, spec.K, spec.L_s))
    if witnesses:
        reports.append(_equivalence_report('errata.two_root_option_integral', corrected, oracle, witnesses,
                                           len(witnesses), started, tolerance=OPTION_TOLERANCE))
        reports.append(_equivalence_report('errata.two_root_option_integral_printed', printed, oracle, witnesses,
                                           len(witnesses), started, severity='info', tolerance=OPTION_TOLERANCE))

    started = time.perf_counter()
    generic = KernelModel.exponential_quadratic(model.process, eta).without_closed_form()
    times, states = np.array([0.0, 3.0, 6.0, 8.0]), np.array([-1.0, 0.0, 1.0])
    corrected, printed, numeric, witnesses = [], [], [], []
    for t in times:
        numeric.extend(np.atleast_1d(eval_weighted_heat_kernel(generic, t, states, settings)))
        corrected.extend(np.atleast_1d(expquad_heat_kernel(eta, U, t, states)))
        printed.extend(np.atleast_1d(expquad_heat_kernel_printed(eta, U, t, states)))
        witnesses.extend((float(t), float(x)) for x in states)
    reports.append(_equivalence_report('errata.expquad_kernel_constant', corrected, numeric, witnesses,
                                       len(witnesses), started, eta=eta))
    reports.append(_equivalence_report('errata.expquad_kernel_constant_printed', printed, numeric, witnesses,
                                       len(witnesses), started, severity='info', eta=eta))
    return reports


def _positive_part_by_quadrature(coeffs) -> float:
    """Adaptive quadrature of (c y^2 + b y + a)^+ phi(y) split at the roots."""
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    roots = list(coeffs.roots or ())
    edges = [-np.inf] + sorted(roots) + [np.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = quad(lambda y: max(c * y * y + b * y + a, 0.0) * np.exp(-0.5 * y * y) / np.sqrt(2.0 * np.pi),
                        lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += value
    return total


def check_option_pricing(model: QuadraticModel, strikes: Sequence[float], s: float, t: float, T: float, L_s: float,
                         settings: Optional[QuadratureSettings] = None) -> List[CheckReport]:
    """
    Closed-form bond calls against the generic pricer and the arbitrage bounds.

    The bounds max(0, P_sT - K P_st) <= C <= P_sT are reported as the largest
    excursion outside them.
    """
    settings = settings or default_settings()
    generic = model.kernel().without_closed_form()
    specs = [OptionSpec(s, t, T, float(K), L_s) for K in strikes]

    started = time.perf_counter()
    closed = [quad_option_price(model, spec) for spec in specs]
    numeric = [lrb_option_price_generic(generic, spec, settings=settings) for spec in specs]
    witnesses = [(spec.K,) for spec in specs]
    reports = [_equivalence_report('option.generic_vs_closed_form', closed, numeric, witnesses, len(specs), started,
                                   tolerance=OPTION_TOLERANCE)]

    started = time.perf_counter()
    bond_T = quad_bond_price(model, s, T, L_s)
    bond_t = quad_bond_price(model, s, t, L_s)
    excursions = [max(max(0.0, bond_T - spec.K * bond_t) - price, price - bond_T, 0.0)
                  for spec, price in zip(specs, closed)]
    index = int(np.argmax(excursions))
    reports.append(_log_outcome(CheckReport.build('option.arbitrage_bounds', excursions[index], 1e-12,
                                                  witnesses[index], len(specs), started)))
    return reports


def check_weight_admissibility(weight: WeightFunction, grid_density: int, horizon: Optional[float] = None,
                               name: Optional[str] = None) -> CheckReport:
    """check_weight_validity as a report."""
    started = time.perf_counter()
    result = check_weight_validity(weight, grid_density, horizon)
    return _log_outcome(CheckReport.build(name or f"weight.{weight.to_dict().get('type')}", result['max_violation'],
                                          1e-12, result['witness'] or (), grid_density ** 3, started,
                                          details={'weight': repr(weight)}))


def check_bridge_martingale(horizon: float, time_pairs: Sequence[Tuple[float, float]], x_grid: Sequence[float],
                            settings: Optional[QuadratureSettings] = None) -> CheckReport:
    """E_B[h(T, L_T) | L_t = x] = h(t, x) for h = (U - t)^(1/2) exp(x^2/(2(U - t)))."""
    started = time.perf_counter()
    settings = settings or default_settings()
    process = InformationModel(1.0, horizon, _two_atoms())
    pairs = _ordered_pairs(time_pairs, horizon)
    xs = np.asarray(x_grid, dtype=float)
    gaps, witnesses = [], []
    for t, T in pairs:
        mean, variance = bridge_conditional_law(process, t, T, xs)
        expected = gaussian_expectation(lambda y: np.full(np.shape(y), np.sqrt(horizon - T)), mean, variance,
                                        settings, tilt=1.0 / (horizon - T))
        exact = bridge_martingale(horizon, t, xs)
        gaps.extend(np.atleast_1d(np.abs(expected - exact) / np.abs(exact)))
        witnesses.extend((t, T, float(x)) for x in xs)
    index = int(np.argmax(gaps))
    return _log_outcome(CheckReport.build('martingale.bridge_heat_kernel', gaps[index], MARTINGALE_TOLERANCE,
                                          witnesses[index], len(gaps), started))


def _two_atoms():
    return AtomicPrior([[0.0, 0.5], [1.0, 0.5]])
