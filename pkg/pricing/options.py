"""
European calls on discount bonds.

In the quadratic model the payoff at the option maturity, measured in
units of the bridge kernel, is A + B*L_t^2. Writing L_t = nu*Y + rho*L_s
with Y standard normal turns the price into the positive part of a
Gaussian-quadratic integral c*Y^2 + b*Y + a, classified by the sign of c
and of the discriminant. The generic pricer integrates the same positive
part numerically for any kernel model.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from lib.messages import LogMessages
from pricing.closed_form import QuadraticModel, quad_bond_price, quad_f
from pricing.errors import BracketError, DomainError, ImmediateExerciseError, PricingError
from pricing.kernels import bond_numerator, eval_weighted_heat_kernel, price_bond_generic
from pricing.process import bridge_conditional_law, bridge_density, lrb_transition_density
from pricing.quadrature import QuadratureSettings, default_settings, legendre_rule
from pricing.specs import KernelModel

logger = logging.getLogger(__name__)

# |c| below this fraction of max(|a|, |b|, 1) is treated as zero.
ZERO_CURVATURE_RTOL = 1e-15
DISCRIMINANT_RTOL = 1e-10
BRACKET_TAIL = 1e-12

CASE_LABELS = ('c0_bpos', 'c0_bneg', 'c0_b0', 'cneg_disc_pos', 'cpos_disc_pos',
               'cneg_disc_nonpos', 'cpos_disc_nonpos', 'intrinsic')


@dataclass(frozen=True)
class OptionSpec:
    """Call with maturity t and strike K on the bond maturing at T, valued at s given L_s."""

    s: float
    t: float
    T: float
    K: float
    L_s: float

    def validate(self, horizon: float):
        if not 0.0 <= self.s <= self.t <= self.T < horizon:
            raise DomainError("option times must satisfy 0 <= s <= t <= T < U")
        if not self.K >= 0.0:
            raise DomainError("strike must be nonnegative")

    def to_dict(self) -> dict:
        return {'s': self.s, 't': self.t, 'T': self.T, 'K': self.K, 'L_s': self.L_s}


@dataclass(frozen=True)
class QuadCoeffs:
    """Coefficients of the Gaussian-quadratic option integrand."""

    A: float
    B: float
    a: float
    b: float
    c: float
    nu_st: float
    discriminant: float
    roots: Optional[Tuple[float, float]]

    @property
    def effective_c(self) -> float:
        """c with roundoff-sized curvature snapped to zero."""
        scale = max(abs(self.a), abs(self.b), 1.0)
        return 0.0 if abs(self.c) <= ZERO_CURVATURE_RTOL * scale else self.c


def _stable_roots(a: float, b: float, c: float, discriminant: float) -> Tuple[float, float]:
    root = np.sqrt(discriminant)
    q = -0.5 * (b + (root if b >= 0.0 else -root))
    first = q / c
    second = a / q if q != 0.0 else -first
    return tuple(sorted((float(first), float(second))))


def quad_option_coeffs(model: QuadraticModel, spec: OptionSpec) -> QuadCoeffs:
    """
    A, B and the Gaussian-quadratic coefficients a, b, c.

    Raises:
        ImmediateExerciseError: s = t, where nu_st vanishes
    """
    U = model.horizon
    spec.validate(U)
    model.process.guard(spec.T, 'T')
    s, t, T, K, L = spec.s, spec.t, spec.T, spec.K, spec.L_s
    if s == t:
        raise ImmediateExerciseError("s = t: the option is exercised immediately")

    A = 0.25 * (T - t) * (U - T) ** 3 / (U - t) + ((U - T) ** 3 - K * (U - t) ** 3) / 12.0
    B = 0.25 * ((U - T) ** 4 / (U - t) ** 2 - K * (U - t) ** 2)
    nu2 = (t - s) * (U - t) / (U - s)
    nu = np.sqrt(nu2)
    rho = (U - t) / (U - s)

    a = A + B * rho ** 2 * L ** 2
    b = 2.0 * B * nu * rho * L
    c = B * nu2
    discriminant = -4.0 * A * B * nu2

    direct = b * b - 4.0 * a * c
    scale = max(abs(b * b), abs(4.0 * a * c), abs(discriminant), 1e-300)
    if abs(direct - discriminant) > DISCRIMINANT_RTOL * scale:
        raise PricingError(f"discriminant identity violated: {direct!r} vs {discriminant!r}")

    roots = _stable_roots(a, b, c, discriminant) if (c != 0.0 and discriminant > 0.0) else None
    return QuadCoeffs(A=float(A), B=float(B), a=float(a), b=float(b), c=float(c), nu_st=float(nu),
                      discriminant=float(discriminant), roots=roots)


def gaussian_quadratic_integral(a: float, b: float, c: float, lo: float, hi: float) -> float:
    """
    Integral of (c y^2 + b y + a) phi(y) over [lo, hi].

    Equals (a + c)[N(hi) - N(lo)] + (b + c lo) phi(lo) - (b + c hi) phi(hi);
    boundary terms vanish at infinite endpoints.
    """
    if lo > hi:
        raise DomainError("integral bounds must satisfy lo <= hi")

    def boundary(y):
        if np.isinf(y):
            return 0.0
        return (b + c * y) * norm.pdf(y)

    mass = norm.cdf(hi) - norm.cdf(lo) if hi <= 0.0 else norm.sf(lo) - norm.sf(hi)
    return float((a + c) * mass + boundary(lo) - boundary(hi))


def positive_part_integral(coeffs: QuadCoeffs) -> Tuple[float, str]:
    """Integral of (c y^2 + b y + a)^+ phi(y) over the real line, with the case label."""
    a, b = coeffs.a, coeffs.b
    c = coeffs.effective_c
    if c == 0.0:
        if b == 0.0:
            return max(a, 0.0), 'c0_b0'
        root = -a / b
        if b > 0.0:
            return gaussian_quadratic_integral(a, b, 0.0, root, np.inf), 'c0_bpos'
        return gaussian_quadratic_integral(a, b, 0.0, -np.inf, root), 'c0_bneg'

    if coeffs.discriminant > 0.0:
        roots = coeffs.roots or _stable_roots(a, b, c, coeffs.discriminant)
        inside = gaussian_quadratic_integral(a, b, c, roots[0], roots[1])
        if c < 0.0:
            return max(inside, 0.0), 'cneg_disc_pos'
        return max((a + c) - inside, 0.0), 'cpos_disc_pos'

    if c < 0.0:
        return 0.0, 'cneg_disc_nonpos'
    return a + c, 'cpos_disc_nonpos'


def printed_case_two_integral(coeffs: QuadCoeffs) -> float:
    """
    The two-root formulas in their commonly printed form.

    Kept only to report how far they sit from the exact integral.
    """
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    root = np.sqrt(coeffs.discriminant)
    y_plus = (-b + root) / (2.0 * c)
    y_minus = (-b - root) / (2.0 * c)
    if c < 0.0:
        return float((a + b) * (norm.cdf(y_plus) - norm.cdf(y_minus))
                     + (b + c * y_minus) * np.exp(-0.5 * y_minus ** 2)
                     - (b + c * y_plus) * np.exp(-0.5 * y_plus ** 2))
    return float((a + c) * (norm.cdf(y_minus) + norm.cdf(y_plus))
                 - (b + c * y_minus) * norm.pdf(y_minus)
                 + (b + c * y_plus) * norm.pdf(y_plus))


def quad_option_quote(model: QuadraticModel, spec: OptionSpec) -> Tuple[float, str]:
    """Price and case label of the bond call in the quadratic model."""
    spec.validate(model.horizon)
    if spec.s == spec.t:
        bond = quad_bond_price(model, spec.t, spec.T, spec.L_s)
        return max(bond - spec.K, 0.0), 'intrinsic'
    coeffs = quad_option_coeffs(model, spec)
    positive, label = positive_part_integral(coeffs)
    price = positive / quad_f(model, spec.s, spec.L_s)
    logger.debug(LogMessages.OPTION_PRICED.format(label=label, price=price))
    return float(price), label


def quad_option_price(model: QuadraticModel, spec: OptionSpec) -> float:
    """C_st = I_pos / f(s, L_s)."""
    return quad_option_quote(model, spec)[0]


def _option_settings():
    from config.manager import get_config
    options = get_config().get_option_config()
    return {
        'scan_points': int(options.get('scan_points', 512)),
        'root_xtol': float(options.get('root_xtol', 1e-12)),
        'max_sign_changes': int(options.get('max_sign_changes', 8)),
        'bracket_width_sd': float(options.get('bracket_width_sd', 14.0)),
    }


def _legendre_integral(func, lo, hi, n):
    nodes, weights = legendre_rule(n)
    half = 0.5 * (hi - lo)
    return half * float(np.sum(weights * func(0.5 * (hi + lo) + half * nodes)))


def lrb_option_price_generic(model: KernelModel, spec: OptionSpec, bracket: Optional[Tuple[float, float]] = None,
                             settings: Optional[QuadratureSettings] = None) -> float:
    """
    Bond call for any kernel model.

    With h(z) = I(t, z) - K f(t, z), where I(t, z) is the bond numerator, the
    price is the integral of h^+ against the transition law of L_t given
    L_s, divided by f(s, L_s). The positive set of h is located by a scan
    followed by root refinement.

    Raises:
        BracketError: h * density is not negligible at the bracket ends, or
            h changes sign too often
    """
    settings = settings or default_settings()
    options = _option_settings()
    U = model.horizon
    spec.validate(U)
    model.process.guard(spec.T, 'T')
    s, t, T, K, L = spec.s, spec.t, spec.T, spec.K, spec.L_s

    if K == 0.0:
        return float(price_bond_generic(model, s, T, L, settings))
    if s == t:
        return max(float(price_bond_generic(model, t, T, L, settings)) - K, 0.0)

    def h(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        numerator = bond_numerator(model, t, T, z, settings)
        return np.asarray(numerator - K * eval_weighted_heat_kernel(model, t, z, settings), dtype=float)

    if model.measure == 'B':
        def density(z):
            return bridge_density(model.process, s, t, L, z)
    else:
        terminal = model.process.terminal_law()

        def density(z):
            return lrb_transition_density(model.lrb, terminal, s, t, L, z)

    if bracket is None:
        mean, variance = bridge_conditional_law(model.process, s, t, L)
        growth = model.terminal.growth(t) if model.measure == 'B' else 0.0
        shrink = 1.0 - growth * variance
        if shrink <= 0.0:
            raise BracketError("payoff grows faster than the transition law decays")
        centre = mean / shrink
        width = options['bracket_width_sd'] * np.sqrt(variance / shrink)
        if model.measure == 'P':
            lo_end, hi_end = model.process.terminal_law().support_bounds()
            drift = (t - s) / (U - s)
            centre_lo = L + drift * (lo_end - L)
            centre_hi = L + drift * (hi_end - L)
            bracket = (min(centre_lo, centre) - width, max(centre_hi, centre) + width)
        else:
            bracket = (centre - width, centre + width)
    z_min, z_max = float(bracket[0]), float(bracket[1])
    if not z_min < z_max:
        raise BracketError("bracket must satisfy z_min < z_max")

    ends = np.array([z_min, z_max])
    tails = np.abs(h(ends)) * np.asarray(density(ends), dtype=float)
    if np.any(tails >= BRACKET_TAIL):
        raise BracketError(f"bracket [{z_min}, {z_max}] too narrow: tail mass {np.max(tails):.3g}",
                           {'bracket': [z_min, z_max]})

    grid = np.linspace(z_min, z_max, options['scan_points'])
    values = h(grid)
    signs = np.sign(values)
    changes = np.flatnonzero(signs[:-1] * signs[1:] < 0.0)
    if changes.size > options['max_sign_changes']:
        raise BracketError(f"h changes sign {changes.size} times on the bracket")

    def h_scalar(z):
        return float(h(z)[0])

    roots = [brentq(h_scalar, grid[i], grid[i + 1], xtol=options['root_xtol']) for i in changes]
    edges = [z_min] + roots + [z_max]

    def integrand(z):
        return np.maximum(h(z), 0.0) * np.asarray(density(z), dtype=float)

    n = settings.legendre_nodes
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        midpoint = 0.5 * (lo + hi)
        if h_scalar(midpoint) <= 0.0:
            continue
        coarse = _legendre_integral(integrand, lo, hi, max(n // 2, 2))
        fine = _legendre_integral(integrand, lo, hi, n)
        if abs(fine - coarse) > max(settings.epsrel * abs(fine), settings.epsabs):
            refined = _legendre_integral(integrand, lo, hi, 2 * n)
            if abs(refined - fine) > max(1e-7 * abs(refined), settings.epsabs):
                raise BracketError("positive-part integral did not settle", {'interval': [lo, hi]})
            fine = refined
        total += fine

    price = total / float(eval_weighted_heat_kernel(model, s, L, settings))
    logger.debug(LogMessages.OPTION_PRICED.format(label='generic', price=price))
    return float(price)
