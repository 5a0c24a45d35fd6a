"""
Brownian bridge information process.

The information process L_t = sigma*t*X + beta_t reveals the terminal
factor X at the horizon U. Under the bridge measure B it is a standard
Brownian bridge on [0, U]; under the real measure P the terminal factor
is drawn from the prior. This module holds the prior laws, the Bayes
posterior, the P-to-B density process and the generic Levy random
bridge transition density.
"""

import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from lib.messages import LogMessages
from pricing.errors import DomainError, HorizonError, PosteriorError, SimulationError
from pricing.quadrature import (QuadratureSettings, adaptive_integral, default_settings, gaussian_expectation,
                                legendre_rule)

logger = logging.getLogger(__name__)

MEASURES = ('P', 'B')

# Atom weights must sum to one within this tolerance.
ATOM_WEIGHT_TOLERANCE = 1e-12

GAUSSIAN_SUPPORT_SD = 10.0


class PriorLaw(ABC):
    """Law of the terminal factor X."""

    @abstractmethod
    def mean(self) -> float:
        """Prior mean."""

    @abstractmethod
    def hull(self) -> Tuple[float, float]:
        """Convex hull of the support (may be infinite)."""

    @abstractmethod
    def support_bounds(self) -> Tuple[float, float]:
        """Finite interval carrying all but a negligible part of the mass."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Independent draws."""

    @abstractmethod
    def log_expectation_exp(self, alpha, beta):
        """log E[exp(alpha*X - beta*X^2/2)], vectorized over alpha and beta."""

    @abstractmethod
    def tilted_mean(self, alpha, beta):
        """Mean of X under the law reweighted by exp(alpha*X - beta*X^2/2)."""

    @abstractmethod
    def integrate(self, func: Callable, settings: Optional[QuadratureSettings] = None):
        """Integral of func against the law; func maps a scalar to a scalar or array."""

    @abstractmethod
    def scaled(self, factor: float) -> 'PriorLaw':
        """Law of factor*X for factor > 0."""

    @abstractmethod
    def to_dict(self) -> dict:
        """Canonical JSON representation."""

    def atoms(self):
        """(values, weights) for discrete laws, None otherwise."""
        return None


class AtomicPrior(PriorLaw):
    """Finitely many atoms (value, weight)."""

    def __init__(self, atoms: Sequence[Sequence[float]]):
        if not atoms:
            raise DomainError("Atomic prior needs at least one atom")
        values = np.asarray([float(a[0]) for a in atoms])
        weights = np.asarray([float(a[1]) for a in atoms])
        if np.any(weights < 0.0) or not np.all(np.isfinite(weights)) or not np.all(np.isfinite(values)):
            raise DomainError("Atom weights must be finite and nonnegative")
        if abs(weights.sum() - 1.0) > ATOM_WEIGHT_TOLERANCE:
            raise DomainError(f"Atom weights sum to {weights.sum()!r}, expected 1")
        self.values = values
        self.weights = weights
        self._log_weights = np.log(np.where(weights > 0.0, weights, 1.0))
        self._log_weights[weights == 0.0] = -np.inf

    @classmethod
    def point_mass(cls, value: float) -> 'AtomicPrior':
        return cls([(value, 1.0)])

    def mean(self):
        return float(np.dot(self.values, self.weights))

    def hull(self):
        support = self.values[self.weights > 0.0]
        return float(support.min()), float(support.max())

    def support_bounds(self):
        return self.hull()

    def sample(self, rng, size):
        return rng.choice(self.values, size=size, p=self.weights)

    def _log_terms(self, alpha, beta):
        alpha = np.asarray(alpha, dtype=float)[..., None]
        beta = np.asarray(beta, dtype=float)[..., None]
        return self._log_weights + alpha * self.values - 0.5 * beta * self.values ** 2

    def log_expectation_exp(self, alpha, beta):
        return logsumexp(self._log_terms(alpha, beta), axis=-1)

    def tilted_mean(self, alpha, beta):
        terms = self._log_terms(alpha, beta)
        probs = np.exp(terms - np.max(terms, axis=-1, keepdims=True))
        lo, hi = self.hull()
        return np.clip(np.sum(probs * self.values, axis=-1) / np.sum(probs, axis=-1), lo, hi)

    def integrate(self, func, settings=None):
        total = 0.0
        for value, weight in zip(self.values, self.weights):
            if weight > 0.0:
                total = total + weight * np.asarray(func(value), dtype=float)
        return total

    def scaled(self, factor):
        return AtomicPrior([(factor * v, w) for v, w in zip(self.values, self.weights)])

    def atoms(self):
        return self.values, self.weights

    def to_dict(self):
        return {'type': 'atoms', 'atoms': [[float(v), float(w)] for v, w in zip(self.values, self.weights)]}

    def __repr__(self):
        return f"AtomicPrior({self.to_dict()['atoms']})"


class GaussianPrior(PriorLaw):
    """Normal(mean, variance) prior; the posterior stays Gaussian."""

    def __init__(self, mean: float, variance: float):
        if not variance > 0.0:
            raise DomainError("Gaussian prior variance must be positive")
        self.location = float(mean)
        self.variance = float(variance)

    def mean(self):
        return self.location

    def hull(self):
        return -np.inf, np.inf

    def support_bounds(self):
        half = GAUSSIAN_SUPPORT_SD * np.sqrt(self.variance)
        return self.location - half, self.location + half

    def density(self, z):
        return norm.pdf(z, loc=self.location, scale=np.sqrt(self.variance))

    def sample(self, rng, size):
        return self.location + np.sqrt(self.variance) * rng.standard_normal(size)

    def log_expectation_exp(self, alpha, beta):
        m, v = self.location, self.variance
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        spread = 1.0 + beta * v
        return -0.5 * np.log(spread) + (2.0 * alpha * m + alpha ** 2 * v - beta * m ** 2) / (2.0 * spread)

    def tilted_mean(self, alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        return (self.location + alpha * self.variance) / (1.0 + beta * self.variance)

    def integrate(self, func, settings=None):
        def stacked(z):
            return np.moveaxis(np.asarray([np.asarray(func(node), dtype=float) for node in z]), 0, -1)

        return gaussian_expectation(stacked, self.location, self.variance, settings)

    def scaled(self, factor):
        return GaussianPrior(factor * self.location, factor ** 2 * self.variance)

    def to_dict(self):
        return {'type': 'gaussian', 'mean': self.location, 'variance': self.variance}

    def __repr__(self):
        return f"GaussianPrior(mean={self.location}, variance={self.variance})"


class UniformPrior(PriorLaw):
    """Uniform prior on [lo, hi]; tilted moments by Gauss-Legendre."""

    def __init__(self, lo: float, hi: float, legendre_nodes: Optional[int] = None):
        if not lo < hi:
            raise DomainError("Uniform prior needs lo < hi")
        self.lo = float(lo)
        self.hi = float(hi)
        self.legendre_nodes = legendre_nodes

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def hull(self):
        return self.lo, self.hi

    def support_bounds(self):
        return self.hull()

    def density(self, z):
        z = np.asarray(z, dtype=float)
        return np.where((z >= self.lo) & (z <= self.hi), 1.0 / (self.hi - self.lo), 0.0)

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    def _tilted_nodes(self, alpha, beta):
        """
        Gauss-Legendre offsets and log-weights for the reweighted law.

        Returns (x0, dx, log_w): nodes are x0 + dx and log_w holds
        alpha*x - beta*x^2/2 minus its value at x0, the point of the window
        nearest the bump centre.

        With beta > 0 the reweighting is a Gaussian bump; nodes are confined to
        the part of [lo, hi] within 12 sd of its centre so that sharp
        posteriors near the horizon are still resolved.
        """
        n = self.legendre_nodes or default_settings().legendre_nodes
        nodes, weights = legendre_rule(n)
        alpha, beta = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))
        lo = np.full(alpha.shape, self.lo)
        hi = np.full(alpha.shape, self.hi)
        reference = np.where(alpha > 0.0, hi, lo)
        peaked = beta > 0.0
        if np.any(peaked):
            safe_beta = np.where(peaked, beta, 1.0)
            centre = alpha / safe_beta
            half = 12.0 / np.sqrt(safe_beta)
            window_lo = np.clip(centre - half, self.lo, self.hi)
            window_hi = np.clip(centre + half, self.lo, self.hi)
            # Bump entirely outside [lo, hi]: the mass sits in an exponential
            # layer at the nearer end, of width ~ 1/(beta * distance).
            below = centre + half < self.lo
            above = centre - half > self.hi
            span = self.hi - self.lo
            layer_lo = np.minimum(span, 60.0 / (safe_beta * np.maximum(self.lo - centre, 1e-300)))
            layer_hi = np.minimum(span, 60.0 / (safe_beta * np.maximum(centre - self.hi, 1e-300)))
            window_lo = np.where(below, self.lo, np.where(above, self.hi - layer_hi, window_lo))
            window_hi = np.where(below, self.lo + layer_lo, np.where(above, self.hi, window_hi))
            lo = np.where(peaked, window_lo, lo)
            hi = np.where(peaked, window_hi, hi)
            reference = np.where(peaked, np.clip(centre, lo, hi), reference)
        half_width = 0.5 * (hi - lo)
        dx = (0.5 * (hi + lo) - reference)[..., None] + half_width[..., None] * nodes
        slope = (alpha - beta * reference)[..., None]
        log_w = (np.log(weights) + np.log(half_width / (self.hi - self.lo))[..., None]
                 + slope * dx - 0.5 * beta[..., None] * dx ** 2)
        return reference, dx, log_w

    def log_expectation_exp(self, alpha, beta):
        reference, _, log_w = self._tilted_nodes(alpha, beta)
        alpha, beta = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))
        return logsumexp(log_w, axis=-1) + alpha * reference - 0.5 * beta * reference ** 2

    def tilted_mean(self, alpha, beta):
        reference, dx, log_w = self._tilted_nodes(alpha, beta)
        probs = np.exp(log_w - np.max(log_w, axis=-1, keepdims=True))
        shift = np.sum(probs * dx, axis=-1) / np.sum(probs, axis=-1)
        return np.clip(reference + shift, self.lo, self.hi)

    def integrate(self, func, settings=None):
        return adaptive_integral(lambda z: np.asarray(func(z), dtype=float) / (self.hi - self.lo),
                                 self.lo, self.hi, settings)

    def scaled(self, factor):
        return UniformPrior(factor * self.lo, factor * self.hi, self.legendre_nodes)

    def to_dict(self):
        return {'type': 'uniform', 'lo': self.lo, 'hi': self.hi}

    def __repr__(self):
        return f"UniformPrior(lo={self.lo}, hi={self.hi})"


def prior_from_dict(data: dict) -> PriorLaw:
    """Build a prior from its canonical JSON representation."""
    kind = data.get('type')
    if kind == 'atoms':
        return AtomicPrior(data['atoms'])
    if kind == 'gaussian':
        return GaussianPrior(data['mean'], data['variance'])
    if kind == 'uniform':
        return UniformPrior(data['lo'], data['hi'])
    raise DomainError(f"Unknown prior type: {kind!r}")


@dataclass(frozen=True)
class InformationModel:
    """
    Information flow rate sigma, horizon U and prior law of the terminal factor.

    Every evaluation rejects t > U - epsilon_fraction*U.
    """

    sigma: float
    horizon: float
    prior: PriorLaw
    epsilon_fraction: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0.0):
            raise DomainError("sigma must be positive")
        if not (np.isfinite(self.horizon) and self.horizon > 0.0):
            raise DomainError("U must be positive")
        if not isinstance(self.prior, PriorLaw):
            raise DomainError("prior must be a PriorLaw")
        if self.epsilon_fraction is None:
            object.__setattr__(self, 'epsilon_fraction', default_settings().horizon_epsilon_fraction)

    @property
    def epsilon(self) -> float:
        return self.epsilon_fraction * self.horizon

    @property
    def last_time(self) -> float:
        """Latest admissible evaluation time."""
        return self.horizon - self.epsilon

    def guard(self, t, name: str = 't'):
        """Raise unless 0 <= t <= U - epsilon (elementwise)."""
        t = np.asarray(t, dtype=float)
        if np.any(~np.isfinite(t)) or np.any(t < 0.0):
            raise DomainError(f"{name} must be a finite nonnegative time")
        if np.any(t > self.last_time):
            raise HorizonError(f"{name}={np.max(t)!r} is too close to the horizon U={self.horizon!r}")

    def posterior_coefficients(self, t, ell):
        """(alpha, beta) with posterior density proportional to exp(alpha*x - beta*x^2/2) against the prior."""
        t = np.asarray(t, dtype=float)
        ell = np.asarray(ell, dtype=float)
        k = self.horizon / (self.horizon - t)
        return k * self.sigma * ell, k * self.sigma ** 2 * t

    def terminal_law(self) -> PriorLaw:
        """Law of L_U = sigma*U*X."""
        return self.prior.scaled(self.sigma * self.horizon)

    def to_dict(self) -> dict:
        return {'sigma': self.sigma, 'U': self.horizon, 'prior': self.prior.to_dict()}


def bridge_conditional_law(model: InformationModel, s, t, x):
    """
    Law of L_t given L_s = x under the bridge measure.

    Returns:
        tuple: (mean, variance), broadcast over x
    """
    model.guard(t)
    model.guard(s, 's')
    if np.any(np.asarray(s) > np.asarray(t)):
        raise DomainError("bridge law requires s <= t")
    U = model.horizon
    x = np.asarray(x, dtype=float)
    mean = x * (U - t) / (U - s)
    variance = np.broadcast_to(np.asarray((t - s) * (U - t) / (U - s), dtype=float), mean.shape)
    if mean.ndim == 0:
        return float(mean), float(variance)
    return mean, np.array(variance)


def bridge_density(model: InformationModel, s, t, x, y):
    """Bridge-measure transition density of L from (s, x) to (t, y), s < t."""
    mean, variance = bridge_conditional_law(model, s, t, x)
    if np.any(np.asarray(variance) <= 0.0):
        raise DomainError("bridge density needs s < t")
    return norm.pdf(y, loc=mean, scale=np.sqrt(variance))


def information_premium(model: InformationModel, t, ell):
    """sigma*U/(U-t) * E[X | L_t = ell]: the volatility of the P-to-B density process."""
    return model.sigma * model.horizon / (model.horizon - np.asarray(t, dtype=float)) * posterior_mean(model, t, ell)


def posterior_mean(model: InformationModel, t, ell):
    """
    E_P[X | L_t = ell] from the Bayes posterior.

    Raises:
        HorizonError: t too close to U
        PosteriorError: the posterior could not be normalized
    """
    model.guard(t)
    alpha, beta = model.posterior_coefficients(t, ell)
    value = model.prior.tilted_mean(alpha, beta)
    if not np.all(np.isfinite(value)):
        raise PosteriorError(f"Posterior at t={t!r} could not be normalized")
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def measure_change_martingale(model: InformationModel, t, ell):
    """
    Density process M_t = dB/dP on F_t, evaluated as 1/Phi_t(ell).

    Phi_t(ell) is the posterior normalizer E_nu[exp(alpha*X - beta*X^2/2)].
    """
    model.guard(t)
    alpha, beta = model.posterior_coefficients(t, ell)
    log_phi = model.prior.log_expectation_exp(alpha, beta)
    if not np.all(np.isfinite(log_phi)):
        raise PosteriorError(f"Posterior normalizer at t={t!r} is not finite")
    value = np.exp(-np.asarray(log_phi, dtype=float))
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class PathSample:
    """One simulated path of the information process."""

    times: np.ndarray
    values: np.ndarray
    measure_tag: str
    seed_info: Tuple[int, int]
    terminal_factor: Optional[float] = None


@dataclass
class PathEnsemble:
    """
    A collection of simulated paths on a common grid.

    values has one row per path; terminal_factors holds X for P-measure runs.
    """

    times: np.ndarray
    values: np.ndarray
    measure: str
    seed: int
    terminal_factors: Optional[np.ndarray] = None
    normals: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __iter__(self) -> Iterator[PathSample]:
        for index in range(len(self)):
            yield self.path(index)

    def path(self, index: int) -> PathSample:
        factor = None if self.terminal_factors is None else float(self.terminal_factors[index])
        return PathSample(self.times, self.values[index], self.measure, (self.seed, index), factor)

    def at(self, t: float) -> np.ndarray:
        """Values of every path at grid time t."""
        matches = np.flatnonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-12))
        if matches.size == 0:
            raise DomainError(f"t={t!r} is not on the simulation grid")
        return self.values[:, matches[0]]

    def rows(self) -> Iterator[Tuple[int, float, float]]:
        """(path_id, time, value) in path-major order."""
        for index in range(len(self)):
            for time, value in zip(self.times, self.values[index]):
                yield index, float(time), float(value)


def path_generator(seed: int, index: int) -> np.random.Generator:
    """Per-path stream; identical for a given (seed, index) whatever the chunking."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


def _validate_grid(model: InformationModel, grid) -> np.ndarray:
    times = np.asarray(grid, dtype=float).ravel()
    if times.size == 0:
        raise DomainError("simulation grid is empty")
    if np.any(np.diff(times) <= 0.0):
        raise DomainError("simulation grid must be strictly increasing")
    model.guard(times, 'grid point')
    return times


def _simulate_chunk(model, times, measure, seed, start, stop, values, factors, normals):
    U = model.horizon
    count = stop - start
    draws = np.empty((count, times.size))
    for row, index in enumerate(range(start, stop)):
        rng = path_generator(seed, index)
        draws[row] = rng.standard_normal(times.size)
        if factors is not None:
            factors[index] = model.prior.sample(rng, 1)[0]

    bridge = np.zeros(count)
    previous = 0.0
    for column, t in enumerate(times):
        scale = (U - t) / (U - previous)
        variance = (t - previous) * scale
        bridge = bridge * scale + np.sqrt(variance) * draws[:, column]
        values[start:stop, column] = bridge
        previous = t

    if factors is not None:
        values[start:stop] += model.sigma * times[None, :] * factors[start:stop, None]
    if normals is not None:
        normals[start:stop] = draws


def simulate_paths(model: InformationModel, grid: Sequence[float], n_paths: int, measure: str = 'B',
                   seed: int = 0, workers: Optional[int] = None, chunk_size: Optional[int] = None,
                   keep_normals: bool = False) -> PathEnsemble:
    """
    Exact simulation of the information process on a grid.

    The bridge is built by sequential conditioning, so there is no
    discretization bias. Under P the terminal factor is drawn from the prior
    after the path's normals, so P and B runs with the same seed share their
    bridge component. Results do not depend on workers or chunk_size.
    """
    if measure not in MEASURES:
        raise DomainError(f"measure must be one of {MEASURES}")
    if int(n_paths) < 1:
        raise DomainError("n_paths must be at least 1")
    times = _validate_grid(model, grid)

    if workers is None or chunk_size is None:
        from config.manager import get_config
        simulation = get_config().get_simulation_config()
        workers = workers or int(simulation.get('workers', 1))
        chunk_size = chunk_size or int(simulation.get('chunk_size', 4096))

    n_paths = int(n_paths)
    values = np.empty((n_paths, times.size))
    factors = np.empty(n_paths) if measure == 'P' else None
    normals = np.empty((n_paths, times.size)) if keep_normals else None
    chunks = [(start, min(start + chunk_size, n_paths)) for start in range(0, n_paths, chunk_size)]
    logger.debug(LogMessages.SIMULATION_STARTED.format(paths=n_paths, points=times.size,
                                                       measure=measure, chunks=len(chunks)))

    try:
        if workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_simulate_chunk, model, times, measure, seed, start, stop,
                                       values, factors, normals) for start, stop in chunks]
                for future in futures:
                    future.result()
        else:
            for start, stop in chunks:
                _simulate_chunk(model, times, measure, seed, start, stop, values, factors, normals)
    except (ValueError, MemoryError) as e:
        raise SimulationError(f"Path simulation failed: {e}") from e

    return PathEnsemble(times, values, measure, int(seed), factors, normals)


@dataclass(frozen=True)
class LrbDensitySpec:
    """
    Levy random bridge built on a Levy process with marginal densities rho(t, x).

    log_rho, when given, is used for the psi ratios to avoid underflow.
    """

    rho: Callable
    horizon: float
    log_rho: Optional[Callable] = None
    settings: Optional[QuadratureSettings] = None
    name: str = 'custom'

    @classmethod
    def brownian(cls, horizon: float, settings: Optional[QuadratureSettings] = None) -> 'LrbDensitySpec':
        """Brownian motion: rho(t, .) is the Normal(0, t) density."""
        def rho(t, x):
            return norm.pdf(x, scale=np.sqrt(t))

        def log_rho(t, x):
            return norm.logpdf(x, scale=np.sqrt(t))

        return cls(rho=rho, horizon=float(horizon), log_rho=log_rho, settings=settings, name='brownian')

    def log_density(self, t, x):
        if self.log_rho is not None:
            return self.log_rho(t, x)
        with np.errstate(divide='ignore'):
            return np.log(self.rho(t, x))


def lrb_psi(spec: LrbDensitySpec, terminal_law: PriorLaw, t: float, y):
    """psi_t(y) = integral of rho_{U-t}(z - y) / rho_U(z) against the terminal law."""
    U = spec.horizon
    y = np.asarray(y, dtype=float)
    if t == 0.0:
        return np.ones_like(y) if y.ndim else 1.0

    def ratio(z):
        return np.exp(spec.log_density(U - t, z - y) - spec.log_density(U, z))

    value = terminal_law.integrate(ratio, spec.settings)
    return value


def lrb_transition_density(spec: LrbDensitySpec, prior: PriorLaw, s: float, t: float, x, y):
    """
    Transition density of a Levy random bridge from (s, x) to (t, y).

    prior is the law of the bridge's terminal value at U. The value is
    psi_t(y) / psi_s(x) * rho_{t-s}(y - x).
    """
    U = spec.horizon
    if not 0.0 <= s < t:
        raise DomainError("LRB transition density needs 0 <= s < t")
    if t >= U:
        raise HorizonError(f"t={t!r} is not before the horizon U={U!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    psi_s = np.asarray(lrb_psi(spec, prior, s, x), dtype=float)
    if np.any(psi_s <= 0.0) or not np.all(np.isfinite(psi_s)):
        raise PosteriorError(f"psi vanishes at s={s!r}; the conditioning point is off the support")
    psi_t = np.asarray(lrb_psi(spec, prior, t, y), dtype=float)
    density = psi_t / psi_s * spec.rho(t - s, y - x)
    return float(density) if np.ndim(density) == 0 else density
