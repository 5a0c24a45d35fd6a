"""
Named verification suites.

A suite is an ordered list of independent check tasks. Tasks may run on a
thread pool; reports come back in task order whatever the scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from config.manager import get_config
from lib.messages import ErrorMessages, LogMessages
from pricing.closed_form import ExponentialDecay, ExpQuadraticModel, QuadraticModel, expquad_f_tilde, quad_f
from pricing.process import AtomicPrior, InformationModel, PriorLaw, measure_change_martingale
from pricing.specs import (AffineWeight, CustomWeight, ExpLinearTerminal, KernelModel, PowerWeight,
                           QuadraticTerminal)
from verification.checks import (check_bridge_martingale, check_closed_form_equivalence, check_errata,
                                 check_measure_change, check_option_pricing, check_pde_inequality,
                                 check_supermartingale, check_weight_admissibility)
from verification.report import CheckReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuiteContext:
    """Inputs shared by the checks of one run."""

    seed: int
    paths: int
    sde_paths: int
    sde_step_fraction: float
    fd_step_fraction: float
    pde_dx: float = 1e-2
    sigma: float = 1.0
    horizon: float = 10.0

    @classmethod
    def from_config(cls, seed: Optional[int] = None, paths: Optional[int] = None,
                    config_manager=None) -> 'SuiteContext':
        section = (config_manager or get_config()).get_verification_config()
        return cls(
            seed=int(seed if seed is not None else section.get('seed', 0)),
            paths=int(paths if paths is not None else section.get('paths', 100000)),
            sde_paths=int(section.get('sde_paths', 256)),
            sde_step_fraction=float(section.get('sde_step_fraction', 1e-3)),
            fd_step_fraction=float(section.get('fd_step_fraction', 1e-4)),
            pde_dx=float(section.get('pde_dx', 1e-2))
        )

    def prior(self) -> PriorLaw:
        return AtomicPrior([[0.0, 0.5], [1.0, 0.5]])

    def process(self) -> InformationModel:
        return InformationModel(self.sigma, self.horizon, self.prior())

    def quadratic(self) -> QuadraticModel:
        return QuadraticModel(self.process())

    def expquad(self) -> ExpQuadraticModel:
        return ExpQuadraticModel(self.process(), 1.0, ExponentialDecay(1.0), special_g1=True)

    def time_pairs(self, count: int = 5) -> List:
        starts = np.linspace(0.0, 0.8 * self.horizon, count)
        ends = np.linspace(0.1 * self.horizon, 0.9 * self.horizon, count)
        return [(float(s), float(t)) for s in starts for t in ends if t > s]

    def states(self, count: int = 7) -> np.ndarray:
        return np.linspace(-3.0, 3.0, count)


Task = Callable[[SuiteContext], List[CheckReport]]


def _single(check: Callable[[SuiteContext], CheckReport]) -> Task:
    return lambda ctx: [check(ctx)]


def _supermartingale_quadratic(ctx):
    return check_supermartingale(ctx.quadratic(), ctx.time_pairs(), ctx.states())


def _supermartingale_expquad(ctx):
    return check_supermartingale(ctx.expquad(), ctx.time_pairs(), ctx.states())


def _supermartingale_mc(ctx):
    return check_supermartingale(ctx.quadratic(), ctx.time_pairs(), ctx.states(), method='mc',
                                 n_paths=ctx.paths, seed=ctx.seed)


def _supermartingale_exponential_linear(ctx):
    model = KernelModel(ctx.process(), ExpLinearTerminal(0.5), AffineWeight(ctx.horizon))
    return check_supermartingale(model, ctx.time_pairs(3), ctx.states(5),
                                 name='supermartingale.kernel.exponential_linear.quadrature')


def _pde_quadratic(ctx):
    model = ctx.quadratic()
    U = ctx.horizon
    grid = (np.linspace(0.0, 0.9 * U, 10), np.linspace(0.1, 3.0, 10))
    return check_pde_inequality(lambda t, x: quad_f(model, t, x), grid, U,
                                steps=(ctx.fd_step_fraction * U, ctx.pde_dx),
                                expected=lambda t, x: (U - t) * x ** 2, name='pde_inequality.quadratic')


def _pde_expquad(ctx):
    model = ctx.expquad()
    U = ctx.horizon
    grid = (np.linspace(0.0, 0.9 * U, 10), np.linspace(-2.0, 2.0, 9))
    return check_pde_inequality(lambda t, x: expquad_f_tilde(model, t, x), grid, U,
                                steps=(ctx.fd_step_fraction * U, ctx.pde_dx),
                                expected=lambda t, x: np.full(np.shape(x), model.g0(t)),
                                name='pde_inequality.expquad')


def _measure_change(ctx):
    return check_measure_change(ctx.process(), np.arange(1.0, 10.0), ctx.paths, ctx.seed,
                                sde_paths=ctx.sde_paths, step_fraction=ctx.sde_step_fraction)


def _martingale_core(ctx):
    return check_bridge_martingale(ctx.horizon, ctx.time_pairs(), ctx.states())


def _equivalence(ctx):
    return check_closed_form_equivalence([ctx.quadratic(), ctx.expquad()])


def _errata(ctx):
    return check_errata(ctx.quadratic())


def _options(ctx):
    return check_option_pricing(ctx.quadratic(), (0.1, 0.2, 0.3, 0.4, 0.5), 0.0, 2.0, 5.0, 0.0)


def _weights(ctx):
    U = ctx.horizon
    weights = {
        'weight.affine': AffineWeight(U),
        'weight.power': PowerWeight(U, 1.5),
        'weight.product': AffineWeight(U) * PowerWeight(U, 0.75),
    }
    return [check_weight_admissibility(weight, 21, U, name) for name, weight in weights.items()]


def _invalid_weight(ctx):
    model = KernelModel(ctx.process(), QuadraticTerminal(), CustomWeight(lambda t, u: t, 'w=t'))
    pairs = [(1.0, 5.0), (2.0, 6.0), (4.0, 8.0)]
    return check_supermartingale(model, pairs, (-1.0, 0.0, 1.0), name='supermartingale.injected.invalid_weight')


def _perturbed_martingale(ctx):
    def perturbed(model, t, ell):
        return 1.01 * measure_change_martingale(model, t, ell)

    return check_measure_change(ctx.process(), np.arange(1.0, 10.0), ctx.paths, ctx.seed,
                                sde_paths=ctx.sde_paths, step_fraction=ctx.sde_step_fraction,
                                martingale=perturbed, name='measure_change.injected.perturbed')


SUITES: Dict[str, List[Task]] = {
    'default': [
        _single(_supermartingale_quadratic),
        _single(_supermartingale_expquad),
        _single(_supermartingale_mc),
        _single(_supermartingale_exponential_linear),
        _single(_pde_quadratic),
        _single(_pde_expquad),
        _single(_measure_change),
        _single(_martingale_core),
        _equivalence,
        _options,
        _weights,
        _errata,
    ],
    'quick': [
        _single(_supermartingale_quadratic),
        _single(_supermartingale_expquad),
        _single(_pde_quadratic),
        _single(_martingale_core),
        _weights,
        _errata,
    ],
    'errata': [_errata],
    'injected': [_single(_invalid_weight), _single(_perturbed_martingale)],
}

QUICK_PATHS = 10000


def suite_names() -> List[str]:
    return sorted(SUITES)


def run_suite(name: str, seed: Optional[int] = None, paths: Optional[int] = None, workers: Optional[int] = None,
              config_manager=None) -> List[CheckReport]:
    """
    Run a named suite and return its reports in task order.

    Raises:
        KeyError: unknown suite name
    """
    if name not in SUITES:
        raise KeyError(ErrorMessages.UNKNOWN_SUITE.format(name=name, known=', '.join(suite_names())))
    if paths is None and name == 'quick':
        paths = QUICK_PATHS
    context = SuiteContext.from_config(seed, paths, config_manager)
    if workers is None:
        workers = int((config_manager or get_config()).get_simulation_config().get('workers', 1))

    tasks = SUITES[name]
    logger.info(LogMessages.SUITE_STARTED.format(name=name, tasks=len(tasks), seed=context.seed,
                                                 workers=workers))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda task: task(context), tasks))
    else:
        batches = [task(context) for task in tasks]

    reports = [report for batch in batches for report in batch]
    failed = [report.check_name for report in reports if report.blocking]
    logger.info(LogMessages.SUITE_FINISHED.format(name=name, checks=len(reports), failed=len(failed)))
    return reports
