"""
Row producers shared by the CLI and the pricing service.

Each producer takes a loaded model (QuadraticModel, ExpQuadraticModel or a
generic KernelModel) and returns a list of dictionaries keyed by the column
names below, in input order. Closed forms are used whenever the model has
them; everything else goes through the generic kernel engine.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

from pricing.closed_form import ExpQuadraticModel, QuadraticModel, expquad_bond_price, quad_bond_price
from pricing.errors import DomainError
from pricing.kernels import price_bond_generic
from pricing.options import OptionSpec, lrb_option_price_generic, quad_option_quote
from pricing.process import simulate_paths
from pricing.quadrature import QuadratureSettings, default_settings
from pricing.specs import KernelModel

logger = logging.getLogger(__name__)

BOND_COLUMNS = ('t', 'T', 'L', 'price')
CURVE_COLUMNS = ('T', 'price', 'yield')
OPTION_COLUMNS = ('s', 't', 'T', 'K', 'price', 'case_label')
PATH_COLUMNS = ('path_id', 'time', 'value')


def quadrature_settings(overrides: Optional[Dict] = None) -> QuadratureSettings:
    """Configured settings with per-run overrides applied."""
    return default_settings().with_overrides(**(overrides or {}))


def bond_price(model, t: float, T: float, x: float, settings: Optional[QuadratureSettings] = None) -> float:
    """P_tT given L_t = x, from the closed form when the family has one."""
    if isinstance(model, QuadraticModel):
        return float(quad_bond_price(model, t, T, x))
    if isinstance(model, ExpQuadraticModel):
        return float(expquad_bond_price(model, t, T, x))
    if isinstance(model, KernelModel):
        return float(price_bond_generic(model, t, T, x, settings))
    raise DomainError(f"Unsupported model type: {type(model).__name__}")


def bond_rows(model, t: float, maturities: Sequence[float], levels: Sequence[float],
              settings: Optional[QuadratureSettings] = None) -> List[Dict]:
    """One row per (T, L) pair, maturities outermost."""
    settings = settings or default_settings()
    return [{'t': t, 'T': T, 'L': L, 'price': bond_price(model, t, T, L, settings)}
            for T in maturities for L in levels]


def yield_curve_rows(model, t: float, maturities: Sequence[float], level: float,
                     settings: Optional[QuadratureSettings] = None) -> List[Dict]:
    """
    Prices and continuously compounded yields -log(P)/(T - t).

    Raises:
        DomainError: a maturity does not exceed t
    """
    settings = settings or default_settings()
    rows = []
    for T in maturities:
        if not T > t:
            raise DomainError(f"yield-curve maturity T={T} must exceed t={t}")
        price = bond_price(model, t, T, level, settings)
        rows.append({'T': T, 'price': price, 'yield': -math.log(price) / (T - t)})
    return rows


def option_quote(model, spec: OptionSpec, settings: Optional[QuadratureSettings] = None):
    """(price, case_label) of a bond call; generic kernel models report the label 'generic'."""
    if isinstance(model, QuadraticModel):
        return quad_option_quote(model, spec)
    if isinstance(model, KernelModel):
        if spec.s == spec.t:
            return lrb_option_price_generic(model, spec, settings=settings), 'intrinsic'
        return lrb_option_price_generic(model, spec, settings=settings), 'generic'
    raise DomainError(f"Bond options are not available for {type(model).__name__}")


def option_rows(model, specs: Sequence[OptionSpec], settings: Optional[QuadratureSettings] = None) -> List[Dict]:
    settings = settings or default_settings()
    rows = []
    for spec in specs:
        price, label = option_quote(model, spec, settings)
        rows.append({'s': spec.s, 't': spec.t, 'T': spec.T, 'K': spec.K, 'price': price, 'case_label': label})
    return rows


def simulation_rows(model, grid: Sequence[float], n_paths: int, measure: str = 'B', seed: int = 0,
                    workers: Optional[int] = None) -> List[Dict]:
    """(path_id, time, value) rows of the information process, path-major."""
    ensemble = simulate_paths(model.process, grid, n_paths, measure=measure, seed=seed, workers=workers)
    return [{'path_id': path_id, 'time': time, 'value': value} for path_id, time, value in ensemble.rows()]


__all__ = [
    'BOND_COLUMNS', 'CURVE_COLUMNS', 'OPTION_COLUMNS', 'PATH_COLUMNS',
    'quadrature_settings', 'bond_price', 'bond_rows', 'yield_curve_rows',
    'option_quote', 'option_rows', 'simulation_rows'
]
