"""
Finite differences with a Richardson step check.

Each derivative is taken with second-order formulas at steps h, h/2 and
h/4. The successive differences must shrink by a factor close to 4 unless
both already sit below the noise floor; the returned value is the
Richardson extrapolation of the two finest estimates.
"""

import logging
from typing import Callable, Optional

import numpy as np

from pricing.errors import StepSizeError

logger = logging.getLogger(__name__)

RATIO_BAND = (2.0, 8.0)
NOISE_RTOL = 1e-6

_STENCILS = {
    # (order, kind): (offsets, coefficients); divide by h**order
    (1, 'central'): ((-1, 1), (-0.5, 0.5)),
    (2, 'central'): ((-1, 0, 1), (1.0, -2.0, 1.0)),
    (1, 'forward'): ((0, 1, 2), (-1.5, 2.0, -0.5)),
    (2, 'forward'): ((0, 1, 2, 3), (2.0, -5.0, 4.0, -1.0)),
    (1, 'backward'): ((-2, -1, 0), (0.5, -2.0, 1.5)),
    (2, 'backward'): ((-3, -2, -1, 0), (-1.0, 4.0, -5.0, 2.0)),
}


def _difference(func, x0, h, order, kind):
    offsets, coefficients = _STENCILS[(order, kind)]
    total = 0.0
    for offset, coefficient in zip(offsets, coefficients):
        total = total + coefficient * np.asarray(func(x0 + offset * h), dtype=float)
    return total / h ** order


def _stencil_kind(x0, h, order, lower, upper):
    reach = 3 if order == 2 else 2
    if lower is not None and x0 - h < lower:
        return 'forward'
    if upper is not None and x0 + h > upper:
        if lower is not None and x0 - reach * h < lower:
            raise StepSizeError(f"step {h!r} does not fit between the domain bounds at {x0!r}")
        return 'backward'
    return 'central'


def derivative(func: Callable, x0: float, step: float, order: int = 1,
               lower: Optional[float] = None, upper: Optional[float] = None,
               noise_rtol: float = NOISE_RTOL):
    """
    First or second derivative of func at x0.

    func may return an array (derivatives are taken elementwise). The stencil
    switches to one-sided forms within one step of lower or upper.

    Raises:
        StepSizeError: the Richardson ratio falls outside [2, 8]
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    kind = _stencil_kind(x0, step, order, lower, upper)

    coarse = _difference(func, x0, step, order, kind)
    middle = _difference(func, x0, step / 2.0, order, kind)
    fine = _difference(func, x0, step / 4.0, order, kind)

    first_gap = np.max(np.abs(coarse - middle))
    second_gap = np.max(np.abs(middle - fine))
    floor = noise_rtol * (1.0 + np.max(np.abs(fine)))
    if first_gap > floor or second_gap > floor:
        ratio = first_gap / second_gap if second_gap > 0.0 else np.inf
        if not RATIO_BAND[0] <= ratio <= RATIO_BAND[1]:
            raise StepSizeError(
                f"Richardson ratio {ratio:.3g} outside {RATIO_BAND} for order-{order} derivative at {x0!r}",
                {'ratio': float(ratio), 'step': step}
            )
    value = fine + (fine - middle) / 3.0
    return float(value) if np.ndim(value) == 0 else value
