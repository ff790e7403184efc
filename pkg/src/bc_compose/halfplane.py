"""Boundary value of ``1 / (x + i y)`` as ``y`` decreases to zero.

For a decaying test function ``chi`` the integrals ``int chi(x) / (x + i y) dx``
converge to ``P.V. int chi(x) / x dx - i pi chi(0)``. The singular part is
integrated in closed form so adaptive quadrature only sees a bounded remainder.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from scipy.integrate import IntegrationWarning
from scipy.integrate import quad

from .config import settings
from .exceptions import DomainError
from .exceptions import QuadratureDomainError
from .logger import logger

SMALLEST_Y = 1e-5
QUAD_LIMIT = 500

TestFunction = Callable[[float], float]


class HalfPlaneReport(BaseModel):
    """Integrals against ``1 / (x + i y)`` and their boundary value.

    Attributes:
        y_values: Descending distances to the real axis.
        integrals: ``int chi(x) / (x + i y) dx`` per ``y``.
        extrapolated_limit: Linear extrapolation of the last two integrals to ``y = 0``.
        reference: ``P.V. int chi(x) / x dx - i pi chi(0)``.
        abs_errors: ``|integral - reference|`` per ``y``.
        error_slope: Least-squares slope of ``log(error)`` against ``log(y)``.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    y_values: list[float]
    integrals: list[complex]
    extrapolated_limit: complex
    reference: complex
    abs_errors: list[float]
    error_slope: float


def _quad(func: TestFunction, lower: float, upper: float, points: list[float] | None = None) -> float:
    # Tolerances sit near machine precision; roundoff notices go to the log.
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, estimate = quad(
            func, lower, upper, points=points, limit=QUAD_LIMIT, epsabs=1e-13, epsrel=1e-12
        )
    for notice in caught:
        if not issubclass(notice.category, IntegrationWarning):
            warnings.warn(notice.message, notice.category, stacklevel=2)
            continue
        logger.debug(
            "quadrature on [%g, %g], error estimate %.1e: %s",
            lower,
            upper,
            estimate,
            " ".join(str(notice.message).split()),
        )
    return float(value)


def _require_decay(chi: TestFunction, support: float, tol: float) -> None:
    edge = max(abs(chi(support)), abs(chi(-support)))
    if not math.isfinite(edge) or edge > tol:
        raise QuadratureDomainError(
            f"test function does not decay: |chi(+-{support:g})| = {edge:.3e} exceeds {tol:.1e}"
        )


def boundary_integral(chi: TestFunction, y: float, support: float) -> complex:
    """Return ``int_{-L}^{L} chi(x) / (x + i y) dx`` for a real test function."""
    chi0 = chi(0.0)

    def real_part(x: float) -> float:
        return (chi(x) - chi0) * x / (x * x + y * y)

    def imag_part(x: float) -> float:
        return -(chi(x) - chi0) * y / (x * x + y * y)

    singular = -2j * chi0 * math.atan(support / y)
    remainder = complex(
        _quad(real_part, -support, support, [0.0]),
        _quad(imag_part, -support, support, [0.0]),
    )
    return singular + remainder


def principal_value(chi: TestFunction, support: float) -> float:
    """Return ``P.V. int_{-L}^{L} chi(x) / x dx`` by folding onto ``(0, L)``."""
    return _quad(lambda x: (chi(x) - chi(-x)) / x, 0.0, support)


def halfplane_boundary_demo(
    chi: TestFunction,
    y_values: Sequence[float],
    support: float | None = None,
    decay_tol: float | None = None,
) -> HalfPlaneReport:
    """Approach the real axis and compare with the distributional boundary value.

    Args:
        chi: Real, smooth test function decaying at ``+-support``.
        y_values: Strictly descending positive distances, the last at least ``1e-5``.
        support: Half-width ``L`` of the integration window; defaults to
            ``settings.defaults.halfplane_support``.
        decay_tol: Largest admissible ``|chi(+-L)|``; defaults to
            ``settings.tolerances.decay``.

    Returns:
        HalfPlaneReport: Integrals, reference, extrapolation and error slope.

    Raises:
        DomainError: If ``y_values`` is not descending or reaches below ``1e-5``.
        QuadratureDomainError: If ``chi`` does not decay on the window.
    """
    support = settings.defaults.halfplane_support if support is None else support
    decay_tol = settings.tolerances.decay if decay_tol is None else decay_tol
    ys = [float(y) for y in y_values]
    if not ys or any(b >= a for a, b in zip(ys, ys[1:], strict=False)):
        raise DomainError("y_values must be nonempty and strictly descending")
    if ys[-1] < SMALLEST_Y:
        raise DomainError(f"y_values must stay at or above {SMALLEST_Y:g}")
    _require_decay(chi, support, decay_tol)

    integrals = [boundary_integral(chi, y, support) for y in ys]
    reference = complex(principal_value(chi, support), -math.pi * chi(0.0))
    errors = [abs(value - reference) for value in integrals]
    logger.info("half-plane demo: error %.3e at y = %g", errors[-1], ys[-1])

    if len(ys) >= 2:
        y1, y2 = ys[-2], ys[-1]
        extrapolated = (y1 * integrals[-1] - y2 * integrals[-2]) / (y1 - y2)
    else:
        extrapolated = integrals[-1]

    positive = [(y, e) for y, e in zip(ys, errors, strict=True) if e > 0]
    if len(positive) >= 2:
        log_y, log_e = np.log(np.array(positive)).T
        slope = float(np.polyfit(log_y, log_e, 1)[0])
    else:
        slope = math.nan
    return HalfPlaneReport(
        y_values=ys,
        integrals=integrals,
        extrapolated_limit=extrapolated,
        reference=reference,
        abs_errors=errors,
        error_slope=slope,
    )


def gaussian(x: float) -> float:
    """``exp(-x^2)``."""
    return math.exp(-x * x)


def odd_gaussian(x: float) -> float:
    """``x exp(-x^2)``."""
    return x * math.exp(-x * x)
