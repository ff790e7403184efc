"""Closed-form and root-finding references, independent of any lattice."""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
from scipy.optimize import brentq

from ._arrays import RealArray
from .exceptions import DomainError
from .exceptions import NumericalError

SCAN_STEP = 0.05
SCAN_LIMIT = 1.0e4


def _scan_roots(func: Callable[[float], float], start: float, count: int) -> RealArray:
    roots: list[float] = []
    left, f_left = start, func(start)
    while len(roots) < count:
        right = left + SCAN_STEP
        if right > SCAN_LIMIT:
            raise NumericalError(f"found only {len(roots)} of {count} roots below {SCAN_LIMIT:g}")
        f_right = func(right)
        if f_left == 0.0:
            roots.append(left)
        elif f_left * f_right < 0.0:
            roots.append(float(brentq(func, left, right, xtol=1e-14)))
        left, f_left = right, f_right
    return np.array(roots[:count])


def robin_interval_roots(k: float, count: int) -> RealArray:
    """Positive roots ``omega`` of ``(omega^2 - k^2) sin(omega) - 2 k omega cos(omega)``.

    These are the square roots of the Robin eigenvalues of ``-d^2/dx^2`` on
    ``(0, 1)`` with ``psi'(0) = k psi(0)`` and ``psi'(1) = -k psi(1)``.
    Nonpositive eigenvalues (``k <= 0``) are not returned.
    """
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")

    def secular(omega: float) -> float:
        return (omega**2 - k**2) * math.sin(omega) - 2.0 * k * omega * math.cos(omega)

    return _scan_roots(secular, 1e-6, count)


def robin_interval_spectrum(k: float, count: int, mass: float = 0.5) -> RealArray:
    """Lowest positive Robin eigenvalues ``omega^2 / (2m)``."""
    return robin_interval_roots(k, count) ** 2 / (2.0 * mass)


def dirichlet_interval_spectrum(count: int, mass: float = 0.5) -> RealArray:
    """Dirichlet eigenvalues ``(n pi)^2 / (2m)``, ``n = 1..count``."""
    n = np.arange(1, count + 1)
    return (n * math.pi) ** 2 / (2.0 * mass)


def neumann_interval_spectrum(count: int, mass: float = 0.5) -> RealArray:
    """Neumann eigenvalues ``(n pi)^2 / (2m)``, ``n = 0..count-1``."""
    n = np.arange(count)
    return (n * math.pi) ** 2 / (2.0 * mass)


def periodic_interval_spectrum(count: int, mass: float = 0.5) -> RealArray:
    """Periodic eigenvalues ``0, (2 pi)^2, (2 pi)^2, (4 pi)^2, ...`` over ``2m``."""
    n = (np.arange(count) + 1) // 2
    return (2.0 * math.pi * n) ** 2 / (2.0 * mass)


def bessel_j_series(order: int, x: float) -> float:
    """Bessel function ``J_order(x)`` from its power series.

    The disk eigenvalues are judged against this series rather than against
    ``scipy.special.jv``, so the reference shares no code with the solver's
    stack; the test suite cross-checks the two.
    """
    if order < 0:
        return (-1) ** order * bessel_j_series(-order, x)
    half = 0.5 * x
    term = half**order / math.factorial(order)
    total = term
    k = 0
    while True:
        k += 1
        term *= -(half**2) / (k * (k + order))
        total += term
        if k > half and abs(term) <= 1e-17 * max(abs(total), 1e-300):
            return total


def bessel_zeros(order: int, count: int) -> RealArray:
    """First ``count`` positive zeros of ``J_order``.

    Only moderate arguments are reached, where the series stays accurate.
    """
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    return _scan_roots(lambda x: bessel_j_series(order, x), max(abs(order), 0.1), count)


def disk_dirichlet_eigenvalue(order: int, index: int = 1, mass: float = 0.5) -> float:
    """Dirichlet eigenvalue ``j_{order,index}^2 / (2m)`` of the unit disk."""
    return float(bessel_zeros(order, index)[-1] ** 2 / (2.0 * mass))
