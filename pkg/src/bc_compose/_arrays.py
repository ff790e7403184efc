from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import NDArray

from .exceptions import ShapeError

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]


def as_square(value: Any, name: str = "matrix") -> ComplexArray:
    """Return ``value`` as a complex square matrix, raising ShapeError otherwise."""
    arr = np.asarray(value, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


def frozen(arr: NDArray[Any]) -> NDArray[Any]:
    """Return a read-only copy of ``arr``."""
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


def hermitian_part(arr: ComplexArray) -> ComplexArray:
    """Return ``(A + A^H) / 2``."""
    return 0.5 * (arr + arr.conj().T)


def frobenius(arr: NDArray[Any]) -> float:
    """Return the Frobenius norm, zero for empty matrices."""
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, "fro"))
