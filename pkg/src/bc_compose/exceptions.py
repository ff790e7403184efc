"""Error kinds raised by the boundary calculus, the cavity models and the CLI."""

from __future__ import annotations

from collections.abc import Sequence


class BoundaryCompositionError(Exception):
    """Root of every error raised by ``bc_compose``."""


class ShapeError(BoundaryCompositionError, ValueError):
    """Matrix, vector or grid dimensions do not fit together."""


class DomainError(BoundaryCompositionError, ValueError):
    """An input lies outside the domain an operation is defined on."""


class NotInvertibleError(BoundaryCompositionError, ArithmeticError):
    """A unitary has spectrum too close to 1 for its inverse Cayley transform.

    Attributes:
        eigenvalues: The offending eigenvalues.
    """

    def __init__(self, message: str, eigenvalues: Sequence[complex] = ()) -> None:
        self.eigenvalues = tuple(complex(x) for x in eigenvalues)
        if self.eigenvalues:
            listed = ", ".join(f"{x.real:.6g}{x.imag:+.6g}j" for x in self.eigenvalues)
            message = f"{message} (offending eigenvalues: {listed})"
        super().__init__(message)


class NumericalError(BoundaryCompositionError, ArithmeticError):
    """An eigensolver or factorization failed."""


class ConstraintInconsistencyError(BoundaryCompositionError):
    """Two cavities that should share a form domain do not."""


class QuadratureDomainError(BoundaryCompositionError, ValueError):
    """A test function does not decay on the quadrature support."""


class ConfigError(BoundaryCompositionError):
    """A scenario file is malformed or references an unknown preset."""


class EigenvalueAmbiguityWarning(UserWarning):
    """An eigenvalue sits just outside the eigenvalue-1 cluster."""
