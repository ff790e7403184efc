"""Piecewise-linear finite elements for the unit-interval cavity.

The quadratic form ``q(psi) = [psi^H S psi + phi^H K phi] / (2m)`` with boundary
data ``phi = (psi_0, psi_M)`` is assembled on a uniform grid. The constraint
``P phi = 0`` is imposed by restricting to the columns of an orthonormal basis
``Z`` of the admissible subspace, which turns the spectral problem into the
Hermitian-definite pencil ``(Z^H (S + K_hat) Z / (2m), Z^H B Z)``.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Any

import numpy as np
import scipy.linalg
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator
from pydantic import model_validator

from ._arrays import ComplexArray
from ._arrays import RealArray
from ._arrays import frobenius
from ._arrays import frozen
from ._arrays import hermitian_part
from .boundary_algebra import BoundaryUnitary
from .boundary_algebra import _range_basis
from .boundary_algebra import decompose
from .boundary_algebra import projection_meet
from .boundary_algebra import reconstruct_unitary
from .config import settings
from .exceptions import ConstraintInconsistencyError
from .exceptions import DomainError
from .exceptions import NumericalError
from .exceptions import ShapeError
from .logger import logger


class StateVector(BaseModel):
    """Nodal coefficients of a wave function on the grid.

    Attributes:
        coefficients: Complex nodal values, stored read-only.
        model_config: Frozen model holding a numpy array.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coefficients: np.ndarray

    @field_validator("coefficients", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        arr = np.asarray(value, dtype=np.complex128)
        if arr.ndim != 1:
            raise ValueError("a state vector is one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("state vector entries must be finite")
        return frozen(arr)

    def __len__(self) -> int:
        """Number of nodes."""
        return int(self.coefficients.shape[0])

    def norm(self, massmat: RealArray) -> float:
        """Return the discrete L2 norm ``sqrt(psi^H B psi)``."""
        c = self.coefficients
        return math.sqrt(max(float(np.real(np.vdot(c, massmat @ c))), 0.0))


class Cavity1D(BaseModel):
    """Assembled cavity on ``(0, 1)`` with a fixed boundary condition.

    Attributes:
        cells: Number of cells ``M``; nodes sit at ``x_j = j / M``.
        mass: Particle mass ``m``.
        stiffness: Stiffness matrix ``S_ij = int phi_i' phi_j'``.
        massmat: Consistent mass matrix ``B_ij = int phi_i phi_j``.
        boundary_K: Boundary operator ``K`` acting on ``(psi_0, psi_M)``.
        constraint_P: Dirichlet projection ``P`` on the boundary pair.
        reduced_basis: Orthonormal basis ``Z`` of ``{v : P (v_0, v_M) = 0}``.
        unitary: Boundary unitary the cavity realizes.
        model_config: Frozen model holding numpy arrays.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    cells: int = Field(ge=1)
    mass: float = Field(gt=0)
    stiffness: np.ndarray
    massmat: np.ndarray
    boundary_K: np.ndarray
    constraint_P: np.ndarray
    reduced_basis: np.ndarray
    unitary: BoundaryUnitary

    @field_validator(
        "stiffness", "massmat", "boundary_K", "constraint_P", "reduced_basis", mode="before"
    )
    @classmethod
    def _freeze(cls, value: Any) -> np.ndarray:
        return frozen(np.asarray(value))

    @model_validator(mode="after")
    def _check_dimensions(self) -> Cavity1D:
        n = self.cells + 1
        if self.stiffness.shape != (n, n) or self.massmat.shape != (n, n):
            raise ValueError(f"bulk matrices must be {n} x {n}")
        if self.boundary_K.shape != (2, 2) or self.constraint_P.shape != (2, 2):
            raise ValueError("boundary matrices must be 2 x 2")
        rank = round(float(np.real(np.trace(self.constraint_P))))
        if self.reduced_basis.shape != (n, n - rank):
            raise ValueError(
                f"reduced basis must have shape {(n, n - rank)}, got {self.reduced_basis.shape}"
            )
        return self

    @property
    def nodes(self) -> RealArray:
        """Grid nodes ``x_j = j h``."""
        return np.linspace(0.0, 1.0, self.cells + 1)

    @property
    def reduced_dim(self) -> int:
        """Dimension of the admissible subspace."""
        return int(self.reduced_basis.shape[1])

    @cached_property
    def embedded_K(self) -> ComplexArray:
        """``K`` embedded at the boundary nodes ``{0, M}``."""
        k_hat = np.zeros((self.cells + 1, self.cells + 1), dtype=np.complex128)
        ends = [0, self.cells]
        k_hat[np.ix_(ends, ends)] = self.boundary_K
        return k_hat

    @cached_property
    def hamiltonian(self) -> ComplexArray:
        """Reduced Hamiltonian ``H = Z^H (S + K_hat) Z / (2m)``."""
        z = self.reduced_basis
        return hermitian_part(z.conj().T @ (self.stiffness + self.embedded_K) @ z) / (
            2.0 * self.mass
        )

    @cached_property
    def reduced_massmat(self) -> ComplexArray:
        """Reduced mass matrix ``Z^H B Z``."""
        z = self.reduced_basis
        return hermitian_part(z.conj().T @ self.massmat @ z)

    @cached_property
    def eigensystem(self) -> tuple[RealArray, ComplexArray]:
        """All eigenpairs of the pencil, with modes lifted to nodal coordinates.

        The returned modes ``G = Z X`` satisfy ``G^H B G = I``.
        """
        logger.debug("solving %d-dim pencil on %d cells", self.reduced_dim, self.cells)
        try:
            energies, modes = scipy.linalg.eigh(self.hamiltonian, self.reduced_massmat)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"generalized eigensolver failed: {exc}") from exc
        return np.asarray(energies), self.reduced_basis @ modes

    def admissibility_defect(self, psi: StateVector) -> float:
        """Return ``||P phi||`` for the boundary data of ``psi``."""
        return float(np.linalg.norm(self.constraint_P @ boundary_trace(psi, self)))


def _bulk_matrices(cells: int) -> tuple[RealArray, RealArray]:
    h = 1.0 / cells
    n = cells + 1
    diag = np.full(n, 2.0)
    diag[[0, -1]] = 1.0
    off = np.ones(n - 1)
    stiffness = (np.diag(diag) - np.diag(off, 1) - np.diag(off, -1)) / h
    massmat = (h / 6.0) * (2.0 * np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
    return stiffness, massmat


def _reduced_basis(cells: int, boundary_basis: ComplexArray) -> ComplexArray:
    n = cells + 1
    free = boundary_basis.shape[1]
    if free == 2 and np.array_equal(boundary_basis, np.eye(2)):
        return np.eye(n, dtype=np.complex128)
    z = np.zeros((n, n - 2 + free), dtype=np.complex128)
    z[0, :free] = boundary_basis[0]
    z[cells, :free] = boundary_basis[1]
    z[1:cells, free:] = np.eye(n - 2)
    return z


def _assemble(
    unitary: BoundaryUnitary, p: ComplexArray, k: ComplexArray, cells: int, mass: float
) -> Cavity1D:
    stiffness, massmat = _bulk_matrices(cells)
    z = _reduced_basis(cells, _range_basis(np.eye(2) - p))
    logger.debug("assembled cavity: %d cells, reduced dimension %d", cells, z.shape[1])
    return Cavity1D(
        cells=cells,
        mass=mass,
        stiffness=stiffness,
        massmat=massmat,
        boundary_K=k,
        constraint_P=p,
        reduced_basis=z,
        unitary=unitary,
    )


def build_cavity(
    u: BoundaryUnitary, cells: int | None = None, mass: float | None = None
) -> Cavity1D:
    """Assemble the cavity realizing the boundary condition ``u``.

    Args:
        u: Two-dimensional boundary unitary, gapped or of Dirichlet type.
        cells: Number of cells ``M``; defaults to ``settings.defaults.grid``.
        mass: Particle mass; defaults to ``settings.defaults.mass``.

    Returns:
        Cavity1D: The assembled cavity.

    Raises:
        ShapeError: If ``u`` is not two-dimensional.
        DomainError: If ``cells`` is too small or ``mass`` is not positive.
        NotInvertibleError: If ``u`` is not gapped.
    """
    cells = settings.defaults.grid if cells is None else cells
    mass = settings.defaults.mass if mass is None else mass
    if u.dim != 2:
        raise ShapeError(f"the interval has two boundary points, got dim {u.dim}")
    if cells < settings.defaults.min_cells:
        raise DomainError(f"need at least {settings.defaults.min_cells} cells, got {cells}")
    if mass <= 0:
        raise DomainError(f"mass must be positive, got {mass}")
    d = decompose(u)
    return _assemble(u, d.P, d.K, cells, mass)


def _require_dimension(psi: StateVector, cavity: Cavity1D) -> None:
    if len(psi) != cavity.cells + 1:
        raise ShapeError(f"state has {len(psi)} nodes, cavity has {cavity.cells + 1}")


def _require_admissible(psi: StateVector, cavity: Cavity1D) -> None:
    scale = max(1.0, float(np.max(np.abs(psi.coefficients))))
    if cavity.admissibility_defect(psi) > settings.tolerances.constraint * scale:
        raise DomainError("state violates the boundary constraint of the cavity")


def boundary_trace(psi: StateVector, cavity: Cavity1D) -> ComplexArray:
    """Return the boundary values ``phi = (psi_0, psi_M)``."""
    _require_dimension(psi, cavity)
    return np.array([psi.coefficients[0], psi.coefficients[-1]], dtype=np.complex128)


def boundary_data(psi: StateVector, cavity: Cavity1D) -> tuple[ComplexArray, ComplexArray]:
    """Return ``(phi, phi_dot)`` with outward derivatives ``(-psi'(0), psi'(1))``.

    Derivatives are one-sided second-order differences.
    """
    phi = boundary_trace(psi, cavity)
    c = psi.coefficients
    h = 1.0 / cavity.cells
    left = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h)
    right = (3.0 * c[-1] - 4.0 * c[-2] + c[-3]) / (2.0 * h)
    return phi, np.array([-left, right], dtype=np.complex128)


def quadratic_form(psi: StateVector, cavity: Cavity1D) -> float:
    """Discrete form ``[psi^H S psi + phi^H K phi] / (2m)``."""
    phi = boundary_trace(psi, cavity)
    c = psi.coefficients
    value = np.vdot(c, cavity.stiffness @ c) + np.vdot(phi, cavity.boundary_K @ phi)
    return float(np.real(value)) / (2.0 * cavity.mass)


def gaussian_state(
    cavity: Cavity1D, center: float | None = None, width: float | None = None
) -> StateVector:
    """Normalized Gaussian bump projected onto the admissible subspace.

    Args:
        cavity: Target cavity.
        center: Bump center; defaults to ``settings.defaults.gaussian_center``.
        width: Standard deviation; defaults to ``settings.defaults.gaussian_width``.

    Returns:
        StateVector: Unit-norm state with ``P phi = 0``.
    """
    center = settings.defaults.gaussian_center if center is None else center
    width = settings.defaults.gaussian_width if width is None else width
    values = np.exp(-((cavity.nodes - center) ** 2) / (2.0 * width**2)).astype(np.complex128)
    q = np.eye(2) - cavity.constraint_P
    values[[0, -1]] = q @ values[[0, -1]]
    norm = math.sqrt(float(np.real(np.vdot(values, cavity.massmat @ values))))
    return StateVector(coefficients=values / norm)


def spectrum(cavity: Cavity1D, count: int) -> RealArray:
    """Return the lowest ``count`` eigenvalues in ascending order.

    Raises:
        DomainError: If ``count`` exceeds the reduced dimension.
        NumericalError: If the eigensolver fails.
    """
    if not 1 <= count <= cavity.reduced_dim:
        raise DomainError(f"count must lie in 1..{cavity.reduced_dim}, got {count}")
    if "eigensystem" in cavity.__dict__:
        return cavity.eigensystem[0][:count].copy()
    try:
        values = scipy.linalg.eigh(
            cavity.hamiltonian,
            cavity.reduced_massmat,
            eigvals_only=True,
            subset_by_index=[0, count - 1],
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"generalized eigensolver failed: {exc}") from exc
    return np.asarray(values)


def eigenstates(cavity: Cavity1D, count: int) -> list[tuple[float, StateVector]]:
    """Return the lowest ``count`` eigenpairs as B-normalized states."""
    if not 1 <= count <= cavity.reduced_dim:
        raise DomainError(f"count must lie in 1..{cavity.reduced_dim}, got {count}")
    energies, modes = cavity.eigensystem
    return [
        (float(energies[j]), StateVector(coefficients=modes[:, j])) for j in range(count)
    ]


def evolution_matrix(cavity: Cavity1D, t: float) -> ComplexArray:
    """Nodal matrix of ``exp(-i t H)`` acting on admissible states."""
    energies, modes = cavity.eigensystem
    return (modes * np.exp(-1j * t * energies)) @ (modes.conj().T @ cavity.massmat)


def propagate(cavity: Cavity1D, psi0: StateVector, t: float) -> StateVector:
    """Evolve ``psi0`` for time ``t`` with the cavity Hamiltonian.

    Args:
        cavity: Cavity providing ``H``.
        psi0: Admissible initial state.
        t: Evolution time.

    Returns:
        StateVector: ``exp(-i t H) psi0``; ``psi0`` itself when ``t == 0``.

    Raises:
        DomainError: If ``psi0`` violates the constraint.
    """
    _require_dimension(psi0, cavity)
    _require_admissible(psi0, cavity)
    if t == 0:
        return psi0
    energies, modes = cavity.eigensystem
    amplitudes = modes.conj().T @ (cavity.massmat @ psi0.coefficients)
    return StateVector(coefficients=modes @ (np.exp(-1j * t * energies) * amplitudes))


def _require_same_grid(c1: Cavity1D, c2: Cavity1D) -> None:
    if c1.cells != c2.cells:
        raise ShapeError(f"grid mismatch: {c1.cells} vs {c2.cells} cells")
    if c1.mass != c2.mass:
        raise ShapeError(f"mass mismatch: {c1.mass} vs {c2.mass}")


def form_sum(c1: Cavity1D, c2: Cavity1D) -> Cavity1D:
    """Cavity of the averaged form ``(t_1 + t_2) / 2`` on the common form domain.

    The constraint is the complement of the meet of both admissible boundary
    subspaces and the boundary operator is ``(K_1 + K_2) / 2`` compressed to it.

    Raises:
        ShapeError: If the grids or masses differ.
    """
    _require_same_grid(c1, c2)
    eye = np.eye(2)
    q12 = projection_meet(eye - c1.constraint_P, eye - c2.constraint_P)
    k12 = hermitian_part(q12 @ (0.5 * (c1.boundary_K + c2.boundary_K)) @ q12)
    p12 = eye - q12
    return _assemble(reconstruct_unitary(p12, k12), p12, k12, c1.cells, c1.mass)


class RepresentationCheck(BaseModel):
    """Comparison of a form-sum cavity with the cavity of the composed unitary.

    Attributes:
        defect: ``||H_12 - T H_W T^H||_F`` on the common reduced space.
        reference_norm: ``||H_12||_F``.
        passed: ``defect <= tol * reference_norm``.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    defect: float
    reference_norm: float
    passed: bool


def verify_representation(
    c12: Cavity1D, w_cavity: Cavity1D, tol: float | None = None
) -> RepresentationCheck:
    """Compare the form-sum cavity with the cavity built from the composed unitary.

    Both Hamiltonians are expressed in the reduced basis of ``c12`` before the
    Frobenius distance is taken.

    Args:
        c12: Result of :func:`form_sum`.
        w_cavity: Cavity of ``compose(U1, U2)`` on the same grid.
        tol: Relative tolerance; defaults to ``settings.tolerances.representation``.

    Returns:
        RepresentationCheck: Defect, reference norm and verdict.

    Raises:
        ShapeError: If the grids differ.
        ConstraintInconsistencyError: If the admissible subspaces differ.
    """
    tol = settings.tolerances.representation if tol is None else tol
    _require_same_grid(c12, w_cavity)
    if c12.reduced_dim != w_cavity.reduced_dim:
        raise ConstraintInconsistencyError(
            f"reduced dimensions differ: {c12.reduced_dim} vs {w_cavity.reduced_dim}"
        )
    if frobenius(c12.constraint_P - w_cavity.constraint_P) > settings.tolerances.constraint:
        raise ConstraintInconsistencyError("the cavities constrain different boundary subspaces")
    align = c12.reduced_basis.conj().T @ w_cavity.reduced_basis
    defect = frobenius(c12.hamiltonian - align @ w_cavity.hamiltonian @ align.conj().T)
    reference = frobenius(c12.hamiltonian)
    return RepresentationCheck(
        defect=defect, reference_norm=reference, passed=defect <= tol * reference
    )
