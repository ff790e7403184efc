"""Finite-dimensional calculus of boundary unitaries.

A boundary unitary ``U`` splits into its eigenvalue-1 projection ``P`` and the
remainder ``V = QUQ`` on ``Q = I - P``. The Robin-type boundary operator is
``K = -C^{-1}(V) Q`` with ``C(A) = (A - iI)(A + iI)^{-1}``, so that
``U = P + C(-K) Q``. Composition of two boundary conditions meets the
Dirichlet-free ranges and averages the boundary operators.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any
from typing import Literal

import numpy as np
import scipy.linalg
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator
from pydantic import model_validator
from scipy.stats import unitary_group

from ._arrays import ComplexArray
from ._arrays import as_square
from ._arrays import frobenius
from ._arrays import frozen
from ._arrays import hermitian_part
from .config import settings
from .exceptions import DomainError
from .exceptions import EigenvalueAmbiguityWarning
from .exceptions import NotInvertibleError
from .exceptions import NumericalError
from .exceptions import ShapeError
from .logger import logger

BoundaryLabel = Literal["dirichlet", "neumann", "robin", "mixed", "periodic-type", "generic"]

TWO_PI = 2.0 * math.pi
# Gap reported when U has no spectrum away from 1 (U = I).
EMPTY_GAP = 2.0


class UnitarityDiagnostic(BaseModel):
    """Outcome of :func:`validate_unitary`.

    Attributes:
        is_unitary: Whether the defect is within ``tol * dim``.
        defect: ``||M^H M - I||_F``.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    is_unitary: bool
    defect: float


def validate_unitary(matrix: Any, tol: float | None = None) -> UnitarityDiagnostic:
    """Measure how far a square matrix is from unitary.

    Args:
        matrix: Square complex matrix.
        tol: Per-dimension tolerance; defaults to ``settings.tolerances.unitarity``.

    Returns:
        UnitarityDiagnostic: Flag and Frobenius defect.
    """
    tol = settings.tolerances.unitarity if tol is None else tol
    m = as_square(matrix)
    dim = m.shape[0]
    defect = frobenius(m.conj().T @ m - np.eye(dim))
    return UnitarityDiagnostic(is_unitary=defect <= tol * max(dim, 1), defect=defect)


class BoundaryUnitary(BaseModel):
    """Unitary matrix acting on the truncated boundary space.

    Attributes:
        matrix: Complex square matrix, stored read-only.
        unitarity_tol: Per-dimension tolerance on ``||M^H M - I||_F``.
        model_config: Frozen model holding a numpy array.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    unitarity_tol: float = Field(
        default_factory=lambda: settings.tolerances.unitarity, ge=0
    )

    @field_validator("matrix", mode="before")
    @classmethod
    def _coerce_matrix(cls, value: Any) -> np.ndarray:
        arr = as_square(value)
        if arr.shape[0] < 1:
            raise ValueError("a boundary unitary needs dim >= 1")
        return frozen(arr)

    @model_validator(mode="after")
    def _require_unitary(self) -> BoundaryUnitary:
        diagnostic = validate_unitary(self.matrix, self.unitarity_tol)
        if not diagnostic.is_unitary:
            raise ValueError(
                f"matrix is not unitary: defect {diagnostic.defect:.3e} exceeds "
                f"{self.unitarity_tol:.1e} * dim"
            )
        return self

    @property
    def dim(self) -> int:
        """Dimension of the boundary space."""
        return int(self.matrix.shape[0])

    @classmethod
    def dirichlet(cls, dim: int = 2) -> BoundaryUnitary:
        """Return ``U = I``: every boundary value is constrained to zero."""
        return cls(matrix=np.eye(dim))

    @classmethod
    def neumann(cls, dim: int = 2) -> BoundaryUnitary:
        """Return ``U = -I``: vanishing normal derivative, ``K = 0``."""
        return cls(matrix=-np.eye(dim))

    @classmethod
    def alpha(cls, values: float | Sequence[float], dim: int = 2) -> BoundaryUnitary:
        """Return the diagonal family ``diag(-exp(i alpha_j))``."""
        alphas = np.broadcast_to(np.asarray(values, dtype=float), (dim,))
        return cls(matrix=np.diag(-np.exp(1j * alphas)))

    @classmethod
    def robin(cls, k: float | Sequence[float], dim: int = 2) -> BoundaryUnitary:
        """Return the Robin unitary with boundary operator ``K = diag(k)``.

        At the interval ends this reads ``psi'(0) = k_0 psi(0)`` and
        ``psi'(1) = -k_1 psi(1)``.
        """
        ks = np.broadcast_to(np.asarray(k, dtype=float), (dim,))
        return reconstruct_unitary(np.zeros((dim, dim)), np.diag(ks))

    @classmethod
    def mixed(cls, alpha: float) -> BoundaryUnitary:
        """Return ``P - exp(i alpha) Q`` with ``P`` projecting onto ``(1, 0)``."""
        return cls(matrix=np.diag([1.0, -np.exp(1j * alpha)]))

    @classmethod
    def periodic(cls) -> BoundaryUnitary:
        """Return the unitary of periodic conditions on the interval.

        ``P`` projects onto ``(1, -1)/sqrt(2)``, so ``psi(0) = psi(1)``, and
        ``K = 0`` on ``(1, 1)/sqrt(2)`` matches the derivatives.
        """
        return cls(matrix=np.array([[0.0, -1.0], [-1.0, 0.0]]))

    @classmethod
    def random(
        cls,
        dim: int,
        rng: np.random.Generator,
        rank: int | None = None,
        k_scale: float = 5.0,
    ) -> BoundaryUnitary:
        """Draw a gapped boundary unitary.

        The eigenbasis is Haar distributed, the Dirichlet rank is uniform in
        ``0..dim`` unless given, and ``K`` is Hermitian with real and imaginary
        entries uniform in ``[-k_scale, k_scale]``.

        Args:
            dim: Boundary dimension.
            rng: Random generator.
            rank: Rank of the eigenvalue-1 projection.
            k_scale: Bound on the entries of ``K``.

        Returns:
            BoundaryUnitary: A unitary with bounded ``K``.
        """
        if dim > 1:
            basis = np.asarray(unitary_group.rvs(dim, random_state=rng))
        else:
            basis = np.array([[np.exp(2j * np.pi * rng.random())]])
        rank = int(rng.integers(0, dim + 1)) if rank is None else rank
        free = dim - rank
        raw = rng.uniform(-k_scale, k_scale, (free, free)) + 1j * rng.uniform(
            -k_scale, k_scale, (free, free)
        )
        bp, bq = basis[:, :rank], basis[:, rank:]
        k = bq @ hermitian_part(raw) @ bq.conj().T
        return reconstruct_unitary(bp @ bp.conj().T, hermitian_part(k))


class ExtensionDecomposition(BaseModel):
    """Spectral split of a boundary unitary ``U = P + V``.

    Attributes:
        P: Eigenprojection of ``U`` for eigenvalue 1.
        Q: ``I - P``.
        V: ``QUQ``, unitary on ``Ran Q``.
        K: ``-C^{-1}(V) Q``, Hermitian and vanishing on ``Ran P``.
        range_basis: Orthonormal basis of ``Ran Q`` used for the restriction.
        gap: Smallest distance of the spectrum on ``Ran Q`` to 1.
        semigap: Angle ``eps`` of the spectrum-free arc just below 1.
        semigap_lower_bound: Smallest eigenvalue of ``K``; ``inf`` when ``Q = 0``.
        model_config: Frozen model holding numpy arrays.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    P: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    K: np.ndarray
    range_basis: np.ndarray
    gap: float = Field(ge=0)
    semigap: float = Field(ge=0)
    semigap_lower_bound: float

    @field_validator("P", "Q", "V", "K", "range_basis", mode="before")
    @classmethod
    def _freeze(cls, value: Any) -> np.ndarray:
        return frozen(np.asarray(value, dtype=np.complex128))

    @model_validator(mode="after")
    def _require_orthogonal_parts(self) -> ExtensionDecomposition:
        scale = 1.0 + frobenius(self.K)
        if frobenius(self.K @ self.P) > 1e-9 * scale:
            raise ValueError("K must vanish on the range of P")
        if frobenius(self.P @ self.P - self.P) > 1e-9:
            raise ValueError("P must be a projection")
        return self

    @property
    def dirichlet_rank(self) -> int:
        """Rank of ``P``: the number of constrained boundary directions."""
        return int(self.P.shape[0] - self.range_basis.shape[1])


@dataclass(frozen=True)
class _SpectralSplit:
    eigenvalues: ComplexArray
    is_one: np.ndarray
    basis_p: ComplexArray
    basis_q: ComplexArray

    @property
    def free_eigenvalues(self) -> ComplexArray:
        return self.eigenvalues[~self.is_one]


def _split(u: BoundaryUnitary, cluster_tol: float) -> _SpectralSplit:
    try:
        # Complex Schur form of a normal matrix is diagonal with unitary Z.
        t, z = scipy.linalg.schur(u.matrix, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Schur decomposition failed: {exc}") from exc
    eigenvalues = np.diag(t).astype(np.complex128)
    distance = np.abs(eigenvalues - 1.0)
    is_one = distance <= cluster_tol

    factor = settings.tolerances.ambiguity_factor
    ambiguous = eigenvalues[(distance > cluster_tol) & (distance < factor * cluster_tol)]
    if ambiguous.size:
        message = (
            f"eigenvalues within {factor:g} x cluster tolerance of 1 are not absorbed "
            f"into the Dirichlet projection: {ambiguous.tolist()}"
        )
        warnings.warn(message, EigenvalueAmbiguityWarning, stacklevel=3)
        logger.warning(message)

    return _SpectralSplit(
        eigenvalues=eigenvalues,
        is_one=is_one,
        basis_p=z[:, is_one],
        basis_q=z[:, ~is_one],
    )


def eigenprojection_one(
    u: BoundaryUnitary, cluster_tol: float | None = None
) -> tuple[ComplexArray, ComplexArray]:
    """Return the eigenvalue-1 projection ``P`` of ``u`` and ``Q = I - P``.

    Eigenvalues with ``|lambda - 1| <= cluster_tol`` count as 1. Eigenvalues
    just outside that disc raise an :class:`EigenvalueAmbiguityWarning`.

    Args:
        u: Boundary unitary.
        cluster_tol: Clustering radius; defaults to ``settings.tolerances.cluster``.

    Returns:
        tuple: Hermitian projections ``(P, Q)``.
    """
    cluster_tol = settings.tolerances.cluster if cluster_tol is None else cluster_tol
    split = _split(u, cluster_tol)
    p = split.basis_p @ split.basis_p.conj().T
    return p, np.eye(u.dim) - p


def cayley(a: Any, tol: float | None = None) -> ComplexArray:
    """Cayley transform ``(A - iI)(A + iI)^{-1}`` of a Hermitian matrix.

    Args:
        a: Hermitian matrix.
        tol: Relative Hermiticity tolerance; defaults to
            ``settings.tolerances.hermitian``.

    Returns:
        ComplexArray: A unitary matrix without eigenvalue 1.

    Raises:
        DomainError: If ``a`` is not Hermitian.
        NumericalError: If the linear solve fails.
    """
    tol = settings.tolerances.hermitian if tol is None else tol
    a = as_square(a)
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if frobenius(a - a.conj().T) > tol * max(1.0, frobenius(a)):
        raise DomainError("the Cayley transform needs a Hermitian argument")
    eye = np.eye(n)
    try:
        # A - iI and A + iI commute, so the order of the factors is free.
        return np.asarray(scipy.linalg.solve(a + 1j * eye, a - 1j * eye))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Cayley transform failed: {exc}") from exc


def inverse_cayley(v: Any, gap_tol: float | None = None) -> ComplexArray:
    """Inverse Cayley transform ``i(I + V)(I - V)^{-1}`` of a unitary matrix.

    Args:
        v: Unitary matrix.
        gap_tol: Smallest admissible distance of the spectrum to 1; defaults to
            ``ambiguity_factor * cluster``.

    Returns:
        ComplexArray: A Hermitian matrix ``A`` with ``cayley(A) = V``.

    Raises:
        DomainError: If ``v`` is not unitary.
        NotInvertibleError: If an eigenvalue of ``v`` lies within ``gap_tol`` of 1.
        NumericalError: If the eigensolver or the linear solve fails.
    """
    if gap_tol is None:
        gap_tol = settings.tolerances.cluster * settings.tolerances.ambiguity_factor
    v = as_square(v)
    n = v.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if not validate_unitary(v).is_unitary:
        raise DomainError("the inverse Cayley transform needs a unitary argument")
    try:
        eigenvalues = np.linalg.eigvals(v)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    close = eigenvalues[np.abs(eigenvalues - 1.0) <= gap_tol]
    if close.size:
        raise NotInvertibleError("I - V is not invertible: the unitary is not gapped", close)
    eye = np.eye(n)
    try:
        a = 1j * np.asarray(scipy.linalg.solve(eye - v, eye + v))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"inverse Cayley transform failed: {exc}") from exc
    return hermitian_part(a)


def _semigap(free_eigenvalues: ComplexArray) -> float:
    if free_eigenvalues.size == 0:
        return TWO_PI
    theta = np.mod(np.angle(free_eigenvalues), TWO_PI)
    return float(np.min(TWO_PI - theta))


def _semigap_bound(semigap: float) -> float:
    if semigap >= TWO_PI:
        return math.inf
    return -1.0 / math.tan(semigap / 2.0)


def decompose(
    u: BoundaryUnitary, cluster_tol: float | None = None
) -> ExtensionDecomposition:
    """Split ``u`` into ``P``, ``Q``, ``V = QUQ`` and ``K = -C^{-1}(V) Q``.

    Args:
        u: Boundary unitary.
        cluster_tol: Clustering radius for eigenvalue 1.

    Returns:
        ExtensionDecomposition: The projections, the boundary operator and
        gap metrics.

    Raises:
        NotInvertibleError: If ``V`` has spectrum too close to 1.
    """
    cluster_tol = settings.tolerances.cluster if cluster_tol is None else cluster_tol
    split = _split(u, cluster_tol)
    bp, bq = split.basis_p, split.basis_q
    p = bp @ bp.conj().T
    q = np.eye(u.dim) - p

    v_restricted = bq.conj().T @ u.matrix @ bq
    k_restricted = -inverse_cayley(
        v_restricted, gap_tol=cluster_tol * settings.tolerances.ambiguity_factor
    )
    k = hermitian_part(bq @ k_restricted @ bq.conj().T)

    free = split.free_eigenvalues
    gap = float(np.min(np.abs(free - 1.0))) if free.size else EMPTY_GAP
    semigap = _semigap(free)
    lower = (
        float(np.min(np.linalg.eigvalsh(k_restricted))) if free.size else math.inf
    )
    logger.debug(
        "decomposed %d-dim unitary: rank P = %d, gap = %.3g", u.dim, bp.shape[1], gap
    )
    return ExtensionDecomposition(
        P=p,
        Q=q,
        V=q @ u.matrix @ q,
        K=k,
        range_basis=bq,
        gap=gap,
        semigap=semigap,
        semigap_lower_bound=lower,
    )


class GapDiagnostics(BaseModel):
    """Spectral gap of a boundary unitary around 1.

    Attributes:
        gap: Smallest distance of a non-1 eigenvalue to 1.
        is_gapped: ``gap >= gap_threshold``.
        semigap: Angle ``eps`` such that the arc ``exp(i a)``, ``a in (-eps, 0)``,
            is free of spectrum.
        is_semigapped: ``semigap >= gap_threshold``.
        k_lower_bound: ``beta = -cot(eps / 2)``, the lower bound of ``K``.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    gap: float
    is_gapped: bool
    semigap: float
    is_semigapped: bool
    k_lower_bound: float


def gap_diagnostics(
    u: BoundaryUnitary,
    gap_threshold: float | None = None,
    cluster_tol: float | None = None,
) -> GapDiagnostics:
    """Report the gap and the semigap of ``u`` around the point 1.

    Args:
        u: Boundary unitary.
        gap_threshold: Threshold for both flags; defaults to
            ``settings.tolerances.gap_threshold``.
        cluster_tol: Clustering radius for eigenvalue 1.

    Returns:
        GapDiagnostics: Gap, semigap, flags and the lower bound ``beta`` of ``K``.
    """
    if gap_threshold is None:
        gap_threshold = settings.tolerances.gap_threshold
    cluster_tol = settings.tolerances.cluster if cluster_tol is None else cluster_tol
    free = _split(u, cluster_tol).free_eigenvalues
    gap = float(np.min(np.abs(free - 1.0))) if free.size else EMPTY_GAP
    semigap = _semigap(free)
    return GapDiagnostics(
        gap=gap,
        is_gapped=gap >= gap_threshold,
        semigap=semigap,
        is_semigapped=semigap >= gap_threshold,
        k_lower_bound=_semigap_bound(semigap),
    )


def _range_basis(projection: ComplexArray) -> ComplexArray:
    n = projection.shape[0]
    w, vecs = np.linalg.eigh(hermitian_part(projection))
    keep = w > 0.5
    if keep.all():
        return np.eye(n, dtype=np.complex128)
    if not keep.any():
        return np.zeros((n, 0), dtype=np.complex128)
    return np.asarray(vecs[:, keep])


def projection_meet(q1: Any, q2: Any, null_tol: float | None = None) -> ComplexArray:
    """Orthogonal projection onto ``Ran Q1 ∩ Ran Q2``.

    The intersection is the null space of the positive semidefinite sum
    ``(I - Q1) + (I - Q2)``.

    Args:
        q1: Hermitian projection.
        q2: Hermitian projection of the same dimension.
        null_tol: Eigenvalues below this count as zero.

    Returns:
        ComplexArray: The meet projection.

    Raises:
        ShapeError: If the dimensions differ.
    """
    null_tol = settings.tolerances.null if null_tol is None else null_tol
    q1 = as_square(q1, "Q1")
    q2 = as_square(q2, "Q2")
    if q1.shape != q2.shape:
        raise ShapeError(f"projection dimensions differ: {q1.shape} vs {q2.shape}")
    n = q1.shape[0]
    eye = np.eye(n)
    w, vecs = np.linalg.eigh(hermitian_part((eye - q1) + (eye - q2)))
    null = w < null_tol
    if null.all():
        return np.eye(n, dtype=np.complex128)
    if not null.any():
        return np.zeros((n, n), dtype=np.complex128)
    basis = vecs[:, null]
    return np.asarray(basis @ basis.conj().T)


def reconstruct_unitary(
    p: Any, k: Any, tol: float | None = None
) -> BoundaryUnitary:
    """Rebuild ``U = P + C(-K) Q`` from a projection and a boundary operator.

    Args:
        p: Orthogonal projection (the Dirichlet directions).
        k: Hermitian matrix with ``KP = PK = 0``.
        tol: Relative bound on ``||KP||_F``; defaults to
            ``settings.tolerances.constraint``.

    Returns:
        BoundaryUnitary: The boundary unitary with eigenprojection ``P`` and
        boundary operator ``K``.

    Raises:
        ShapeError: If ``p`` and ``k`` differ in shape.
        DomainError: If ``K`` does not vanish on ``Ran P``.
    """
    tol = settings.tolerances.constraint if tol is None else tol
    p = as_square(p, "P")
    k = as_square(k, "K")
    if p.shape != k.shape:
        raise ShapeError(f"P and K differ in shape: {p.shape} vs {k.shape}")
    if frobenius(k @ p) > tol * max(1.0, frobenius(k)):
        raise DomainError("K must vanish on the range of P (KP = PK = 0)")
    n = p.shape[0]
    bq = _range_basis(np.eye(n) - p)
    v_restricted = cayley(-hermitian_part(bq.conj().T @ k @ bq))
    return BoundaryUnitary(matrix=p + bq @ v_restricted @ bq.conj().T)


def compose(
    u1: BoundaryUnitary,
    u2: BoundaryUnitary,
    cluster_tol: float | None = None,
    null_tol: float | None = None,
) -> BoundaryUnitary:
    """Composition law ``W = U1 * U2`` of alternating boundary conditions.

    ``Q_W`` is the meet of ``Q_1`` and ``Q_2``, and ``K_W`` is the average
    ``(K_1 + K_2) / 2`` compressed to ``Ran Q_W``.

    Args:
        u1: First boundary unitary.
        u2: Second boundary unitary.
        cluster_tol: Clustering radius for eigenvalue 1.
        null_tol: Null-space threshold of the meet.

    Returns:
        BoundaryUnitary: ``W = P_W + C(-K_W) Q_W``.

    Raises:
        ShapeError: If the dimensions differ.
    """
    if u1.dim != u2.dim:
        raise ShapeError(f"boundary dimensions differ: {u1.dim} vs {u2.dim}")
    d1 = decompose(u1, cluster_tol)
    d2 = decompose(u2, cluster_tol)
    q12 = projection_meet(d1.Q, d2.Q, null_tol)
    k12 = hermitian_part(q12 @ (0.5 * (d1.K + d2.K)) @ q12)
    return reconstruct_unitary(np.eye(u1.dim) - q12, k12)


def classify(u: BoundaryUnitary, tol: float | None = None) -> BoundaryLabel:
    """Name the boundary condition ``u`` encodes.

    Args:
        u: Gapped boundary unitary.
        tol: Comparison tolerance; defaults to ``settings.tolerances.cluster``.

    Returns:
        BoundaryLabel: One of the labels of :data:`BoundaryLabel`.
    """
    tol = settings.tolerances.cluster if tol is None else tol
    d = decompose(u)
    rank = d.dirichlet_rank
    if rank == u.dim:
        return "dirichlet"
    if frobenius(u.matrix + np.eye(u.dim)) <= tol:
        return "neumann"
    if u.dim == 2 and rank == 1:
        periodic = np.array([[0.5, -0.5], [-0.5, 0.5]])
        if frobenius(d.P - periodic) <= tol and frobenius(d.K) <= tol:
            return "periodic-type"
    if rank > 0:
        return "mixed"
    if frobenius(d.K - np.diag(np.diag(d.K))) <= tol:
        return "robin"
    return "generic"


def robin_coefficients(u: BoundaryUnitary) -> np.ndarray:
    """Return the diagonal of ``K`` for a Robin-type (or Neumann) unitary.

    Raises:
        DomainError: If ``u`` is not of Robin type.
    """
    if classify(u) not in ("robin", "neumann"):
        raise DomainError("robin coefficients are defined for Robin-type unitaries only")
    return np.real(np.diag(decompose(u).K)).copy()


def boundary_condition_residual(u: BoundaryUnitary, phi: Any, phi_dot: Any) -> float:
    """Return ``||i(I + U) phi - (I - U) phi_dot||`` for boundary data."""
    phi = np.asarray(phi, dtype=np.complex128)
    phi_dot = np.asarray(phi_dot, dtype=np.complex128)
    if phi.shape != (u.dim,) or phi_dot.shape != (u.dim,):
        raise ShapeError(f"boundary data must have shape ({u.dim},)")
    eye = np.eye(u.dim)
    return float(np.linalg.norm(1j * (eye + u.matrix) @ phi - (eye - u.matrix) @ phi_dot))
