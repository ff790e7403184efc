"""Unit-disk cavity with boundary conditions diagonal in the angular Fourier basis.

Boundary data live on the circle and are stored as Fourier coefficients
``g_m``, ``m = -M..M``. A wave function is stored as radial profiles ``u_m(r)``
on a uniform grid of ``[0, 1]``; the boundary unitary acts mode by mode with
eigenvalue 1 (Dirichlet) or ``(k_m + i) / (k_m - i)`` (Robin coefficient ``k_m``).
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Any
from typing import Literal

import numpy as np
import scipy.linalg
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator
from pydantic import model_validator

from ._arrays import RealArray
from ._arrays import frozen
from .boundary_algebra import BoundaryUnitary
from .config import settings
from .exceptions import DomainError
from .exceptions import NumericalError
from .exceptions import ShapeError
from .halfplane import HalfPlaneReport
from .halfplane import halfplane_boundary_demo
from .logger import logger

ModeKind = Literal["dirichlet", "robin"]

QUADRATURE_POINTS = 6

__all__ = [
    "BoundaryModeVector",
    "DiskModeModel",
    "DiskState",
    "GrowthDeclaration",
    "HalfPlaneReport",
    "ModeCondition",
    "ModeGapReport",
    "boundary_data",
    "dirichlet_decompose",
    "halfplane_boundary_demo",
    "harmonic_extension",
    "harmonic_residual",
    "lambda_lift",
    "laplace_beltrami",
    "mode_gap_check",
    "modewise_compose",
    "radial_spectrum",
    "sobolev_norm",
    "to_boundary_unitary",
]


def _wavenumbers(m_max: int) -> np.ndarray:
    return np.arange(-m_max, m_max + 1)


class BoundaryModeVector(BaseModel):
    """Fourier coefficients of a function on the unit circle.

    Attributes:
        modes: Coefficients ``g_m`` ordered ``m = -M..M``.
        sobolev_order: Order ``s`` of the Sobolev space the vector belongs to.
        model_config: Frozen model holding a numpy array.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    modes: np.ndarray
    sobolev_order: float = 0.5

    @field_validator("modes", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        arr = np.asarray(value, dtype=np.complex128)
        if arr.ndim != 1 or arr.shape[0] % 2 != 1:
            raise ValueError("modes must be a vector of odd length 2M + 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("mode coefficients must be finite")
        return frozen(arr)

    @property
    def m_max(self) -> int:
        """Truncation ``M``."""
        return (int(self.modes.shape[0]) - 1) // 2

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers ``-M..M``."""
        return _wavenumbers(self.m_max)

    @classmethod
    def delta(cls, m: int, m_max: int, sobolev_order: float = 0.5) -> BoundaryModeVector:
        """Unit vector in mode ``m``."""
        if abs(m) > m_max:
            raise ShapeError(f"mode {m} outside truncation {m_max}")
        modes = np.zeros(2 * m_max + 1, dtype=np.complex128)
        modes[m + m_max] = 1.0
        return cls(modes=modes, sobolev_order=sobolev_order)


def sobolev_norm(g: BoundaryModeVector, s: float | None = None) -> float:
    """Return ``(sum (1 + m^2)^s |g_m|^2)^(1/2)``; ``s`` defaults to the vector's order."""
    s = g.sobolev_order if s is None else s
    weights = (1.0 + g.wavenumbers.astype(float) ** 2) ** s
    return math.sqrt(float(np.sum(weights * np.abs(g.modes) ** 2)))


def lambda_lift(g: BoundaryModeVector) -> BoundaryModeVector:
    """Apply ``(I - Laplace_circle)^(1/2)``, lowering the Sobolev order by one."""
    factor = np.sqrt(1.0 + g.wavenumbers.astype(float) ** 2)
    return BoundaryModeVector(modes=factor * g.modes, sobolev_order=g.sobolev_order - 1.0)


def laplace_beltrami(g: BoundaryModeVector) -> BoundaryModeVector:
    """Apply the Laplacian of the circle, the multiplier ``-m^2``."""
    factor = -(g.wavenumbers.astype(float) ** 2)
    return BoundaryModeVector(modes=factor * g.modes, sobolev_order=g.sobolev_order - 2.0)


class DiskState(BaseModel):
    """Wave function on the disk as radial profiles per angular mode.

    Attributes:
        profiles: ``u_m(r_j)``, shape ``(2M + 1, R + 1)`` on ``r_j = j / R``.
        model_config: Frozen model holding a numpy array.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    profiles: np.ndarray

    @field_validator("profiles", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        arr = np.asarray(value, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] % 2 != 1 or arr.shape[1] < 3:
            raise ValueError("profiles must have shape (2M + 1, R + 1) with R >= 2")
        if not np.all(np.isfinite(arr)):
            raise ValueError("profiles must be finite")
        return frozen(arr)

    @property
    def m_max(self) -> int:
        """Angular truncation ``M``."""
        return (int(self.profiles.shape[0]) - 1) // 2

    @property
    def radial_cells(self) -> int:
        """Number of radial cells ``R``."""
        return int(self.profiles.shape[1]) - 1

    @property
    def radii(self) -> RealArray:
        """Radial nodes."""
        return np.linspace(0.0, 1.0, self.radial_cells + 1)

    @property
    def trace(self) -> BoundaryModeVector:
        """Boundary values ``u_m(1)``."""
        return BoundaryModeVector(modes=self.profiles[:, -1])

    @cached_property
    def decomposition(self) -> tuple[DiskState, DiskState]:
        """Cached ``(psi_D, psi_0)`` of :func:`dirichlet_decompose`."""
        harmonic = harmonic_extension(self.trace, self.radial_cells)
        return DiskState(profiles=self.profiles - harmonic.profiles), harmonic


def harmonic_extension(g: BoundaryModeVector, radial_cells: int | None = None) -> DiskState:
    """Harmonic function on the disk with boundary values ``g``.

    The profiles are ``g_m r^|m|`` sampled at the radial nodes.
    """
    radial_cells = settings.defaults.radial_grid if radial_cells is None else radial_cells
    if radial_cells < 2:
        raise DomainError(f"need at least 2 radial cells, got {radial_cells}")
    r = np.linspace(0.0, 1.0, radial_cells + 1)
    powers = np.abs(g.wavenumbers)[:, None]
    return DiskState(profiles=g.modes[:, None] * r[None, :] ** powers)


def dirichlet_decompose(psi: DiskState) -> tuple[DiskState, DiskState]:
    """Split ``psi`` into a trace-free part ``psi_D`` and its harmonic part ``psi_0``."""
    return psi.decomposition


def harmonic_residual(state: DiskState, r_min: float = 0.25) -> RealArray:
    """Per-mode maximum of the discrete radial Laplacian on nodes with ``r >= r_min``.

    Uses central differences for ``u'' + u'/r - m^2 u / r^2``. Nodes close to
    the origin are skipped since the difference quotients of ``r^|m|`` lose an
    order there.
    """
    h = 1.0 / state.radial_cells
    r = state.radii[1:-1]
    u = state.profiles
    second = (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / h**2
    first = (u[:, 2:] - u[:, :-2]) / (2.0 * h)
    m2 = (_wavenumbers(state.m_max).astype(float) ** 2)[:, None]
    residual = second + first / r - m2 * u[:, 1:-1] / r**2
    outer = r >= r_min
    if not outer.any():
        raise DomainError(f"no interior node with r >= {r_min}")
    return np.max(np.abs(residual[:, outer]), axis=1)


def residual_refinement(
    g: BoundaryModeVector, radial_cells: int = 64, m_cut: int = 4, floor: float = 1e-9
) -> tuple[RealArray, RealArray]:
    """Harmonic residuals of the modes ``|m| <= m_cut`` before and after halving ``h``.

    Modes whose coarse residual is below ``floor`` are exact polynomials on the
    grid and are dropped.

    Returns:
        tuple[RealArray, RealArray]: Coarse-to-fine residual ratios of the
        remaining modes, and the fine residuals of all kept modes.
    """
    if m_cut < 0:
        raise DomainError(f"m_cut must be nonnegative, got {m_cut}")
    keep = np.abs(g.wavenumbers) <= m_cut
    low = BoundaryModeVector(modes=g.modes[keep])
    coarse = harmonic_residual(harmonic_extension(low, radial_cells))
    fine = harmonic_residual(harmonic_extension(low, 2 * radial_cells))
    busy = coarse > floor
    return coarse[busy] / fine[busy], fine


def boundary_data(psi: DiskState) -> tuple[BoundaryModeVector, BoundaryModeVector]:
    """Return ``(phi, phi_dot)`` with ``phi_dot = Lambda d_nu psi_D``.

    ``phi`` is the trace and the outward derivative is a one-sided
    second-order difference at ``r = 1``.
    """
    regular, _ = psi.decomposition
    h = 1.0 / psi.radial_cells
    u = regular.profiles
    normal = (3.0 * u[:, -1] - 4.0 * u[:, -2] + u[:, -3]) / (2.0 * h)
    phi = BoundaryModeVector(modes=psi.profiles[:, -1], sobolev_order=-0.5)
    return phi, lambda_lift(BoundaryModeVector(modes=normal, sobolev_order=0.5))


class ModeCondition(BaseModel):
    """Boundary condition in one angular mode.

    Attributes:
        m: Angular wavenumber.
        kind: ``"dirichlet"`` or ``"robin"``.
        k: Robin coefficient; ``None`` for Dirichlet modes.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    m: int
    kind: ModeKind
    k: float | None = None

    @model_validator(mode="after")
    def _check_coefficient(self) -> ModeCondition:
        if self.kind == "dirichlet" and self.k is not None:
            raise ValueError(f"mode {self.m}: a Dirichlet mode carries no Robin coefficient")
        if self.kind == "robin" and (self.k is None or not math.isfinite(self.k)):
            raise ValueError(f"mode {self.m}: a Robin mode needs a finite coefficient")
        return self

    @property
    def eigenvalue(self) -> complex:
        """Eigenvalue of the boundary unitary in this mode."""
        if self.k is None:
            return 1.0 + 0.0j
        return (self.k + 1j) / (self.k - 1j)


class GrowthDeclaration(BaseModel):
    """Asymptotic behaviour ``k_m ~ coefficient * |m|^power`` beyond the truncation.

    Attributes:
        coefficient: Nonzero leading coefficient.
        power: Positive growth exponent.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    coefficient: float
    power: float = Field(gt=0)

    @field_validator("coefficient")
    @classmethod
    def _nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("a growth declaration needs a nonzero coefficient")
        return value


class DiskModeModel(BaseModel):
    """Diagonal boundary condition on the disk, truncated at ``|m| <= M``.

    Attributes:
        m_max: Angular truncation ``M``.
        conditions: One condition per mode, ordered ``m = -M..M``.
        radial_cells: Radial grid cells.
        mass: Particle mass.
        growth: Declared growth of ``k_m`` for unbounded families.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    m_max: int = Field(ge=0)
    conditions: list[ModeCondition]
    radial_cells: int = Field(default_factory=lambda: settings.defaults.radial_grid, ge=2)
    mass: float = Field(default_factory=lambda: settings.defaults.mass, gt=0)
    growth: GrowthDeclaration | None = None

    @field_validator("conditions")
    @classmethod
    def _sort(cls, value: list[ModeCondition]) -> list[ModeCondition]:
        return sorted(value, key=lambda c: c.m)

    @model_validator(mode="after")
    def _cover_every_mode(self) -> DiskModeModel:
        found = [c.m for c in self.conditions]
        if found != list(range(-self.m_max, self.m_max + 1)):
            raise ValueError(f"conditions must cover each mode -{self.m_max}..{self.m_max} once")
        return self

    @classmethod
    def from_coefficients(
        cls,
        m_max: int,
        k: float | None = None,
        dirichlet_modes: tuple[int, ...] = (),
        **kwargs: Any,
    ) -> DiskModeModel:
        """Uniform Robin coefficient ``k`` (``None`` for all-Dirichlet) except listed modes."""
        conditions = [
            ModeCondition(m=m, kind="dirichlet")
            if k is None or m in dirichlet_modes
            else ModeCondition(m=m, kind="robin", k=k)
            for m in range(-m_max, m_max + 1)
        ]
        return cls(m_max=m_max, conditions=conditions, **kwargs)

    def condition(self, m: int) -> ModeCondition:
        """Condition of mode ``m``."""
        if abs(m) > self.m_max:
            raise ShapeError(f"mode {m} outside truncation {self.m_max}")
        return self.conditions[m + self.m_max]


def to_boundary_unitary(model: DiskModeModel) -> BoundaryUnitary:
    """Embed the model as a diagonal ``(2M + 1)``-dimensional boundary unitary."""
    return BoundaryUnitary(matrix=np.diag([c.eigenvalue for c in model.conditions]))


def _combine_growth(
    a: GrowthDeclaration | None, b: GrowthDeclaration | None
) -> GrowthDeclaration | None:
    if a is None or b is None:
        declared = a if b is None else b
        if declared is None:
            return None
        return GrowthDeclaration(coefficient=declared.coefficient / 2, power=declared.power)
    if a.power == b.power:
        coefficient = (a.coefficient + b.coefficient) / 2
        if coefficient == 0:
            return None
        return GrowthDeclaration(coefficient=coefficient, power=a.power)
    leading = a if a.power > b.power else b
    return GrowthDeclaration(coefficient=leading.coefficient / 2, power=leading.power)


def modewise_compose(model1: DiskModeModel, model2: DiskModeModel) -> DiskModeModel:
    """Composition law applied mode by mode.

    A mode is Dirichlet if it is Dirichlet in either input, otherwise its
    coefficient is the mean of the two Robin coefficients.

    Raises:
        ShapeError: If truncations, radial grids or masses differ.
    """
    if model1.m_max != model2.m_max:
        raise ShapeError(f"truncation mismatch: {model1.m_max} vs {model2.m_max}")
    if model1.radial_cells != model2.radial_cells or model1.mass != model2.mass:
        raise ShapeError("radial grid and mass must agree")
    conditions = []
    for c1, c2 in zip(model1.conditions, model2.conditions, strict=True):
        if c1.k is None or c2.k is None:
            conditions.append(ModeCondition(m=c1.m, kind="dirichlet"))
        else:
            conditions.append(ModeCondition(m=c1.m, kind="robin", k=(c1.k + c2.k) / 2))
    return DiskModeModel(
        m_max=model1.m_max,
        conditions=conditions,
        radial_cells=model1.radial_cells,
        mass=model1.mass,
        growth=_combine_growth(model1.growth, model2.growth),
    )


class ModeGapReport(BaseModel):
    """Boundedness of the boundary operator of a disk model.

    Attributes:
        is_gapped: ``K`` is bounded.
        is_semigapped: ``K`` is bounded below.
        K_sup: ``sup |k_m|`` over Robin modes.
        K_inf: ``inf k_m`` over Robin modes.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    is_gapped: bool
    is_semigapped: bool
    K_sup: float
    K_inf: float


def mode_gap_check(model: DiskModeModel) -> ModeGapReport:
    """Classify the model as gapped or semi-gapped.

    A growth declaration overrides what the truncation shows: any declared
    growth makes ``K`` unbounded, and a negative coefficient makes it
    unbounded below.
    """
    ks = np.array([c.k for c in model.conditions if c.k is not None], dtype=float)
    k_sup = float(np.max(np.abs(ks))) if ks.size else 0.0
    k_inf = float(np.min(ks)) if ks.size else math.inf
    if model.growth is None:
        return ModeGapReport(is_gapped=True, is_semigapped=True, K_sup=k_sup, K_inf=k_inf)
    bounded_below = model.growth.coefficient > 0
    return ModeGapReport(
        is_gapped=False,
        is_semigapped=bounded_below,
        K_sup=math.inf,
        K_inf=k_inf if bounded_below else -math.inf,
    )


def _radial_matrices(
    radial_cells: int, m: int
) -> tuple[RealArray, RealArray, RealArray]:
    h = 1.0 / radial_cells
    n = radial_cells + 1
    stiffness = np.zeros((n, n))
    massmat = np.zeros((n, n))
    centrifugal = np.zeros((n, n))
    points, weights = np.polynomial.legendre.leggauss(QUADRATURE_POINTS)
    for e in range(radial_cells):
        ra, rb = e * h, (e + 1) * h
        idx = np.ix_([e, e + 1], [e, e + 1])
        stiffness[idx] += (0.5 * (ra + rb) / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
        massmat[idx] += (h / 12.0) * np.array(
            [[3.0 * ra + rb, ra + rb], [ra + rb, ra + 3.0 * rb]]
        )
        if m != 0:
            r = 0.5 * (ra + rb) + 0.5 * h * points
            phi = np.vstack([(rb - r) / h, (r - ra) / h])
            centrifugal[idx] += (phi * (0.5 * h * weights / r)) @ phi.T
    return stiffness, massmat, centrifugal


def radial_spectrum(model: DiskModeModel, m: int, count: int) -> RealArray:
    """Lowest eigenvalues of the radial problem in mode ``m``.

    Assembles ``[int |u'|^2 r dr + m^2 int |u|^2 / r dr + k |u(1)|^2] / (2 mass)``
    against ``int |u|^2 r dr`` with piecewise-linear elements. Modes ``m != 0``
    pin ``u(0) = 0`` and Dirichlet modes pin ``u(1) = 0``.

    Raises:
        ShapeError: If ``|m|`` exceeds the truncation.
        DomainError: If ``count`` exceeds the number of free nodes.
        NumericalError: If the eigensolver fails.
    """
    condition = model.condition(m)
    stiffness, massmat, centrifugal = _radial_matrices(model.radial_cells, m)
    form = stiffness + m**2 * centrifugal
    if condition.k is not None:
        form[-1, -1] += condition.k
    keep = np.ones(model.radial_cells + 1, dtype=bool)
    if m != 0:
        keep[0] = False
    if condition.k is None:
        keep[-1] = False
    free = int(keep.sum())
    if not 1 <= count <= free:
        raise DomainError(f"count must lie in 1..{free}, got {count}")
    h_matrix = form[np.ix_(keep, keep)] / (2.0 * model.mass)
    b_matrix = massmat[np.ix_(keep, keep)]
    logger.debug("radial pencil for mode %d: %d free nodes", m, free)
    try:
        values = scipy.linalg.eigh(
            h_matrix, b_matrix, eigvals_only=True, subset_by_index=[0, count - 1]
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"radial eigensolver failed: {exc}") from exc
    return np.asarray(values)

