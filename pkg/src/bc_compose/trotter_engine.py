"""Alternating evolution under two boundary conditions and its limit.

Switching between cavities ``c1`` and ``c2`` in ``N`` rounds of duration
``t / N`` each approximates evolution for time ``2t`` under the Hamiltonian of
the composed boundary condition. Dirichlet-involving pairs, whose admissible
subspaces differ, are reached through a Robin penalty family instead.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
import scipy.integrate
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator

from ._arrays import ComplexArray
from ._arrays import frobenius
from .boundary_algebra import BoundaryUnitary
from .boundary_algebra import compose
from .config import settings
from .exceptions import DomainError
from .exceptions import ShapeError
from .interval_cavity import Cavity1D
from .interval_cavity import StateVector
from .interval_cavity import build_cavity
from .interval_cavity import evolution_matrix
from .interval_cavity import gaussian_state
from .interval_cavity import propagate
from .interval_cavity import spectrum
from .logger import logger

Splitting = Literal["lie", "strang"]

PENALTY_EIGENVALUES = 5


def _require_shared_space(c1: Cavity1D, c2: Cavity1D) -> None:
    if c1.cells != c2.cells:
        raise ShapeError(f"grid mismatch: {c1.cells} vs {c2.cells} cells")
    if c1.mass != c2.mass:
        raise ShapeError(f"mass mismatch: {c1.mass} vs {c2.mass}")
    if frobenius(c1.constraint_P - c2.constraint_P) > settings.tolerances.constraint:
        raise DomainError(
            "the cavities have different admissible subspaces; use penalty_dirichlet "
            "for Dirichlet-involving pairs"
        )


def _b_distance(a: StateVector, b: StateVector, massmat: np.ndarray) -> float:
    diff = a.coefficients - b.coefficients
    return math.sqrt(max(float(np.real(np.vdot(diff, massmat @ diff))), 0.0))


def step_matrix(
    c1: Cavity1D, c2: Cavity1D, tau: float, splitting: Splitting = "lie"
) -> ComplexArray:
    """Nodal matrix of one switching round of length ``tau`` per cavity.

    Lie splitting applies ``c2`` first, then ``c1``. Strang splitting wraps a
    full ``c1`` step between two half steps of ``c2``.
    """
    if splitting == "lie":
        return evolution_matrix(c1, tau) @ evolution_matrix(c2, tau)
    half = evolution_matrix(c2, tau / 2.0)
    return half @ evolution_matrix(c1, tau) @ half


def alternating_product(
    psi0: StateVector,
    t: float,
    n_steps: int,
    c1: Cavity1D,
    c2: Cavity1D,
    splitting: Splitting = "lie",
) -> StateVector:
    """Return ``(exp(-i t/N H_1) exp(-i t/N H_2))^N psi0``.

    Args:
        psi0: Admissible initial state.
        t: Time spent under each boundary condition.
        n_steps: Number of switching rounds ``N``.
        c1: Cavity applied second in every round.
        c2: Cavity applied first in every round.
        splitting: ``"lie"`` or ``"strang"``.

    Returns:
        StateVector: State after total time ``2t``.

    Raises:
        ShapeError: If grids or masses differ.
        DomainError: If the admissible subspaces differ or ``N < 1``.
    """
    if n_steps < 1:
        raise DomainError(f"need at least one switching round, got {n_steps}")
    _require_shared_space(c1, c2)
    # Zero-time propagation validates psi0 and returns it unchanged.
    start = propagate(c1, psi0, 0.0)
    if t == 0:
        return start
    step = step_matrix(c1, c2, t / n_steps, splitting)
    state = start.coefficients
    for _ in range(n_steps):
        state = step @ state
    return StateVector(coefficients=state)


def limit_reference(psi0: StateVector, t: float, w_cavity: Cavity1D) -> StateVector:
    """Evolve ``psi0`` for time ``2t`` with the composed Hamiltonian."""
    return propagate(w_cavity, psi0, 2.0 * t)


def pointwise_error(
    psi0: StateVector,
    t: float,
    n_steps: int,
    c1: Cavity1D,
    c2: Cavity1D,
    w_cavity: Cavity1D,
    splitting: Splitting = "lie",
) -> float:
    """B-norm distance between the alternating product and the limit."""
    product = alternating_product(psi0, t, n_steps, c1, c2, splitting)
    return _b_distance(product, limit_reference(psi0, t, w_cavity), w_cavity.massmat)


def time_averaged_error(
    psi0: StateVector,
    horizon: float,
    samples: int,
    n_steps: int,
    c1: Cavity1D,
    c2: Cavity1D,
    w_cavity: Cavity1D,
    splitting: Splitting = "lie",
) -> float:
    """Trapezoidal average of the pointwise error over ``t`` in ``[0, horizon]``.

    Raises:
        DomainError: If ``horizon <= 0`` or fewer than four samples are requested.
    """
    if horizon <= 0:
        raise DomainError(f"averaging horizon must be positive, got {horizon}")
    if samples < 4:
        raise DomainError(f"need at least 4 samples, got {samples}")
    times = np.linspace(0.0, horizon, samples)
    errors = np.array(
        [pointwise_error(psi0, s, n_steps, c1, c2, w_cavity, splitting) for s in times]
    )
    return float(scipy.integrate.trapezoid(errors, times) / horizon)


def fit_order(n_values: Sequence[int], errors: Sequence[float]) -> float:
    """Negative least-squares slope of ``log(error)`` against ``log(N)``.

    Returns ``nan`` when fewer than two errors are positive.
    """
    n_arr = np.asarray(n_values, dtype=float)
    err = np.asarray(errors, dtype=float)
    usable = err > 0
    if usable.sum() < 2:
        return math.nan
    slope = np.polyfit(np.log(n_arr[usable]), np.log(err[usable]), 1)[0]
    return float(-slope)


class TrotterReport(BaseModel):
    """Convergence of the alternating product towards the composed evolution.

    Attributes:
        N_values: Strictly increasing numbers of switching rounds.
        t: Time per boundary condition (total evolution ``2t``).
        pointwise_errors: B-norm errors at the final time.
        time_averaged_errors: Errors averaged over ``[0, averaging_window]``.
        averaging_window: Horizon of the time average.
        fitted_order: Negative log-log slope of the pointwise errors.
        splitting: Splitting scheme used.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    N_values: list[int]
    t: float
    pointwise_errors: list[float]
    time_averaged_errors: list[float]
    averaging_window: float
    fitted_order: float
    splitting: Splitting = "lie"

    @model_validator(mode="after")
    def _check_lengths(self) -> TrotterReport:
        n = len(self.N_values)
        if len(self.pointwise_errors) != n or len(self.time_averaged_errors) != n:
            raise ValueError("report columns must have equal length")
        if any(b <= a for a, b in zip(self.N_values, self.N_values[1:], strict=False)):
            raise ValueError("N_values must be strictly increasing")
        if any(e < 0 for e in (*self.pointwise_errors, *self.time_averaged_errors)):
            raise ValueError("errors must be nonnegative")
        return self


def convergence_sweep(
    psi0: StateVector,
    t: float,
    n_values: Sequence[int],
    c1: Cavity1D,
    c2: Cavity1D,
    w_cavity: Cavity1D,
    averaging_window: float | None = None,
    samples: int | None = None,
    splitting: Splitting = "lie",
) -> TrotterReport:
    """Measure the alternating-product error for each ``N`` in ``n_values``.

    Args:
        psi0: Admissible initial state.
        t: Time per boundary condition.
        n_values: Strictly increasing numbers of rounds.
        c1: First cavity.
        c2: Second cavity.
        w_cavity: Cavity of the composed boundary condition.
        averaging_window: Horizon of the time average; defaults to ``t``.
        samples: Samples of the time average; defaults to ``settings.defaults.samples``.
        splitting: ``"lie"`` or ``"strang"``.

    Returns:
        TrotterReport: Errors and the fitted order.
    """
    window = t if averaging_window is None else averaging_window
    samples = settings.defaults.samples if samples is None else samples
    pointwise: list[float] = []
    averaged: list[float] = []
    for n in n_values:
        pointwise.append(pointwise_error(psi0, t, n, c1, c2, w_cavity, splitting))
        averaged.append(
            time_averaged_error(psi0, window, samples, n, c1, c2, w_cavity, splitting)
        )
        logger.info("N = %d: error %.3e, averaged %.3e", n, pointwise[-1], averaged[-1])
    return TrotterReport(
        N_values=list(n_values),
        t=t,
        pointwise_errors=pointwise,
        time_averaged_errors=averaged,
        averaging_window=window,
        fitted_order=fit_order(n_values, pointwise),
        splitting=splitting,
    )


def matrix_identity_defect(c1: Cavity1D, c2: Cavity1D, w_cavity: Cavity1D) -> float:
    """Return ``||(H_1 + H_2) / 2 - H_W||_F`` for unconstrained cavities."""
    _require_shared_space(c1, c2)
    _require_shared_space(c1, w_cavity)
    return frobenius(0.5 * (c1.hamiltonian + c2.hamiltonian) - w_cavity.hamiltonian)


def swap_defect(
    psi0: StateVector, t: float, n_steps: int, c1: Cavity1D, c2: Cavity1D
) -> float:
    """B-norm distance between the products with the two cavities swapped."""
    forward = alternating_product(psi0, t, n_steps, c1, c2)
    backward = alternating_product(psi0, t, n_steps, c2, c1)
    return _b_distance(forward, backward, c1.massmat)


class PenaltyReport(BaseModel):
    """Robin penalty ``K = lambda I`` standing in for a Dirichlet condition.

    Attributes:
        penalty: The Robin coefficient ``lambda``.
        eigenvalues: Lowest eigenvalues of the composed penalty cavity.
        reference: Same eigenvalues of the Dirichlet-composed cavity.
        relative_errors: ``|eigenvalue - reference| / |reference|``.
        sweep: Convergence sweep against the composed cavity, when the partner
            shares the unconstrained space.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    penalty: float = Field(ge=0)
    eigenvalues: list[float]
    reference: list[float]
    relative_errors: list[float]
    sweep: TrotterReport | None = None

    @property
    def max_relative_error(self) -> float:
        """Largest relative eigenvalue error."""
        return max(self.relative_errors)


def penalty_dirichlet(
    penalties: Sequence[float],
    partner: BoundaryUnitary,
    cells: int | None = None,
    mass: float | None = None,
    psi0: StateVector | None = None,
    t: float = 0.1,
    n_values: Sequence[int] | None = None,
    count: int = PENALTY_EIGENVALUES,
) -> list[PenaltyReport]:
    """Approach the Dirichlet condition by Robin conditions ``K = lambda I``.

    For every ``lambda`` the Robin unitary is composed with ``partner`` and the
    lowest eigenvalues are compared with the Dirichlet-composed cavity. When the
    partner is unconstrained the alternating product is swept as well.

    Args:
        penalties: Nonnegative ascending Robin coefficients.
        partner: Gapped boundary unitary of dimension 2.
        cells: Number of cells; defaults to ``settings.defaults.grid``.
        mass: Particle mass; defaults to ``settings.defaults.mass``.
        psi0: Initial state for the sweep; defaults to the Gaussian bump.
        t: Time per boundary condition for the sweep.
        n_values: Numbers of rounds for the sweep; no sweep when ``None``.
        count: Number of eigenvalues compared.

    Returns:
        list[PenaltyReport]: One report per ``lambda``.

    Raises:
        DomainError: If the penalties are negative or not ascending.
    """
    values = list(penalties)
    if any(v < 0 for v in values) or any(b < a for a, b in zip(values, values[1:], strict=False)):
        raise DomainError("penalties must be nonnegative and ascending")
    reference_cavity = build_cavity(
        compose(BoundaryUnitary.dirichlet(2), partner), cells, mass
    )
    reference = spectrum(reference_cavity, count)
    partner_cavity = build_cavity(partner, cells, mass)
    sweep_possible = n_values is not None and partner_cavity.reduced_dim == partner_cavity.cells + 1

    reports: list[PenaltyReport] = []
    for penalty in values:
        robin = BoundaryUnitary.robin(penalty)
        w_cavity = build_cavity(compose(robin, partner), cells, mass)
        eigenvalues = spectrum(w_cavity, count)
        errors = np.abs(eigenvalues - reference) / np.maximum(np.abs(reference), 1e-300)
        sweep = None
        if sweep_possible and n_values is not None:
            robin_cavity = build_cavity(robin, cells, mass)
            state = gaussian_state(w_cavity) if psi0 is None else psi0
            sweep = convergence_sweep(state, t, n_values, robin_cavity, partner_cavity, w_cavity)
        logger.info("penalty %g: max relative eigenvalue error %.3e", penalty, errors.max())
        reports.append(
            PenaltyReport(
                penalty=penalty,
                eigenvalues=eigenvalues.tolist(),
                reference=reference.tolist(),
                relative_errors=errors.tolist(),
                sweep=sweep,
            )
        )
    return reports

