from __future__ import annotations

from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator

from .dotmap import DotMapBaseModel


class Tolerances(DotMapBaseModel):
    """Numeric tolerances under ``[tolerances]``.

    Attributes:
        unitarity: Per-dimension bound on the Frobenius unitarity defect.
        hermitian: Relative bound on ``||A - A^H||_F`` for Hermitian inputs.
        cluster: Distance from 1 below which an eigenvalue counts as 1.
        ambiguity_factor: Eigenvalues between ``cluster`` and
            ``ambiguity_factor * cluster`` from 1 are ambiguous.
        null: Eigenvalues below this are treated as zero in projection meets.
        gap_threshold: Minimum gap (and semigap arc) for the gapped flags.
        round_trip: Bound for decompose/reconstruct round trips.
        representation: Relative bound for form-sum representation checks.
        operator_identity: Absolute bound on the averaged-Hamiltonian identity.
        constraint: Bound on ``||P phi||`` for states in a reduced space.
        decay: Bound on a test function's magnitude at the quadrature cut-off.
        model_config: Validate field assignments.
    """

    model_config = ConfigDict(validate_assignment=True)

    unitarity: float = Field(gt=0)
    hermitian: float = Field(gt=0)
    cluster: float = Field(gt=0)
    ambiguity_factor: float = Field(gt=1)
    null: float = Field(gt=0)
    gap_threshold: float = Field(ge=0)
    round_trip: float = Field(gt=0)
    representation: float = Field(gt=0)
    operator_identity: float = Field(gt=0)
    constraint: float = Field(gt=0)
    decay: float = Field(gt=0)


class Defaults(DotMapBaseModel):
    """Model defaults under ``[defaults]``."""

    model_config = ConfigDict(validate_assignment=True)

    mass: float = Field(gt=0)
    grid: int = Field(ge=8)
    min_cells: int = Field(ge=2)
    radial_grid: int = Field(ge=8)
    gaussian_center: float = Field(gt=0, lt=1)
    gaussian_width: float = Field(gt=0)
    samples: int = Field(ge=4)
    halfplane_support: float = Field(gt=0)


class CliOptions(DotMapBaseModel):
    """Command-line behaviour and verification bands under ``[cli]``.

    Attributes:
        jobs_env: Environment variable holding the default worker count.
        float_digits: Significant digits written to CSV files.
        order_band: Accepted interval for a fitted Trotter order.
        averaged_ratio_max: Largest accepted ratio of time-averaged errors per N-doubling.
        spectrum_rel_tol: Relative eigenvalue tolerance against oracles.
        spectrum_zero_tol: Absolute tolerance where the oracle value is zero.
        penalty_rel_tol: Final relative error of the penalty route.
        halfplane_tol: Distance of the extrapolated boundary value from the reference.
        model_config: Validate field assignments.
    """

    model_config = ConfigDict(validate_assignment=True)

    jobs_env: str
    float_digits: int = Field(ge=1, le=17)
    order_band: tuple[float, float]
    averaged_ratio_max: float = Field(gt=0)
    spectrum_rel_tol: float = Field(gt=0)
    spectrum_zero_tol: float = Field(gt=0)
    penalty_rel_tol: float = Field(gt=0)
    halfplane_tol: float = Field(gt=0)

    @model_validator(mode="after")
    def _require_ordered_band(self) -> CliOptions:
        low, high = self.order_band
        if low > high:
            raise ValueError("order_band must be given as [low, high] with low <= high")
        return self


class SettingsFile(DotMapBaseModel):
    """Root schema of ``settings.toml``.

    Attributes:
        tolerances: Numeric tolerances.
        defaults: Model defaults.
        cli: Command-line options.
    """

    tolerances: Tolerances
    defaults: Defaults
    cli: CliOptions
