"""Scenario files: JSON schema, preset resolution and the run manifest."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any
from typing import Literal

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_validator

from ..boundary_algebra import BoundaryUnitary
from ..disk_cavity import DiskModeModel
from ..disk_cavity import GrowthDeclaration
from ..disk_cavity import ModeCondition
from ..exceptions import ConfigError

ScenarioKind = Literal["compose", "spectrum", "trotter", "penalty", "disk", "halfplane"]
TestFunctionName = Literal["gaussian", "odd_gaussian"]

# A preset string, or explicit matrix rows with entries ``x`` or ``[re, im]``.
BoundarySpec = str | list[list[float | list[float]]]

PRESET_NAMES = ("dirichlet", "neumann", "periodic", "random", "random:rank", "robin:k", "alpha:a", "mixed:a")


def _parse_numbers(text: str, field: str, spec: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise ConfigError(f"{field}: preset {spec!r} needs numeric parameters") from None


def _explicit_matrix(rows: list[list[Any]], field: str) -> np.ndarray:
    try:
        entries = [
            [complex(x[0], x[1]) if isinstance(x, list) else complex(x) for x in row]
            for row in rows
        ]
        return np.array(entries, dtype=np.complex128)
    except (TypeError, IndexError, ValueError):
        raise ConfigError(f"{field}: explicit matrix entries must be numbers or [re, im]") from None


def resolve_boundary(spec: BoundarySpec, field: str = "u", seed: int = 0) -> BoundaryUnitary:
    """Turn a preset name or explicit matrix into a two-dimensional boundary unitary.

    Args:
        spec: One of ``dirichlet``, ``neumann``, ``periodic``, ``random``
            (or ``random:rank`` with a fixed Dirichlet rank),
            ``robin:k`` (or ``robin:k0,k1``), ``alpha:a`` (or ``alpha:a0,a1``),
            ``mixed:a``, or explicit 2 x 2 matrix rows.
        field: Scenario field name, used in error messages.
        seed: Seed of the ``random`` preset.

    Returns:
        BoundaryUnitary: The resolved unitary.

    Raises:
        ConfigError: If the preset is unknown or malformed.
    """
    if not isinstance(spec, str):
        matrix = _explicit_matrix(spec, field)
        if matrix.shape != (2, 2):
            raise ConfigError(f"{field}: explicit matrix must be 2 x 2, got {matrix.shape}")
        try:
            return BoundaryUnitary(matrix=matrix)
        except ValidationError as err:
            raise ConfigError(f"{field}: {err.errors()[0]['msg']}") from None

    name, _, params = spec.partition(":")
    if name in ("dirichlet", "neumann", "periodic") and params:
        raise ConfigError(f"{field}: preset {name!r} takes no parameters")
    if name == "dirichlet":
        return BoundaryUnitary.dirichlet(2)
    if name == "neumann":
        return BoundaryUnitary.neumann(2)
    if name == "periodic":
        return BoundaryUnitary.periodic()
    if name == "random":
        rank = None
        if params:
            if params not in ("0", "1", "2"):
                raise ConfigError(f"{field}: preset {spec!r} needs a rank 0, 1 or 2")
            rank = int(params)
        return BoundaryUnitary.random(2, np.random.default_rng(seed), rank=rank)
    if name in ("robin", "alpha", "mixed") and params:
        values = _parse_numbers(params, field, spec)
        if len(values) not in (1, 2) or (name == "mixed" and len(values) != 1):
            raise ConfigError(f"{field}: preset {spec!r} has the wrong number of parameters")
        if name == "robin":
            return BoundaryUnitary.robin(values)
        if name == "alpha":
            return BoundaryUnitary.alpha(values)
        return BoundaryUnitary.mixed(values[0])
    raise ConfigError(
        f"{field}: unknown preset {spec!r}; expected one of {', '.join(PRESET_NAMES)}"
    )


class DiskModelSpec(BaseModel):
    """Disk boundary model in a scenario file.

    Attributes:
        m_max: Angular truncation.
        default: ``"dirichlet"``, ``"neumann"`` or ``"robin:k"`` for unlisted modes.
        modes: Explicit per-mode conditions overriding the default.
        growth: Declared growth of the Robin coefficients.
        model_config: Reject unknown keys.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    m_max: int = Field(ge=0)
    default: str = "neumann"
    modes: list[ModeCondition] = Field(default_factory=list)
    growth: GrowthDeclaration | None = None

    def build(self, radial_cells: int | None = None, mass: float | None = None) -> DiskModeModel:
        """Expand into a :class:`DiskModeModel`."""
        name, _, param = self.default.partition(":")
        if name == "dirichlet" and not param:
            base = ModeCondition(m=0, kind="dirichlet")
        elif name == "neumann" and not param:
            base = ModeCondition(m=0, kind="robin", k=0.0)
        elif name == "robin" and param:
            try:
                base = ModeCondition(m=0, kind="robin", k=float(param))
            except ValueError:
                raise ConfigError(f"disk default {self.default!r} needs a numeric k") from None
        else:
            raise ConfigError(f"unknown disk default {self.default!r}")
        overrides = {c.m: c for c in self.modes}
        conditions = [
            overrides.get(m, base.model_copy(update={"m": m}))
            for m in range(-self.m_max, self.m_max + 1)
        ]
        extra: dict[str, Any] = {}
        if radial_cells is not None:
            extra["radial_cells"] = radial_cells
        if mass is not None:
            extra["mass"] = mass
        try:
            return DiskModeModel(
                m_max=self.m_max, conditions=conditions, growth=self.growth, **extra
            )
        except ValidationError as err:
            raise ConfigError(f"invalid disk model: {err.errors()[0]['msg']}") from None


REQUIRED_FIELDS: dict[str, tuple[str, ...]] = {
    "compose": ("u1", "u2"),
    "spectrum": ("u",),
    "trotter": ("u1", "u2", "N_values"),
    "penalty": ("partner", "penalties"),
    "disk": ("disk1", "disk2"),
    "halfplane": (),
}


class Scenario(BaseModel):
    """One unit of work in a scenario file.

    Optional numeric fields fall back to the configured defaults.

    Attributes:
        id: Unique scenario id, used for output file names.
        kind: Pipeline to run.
        u1: First boundary condition.
        u2: Second boundary condition.
        u: Boundary condition of a spectrum scenario.
        expected: Boundary condition the composition should reproduce.
        partner: Partner of the penalty route.
        penalties: Robin coefficients approaching Dirichlet.
        disk1: First disk model.
        disk2: Second disk model.
        mode: Angular mode of the disk spectrum.
        grid: Number of cells.
        mass: Particle mass.
        count: Number of eigenvalues.
        t: Time per boundary condition.
        T: Horizon of the time average.
        N_values: Switching rounds of a sweep.
        samples: Samples of the time average.
        splitting: Splitting scheme.
        assert_rate: Verify the fitted order and the averaged-error ratio.
        y_values: Distances to the real axis for the half-plane demo.
        test_function: Test function of the half-plane demo.
        tolerance: Override of the main verification tolerance.
        seed: Seed of random presets.
        model_config: Reject unknown keys.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str = Field(min_length=1)
    kind: ScenarioKind
    u1: BoundarySpec | None = None
    u2: BoundarySpec | None = None
    u: BoundarySpec | None = None
    expected: BoundarySpec | None = None
    partner: BoundarySpec | None = None
    penalties: list[float] | None = None
    disk1: DiskModelSpec | None = None
    disk2: DiskModelSpec | None = None
    mode: int = 0
    grid: int | None = Field(default=None, ge=8)
    mass: float | None = Field(default=None, gt=0)
    count: int = Field(default=3, ge=1)
    t: float = Field(default=0.1, gt=0)
    T: float | None = Field(default=None, gt=0)
    N_values: list[int] | None = None
    samples: int | None = Field(default=None, ge=4)
    splitting: Literal["lie", "strang"] = "lie"
    assert_rate: bool = False
    y_values: list[float] | None = None
    test_function: TestFunctionName = "gaussian"
    tolerance: float | None = Field(default=None, gt=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_required(self) -> Scenario:
        missing = [name for name in REQUIRED_FIELDS[self.kind] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"scenario kind {self.kind!r} needs {', '.join(missing)}")
        if self.N_values is not None and (
            not self.N_values
            or self.N_values[0] < 1
            or any(b <= a for a, b in zip(self.N_values, self.N_values[1:], strict=False))
        ):
            raise ValueError("N_values must be positive and strictly increasing")
        for name in ("u1", "u2", "u", "expected", "partner"):
            spec = getattr(self, name)
            if spec is not None:
                try:
                    resolve_boundary(spec, name, self.seed)
                except ConfigError as err:
                    raise ValueError(str(err)) from None
        for name in ("disk1", "disk2"):
            disk = getattr(self, name)
            if disk is not None:
                try:
                    disk.build()
                except ConfigError as err:
                    raise ValueError(f"{name}: {err}") from None
        if self.kind == "disk" and self.disk1 is not None and abs(self.mode) > self.disk1.m_max:
            raise ValueError(f"mode {self.mode} outside truncation {self.disk1.m_max}")
        return self

    def boundary(self, name: str) -> BoundaryUnitary:
        """Resolve the boundary field ``name``."""
        spec = getattr(self, name)
        if spec is None:
            raise ConfigError(f"scenario {self.id!r} has no field {name!r}")
        # Each field gets its own stream so u1 and u2 differ under "random".
        offset = ("u1", "u2", "u", "expected", "partner").index(name)
        return resolve_boundary(spec, name, self.seed + offset)


class ScenarioFile(BaseModel):
    """Root of a scenario file.

    Attributes:
        scenarios: Scenarios in execution order.
        model_config: Reject unknown keys.
    """

    model_config = ConfigDict(extra="forbid")

    scenarios: list[Scenario]

    @model_validator(mode="after")
    def _unique_ids(self) -> ScenarioFile:
        ids = [s.id for s in self.scenarios]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate scenario ids: {', '.join(duplicates)}")
        return self


def _describe(err: ValidationError) -> str:
    parts = []
    for item in err.errors():
        location = ".".join(str(x) for x in item["loc"])
        parts.append(f"{location}: {item['msg']}" if location else item["msg"])
    return "; ".join(parts)


def parse_config_bytes(raw: bytes, source: str = "<config>") -> list[Scenario]:
    """Validate scenario-file bytes.

    The file holds either a list of scenarios or ``{"scenarios": [...]}``.

    Raises:
        ConfigError: If the JSON is malformed or a scenario is invalid.
    """
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise ConfigError(f"{source}: malformed JSON: {err}") from None
    if isinstance(data, list):
        data = {"scenarios": data}
    try:
        return ScenarioFile.model_validate(data).scenarios
    except ValidationError as err:
        raise ConfigError(f"{source}: {_describe(err)}") from None


def parse_config(path: Path | str) -> list[Scenario]:
    """Read and validate a scenario file.

    Raises:
        ConfigError: If the file is missing, malformed or invalid.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from None
    return parse_config_bytes(raw, str(path))


class ScenarioResult(BaseModel):
    """Outcome of one scenario, as written to ``summary.json``.

    Attributes:
        id: Scenario id.
        kind: Scenario kind.
        passed: Every assertion held and no error occurred.
        metrics: Scalar results.
        files: Files written for this scenario.
        assertions: Verdict per named assertion.
        error: Message of a numerical failure.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    id: str
    kind: ScenarioKind
    passed: bool
    metrics: dict[str, Any] = Field(default_factory=dict)
    files: list[str] = Field(default_factory=list)
    assertions: dict[str, bool] = Field(default_factory=dict)
    error: str | None = None

    def summary(self) -> dict[str, Any]:
        """Summary JSON entry ``{id, kind, pass, metrics, files}``."""
        entry: dict[str, Any] = {
            "id": self.id,
            "kind": self.kind,
            "pass": self.passed,
            "metrics": self.metrics,
            "files": self.files,
        }
        if self.error is not None:
            entry["error"] = self.error
        return entry


class RunManifest(BaseModel):
    """Record of one ``run`` invocation, as written to ``manifest.json``.

    Attributes:
        scenario_ids: Scenario ids in execution order.
        started_utc: Start time.
        finished_utc: End time.
        input_sha256: SHA-256 of the scenario-file bytes.
        files: Every file written, relative to the output directory.
        assertions: Verdict per scenario and assertion.
        verify: Whether assertions decided the exit code.
        exit_code: Process exit code.
        model_config: Frozen model.
    """

    model_config = ConfigDict(frozen=True)

    scenario_ids: list[str]
    started_utc: str
    finished_utc: str
    input_sha256: str
    files: list[str]
    assertions: dict[str, dict[str, bool]]
    verify: bool
    exit_code: int
