"""Execute scenarios, write CSV data, summaries and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from datetime import datetime
from datetime import timezone
from functools import partial
from pathlib import Path
from typing import Any

import numpy as np

from .._arrays import frobenius
from ..boundary_algebra import BoundaryUnitary
from ..boundary_algebra import classify
from ..boundary_algebra import compose
from ..boundary_algebra import decompose
from ..config import settings
from ..disk_cavity import BoundaryModeVector
from ..disk_cavity import DiskModeModel
from ..disk_cavity import DiskState
from ..disk_cavity import dirichlet_decompose
from ..disk_cavity import harmonic_extension
from ..disk_cavity import lambda_lift
from ..disk_cavity import mode_gap_check
from ..disk_cavity import modewise_compose
from ..disk_cavity import radial_spectrum
from ..disk_cavity import residual_refinement
from ..disk_cavity import sobolev_norm
from ..disk_cavity import to_boundary_unitary
from ..exceptions import BoundaryCompositionError
from ..exceptions import ConfigError
from ..halfplane import gaussian
from ..halfplane import halfplane_boundary_demo
from ..halfplane import odd_gaussian
from ..interval_cavity import build_cavity
from ..interval_cavity import gaussian_state
from ..interval_cavity import spectrum
from ..logger import logger
from ..oracles import bessel_zeros
from ..oracles import dirichlet_interval_spectrum
from ..oracles import neumann_interval_spectrum
from ..oracles import periodic_interval_spectrum
from ..oracles import robin_interval_spectrum
from ..trotter_engine import PENALTY_EIGENVALUES
from ..trotter_engine import alternating_product
from ..trotter_engine import convergence_sweep
from ..trotter_engine import matrix_identity_defect
from ..trotter_engine import penalty_dirichlet
from .scenario import RunManifest
from .scenario import Scenario
from .scenario import ScenarioResult

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

CSV_HEADERS: dict[str, list[str]] = {
    "compose": ["scenario_id", "entry_row", "entry_col", "re", "im"],
    "spectrum": ["scenario_id", "index", "eigenvalue", "reference", "rel_error"],
    "disk": ["scenario_id", "index", "eigenvalue", "reference", "rel_error"],
    "trotter": ["scenario_id", "N", "t", "pointwise_error", "time_avg_error", "fitted_order"],
    "penalty": ["scenario_id", "lambda", "index", "eigenvalue", "reference", "rel_error"],
    "halfplane": ["scenario_id", "y", "re", "im", "abs_error"],
}

DEFAULT_Y_VALUES = [1e-1, 1e-2, 1e-3, 1e-4]
DISK_SAMPLE_SEED = 7
# Radial cells of the coarse mesh in the harmonic-extension refinement check.
RESIDUAL_CELLS = 64


@dataclass
class _Outcome:
    metrics: dict[str, Any] = field(default_factory=dict)
    rows: list[list[Any]] = field(default_factory=list)
    assertions: dict[str, bool] = field(default_factory=dict)


def utc_now() -> str:
    """Current time as an ISO-8601 UTC string."""
    return datetime.now(timezone.utc).isoformat()


def _format(value: Any) -> str:
    if isinstance(value, bool) or isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return format(float(value), f".{settings.cli.float_digits}g")
    return str(value)


def _relative_error(value: float, reference: float) -> float:
    if math.isnan(reference):
        return math.nan
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def _spectrum_rows(
    scenario_id: str, values: np.ndarray, reference: np.ndarray | None
) -> tuple[list[list[Any]], bool]:
    rows: list[list[Any]] = []
    ok = True
    for j, value in enumerate(values):
        ref = math.nan if reference is None else float(reference[j])
        rel = _relative_error(float(value), ref)
        rows.append([scenario_id, j, float(value), ref, rel])
        if not math.isnan(ref):
            limit = settings.cli.spectrum_zero_tol if ref == 0 else settings.cli.spectrum_rel_tol
            ok = ok and rel <= limit
    return rows, ok


def _matrix_entries(u: BoundaryUnitary) -> list[list[list[float]]]:
    return [[[float(x.real), float(x.imag)] for x in row] for row in u.matrix]


def interval_reference(u: BoundaryUnitary, count: int, mass: float) -> np.ndarray | None:
    """Closed-form or root-finding spectrum for the named interval conditions."""
    label = classify(u)
    if label == "dirichlet":
        return dirichlet_interval_spectrum(count, mass)
    if label == "neumann":
        return neumann_interval_spectrum(count, mass)
    if label == "periodic-type":
        return periodic_interval_spectrum(count, mass)
    if label == "robin":
        k = np.real(np.diag(decompose(u).K))
        if abs(k[0] - k[1]) <= settings.tolerances.cluster and k[0] > 0:
            return robin_interval_spectrum(float(k[0]), count, mass)
    return None


def _run_compose(s: Scenario) -> _Outcome:
    out = _Outcome()
    u1, u2 = s.boundary("u1"), s.boundary("u2")
    w = compose(u1, u2)
    tol = settings.tolerances.round_trip if s.tolerance is None else s.tolerance
    commutativity = frobenius(w.matrix - compose(u2, u1).matrix)
    idempotence = frobenius(compose(u1, u1).matrix - u1.matrix)
    out.metrics.update(
        W=_matrix_entries(w),
        label=classify(w),
        commutativity_defect=commutativity,
        idempotence_defect=idempotence,
    )
    out.assertions.update(commutative=commutativity <= tol, idempotent=idempotence <= tol)
    if s.expected is not None:
        expected_defect = frobenius(w.matrix - s.boundary("expected").matrix)
        out.metrics["expected_defect"] = expected_defect
        out.assertions["matches_expected"] = expected_defect <= tol
    for i, row in enumerate(w.matrix):
        for j, entry in enumerate(row):
            out.rows.append([s.id, i, j, float(entry.real), float(entry.imag)])
    return out


def _run_spectrum(s: Scenario) -> _Outcome:
    out = _Outcome()
    u = s.boundary("u")
    cavity = build_cavity(u, s.grid, s.mass)
    values = spectrum(cavity, s.count)
    reference = interval_reference(u, s.count, cavity.mass)
    out.rows, ok = _spectrum_rows(s.id, values, reference)
    out.metrics.update(label=classify(u), cells=cavity.cells, eigenvalues=values.tolist())
    if reference is not None:
        out.assertions["matches_oracle"] = ok
    if classify(u) == "periodic-type" and s.count >= 3:
        split = abs(values[2] - values[1]) / values[1]
        out.metrics["doublet_split"] = float(split)
        out.assertions["doublet_degenerate"] = bool(split <= settings.cli.spectrum_rel_tol)
    if s.assert_rate and reference is not None:
        fine = spectrum(build_cavity(u, 2 * cavity.cells, cavity.mass), s.count)
        nonzero = reference != 0
        coarse_err = np.abs(values - reference)[nonzero]
        fine_err = np.abs(fine - reference)[nonzero]
        ratio = float(np.max(coarse_err) / np.max(fine_err))
        out.metrics["refinement_ratio"] = ratio
        out.assertions["second_order"] = 3.2 <= ratio <= 4.8
    return out


def _run_trotter(s: Scenario) -> _Outcome:
    out = _Outcome()
    assert s.N_values is not None
    u1, u2 = s.boundary("u1"), s.boundary("u2")
    c1 = build_cavity(u1, s.grid, s.mass)
    c2 = build_cavity(u2, s.grid, s.mass)
    w_cavity = build_cavity(compose(u1, u2), s.grid, s.mass)
    psi0 = gaussian_state(w_cavity)
    report = convergence_sweep(
        psi0, s.t, s.N_values, c1, c2, w_cavity, s.T, s.samples, s.splitting
    )
    final = alternating_product(psi0, s.t, s.N_values[-1], c1, c2, s.splitting)
    norm_defect = abs(final.norm(c1.massmat) - psi0.norm(c1.massmat))
    identity = matrix_identity_defect(c1, c2, w_cavity)
    out.metrics.update(
        fitted_order=report.fitted_order,
        final_error=report.pointwise_errors[-1],
        norm_defect=norm_defect,
        identity_defect=identity,
    )
    out.assertions.update(
        unitary=norm_defect <= settings.tolerances.constraint,
        operator_identity=identity <= settings.tolerances.operator_identity,
    )
    if s.tolerance is not None:
        out.assertions["final_error"] = report.pointwise_errors[-1] <= s.tolerance
    if s.assert_rate and len(s.N_values) >= 2:
        low, high = settings.cli.order_band
        doublings = math.log2(s.N_values[-1] / s.N_values[0])
        averaged = report.time_averaged_errors
        ratio = (averaged[-1] / averaged[0]) ** (1.0 / doublings) if averaged[0] > 0 else math.nan
        out.metrics["averaged_ratio_per_doubling"] = ratio
        out.assertions["order_in_band"] = low <= report.fitted_order <= high
        out.assertions["averaged_ratio"] = ratio <= settings.cli.averaged_ratio_max
    for n, pointwise, averaged_error in zip(
        report.N_values, report.pointwise_errors, report.time_averaged_errors, strict=True
    ):
        out.rows.append([s.id, n, s.t, pointwise, averaged_error, report.fitted_order])
    return out


def _run_penalty(s: Scenario) -> _Outcome:
    out = _Outcome()
    assert s.penalties is not None
    reports = penalty_dirichlet(
        s.penalties,
        s.boundary("partner"),
        cells=s.grid,
        mass=s.mass,
        t=s.t,
        n_values=s.N_values,
        count=PENALTY_EIGENVALUES,
    )
    worst = [r.max_relative_error for r in reports]
    tol = settings.cli.penalty_rel_tol if s.tolerance is None else s.tolerance
    out.metrics.update(max_relative_errors=worst)
    out.assertions.update(
        monotone=all(b <= a for a, b in zip(worst, worst[1:], strict=False)),
        final_error=worst[-1] <= tol,
    )
    for report in reports:
        for j, (value, ref, rel) in enumerate(
            zip(report.eigenvalues, report.reference, report.relative_errors, strict=True)
        ):
            out.rows.append([s.id, report.penalty, j, value, ref, rel])
    return out


def disk_reference(model: DiskModeModel, m: int, count: int) -> np.ndarray | None:
    """Bessel-zero spectrum of mode ``m`` for Dirichlet, and Neumann at ``m = 0``."""
    condition = model.condition(m)
    if condition.k is None:
        return bessel_zeros(abs(m), count) ** 2 / (2.0 * model.mass)
    if condition.k == 0 and m == 0:
        # J_0' = -J_1, plus the constant mode.
        zeros = np.concatenate([[0.0], bessel_zeros(1, count - 1)]) if count > 1 else np.zeros(1)
        return zeros**2 / (2.0 * model.mass)
    return None


def _run_disk(s: Scenario) -> _Outcome:
    out = _Outcome()
    assert s.disk1 is not None and s.disk2 is not None
    model1 = s.disk1.build(s.grid, s.mass)
    model2 = s.disk2.build(s.grid, s.mass)
    composed = modewise_compose(model1, model2)

    matrix_defect = frobenius(
        compose(to_boundary_unitary(model1), to_boundary_unitary(model2)).matrix
        - to_boundary_unitary(composed).matrix
    )
    rng = np.random.default_rng(DISK_SAMPLE_SEED + s.seed)
    size = 2 * composed.m_max + 1
    g = BoundaryModeVector(modes=rng.normal(size=size) + 1j * rng.normal(size=size))
    isometry = abs(sobolev_norm(lambda_lift(g), -0.5) - sobolev_norm(g, 0.5))

    r = np.linspace(0.0, 1.0, composed.radial_cells + 1)
    harmonic = harmonic_extension(g, composed.radial_cells)
    psi = DiskState(profiles=harmonic.profiles + r**2 * (1.0 - r))
    regular, _ = dirichlet_decompose(psi)
    trace_max = float(np.max(np.abs(regular.profiles[:, -1])))
    ratios, residuals = residual_refinement(g, RESIDUAL_CELLS)

    gap = mode_gap_check(composed)
    values = radial_spectrum(composed, s.mode, s.count)
    reference = disk_reference(composed, s.mode, s.count)
    out.rows, ok = _spectrum_rows(s.id, values, reference)
    out.metrics.update(
        matrix_compose_defect=matrix_defect,
        lambda_isometry_defect=isometry,
        trace_max=trace_max,
        harmonic_residual=float(np.max(residuals)),
        harmonic_refinement_ratios=ratios.tolist(),
        is_gapped=gap.is_gapped,
        is_semigapped=gap.is_semigapped,
        eigenvalues=values.tolist(),
    )
    tol = 1e-12 if s.tolerance is None else s.tolerance
    out.assertions.update(
        matrix_compose=matrix_defect <= tol,
        lambda_isometry=isometry <= tol * max(1.0, sobolev_norm(g, 0.5)),
        trace_free=trace_max == 0.0,
        harmonic_second_order=bool(
            ratios.size > 0 and np.all((ratios >= 3.5) & (ratios <= 4.5))
        ),
    )
    if reference is not None:
        out.assertions["matches_oracle"] = ok
    return out


def _run_halfplane(s: Scenario) -> _Outcome:
    out = _Outcome()
    chi = gaussian if s.test_function == "gaussian" else odd_gaussian
    report = halfplane_boundary_demo(chi, s.y_values or DEFAULT_Y_VALUES)
    distance = abs(report.extrapolated_limit - report.reference)
    tol = settings.cli.halfplane_tol if s.tolerance is None else s.tolerance
    low, high = settings.cli.order_band
    out.metrics.update(
        reference=[report.reference.real, report.reference.imag],
        extrapolated=[report.extrapolated_limit.real, report.extrapolated_limit.imag],
        extrapolation_error=distance,
        error_slope=report.error_slope,
    )
    out.assertions.update(
        extrapolation=distance <= tol, first_order_approach=low <= report.error_slope <= high
    )
    for y, value, error in zip(report.y_values, report.integrals, report.abs_errors, strict=True):
        out.rows.append([s.id, y, value.real, value.imag, error])
    return out


RUNNERS: dict[str, Callable[[Scenario], _Outcome]] = {
    "compose": _run_compose,
    "spectrum": _run_spectrum,
    "trotter": _run_trotter,
    "penalty": _run_penalty,
    "disk": _run_disk,
    "halfplane": _run_halfplane,
}


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[_format(v) for v in row] for row in rows])


def json_safe(value: Any) -> Any:
    """Replace non-finite floats by ``None`` so the output stays valid JSON."""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_json(path: Path, payload: Any) -> None:
    text = json.dumps(json_safe(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def execute_scenario(scenario: Scenario, out_dir: Path) -> ScenarioResult:
    """Run one scenario and write its CSV file.

    Numerical failures are captured in the result rather than raised.
    """
    logger.info("running scenario %s (%s)", scenario.id, scenario.kind)
    try:
        outcome = RUNNERS[scenario.kind](scenario)
    except ConfigError as err:
        return ScenarioResult(
            id=scenario.id, kind=scenario.kind, passed=False, error=f"config: {err}"
        )
    except (BoundaryCompositionError, ArithmeticError, np.linalg.LinAlgError) as err:
        logger.error("scenario %s failed: %s", scenario.id, err)
        return ScenarioResult(
            id=scenario.id, kind=scenario.kind, passed=False, error=f"{type(err).__name__}: {err}"
        )
    name = f"{scenario.id}_{scenario.kind}.csv"
    _write_csv(out_dir / name, CSV_HEADERS[scenario.kind], outcome.rows)
    return ScenarioResult(
        id=scenario.id,
        kind=scenario.kind,
        passed=all(outcome.assertions.values()),
        metrics=outcome.metrics,
        files=[name],
        assertions=outcome.assertions,
    )


def exit_code_for(results: list[ScenarioResult], verify: bool) -> int:
    """Exit code of a run: config 2, numerical 3, failed verification 4, else 0."""
    errors = [r.error for r in results if r.error is not None]
    if any(e.startswith("config:") for e in errors):
        return EXIT_CONFIG
    if errors:
        return EXIT_NUMERICAL
    if verify and not all(r.passed for r in results):
        return EXIT_VERIFY
    return EXIT_OK


def run(
    scenarios: list[Scenario],
    out_dir: Path | str,
    verify: bool = False,
    jobs: int = 1,
    config_bytes: bytes = b"",
) -> RunManifest:
    """Run scenarios in a bounded worker pool and write all outputs.

    Args:
        scenarios: Validated scenarios.
        out_dir: Output directory, created if missing.
        verify: Let failed assertions decide the exit code.
        jobs: Number of worker threads.
        config_bytes: Raw scenario-file bytes, hashed into the manifest.

    Returns:
        RunManifest: What ran, what was written and the exit code.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = utc_now()
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(partial(execute_scenario, out_dir=out), scenarios))

    _write_json(out / "summary.json", [r.summary() for r in results])
    code = exit_code_for(results, verify)
    files = [name for r in results for name in r.files] + ["summary.json", "manifest.json"]
    manifest = RunManifest(
        scenario_ids=[s.id for s in scenarios],
        started_utc=started,
        finished_utc=utc_now(),
        input_sha256=hashlib.sha256(config_bytes).hexdigest(),
        files=files,
        assertions={r.id: r.assertions for r in results},
        verify=verify,
        exit_code=code,
    )
    _write_json(out / "manifest.json", manifest.model_dump())
    logger.info("run finished with exit code %d", code)
    return manifest
