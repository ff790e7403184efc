import math

import numpy as np
import pytest

from bc_compose.boundary_algebra import compose
from bc_compose.disk_cavity import BoundaryModeVector
from bc_compose.disk_cavity import DiskModeModel
from bc_compose.disk_cavity import DiskState
from bc_compose.disk_cavity import GrowthDeclaration
from bc_compose.disk_cavity import ModeCondition
from bc_compose.disk_cavity import boundary_data
from bc_compose.disk_cavity import dirichlet_decompose
from bc_compose.disk_cavity import harmonic_extension
from bc_compose.disk_cavity import harmonic_residual
from bc_compose.disk_cavity import lambda_lift
from bc_compose.disk_cavity import laplace_beltrami
from bc_compose.disk_cavity import mode_gap_check
from bc_compose.disk_cavity import modewise_compose
from bc_compose.disk_cavity import radial_spectrum
from bc_compose.disk_cavity import residual_refinement
from bc_compose.disk_cavity import sobolev_norm
from bc_compose.disk_cavity import to_boundary_unitary
from bc_compose.exceptions import DomainError
from bc_compose.exceptions import ShapeError


def test_boundary_mode_vector_validation() -> None:
    with pytest.raises(ValueError):
        BoundaryModeVector(modes=np.ones(4))
    with pytest.raises(ValueError):
        BoundaryModeVector(modes=[0.0, math.inf, 0.0])

    g = BoundaryModeVector.delta(-2, 3)
    assert g.m_max == 3
    assert g.modes[1] == 1.0
    np.testing.assert_array_equal(g.wavenumbers, np.arange(-3, 4))
    with pytest.raises(ShapeError):
        BoundaryModeVector.delta(4, 3)


def test_sobolev_norm_examples() -> None:
    for s in (-0.5, 0.0, 0.5, 2.0):
        assert sobolev_norm(BoundaryModeVector.delta(0, 4), s) == pytest.approx(1.0)
    assert sobolev_norm(BoundaryModeVector.delta(1, 4), -0.5) == pytest.approx(2**-0.25)

    low = BoundaryModeVector(modes=[0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0])
    assert sobolev_norm(low, 0.0) == pytest.approx(math.sqrt(5))


def test_lambda_lift_multiplier() -> None:
    np.testing.assert_allclose(lambda_lift(BoundaryModeVector.delta(0, 4)).modes[4], 1.0)
    lifted = lambda_lift(BoundaryModeVector.delta(3, 4))
    assert lifted.modes[7] == pytest.approx(math.sqrt(10))
    assert lifted.sobolev_order == -0.5


def test_lambda_lift_is_an_isometry() -> None:
    rng = np.random.default_rng(4)
    for m_max in (1, 8, 40):
        size = 2 * m_max + 1
        g = BoundaryModeVector(modes=rng.normal(size=size) + 1j * rng.normal(size=size))
        lifted = lambda_lift(g)
        assert abs(sobolev_norm(lifted) - sobolev_norm(g)) <= 1e-12 * sobolev_norm(g)


def test_laplace_beltrami_multiplier() -> None:
    g = BoundaryModeVector(modes=np.ones(5))
    np.testing.assert_allclose(laplace_beltrami(g).modes, [-4.0, -1.0, 0.0, -1.0, -4.0])
    assert laplace_beltrami(g).sobolev_order == -1.5


def test_harmonic_extension_of_low_modes() -> None:
    constant = harmonic_extension(BoundaryModeVector.delta(0, 2), radial_cells=16)
    np.testing.assert_allclose(constant.profiles[2], 1.0)
    np.testing.assert_allclose(constant.profiles[[0, 1, 3, 4]], 0.0)

    linear = harmonic_extension(BoundaryModeVector.delta(1, 2), radial_cells=16)
    np.testing.assert_allclose(linear.profiles[3], linear.radii)


def test_harmonic_extension_residual_is_second_order() -> None:
    m = np.arange(-4, 5)
    g = BoundaryModeVector(modes=1.0 / (1.0 + m**2))
    coarse = harmonic_residual(harmonic_extension(g, radial_cells=64))
    fine = harmonic_residual(harmonic_extension(g, radial_cells=128))

    assert np.all(fine <= 1e-2)
    busy = coarse > 1e-9
    assert busy.any()
    ratios = coarse[busy] / fine[busy]
    assert np.all((ratios > 3.0) & (ratios < 5.0))


def test_residual_refinement_of_low_modes() -> None:
    rng = np.random.default_rng(12)
    g = BoundaryModeVector(modes=rng.normal(size=129) + 1j * rng.normal(size=129))
    ratios, fine = residual_refinement(g, radial_cells=64)

    # Modes |m| <= 2 are reproduced exactly; m = +-3, +-4 remain.
    assert fine.shape == (9,)
    assert ratios.shape == (4,)
    np.testing.assert_allclose(ratios, 4.0, atol=1e-3)
    with pytest.raises(DomainError):
        residual_refinement(g, m_cut=-1)


def test_harmonic_residual_needs_outer_nodes() -> None:
    state = harmonic_extension(BoundaryModeVector.delta(0, 1), radial_cells=4)
    with pytest.raises(DomainError):
        harmonic_residual(state, r_min=2.0)


def test_dirichlet_decompose() -> None:
    g = BoundaryModeVector(modes=[0.5, 1.0, -2.0])
    harmonic = harmonic_extension(g, radial_cells=32)
    regular, part = dirichlet_decompose(harmonic)
    np.testing.assert_allclose(regular.profiles, 0.0, atol=1e-15)
    np.testing.assert_allclose(part.profiles, harmonic.profiles)

    r = np.linspace(0.0, 1.0, 33)
    profiles = np.zeros((3, 33), dtype=complex)
    profiles[2] = r * (1.0 - r)
    trace_free = DiskState(profiles=profiles)
    regular, part = dirichlet_decompose(trace_free)
    np.testing.assert_array_equal(part.profiles, 0.0)
    np.testing.assert_array_equal(regular.profiles, profiles)


def test_boundary_data_of_trace_free_state() -> None:
    r = np.linspace(0.0, 1.0, 65)
    profiles = np.zeros((3, 65), dtype=complex)
    profiles[1] = 1.0 - r**2
    phi, phi_dot = boundary_data(DiskState(profiles=profiles))

    np.testing.assert_allclose(phi.modes, 0.0, atol=1e-15)
    assert phi.sobolev_order == -0.5
    # d/dr (1 - r^2) = -2 at r = 1; mode 0 has unit multiplier.
    np.testing.assert_allclose(phi_dot.modes, [0.0, -2.0, 0.0], atol=1e-10)
    assert phi_dot.sobolev_order == -0.5


def test_boundary_data_of_harmonic_state() -> None:
    state = harmonic_extension(BoundaryModeVector(modes=[1.0, 2.0, 3.0]), radial_cells=16)
    phi, phi_dot = boundary_data(state)
    np.testing.assert_allclose(phi.modes, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(phi_dot.modes, 0.0, atol=1e-15)


def test_mode_condition_validation() -> None:
    with pytest.raises(ValueError):
        ModeCondition(m=0, kind="dirichlet", k=1.0)
    with pytest.raises(ValueError):
        ModeCondition(m=0, kind="robin")
    with pytest.raises(ValueError):
        ModeCondition(m=0, kind="robin", k=math.inf)

    assert ModeCondition(m=0, kind="dirichlet").eigenvalue == 1.0
    assert ModeCondition(m=1, kind="robin", k=2.0).eigenvalue == pytest.approx((2 + 1j) / (2 - 1j))


def test_disk_model_must_cover_every_mode() -> None:
    with pytest.raises(ValueError):
        DiskModeModel(m_max=1, conditions=[ModeCondition(m=0, kind="dirichlet")])

    shuffled = DiskModeModel(
        m_max=1,
        conditions=[
            ModeCondition(m=1, kind="dirichlet"),
            ModeCondition(m=-1, kind="dirichlet"),
            ModeCondition(m=0, kind="robin", k=1.0),
        ],
    )
    assert [c.m for c in shuffled.conditions] == [-1, 0, 1]
    assert shuffled.condition(0).k == 1.0
    with pytest.raises(ShapeError):
        shuffled.condition(2)


def test_modewise_compose_examples() -> None:
    neumann = DiskModeModel.from_coefficients(3, k=0.0)
    both = modewise_compose(neumann, neumann)
    assert all(c.kind == "robin" and c.k == 0.0 for c in both.conditions)

    pinned = DiskModeModel.from_coefficients(3, k=0.0, dirichlet_modes=(0,))
    robin = DiskModeModel.from_coefficients(3, k=4.0)
    mixed = modewise_compose(pinned, robin)
    assert mixed.condition(0).kind == "dirichlet"
    assert all(mixed.condition(m).k == 2.0 for m in (-3, -2, -1, 1, 2, 3))

    averaged = modewise_compose(
        DiskModeModel.from_coefficients(3, k=1.0), DiskModeModel.from_coefficients(3, k=3.0)
    )
    assert all(c.k == 2.0 for c in averaged.conditions)


def test_modewise_compose_matches_matrix_composition() -> None:
    rng = np.random.default_rng(8)
    conditions1 = [
        ModeCondition(m=m, kind="robin", k=float(rng.uniform(-3, 3))) for m in range(-5, 6)
    ]
    conditions2 = [
        ModeCondition(m=m, kind="dirichlet")
        if m % 3 == 0
        else ModeCondition(m=m, kind="robin", k=float(rng.uniform(-3, 3)))
        for m in range(-5, 6)
    ]
    model1 = DiskModeModel(m_max=5, conditions=conditions1, radial_cells=16)
    model2 = DiskModeModel(m_max=5, conditions=conditions2, radial_cells=16)

    expected = compose(to_boundary_unitary(model1), to_boundary_unitary(model2)).matrix
    actual = to_boundary_unitary(modewise_compose(model1, model2)).matrix
    assert np.linalg.norm(expected - actual) <= 1e-12


def test_modewise_compose_rejects_mismatch() -> None:
    with pytest.raises(ShapeError):
        modewise_compose(
            DiskModeModel.from_coefficients(2, k=1.0), DiskModeModel.from_coefficients(3, k=1.0)
        )
    with pytest.raises(ShapeError):
        modewise_compose(
            DiskModeModel.from_coefficients(2, k=1.0, radial_cells=16),
            DiskModeModel.from_coefficients(2, k=1.0, radial_cells=32),
        )


def test_mode_gap_check() -> None:
    bounded = mode_gap_check(DiskModeModel.from_coefficients(4, k=1.0))
    assert bounded.is_gapped
    assert bounded.is_semigapped
    assert bounded.K_sup == 1.0
    assert bounded.K_inf == 1.0

    growing = mode_gap_check(
        DiskModeModel.from_coefficients(
            4, k=1.0, growth=GrowthDeclaration(coefficient=1.0, power=2.0)
        )
    )
    assert not growing.is_gapped
    assert growing.is_semigapped
    assert growing.K_sup == math.inf

    falling = mode_gap_check(
        DiskModeModel.from_coefficients(
            4, k=1.0, growth=GrowthDeclaration(coefficient=-1.0, power=2.0)
        )
    )
    assert not falling.is_gapped
    assert not falling.is_semigapped
    assert falling.K_inf == -math.inf


def test_growth_is_halved_by_composition() -> None:
    growing = DiskModeModel.from_coefficients(
        2, k=1.0, growth=GrowthDeclaration(coefficient=2.0, power=1.0)
    )
    plain = DiskModeModel.from_coefficients(2, k=1.0)
    composed = modewise_compose(growing, plain)
    assert composed.growth == GrowthDeclaration(coefficient=1.0, power=1.0)

    cancelled = modewise_compose(
        growing,
        DiskModeModel.from_coefficients(
            2, k=1.0, growth=GrowthDeclaration(coefficient=-2.0, power=1.0)
        ),
    )
    assert cancelled.growth is None

    with pytest.raises(ValueError):
        GrowthDeclaration(coefficient=0.0, power=1.0)


def test_radial_spectrum_dirichlet_matches_bessel_zeros() -> None:
    model = DiskModeModel.from_coefficients(2, k=None, radial_cells=512)
    assert radial_spectrum(model, 0, 1)[0] == pytest.approx(2.404826**2, rel=1e-3)
    assert radial_spectrum(model, 1, 1)[0] == pytest.approx(3.831706**2, rel=1e-3)
    assert radial_spectrum(model, -1, 1)[0] == pytest.approx(3.831706**2, rel=1e-3)


def test_radial_spectrum_neumann_has_constant_mode() -> None:
    model = DiskModeModel.from_coefficients(1, k=0.0, radial_cells=256)
    values = radial_spectrum(model, 0, 2)
    assert abs(values[0]) <= 1e-8
    # J_0' = -J_1 vanishes at the first zero of J_1.
    assert values[1] == pytest.approx(3.831706**2, rel=1e-3)


def test_radial_spectrum_robin_lies_between_neumann_and_dirichlet() -> None:
    def lowest(k: float | None) -> float:
        model = DiskModeModel.from_coefficients(1, k=k, radial_cells=128)
        return float(radial_spectrum(model, 1, 1)[0])

    assert lowest(0.0) < lowest(2.0) < lowest(None)


def test_radial_spectrum_rejects_bad_input() -> None:
    model = DiskModeModel.from_coefficients(1, k=None, radial_cells=8)
    with pytest.raises(DomainError):
        radial_spectrum(model, 1, 8)
    with pytest.raises(ShapeError):
        radial_spectrum(model, 2, 1)


def test_decomposing_regular_part_again_gives_no_harmonic_part() -> None:
    r = np.linspace(0.0, 1.0, 33)
    g = BoundaryModeVector(modes=[0.5, 1.0, -2.0])
    psi = DiskState(profiles=harmonic_extension(g, 32).profiles + r**2 * (1.0 - r))
    regular, _ = dirichlet_decompose(psi)
    _, again = dirichlet_decompose(regular)
    np.testing.assert_allclose(again.profiles, 0.0, atol=1e-12)


def test_composed_robin_mode_has_averaged_spectrum() -> None:
    composed = modewise_compose(
        DiskModeModel.from_coefficients(2, k=1.0, radial_cells=64),
        DiskModeModel.from_coefficients(2, k=3.0, radial_cells=64),
    )
    direct = DiskModeModel.from_coefficients(2, k=2.0, radial_cells=64)
    for m in (0, 1, 2):
        np.testing.assert_array_equal(radial_spectrum(composed, m, 3), radial_spectrum(direct, m, 3))
