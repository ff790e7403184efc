import math

import numpy as np
import pytest

from bc_compose.boundary_algebra import BoundaryUnitary
from bc_compose.boundary_algebra import boundary_condition_residual
from bc_compose.boundary_algebra import cayley
from bc_compose.boundary_algebra import classify
from bc_compose.boundary_algebra import compose
from bc_compose.boundary_algebra import decompose
from bc_compose.boundary_algebra import eigenprojection_one
from bc_compose.boundary_algebra import gap_diagnostics
from bc_compose.boundary_algebra import inverse_cayley
from bc_compose.boundary_algebra import projection_meet
from bc_compose.boundary_algebra import reconstruct_unitary
from bc_compose.boundary_algebra import robin_coefficients
from bc_compose.boundary_algebra import validate_unitary
from bc_compose.exceptions import DomainError
from bc_compose.exceptions import EigenvalueAmbiguityWarning
from bc_compose.exceptions import NotInvertibleError
from bc_compose.exceptions import ShapeError

EYE = np.eye(2)


def test_validate_unitary() -> None:
    assert validate_unitary(EYE).is_unitary
    assert validate_unitary(EYE).defect == 0.0
    assert validate_unitary(np.diag([1.0, -1.0])).is_unitary

    diagnostic = validate_unitary(np.diag([1.0, 0.5]))
    assert not diagnostic.is_unitary
    assert diagnostic.defect > 0

    with pytest.raises(ShapeError):
        validate_unitary(np.ones((2, 3)))


def test_boundary_unitary_rejects_bad_input() -> None:
    with pytest.raises(ValueError, match="not unitary"):
        BoundaryUnitary(matrix=np.diag([1.0, 0.5]))
    with pytest.raises(ValueError):
        BoundaryUnitary(matrix=np.ones((2, 3)))
    with pytest.raises(ValueError):
        BoundaryUnitary(matrix=np.zeros((0, 0)))


def test_boundary_unitary_matrix_is_read_only() -> None:
    source = -np.eye(2)
    u = BoundaryUnitary(matrix=source)
    source[0, 0] = 5.0

    assert u.matrix[0, 0] == -1.0
    assert u.dim == 2
    with pytest.raises(ValueError):
        u.matrix[0, 0] = 1.0


def test_eigenprojection_one() -> None:
    p, q = eigenprojection_one(BoundaryUnitary.dirichlet())
    np.testing.assert_allclose(p, EYE, atol=1e-14)
    np.testing.assert_allclose(q, 0, atol=1e-14)

    p, q = eigenprojection_one(BoundaryUnitary.neumann())
    np.testing.assert_allclose(p, 0, atol=1e-14)
    np.testing.assert_allclose(q, EYE, atol=1e-14)

    p, q = eigenprojection_one(BoundaryUnitary(matrix=np.diag([1.0, -1j])))
    np.testing.assert_allclose(p, np.diag([1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(q, np.diag([0.0, 1.0]), atol=1e-14)


def test_eigenvalue_within_cluster_counts_as_one() -> None:
    u = BoundaryUnitary(matrix=np.diag([np.exp(1e-9j), -1.0]))
    p, _ = eigenprojection_one(u)
    np.testing.assert_allclose(p, np.diag([1.0, 0.0]), atol=1e-12)


def test_ambiguous_eigenvalue_warns_and_is_refused() -> None:
    u = BoundaryUnitary(matrix=np.diag([np.exp(5e-8j), -1.0]))
    with pytest.warns(EigenvalueAmbiguityWarning):
        p, _ = eigenprojection_one(u)
    np.testing.assert_allclose(p, 0, atol=1e-14)

    with pytest.warns(EigenvalueAmbiguityWarning):
        with pytest.raises(NotInvertibleError) as info:
            decompose(u)
    assert len(info.value.eigenvalues) == 1


def test_cayley_examples() -> None:
    np.testing.assert_allclose(cayley(np.zeros((2, 2))), -EYE, atol=1e-15)
    np.testing.assert_allclose(cayley(EYE), -1j * EYE, atol=1e-15)
    np.testing.assert_allclose(cayley(np.diag([1.0, -1.0])), np.diag([-1j, 1j]), atol=1e-15)
    assert cayley(np.zeros((0, 0))).shape == (0, 0)

    with pytest.raises(DomainError):
        cayley(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_inverse_cayley_examples() -> None:
    np.testing.assert_allclose(inverse_cayley(-EYE), 0, atol=1e-15)
    np.testing.assert_allclose(inverse_cayley(-1j * EYE), EYE, atol=1e-15)

    with pytest.raises(NotInvertibleError, match="offending eigenvalues"):
        inverse_cayley(EYE)
    with pytest.raises(DomainError):
        inverse_cayley(np.diag([1.0, 0.5]))


def test_cayley_round_trip_on_random_hermitian() -> None:
    rng = np.random.default_rng(3)
    raw = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    a = raw + raw.conj().T

    v = cayley(a)
    assert validate_unitary(v).is_unitary
    np.testing.assert_allclose(inverse_cayley(v), a, atol=1e-10)


def test_decompose_neumann() -> None:
    d = decompose(BoundaryUnitary.neumann())

    np.testing.assert_allclose(d.P, 0, atol=1e-14)
    np.testing.assert_allclose(d.Q, EYE, atol=1e-14)
    np.testing.assert_allclose(d.V, -EYE, atol=1e-14)
    np.testing.assert_allclose(d.K, 0, atol=1e-14)
    assert d.gap == pytest.approx(2.0)
    assert d.dirichlet_rank == 0


def test_decompose_dirichlet() -> None:
    d = decompose(BoundaryUnitary.dirichlet())

    np.testing.assert_allclose(d.P, EYE, atol=1e-14)
    assert d.gap == 2.0
    assert d.semigap == pytest.approx(2 * math.pi)
    assert d.semigap_lower_bound == math.inf
    assert d.dirichlet_rank == 2


@pytest.mark.parametrize("alpha", [-2.0, -0.5, 0.3, math.pi / 2, 2.5])
def test_decompose_alpha_family(alpha: float) -> None:
    d = decompose(BoundaryUnitary.alpha(alpha))
    np.testing.assert_allclose(d.K, -math.tan(alpha / 2) * EYE, atol=1e-12)


def test_decompose_mixed() -> None:
    d = decompose(BoundaryUnitary(matrix=np.diag([1.0, -1.0])))

    np.testing.assert_allclose(d.P, np.diag([1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(d.K, 0, atol=1e-14)
    assert d.dirichlet_rank == 1


def test_decompose_invariants_on_random_unitary() -> None:
    rng = np.random.default_rng(5)
    u = BoundaryUnitary.random(7, rng, rank=3)
    d = decompose(u)

    np.testing.assert_allclose(d.P @ d.P, d.P, atol=1e-12)
    np.testing.assert_allclose(d.P, d.P.conj().T, atol=1e-12)
    np.testing.assert_allclose(d.P + d.Q, np.eye(7), atol=1e-12)
    np.testing.assert_allclose(d.P @ d.V, 0, atol=1e-12)
    np.testing.assert_allclose(d.V.conj().T @ d.V, d.Q, atol=1e-12)
    np.testing.assert_allclose(d.K @ d.P, 0, atol=1e-10)
    np.testing.assert_allclose(d.K, d.K.conj().T, atol=1e-12)
    assert d.dirichlet_rank == 3


def test_robin_eigenvalue_convention() -> None:
    k = 1.7
    u = BoundaryUnitary.robin(k)
    np.testing.assert_allclose(u.matrix, (k + 1j) / (k - 1j) * EYE, atol=1e-14)
    np.testing.assert_allclose(robin_coefficients(BoundaryUnitary.robin([1.0, 3.0])), [1.0, 3.0])


def test_gap_diagnostics_examples() -> None:
    neumann = gap_diagnostics(BoundaryUnitary.neumann())
    assert neumann.gap == pytest.approx(2.0)
    assert neumann.is_gapped
    assert neumann.is_semigapped

    rotated = gap_diagnostics(
        BoundaryUnitary(matrix=np.diag([np.exp(1j * math.pi / 4), np.exp(-1j * math.pi / 4)]))
    )
    assert rotated.gap == pytest.approx(2 * math.sin(math.pi / 8))
    assert rotated.semigap == pytest.approx(math.pi / 4)
    assert rotated.is_semigapped

    close = gap_diagnostics(BoundaryUnitary(matrix=np.diag([1.0, np.exp(-0.01j)])))
    assert close.gap == pytest.approx(0.01, rel=1e-3)
    assert not close.is_gapped
    assert not close.is_semigapped


@pytest.mark.parametrize("alpha", [-1.0, 0.4, 2.0])
def test_semigap_bound_is_smallest_k(alpha: float) -> None:
    u = BoundaryUnitary.alpha(alpha)
    expected = -math.tan(alpha / 2)

    assert gap_diagnostics(u).k_lower_bound == pytest.approx(expected, abs=1e-12)
    assert decompose(u).semigap_lower_bound == pytest.approx(expected, abs=1e-12)


def test_projection_meet_examples() -> None:
    np.testing.assert_allclose(projection_meet(EYE, EYE), EYE)
    np.testing.assert_allclose(projection_meet(EYE, np.zeros((2, 2))), 0)

    line_x = np.diag([1.0, 0.0])
    diagonal = 0.5 * np.ones((2, 2))
    np.testing.assert_allclose(projection_meet(line_x, diagonal), 0, atol=1e-14)

    with pytest.raises(ShapeError):
        projection_meet(EYE, np.eye(3))


def test_projection_meet_of_planes() -> None:
    q1 = np.diag([1.0, 1.0, 0.0])
    q2 = np.diag([0.0, 1.0, 1.0])
    np.testing.assert_allclose(projection_meet(q1, q2), np.diag([0.0, 1.0, 0.0]), atol=1e-12)


def test_reconstruct_unitary_examples() -> None:
    np.testing.assert_allclose(reconstruct_unitary(np.zeros((2, 2)), np.zeros((2, 2))).matrix, -EYE)
    np.testing.assert_allclose(reconstruct_unitary(EYE, np.zeros((2, 2))).matrix, EYE)

    alpha = 0.8
    u = reconstruct_unitary(np.zeros((2, 2)), -math.tan(alpha / 2) * EYE)
    np.testing.assert_allclose(u.matrix, -np.exp(1j * alpha) * EYE, atol=1e-14)


def test_reconstruct_unitary_rejects_k_on_dirichlet_range() -> None:
    with pytest.raises(DomainError):
        reconstruct_unitary(np.diag([1.0, 0.0]), EYE)
    with pytest.raises(ShapeError):
        reconstruct_unitary(EYE, np.eye(3))


def test_decompose_reconstruct_round_trip() -> None:
    rng = np.random.default_rng(17)
    for dim in (1, 2, 5):
        u = BoundaryUnitary.random(dim, rng)
        d = decompose(u)
        rebuilt = reconstruct_unitary(d.P, d.K)
        np.testing.assert_allclose(rebuilt.matrix, u.matrix, atol=1e-10)


def test_compose_examples() -> None:
    neumann = BoundaryUnitary.neumann()
    np.testing.assert_allclose(compose(neumann, neumann).matrix, -EYE, atol=1e-14)

    dirichlet = BoundaryUnitary.dirichlet()
    robin = BoundaryUnitary.alpha(0.7)
    np.testing.assert_allclose(compose(dirichlet, robin).matrix, EYE, atol=1e-14)

    quarter = BoundaryUnitary.alpha(math.pi / 2)
    np.testing.assert_allclose(compose(quarter, quarter).matrix, -1j * EYE, atol=1e-12)


def test_compose_averages_robin_coefficients() -> None:
    w = compose(BoundaryUnitary.robin(1.0), BoundaryUnitary.robin(3.0))
    np.testing.assert_allclose(w.matrix, BoundaryUnitary.robin(2.0).matrix, atol=1e-12)

    halved = compose(BoundaryUnitary.neumann(), BoundaryUnitary.robin(4.0))
    np.testing.assert_allclose(halved.matrix, BoundaryUnitary.robin(2.0).matrix, atol=1e-12)


def test_compose_keeps_periodic_constraint() -> None:
    periodic = BoundaryUnitary.periodic()
    w = compose(periodic, BoundaryUnitary.neumann())
    np.testing.assert_allclose(w.matrix, periodic.matrix, atol=1e-12)

    # Dirichlet at the left end meets the periodic line in {0}.
    mixed = compose(BoundaryUnitary.mixed(1.0), periodic)
    np.testing.assert_allclose(mixed.matrix, EYE, atol=1e-12)


def test_compose_dimension_mismatch() -> None:
    with pytest.raises(ShapeError):
        compose(BoundaryUnitary.neumann(2), BoundaryUnitary.neumann(3))


def test_classify() -> None:
    assert classify(BoundaryUnitary.dirichlet()) == "dirichlet"
    assert classify(BoundaryUnitary.neumann()) == "neumann"
    assert classify(BoundaryUnitary.periodic()) == "periodic-type"
    assert classify(BoundaryUnitary.mixed(0.5)) == "mixed"
    assert classify(BoundaryUnitary.robin([1.0, 3.0])) == "robin"

    rng = np.random.default_rng(2)
    assert classify(BoundaryUnitary.random(2, rng, rank=0)) == "generic"


def test_robin_coefficients_require_robin_type() -> None:
    with pytest.raises(DomainError):
        robin_coefficients(BoundaryUnitary.mixed(0.5))


def test_boundary_condition_residual() -> None:
    # psi'(0) = k0 psi(0), psi'(1) = -k1 psi(1), phi_dot = (-psi'(0), psi'(1)).
    u = BoundaryUnitary.robin([1.0, 3.0])
    phi = np.array([1.0, 2.0])
    phi_dot = np.array([-1.0, -6.0])
    assert boundary_condition_residual(u, phi, phi_dot) == pytest.approx(0.0, abs=1e-13)
    assert boundary_condition_residual(u, phi, -phi_dot) > 1.0

    dirichlet = BoundaryUnitary.dirichlet()
    assert boundary_condition_residual(dirichlet, np.zeros(2), np.array([3.0, -1.0])) == 0.0

    with pytest.raises(ShapeError):
        boundary_condition_residual(u, np.zeros(3), np.zeros(3))
