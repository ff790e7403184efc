import math

import numpy as np
import pytest
from scipy.special import jn_zeros
from scipy.special import jv

from bc_compose.exceptions import DomainError
from bc_compose.oracles import bessel_j_series
from bc_compose.oracles import bessel_zeros
from bc_compose.oracles import dirichlet_interval_spectrum
from bc_compose.oracles import disk_dirichlet_eigenvalue
from bc_compose.oracles import neumann_interval_spectrum
from bc_compose.oracles import periodic_interval_spectrum
from bc_compose.oracles import robin_interval_roots
from bc_compose.oracles import robin_interval_spectrum


@pytest.mark.parametrize("order", [0, 1, 2, 5])
def test_bessel_series_matches_scipy(order: int) -> None:
    for x in (0.0, 0.5, 2.4, 7.0, 15.0):
        assert bessel_j_series(order, x) == pytest.approx(jv(order, x), abs=1e-8)


def test_bessel_series_negative_order() -> None:
    assert bessel_j_series(-1, 2.0) == pytest.approx(-bessel_j_series(1, 2.0))
    assert bessel_j_series(-2, 2.0) == pytest.approx(bessel_j_series(2, 2.0))


@pytest.mark.parametrize("order", [0, 1, 3])
def test_bessel_zeros_match_scipy(order: int) -> None:
    np.testing.assert_allclose(bessel_zeros(order, 3), jn_zeros(order, 3), rtol=1e-8)


def test_disk_dirichlet_eigenvalue() -> None:
    assert disk_dirichlet_eigenvalue(0) == pytest.approx(2.404825557695773**2, rel=1e-8)
    assert disk_dirichlet_eigenvalue(1, 2, mass=1.0) == pytest.approx(
        7.015586669815619**2 / 2, rel=1e-8
    )


def test_robin_zero_is_neumann() -> None:
    np.testing.assert_allclose(robin_interval_roots(0.0, 3), [math.pi, 2 * math.pi, 3 * math.pi])


@pytest.mark.parametrize("k", [0.5, 1.0, 4.0])
def test_robin_roots_solve_secular_equation(k: float) -> None:
    roots = robin_interval_roots(k, 4)
    residual = (roots**2 - k**2) * np.sin(roots) - 2 * k * roots * np.cos(roots)
    np.testing.assert_allclose(residual, 0.0, atol=1e-10)
    assert np.all(np.diff(roots) > 0)
    # Robin eigenvalues interlace between Neumann and Dirichlet.
    n = np.arange(1, 5)
    assert np.all((roots > (n - 1) * math.pi) & (roots < n * math.pi))


def test_robin_spectrum_uses_mass() -> None:
    roots = robin_interval_roots(1.0, 2)
    np.testing.assert_allclose(robin_interval_spectrum(1.0, 2, mass=2.0), roots**2 / 4)


def test_closed_form_interval_spectra() -> None:
    np.testing.assert_allclose(
        dirichlet_interval_spectrum(2), [math.pi**2, 4 * math.pi**2]
    )
    np.testing.assert_allclose(neumann_interval_spectrum(2), [0.0, math.pi**2])
    np.testing.assert_allclose(
        periodic_interval_spectrum(5),
        [0.0, 4 * math.pi**2, 4 * math.pi**2, 16 * math.pi**2, 16 * math.pi**2],
    )


def test_count_must_be_positive() -> None:
    with pytest.raises(DomainError):
        robin_interval_roots(1.0, 0)
    with pytest.raises(DomainError):
        bessel_zeros(0, 0)
