import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from circlaw.ensemble import EnsembleSpec, gaussian, sample_matrix, shift_matrix
from circlaw.limit_law import density
from circlaw.potential import (AllTrialsExcluded, bessel_ratio, circular_mean, disc_char,
                               disc_potential, empirical_char, empirical_potential,
                               limit_potential, potential_grid, smoothed_char,
                               smoothing_radius)
from circlaw.spectra import ComplexSpectrum, eigenvalues


def _disc_quadrature(z):
    """-(1/pi) int_{|w|<=1} log|z - w| dA in polar coordinates."""
    def inner(rho):
        val, _ = integrate.quad(
            lambda th: math.log(abs(z - rho * complex(math.cos(th), math.sin(th)))),
            0, 2 * math.pi, limit=200)
        return rho * val
    val, _ = integrate.quad(inner, 0, 1, limit=200, points=[abs(z)] if abs(z) < 1 else None)
    return -val / math.pi


@pytest.mark.parametrize("z", [0.0, 2.0, 0.4 + 0.3j])
def test_disc_potential_against_quadrature(z):
    assert disc_potential(z) == pytest.approx(_disc_quadrature(z), abs=1e-6)


def test_disc_potential_values():
    assert disc_potential(0) == 0.5
    assert disc_potential(2) == pytest.approx(-math.log(2))
    assert disc_potential(1.0) == 0.0
    assert disc_potential(1 - 1e-12) == pytest.approx(0.0, abs=1e-11)
    assert disc_potential(1 + 1e-12) == pytest.approx(0.0, abs=1e-11)
    assert np.allclose(disc_potential(np.array([0, 2j])), [0.5, -math.log(2)])


def test_disc_potential_gradient():
    h = 1e-4
    fd = (disc_potential(0.4 + h) - disc_potential(0.4 - h)) / (2 * h)
    assert fd == pytest.approx(-0.4, abs=1e-6)


def test_limit_potential_gradient():
    h = 1e-4
    fd = (limit_potential(density(0.4 + h)) - limit_potential(density(0.4 - h))) / (2 * h)
    assert fd == pytest.approx(-0.4, abs=2e-2)


def test_zero_matrix_hook():
    est = empirical_potential(np.zeros((1, 1)), 2.0)
    assert est.value == pytest.approx(-math.log(2))
    assert est.used == 1 and est.excluded == 0


def test_matches_log_determinant():
    spec = EnsembleSpec(40, gaussian(), 1.0, 3)
    z = 0.3 + 0.2j
    est = empirical_potential(spec, z, trials=4)
    for t in range(4):
        _, logdet = np.linalg.slogdet(shift_matrix(sample_matrix(spec, t), z))
        assert est.per_trial[t] == pytest.approx(-logdet / 40, rel=1e-6)


def test_dense_potential_near_disc_value():
    est = empirical_potential(EnsembleSpec(256, gaussian(), 1.0, 0), 0.0, trials=20)
    assert abs(est.value - 0.5) <= 0.1


def test_truncation_only_matters_when_something_is_excluded():
    spec = EnsembleSpec(32, gaussian(), 1.0, 8)
    for z in (0.0, 3.5):
        on = empirical_potential(spec, z, trials=6, truncate=True)
        off = empirical_potential(spec, z, trials=6, truncate=False)
        if on.excluded == 0:
            assert on.value == off.value
        else:
            assert on.used + on.excluded == 6
    # a singular matrix violates the s_n gate
    with pytest.raises(AllTrialsExcluded):
        empirical_potential(np.zeros((3, 3)), 0.0, trials=2, truncate=True)


def test_smoothing_draws_are_deterministic():
    spec = EnsembleSpec(16, gaussian(), 1.0, 2)
    a = empirical_potential(spec, 0.2, r=0.3, trials=3, xi_draws=2)
    b = empirical_potential(spec, 0.2, r=0.3, trials=3, xi_draws=2, workers=3)
    assert np.array_equal(a.per_trial, b.per_trial)


def test_argument_checks():
    with pytest.raises(ValueError):
        empirical_potential(np.eye(2), 0, trials=0)
    with pytest.raises(ValueError):
        empirical_potential(np.eye(2), 0, r=-1)
    with pytest.raises(ValueError):
        empirical_potential(np.ones((2, 3)), 0)


def test_smoothing_radius_default():
    assert smoothing_radius(256) == pytest.approx(0.5)


@pytest.mark.parametrize("z", [0.0, 2.0])
def test_limit_potential_values(z):
    assert limit_potential(density(z)) == pytest.approx(disc_potential(z), abs=5e-3)


def test_semicircle_log_potential_by_quadrature():
    val, _ = integrate.quad(lambda y: math.log(y) * math.sqrt(4 - y * y) / (2 * math.pi), 0, 2)
    assert -2 * val == pytest.approx(0.5, abs=1e-8)


def test_limit_potential_decreases_radially():
    rs = np.linspace(0, 2.5, 11)
    vals = [limit_potential(density(r)) for r in rs]
    assert np.all(np.diff(vals) <= 5e-3)
    assert np.allclose(vals, disc_potential(rs), atol=5e-3)


def test_circular_mean():
    assert circular_mean(lambda z: 3.25, 1 + 1j, 0.7) == 3.25
    Ls = [circular_mean(disc_potential, 0, r) for r in (0.2, 0.5, 1.0, 1.5)]
    assert np.all(np.diff(Ls) <= 1e-12)
    assert circular_mean(disc_potential, 0, 0.01) == pytest.approx(0.5, abs=1e-4)
    # scalar-only callables fall back to a loop
    assert circular_mean(lambda z: float(abs(z)), 0, 2.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        circular_mean(disc_potential, 0, 0.0)
    with pytest.raises(ValueError):
        circular_mean(disc_potential, 0, 1.0, m_points=8)


def test_empirical_char_examples(rng):
    lam = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    assert empirical_char(lam, 0, 0) == 1
    assert empirical_char(np.array([1.0]), math.pi, 0) == pytest.approx(-1)
    for t, v in rng.uniform(-10, 10, (100, 2)):
        assert abs(empirical_char(ComplexSpectrum(lam, 30), t, v)) <= 1 + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 30))
def test_bessel_series_against_scipy(rho):
    # 2 J1(rho) / rho itself loses digits for tiny rho; use the Taylor expansion there
    ref = 1 - rho ** 2 / 8 + rho ** 4 / 192 if rho < 1e-3 else 2 * special.j1(rho) / rho
    # alternating series: cancellation error grows like the largest term, ~e^rho / rho^1.5
    tol = 1e-14 + 1e-15 * math.exp(rho) / (1 + rho) ** 1.5
    assert bessel_ratio(rho) == pytest.approx(ref, abs=tol)


def test_disc_char_examples():
    assert disc_char(7.0, -3.0, 0.0) == 1.0
    assert disc_char(0.2, 0.0, 1.0) == pytest.approx(1 - 0.2 ** 2 / 8, abs=1e-5)
    with pytest.raises(ValueError):
        disc_char(40.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        disc_char(1.0, 1.0, -0.1)


def test_characteristic_function_factorization():
    M = sample_matrix(EnsembleSpec(64, gaussian(), 1.0, 5))
    chk = smoothed_char(M, 1.0, 1.0, 0.3, draws=200, seed=5)
    assert chk.error <= 0.05
    assert chk.f_n == pytest.approx(empirical_char(eigenvalues(M), 1, 1))


def test_potential_grid():
    g = potential_grid(disc_potential, [-1, 0, 1], [0, 0.5], "DiscClosedForm")
    rows = list(g.rows())
    assert len(rows) == 6
    assert rows[1] == (0.0, 0.0, 0.5, "DiscClosedForm")
    assert not g.flagged.any()
    bad = potential_grid(lambda z: -np.log(abs(z)) if z else np.inf, [0, 1], [0], "Empirical")
    assert bad.flagged.tolist() == [[True, False]]


@pytest.mark.slow
def test_potential_error_shrinks_with_n():
    zs = [r * np.exp(1j * a) for r in (0, 0.5, 1.5) for a in (0.3, 2.2, 4.1)]
    worst = []
    for n in (128, 256, 512):
        spec = EnsembleSpec(n, gaussian(), 1.0, 1)
        r = smoothing_radius(n)
        worst.append(max(abs(empirical_potential(spec, z, r=r, trials=20).value
                             - disc_potential(z)) for z in zs))
    assert worst[1] <= worst[0] + 0.02
    assert worst[2] <= worst[1] + 0.02
