import numpy as np
import pytest

from qsix.dimension import DomainError, make_params
from qsix.integrator import IntegrationError
from qsix.invariants import hamiltonian_rad
from qsix.shooting import (
    RESIDUAL_TOL,
    ShootingError,
    constant_orbit,
    continuation_sweep,
    find_orbit,
    linear_frequency,
    linearized_orbit_guess,
    linearized_period,
    shoot_residual,
)

# converged shooting parameters at eps0 = 0.8 eps_star, n = 7
ANCHOR_08 = (0.14393401923072094, -0.06528470155735637)


def test_linear_frequency_n7(p7):
    w = linear_frequency(p7)
    assert w**2 == pytest.approx(1.9933, abs=1e-4)
    assert linearized_period(p7) == pytest.approx(4.45, abs=5e-3)
    assert w**6 + p7.K4 * w**4 + p7.K2 * w**2 - (p7.p - 1) * p7.K0 == pytest.approx(0, abs=1e-10)


@pytest.mark.parametrize("n", range(7, 21))
def test_cubic_single_positive_root(n):
    p = make_params(n)
    roots = np.roots([1.0, p.K4, p.K2, -(p.p - 1) * p.K0])
    pos = [r for r in roots if abs(r.imag) < 1e-9 and r.real > 0]
    assert len(pos) == 1
    assert linear_frequency(p) ** 2 == pytest.approx(pos[0].real, rel=1e-12)


def test_guess_at_top(p7):
    e2, e4, T = linearized_orbit_guess(p7, p7.eps_star)
    assert (e2, e4) == (0.0, 0.0)
    assert T == pytest.approx(linearized_period(p7))


def test_guess_sign_convention(p7):
    # t = 0 is a minimum, so v'' > 0 there
    e2, e4, _ = linearized_orbit_guess(p7, 0.9 * p7.eps_star)
    assert e2 > 0 > e4
    with pytest.raises(DomainError):
        linearized_orbit_guess(p7, 2.0)


def test_degenerate_shot(p7):
    shot = shoot_residual(p7, p7.eps_star, 0.0, 0.0)
    assert shot.degenerate and np.isnan(shot.half_time) and shot.norm == 0.0


@pytest.mark.parametrize("e2,e4", [(10.0, 10.0), (-10.0, 10.0), (10.0, -10.0), (-10.0, -10.0)])
def test_wild_shot_never_nan(p7, e2, e4):
    try:
        shot = shoot_residual(p7, 0.8 * p7.eps_star, e2, e4)
    except (ShootingError, IntegrationError):
        return
    assert np.all(np.isfinite(shot.residual))


def test_regression_anchor(p7):
    eps0 = 0.8 * p7.eps_star
    shot = shoot_residual(p7, eps0, *ANCHOR_08)
    assert shot.norm < RESIDUAL_TOL
    orbit = find_orbit(p7, eps0)
    np.testing.assert_allclose((orbit.eps2, orbit.eps4), ANCHOR_08, rtol=1e-8)
    again = find_orbit(p7, eps0, initial_guess=ANCHOR_08)
    assert again.residual < RESIDUAL_TOL


def test_small_amplitude_periods(p7):
    T = linearized_period(p7)
    assert abs(find_orbit(p7, 0.95 * p7.eps_star).period / T - 1) < 0.05
    assert abs(find_orbit(p7, 0.99 * p7.eps_star).period / T - 1) < 0.01


def test_orbit_invariants(p7, sweep7):
    assert sweep7.complete and len(sweep7.orbits) == 10
    for o in sweep7.orbits:
        assert o.residual < RESIDUAL_TOL
        assert abs(o.minimum() - o.eps0) < 1e-9
        assert o.periodicity_defect() < 1e-8
        y0 = o.jet(0.0)[0]
        assert y0[1] == y0[3] == y0[5] == 0.0
        assert o.period == pytest.approx(2 * o.half_time)
        assert hamiltonian_rad(p7, o) == pytest.approx(o.energy, rel=1e-8)


def test_orbit_jet_periodic_and_symmetric(orbit7):
    P, ts = orbit7.period, orbit7.half_time
    t = np.linspace(0, P, 37)
    np.testing.assert_allclose(orbit7.jet(t + P), orbit7.jet(t), atol=1e-12)
    s = np.linspace(0, ts, 41)
    assert np.max(np.abs(orbit7(ts + s)[:, 0] - orbit7(ts - s)[:, 0])) < 1e-8
    assert orbit7.jet(0.3, order=6).shape == (1, 7)


def test_sweep_ordering(p7, sweep7):
    assert all(sweep7.period_increasing())
    assert all(sweep7.energy_increasing())
    E = [o.energy for o in sweep7.orbits]
    assert all(e < 0 for e in E)
    assert all(e > constant_orbit(p7).energy for e in E)


def test_half_necksize_converges(sweep7):
    o = sweep7.orbits[-1]
    assert o.eps0 / make_params(7).eps_star == pytest.approx(0.5)
    assert o.residual < RESIDUAL_TOL and abs(o.minimum() - o.eps0) < 1e-9


def test_constant_orbit(p7):
    o = find_orbit(p7, p7.eps_star)
    assert o.constant and o.residual == 0.0
    assert o.period == pytest.approx(linearized_period(p7))
    sw = continuation_sweep(p7, [p7.eps_star])
    assert sw.complete and sw.orbits[0].constant
    np.testing.assert_array_equal(o.jet([0.0, 1.0])[:, 0], p7.eps_star)


@pytest.mark.parametrize("eps0", [0.0, -0.1, 2.0])
def test_invalid_necksize(p7, eps0):
    with pytest.raises(DomainError):
        find_orbit(p7, eps0)


def test_sweep_grid_validation(p7):
    with pytest.raises(ValueError):
        continuation_sweep(p7, [])
    with pytest.raises(ValueError):
        continuation_sweep(p7, [0.5, 0.6])


def test_non_convergence_reports_best(p7):
    with pytest.raises(ShootingError) as info:
        find_orbit(p7, 0.8 * p7.eps_star, tol=1e-30, max_iter=2)
    assert info.value.kind == "non-convergence"
    assert info.value.best is None or np.isfinite(info.value.best[2])
