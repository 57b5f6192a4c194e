import math

import numpy as np
import pytest

from plapspec import dynamics, periodfun, spectrum, specfun
from plapspec.exceptions import ConsistencyError, DomainError

E2 = specfun.make_exponent(2.0)
E3 = specfun.make_exponent(3.0)
E5 = specfun.make_exponent(5.0)


def _unit_level_state(e, x, y):
    """Scale (x, y) along the scaling-transform orbit so that H_1 = 1."""
    s = np.array([*x, *y], dtype=float)
    h = dynamics.energy(e, 1.0, s)
    return s * np.array([h ** (-1 / e.p)] * 2 + [h ** (-1 / e.q)] * 2)


@pytest.fixture(scope="module")
def rec39():
    mu = spectrum.solve_momentum(E3, (9, 19))[0]
    return spectrum.make_record(E3, (9, 19), mu)


def test_reduced_flow_p2_closed_orbit():
    mu = 0.6
    traj = dynamics.reduced_flow(E2, mu, 2 * math.pi, samples=4096)
    r = traj.column("r")
    assert r.min() == pytest.approx(0.1, abs=1e-6)
    assert r.max() == pytest.approx(0.9, abs=1e-6)
    assert traj.meta["momentum_drift"] < 1e-9
    assert dynamics.return_time(E2, mu) == pytest.approx(math.pi, rel=1e-10)


def test_reduced_flow_equilibrium():
    traj = dynamics.reduced_flow(E3, 1.0, 5.0, samples=10)
    assert np.all(traj.column("r") == E3.top)
    assert np.all(traj.column("theta") == 0.5 * math.pi)
    assert np.allclose(traj.column("phi"), traj.t)
    assert dynamics.return_time(E3, 1.0) == pytest.approx(2 * math.pi * E3.c1)
    assert dynamics.phi_winding(E3, 1.0) == pytest.approx(E3.c1)


@pytest.mark.parametrize("mu", [0.0, -0.2, 1.5])
def test_reduced_flow_domain(mu):
    with pytest.raises(DomainError):
        dynamics.reduced_flow(E3, mu, 1.0)


@pytest.mark.parametrize("p", [1.5, 3.0, 5.0])
@pytest.mark.parametrize("mu", [0.2, 0.5, 0.8])
def test_return_time_and_winding_match_quadrature(p, mu):
    e = specfun.make_exponent(p)
    trip = periodfun.period_triple(e, mu)
    assert dynamics.return_time(e, mu) / (2 * math.pi) == pytest.approx(trip.t_val, rel=1e-9)
    assert dynamics.phi_winding(e, mu) == pytest.approx(trip.s_val, rel=1e-9)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 5.0])
@pytest.mark.parametrize("seed", range(5))
def test_full_flow_conserves(p, seed):
    e = specfun.make_exponent(p)
    rng = np.random.default_rng(seed)
    start = rng.uniform(-1.5, 1.5, size=4)
    lam = rng.uniform(0.5, 2.0)
    traj = dynamics.full_flow(e, lam, start, 10.0, samples=256)
    assert traj.meta["energy_drift"] <= 1e-8
    assert traj.meta["momentum_drift"] <= 1e-8


@pytest.mark.parametrize("p", [1.5, 3.0, 5.0])
def test_zero_momentum_stays_on_a_line(p):
    e = specfun.make_exponent(p)
    u = np.array([0.6, 0.8])
    traj = dynamics.full_flow(e, 1.3, [*(0.9 * u), *(-0.4 * u)], 10.0, samples=256)
    assert np.max(np.abs(dynamics.angular_momentum(traj.states))) <= 1e-10


@pytest.mark.parametrize("p", [1.5, 3.0, 5.0])
def test_reduced_system_along_full_flow(p):
    # reduce a unit-level full solution and compare finite differences with
    # the reduced vector field
    e = specfun.make_exponent(p)
    start = _unit_level_state(e, (0.8, 0.1), (0.2, 0.9))
    traj = dynamics.full_flow(e, 1.0, start, 6.0, tol=1e-12, samples=6000)
    red = dynamics.reduce_state(e, traj.states)
    r = red[:, 0]
    th = np.unwrap(red[:, 1])
    ph = np.unwrap(red[:, 2])
    dt = traj.t[1] - traj.t[0]
    rhs = dynamics.reduced_rhs(e)
    worst = 0.0
    for k in range(1, len(r) - 1, 50):
        fd = np.array([r[k + 1] - r[k - 1], th[k + 1] - th[k - 1], ph[k + 1] - ph[k - 1]]) / (2 * dt)
        exact = np.array(rhs(0.0, [r[k], th[k], ph[k]]))
        worst = max(worst, np.max(np.abs(fd - exact)) / (1 + np.max(np.abs(exact))))
    assert worst <= 1e-5


def test_recover_and_reduce_are_inverse():
    red = np.array([[0.2, 1.0, 0.3], [0.7, 2.5, -1.2], [0.5, 4.0, 2.0]])
    back = dynamics.reduce_state(E3, dynamics.recover_phase(E3, red))
    assert np.allclose(back, red, atol=1e-13)


def test_reconstruction_solves_full_system(rec39):
    traj = dynamics.reconstruct_eigenfunction(E3, rec39, 1, samples=1024)
    assert traj.meta["closure"] <= 1e-6
    assert traj.meta["energy_error"] <= 1e-8
    assert traj.meta["momentum_error"] <= 1e-8
    direct = dynamics.full_flow(E3, 1.0, traj.states[0], traj.t[-1], tol=1e-12, samples=1024)
    assert np.max(np.abs(direct.states - traj.states)) <= 1e-6


@pytest.mark.parametrize("which", [0, 1])
def test_reconstruction_base_records(which):
    rec = spectrum.base_records(E3)[which]
    traj = dynamics.reconstruct_eigenfunction(E3, rec, 2, samples=512)
    assert traj.meta["closure"] <= 1e-6
    assert traj.meta["energy_error"] <= 1e-8
    assert traj.meta["momentum_error"] <= 1e-8
    assert traj.t[-1] == pytest.approx(4 * rec.pi_star)


def test_reconstruction_rejects_non_periodic(rec39):
    fake = spectrum.EigenvalueRecord(
        p=3.0, kind=spectrum.RATIONAL, label="fake", mu=rec39.mu, pi_star=rec39.pi_star * 1.01
    )
    with pytest.raises(ConsistencyError):
        dynamics.reconstruct_eigenfunction(E3, fake, 1, samples=256)


def test_scaling_identity():
    start = _unit_level_state(E3, (0.5, 0.2), (0.1, 0.7))
    traj = dynamics.full_flow(E3, 1.0, start, 3.0, samples=64)
    scaled = dynamics.scaling_transform(E3, 1.0, traj)
    assert np.allclose(scaled.states, traj.states, rtol=1e-12, atol=1e-14)
    assert np.allclose(scaled.t, traj.t)
    assert scaled.meta["scaling_momentum"] == pytest.approx(traj.meta["mu"], rel=1e-12)


def test_scaling_circle_has_unit_momentum():
    traj = dynamics.full_flow(E2, 1.0, [1.0, 0.0, 0.0, 1.0], 2 * math.pi, samples=64)
    assert dynamics.scaling_transform(E2, 1.0, traj).meta["scaling_momentum"] == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("a1,a2,f1,f2,lam", [(1.0, 0.5, 0.0, 0.3, 2.0), (0.3, 1.7, 0.2, -0.4, 0.7), (1.0, 1.0, 0.0, 0.0, 1.5)])
def test_scaling_momentum_p2_closed_form(a1, a2, f1, f2, lam):
    start = [
        a1 * math.sin(lam * f1),
        a2 * math.sin(lam * f2),
        lam * a1 * math.cos(lam * f1),
        lam * a2 * math.cos(lam * f2),
    ]
    traj = dynamics.full_flow(E2, lam, start, 5.0, samples=500)
    x1_exact = a1 * np.sin(lam * (traj.t + f1))
    assert np.max(np.abs(traj.column("x1") - x1_exact)) <= 1e-9
    expected = 2 * a1 * a2 * abs(math.sin(lam * (f1 - f2))) / (a1**2 + a2**2)
    scaled = dynamics.scaling_transform(E2, lam, traj)
    assert scaled.meta["scaling_momentum"] == pytest.approx(expected, abs=1e-10)
    assert np.max(np.abs(dynamics.energy(E2, 1.0, scaled.states) - 1.0)) <= 1e-9


def test_scaling_negative_momentum_reverses_time():
    start = _unit_level_state(E3, (0.5, 0.2), (0.7, 0.1))
    traj = dynamics.full_flow(E3, 1.5, start, 2.0, samples=32)
    assert traj.meta["mu"] < 0
    scaled = dynamics.scaling_transform(E3, 1.5, traj)
    assert scaled.meta["delta"] == -1.0
    assert np.all(np.diff(scaled.t) > 0)
    assert scaled.t[-1] == 0.0
    mom = dynamics.angular_momentum(scaled.states)
    assert np.all(mom > 0)
    assert np.allclose(mom, scaled.meta["scaling_momentum"], rtol=1e-8)


def test_zero_solution_rejected():
    with pytest.raises(DomainError):
        dynamics.full_flow(E3, 1.0, [0, 0, 0, 0], 1.0)
    traj = dynamics.Trajectory([0.0, 1.0], np.zeros((2, 4)), dynamics.PHASE_COLUMNS, {"h": 0.0, "mu": 0.0})
    with pytest.raises(DomainError):
        dynamics.scaling_transform(E3, 1.0, traj)


def test_full_flow_p2_period():
    lam = 2 * math.pi
    start = dynamics.PhaseState(0.3, -0.4, 1.0, 2.0)
    traj = dynamics.full_flow(E2, lam, start, 1.0, samples=100)
    assert np.max(np.abs(traj.states[-1] - start.as_array())) <= 1e-9


def test_phase_state():
    s = dynamics.PhaseState(1.0, 2.0, 3.0, 4.0)
    assert s.m_ang == 1.0 * 4.0 - 2.0 * 3.0
    assert s.energy(E2, 2.0) == pytest.approx(4 * 5 / 2 + 25 / 2)


def test_trajectory_validation():
    with pytest.raises(DomainError):
        dynamics.Trajectory([0.0, 0.0], np.zeros((2, 3)), dynamics.REDUCED_COLUMNS)
    with pytest.raises(DomainError):
        dynamics.Trajectory([0.0, 1.0], np.zeros((2, 4)), dynamics.REDUCED_COLUMNS)
    traj = dynamics.Trajectory([0.0, 1.0], np.ones((2, 3)), dynamics.REDUCED_COLUMNS)
    with pytest.raises(ValueError):
        traj.states[0, 0] = 2.0


def test_energy_split_sums_to_one(rec39):
    traj = dynamics.reconstruct_eigenfunction(E3, rec39, 1, samples=256)
    pot, kin = dynamics.energy_split(E3, traj)
    assert np.allclose(pot + kin, 1.0)
    assert np.all(pot > 0) and np.all(kin > 0)


@pytest.mark.parametrize("mu", [0.3, 0.9])
def test_level_curve_is_a_momentum_level(mu):
    r, th = dynamics.level_curve(E5, mu, 200)
    inner = (r > r.min() + 1e-9) & (r < r.max() - 1e-9)
    assert np.allclose(specfun.q_func(E5, r[inner]) * np.sin(th[inner]), mu, rtol=1e-10)
