import numpy as np
import numpy.testing as npt
import pytest

from projdyn.dynamics import PhaseState, Trajectory, integrate_constrained, multiplier
from projdyn.errors import DomainError
from projdyn.geometry import SymForm
from projdyn.problems import (
    EllipsoidData,
    JacobiParams,
    braden_system,
    gauss_map,
    integrate_jacobi,
    jacobi_multiplier,
    jacobi_system,
    joachimsthal,
    knorrer_step1,
    knorrer_step2,
    neumann_system,
    orbit_exchange_report,
    random_tangent_state,
)


@pytest.fixture
def fixture2d():
    """Q=(2,0), Qdot=(0,1) on <AQ,Q>=1 with A=diag(1/4,1), G=I."""
    data = EllipsoidData(SymForm.identity(2), SymForm.diag([0.25, 1.0]))
    return JacobiParams(data, 0.0), PhaseState([2.0, 0.0], [0.0, 1.0])


def test_ellipsoid_data_invariants(ellipsoid3):
    assert ellipsoid3.symmetry_residual() <= 1e-12
    assert ellipsoid3.B.is_spd()


def test_ellipsoid_data_rejects_ill_conditioned():
    with pytest.raises(DomainError):
        EllipsoidData(SymForm.identity(2), SymForm.diag([1.0, 1e-9]))


def test_jacobi_hand_values(fixture2d):
    params, state = fixture2d
    assert jacobi_multiplier(params, state.q, state.p) == pytest.approx(-4.0, abs=1e-14)
    assert joachimsthal(params, state) == pytest.approx(-0.25, abs=1e-12)
    system = jacobi_system(params)
    assert multiplier(system, state.q, state.p) == pytest.approx(-4.0, abs=1e-14)


def test_joachimsthal_at_rest(ellipsoid3):
    params = JacobiParams(ellipsoid3, 0.5)
    Q = random_tangent_state(np.random.default_rng(3), ellipsoid3.a_screen, 1.0).q
    AQMQ = (ellipsoid3.A.entries @ Q) @ (ellipsoid3.M @ Q)
    assert joachimsthal(params, PhaseState(Q, np.zeros(3))) == pytest.approx(-0.5 * AQMQ, rel=1e-12)


def test_knorrer_steps_hand_values(fixture2d):
    params, state = fixture2d
    traj = Trajectory(np.array([0.0, 1.0]), np.array([state.q, state.q]), np.zeros((2, 2)))
    step1 = knorrer_step1(params, traj, eta=0.0)
    npt.assert_allclose(step1.q[0], [0.5, 0.0])
    npt.assert_allclose(step1.channels["h"], 1.0)
    step2 = knorrer_step2(params.data, step1)
    npt.assert_allclose(step2.q[0], [1.0, 0.0])
    npt.assert_allclose(gauss_map(params.data, state.q), [1.0, 0.0])


def test_knorrer_step2_identity_when_a_equals_g(options):
    data = EllipsoidData(SymForm.identity(3), SymForm.identity(3))
    state = random_tangent_state(np.random.default_rng(0), data.g_screen, 1.0)
    run = integrate_constrained(braden_system(data), state, 1.0, options)
    proj = knorrer_step2(data, run)
    npt.assert_allclose(proj.q, run.q, atol=1e-14)
    npt.assert_allclose(proj.tau, run.t, atol=1e-12)


def test_neumann_energy_conserved(ellipsoid3, options):
    system = neumann_system(ellipsoid3)
    state = random_tangent_state(np.random.default_rng(7), system.screen, 1.0)
    e = integrate_constrained(system, state, 10.0, options).channels["energy"]
    assert np.max(np.abs(e - e[0])) <= 1e-9


@pytest.mark.parametrize("nu", [0.0, 0.5])
def test_jacobi_eta_conserved(ellipsoid3, options, nu):
    params = JacobiParams(ellipsoid3, nu)
    state = random_tangent_state(np.random.default_rng(8), ellipsoid3.a_screen, 1.0)
    eta = integrate_jacobi(params, state, 10.0, options).channels["eta"]
    assert eta[0] < 0.0
    assert np.max(np.abs(eta - eta[0])) / abs(eta[0]) <= 1e-8


def test_braden_multiplier_is_minus_twice_energy(ellipsoid3, options):
    system = braden_system(ellipsoid3, 0.7)
    state = random_tangent_state(np.random.default_rng(5), system.screen, 0.8)
    run = integrate_constrained(system, state, 3.0, options)
    npt.assert_allclose(run.channels["lambda"], -2 * run.channels["energy"], atol=1e-10)


@pytest.mark.parametrize("nu", [0.0, 0.5])
def test_orbit_exchange(ellipsoid3, options, nu):
    state = random_tangent_state(np.random.default_rng(11), ellipsoid3.a_screen, 1.0)
    rep = orbit_exchange_report(JacobiParams(ellipsoid3, nu), 5.0, state, options)
    assert rep.eta < 0.0
    assert rep.step1_residual <= 1e-6
    assert rep.multiplier_gap <= 1e-7
    assert rep.multiplier_spread <= 1e-8
    assert rep.chain_deviation <= 1e-6
    assert set(rep.as_dict()) >= {"eta", "nu", "multiplier_gap", "chain_deviation"}


def test_orbit_exchange_trivial_when_a_equals_g(options):
    data = EllipsoidData(SymForm.identity(3), SymForm.identity(3))
    rep = orbit_exchange_report(JacobiParams(data, 0.0), 3.0, options=options, seed=2)
    assert rep.multiplier_gap <= 1e-7 and rep.chain_deviation <= 1e-8
