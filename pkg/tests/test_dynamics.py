import numpy as np
import numpy.testing as npt
import pytest

from projdyn.dynamics import (
    ConstrainedSystem,
    PhaseState,
    Trajectory,
    constrained_accel,
    constraint_drift,
    energy,
    integrate_constrained,
    integrate_free,
    multiplier,
)
from projdyn.errors import DomainError
from projdyn.forces import gradient_field, inverse_quadratic_potential, kepler_field, neumann_potential, zero_field
from projdyn.geometry import SymForm
from projdyn.ode import IntegratorOptions
from projdyn.problems import neumann_system, random_tangent_state
from projdyn.screens import LinearScreen, QuadricScreen

CIRCLE = QuadricScreen(SymForm.identity(2))


@pytest.fixture
def inverse_square_system():
    I = SymForm.identity(2)
    pot = inverse_quadratic_potential(I, 1.0)
    return ConstrainedSystem(gradient_field(I, pot), CIRCLE, metric=I, potential=pot)


def test_multiplier_hand_values(inverse_square_system):
    q, p = [1.0, 0.0], [0.0, 1.0]
    assert multiplier(inverse_square_system, q, p) == pytest.approx(1.0, abs=1e-15)
    assert multiplier(ConstrainedSystem(zero_field(2), CIRCLE), q, p) == pytest.approx(-1.0, abs=1e-15)
    flat = ConstrainedSystem(zero_field(3), LinearScreen.axis(3))
    assert multiplier(flat, [0.3, -2.0, 1.0], [1.0, 0.5, 0.0]) == 0.0


def test_constrained_accel_hand_values(inverse_square_system):
    q, p = [1.0, 0.0], [0.0, 1.0]
    npt.assert_allclose(constrained_accel(ConstrainedSystem(zero_field(2), CIRCLE), q, p), [-1.0, 0.0])
    npt.assert_allclose(constrained_accel(inverse_square_system, q, p), [-1.0, 0.0], atol=1e-15)


def test_multiplier_requires_on_screen_tangent_state(inverse_square_system):
    with pytest.raises(DomainError):
        multiplier(inverse_square_system, [2.0, 0.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        multiplier(inverse_square_system, [1.0, 0.0], [1.0, 1.0])


def test_energy_hand_values():
    I = SymForm.identity(2)
    pot = inverse_quadratic_potential(I, 1.0)
    assert energy(I, pot, PhaseState([1.0, 0.0], [0.0, 1.0])) == pytest.approx(-0.5)
    assert energy(I, lambda q: 0.0, PhaseState([1.0, 0.0], [0.0, 0.0])) == 0.0
    U = neumann_potential(I, SymForm.diag([1.0, 2.0]))
    assert energy(I, U, PhaseState([1.0, 0.0], [0.0, 1.0])) == pytest.approx(0.0, abs=1e-15)


def test_neumann_identity_forms_hand_values():
    from projdyn.problems import EllipsoidData

    system = neumann_system(EllipsoidData(SymForm.identity(2), SymForm.identity(2)))
    q, p = [1.0, 0.0], [0.0, 1.0]
    assert multiplier(system, q, p) == pytest.approx(-2.0)
    npt.assert_allclose(constrained_accel(system, q, p), [-1.0, 0.0], atol=1e-15)


def test_free_line(options):
    traj = integrate_free(zero_field(2), PhaseState([1.0, 0.0], [0.0, 1.0]), 2.0, options)
    npt.assert_allclose(traj.q, np.column_stack([np.ones_like(traj.t), traj.t]), atol=1e-12)


def test_great_circle(options):
    traj = integrate_constrained(ConstrainedSystem(zero_field(2), CIRCLE), PhaseState([1.0, 0.0], [0.0, 1.0]), np.pi, options)
    npt.assert_allclose(traj.q[-1], [-1.0, 0.0], atol=1e-8)
    npt.assert_allclose(traj.q, np.column_stack([np.cos(traj.t), np.sin(traj.t)]), atol=1e-8)
    npt.assert_allclose(traj.channels["lambda"], -1.0, atol=1e-10)
    npt.assert_array_equal(traj.channels["tau"], traj.t)


def test_constrained_rejects_off_screen_start(options):
    with pytest.raises(DomainError):
        integrate_constrained(ConstrainedSystem(zero_field(2), CIRCLE), PhaseState([2.0, 0.0], [0.0, 1.0]), 1.0, options)


def test_kepler_collision_reports_exit_time(options):
    # radial fall from rest at r=1: collision at t = pi / (2 sqrt 2)
    with pytest.raises(DomainError) as info:
        integrate_free(kepler_field(2), PhaseState([1.0, 0.0], [0.0, 0.0]), 5.0, options)
    assert info.value.t == pytest.approx(np.pi / (2 * np.sqrt(2)), abs=1e-6)


def test_stabilization_keeps_constraint(ellipsoid3, options):
    system = neumann_system(ellipsoid3)
    state = random_tangent_state(np.random.default_rng(4), system.screen, 1.0)
    traj = integrate_constrained(system, state, 10.0, options)
    h_dev, v_dev = constraint_drift(traj, system.screen)
    assert h_dev <= 1e-14 and v_dev <= 1e-13
    assert np.max(np.abs(traj.channels["energy"] - traj.channels["energy"][0])) <= 1e-9


def test_unstabilized_drift_stays_small(ellipsoid3):
    # regression: without the projection step the invariant drift stays below 1e-6 on [0, 10]
    system = neumann_system(ellipsoid3)
    state = random_tangent_state(np.random.default_rng(4), system.screen, 1.0)
    traj = integrate_constrained(system, state, 10.0, IntegratorOptions(stabilize=False))
    h_dev, v_dev = constraint_drift(traj, system.screen)
    assert 0.0 < h_dev <= 1e-6 and v_dev <= 1e-6


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 1.0]), np.zeros((3, 2)), np.zeros((2, 2)))


def test_integration_is_deterministic(ellipsoid3, options):
    system = neumann_system(ellipsoid3)
    state = random_tangent_state(np.random.default_rng(1), system.screen, 0.5)
    a = integrate_constrained(system, state, 2.0, options)
    b = integrate_constrained(system, state, 2.0, options)
    assert np.array_equal(a.q, b.q) and np.array_equal(a.p, b.p)
