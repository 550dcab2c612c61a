"""Six-DOF plant: equations of motion, RK4 stepping, conservation laws,
and the bare-plant simulation loop."""

import math

import numpy as np
import pytest

from softquad.geom import is_rotation
from softquad.rigidbody import (DEFAULT_MASS, GRAVITY, Disturbance,
                                DivergenceError, InertialParams,
                                RigidBodyState, angular_momentum_inertial,
                                default_inertia, derivative,
                                integrate_step, mechanical_energy, simulate)

PARAMS = InertialParams()
HOVER_THRUST = DEFAULT_MASS * GRAVITY


def test_hover_equilibrium_has_zero_derivatives():
    state = RigidBodyState()
    dx, dv, dr, dom = derivative(state, HOVER_THRUST, np.zeros(3), PARAMS)
    assert np.allclose(dx, 0.0)
    assert np.allclose(dv, 0.0, atol=1e-12)
    assert np.allclose(dr, 0.0)
    assert np.allclose(dom, 0.0)


def test_unpowered_derivative_is_free_fall():
    _, dv, _, _ = derivative(RigidBodyState(), 0.0, np.zeros(3), PARAMS)
    assert np.allclose(dv, [0.0, 0.0, GRAVITY], atol=1e-15)


def test_hover_thrust_value_cancels_gravity():
    _, dv, _, _ = derivative(RigidBodyState(), 11.18, np.zeros(3), PARAMS)
    assert np.linalg.norm(dv) < 1e-3 + abs(11.18 - HOVER_THRUST) / DEFAULT_MASS
    assert HOVER_THRUST == pytest.approx(11.1834, abs=1e-4)


def test_equilibrium_state_is_a_fixed_point_of_integration():
    state = RigidBodyState(x=np.array([1.0, -2.0, -0.5]))

    def deriv(s):
        return derivative(s, HOVER_THRUST, np.zeros(3), PARAMS)

    stepped = integrate_step(state, deriv, 1e-3)
    assert np.allclose(stepped.x, state.x, atol=1e-15)
    assert np.allclose(stepped.v, 0.0, atol=1e-15)
    assert np.allclose(stepped.R, np.eye(3), atol=1e-15)


def test_one_second_free_fall_matches_kinematics():
    state = RigidBodyState()

    def deriv(s):
        return derivative(s, 0.0, np.zeros(3), PARAMS)

    for _ in range(1000):
        state = integrate_step(state, deriv, 1e-3)
    assert np.linalg.norm(state.v) == pytest.approx(GRAVITY, abs=1e-6)
    assert state.x[2] == pytest.approx(0.5 * GRAVITY, abs=1e-6)


def test_step_size_validation():
    state = RigidBodyState()

    def deriv(s):
        return derivative(s, 0.0, np.zeros(3), PARAMS)

    with pytest.raises(ValueError):
        integrate_step(state, deriv, 0.0)
    with pytest.raises(ValueError):
        integrate_step(state, deriv, 0.02)


def test_rk4_local_accuracy_on_linear_decay():
    """One step on dv/dt = -v matches exp(-dt) to fifth order."""
    lam = -1.0
    dt = 1e-3
    state = RigidBodyState(v=np.array([1.0, 0.0, 0.0]))

    def deriv(s):
        return np.zeros(3), lam * s.v, np.zeros((3, 3)), np.zeros(3)

    stepped = integrate_step(state, deriv, dt)
    exact = math.exp(lam * dt)
    assert abs(stepped.v[0] - exact) < 10.0 * dt**5


def test_torque_free_principal_spin_conserves_momentum():
    state = RigidBodyState(omega=np.array([0.0, 0.0, 4.0]))
    h0 = angular_momentum_inertial(state, PARAMS)

    def deriv(s):
        return derivative(s, 0.0, np.zeros(3), PARAMS)

    for _ in range(1000):
        state = integrate_step(state, deriv, 1e-3)
    h1 = angular_momentum_inertial(state, PARAMS)
    assert np.linalg.norm(h1 - h0) / np.linalg.norm(h0) < 1e-6


def test_tumbling_free_flight_conserves_energy():
    state = RigidBodyState(v=np.array([0.3, -0.2, -1.0]),
                           omega=np.array([2.0, -3.0, 1.0]))
    e0 = mechanical_energy(state, PARAMS)

    def deriv(s):
        return derivative(s, 0.0, np.zeros(3), PARAMS)

    for _ in range(1000):
        state = integrate_step(state, deriv, 1e-3)
    e1 = mechanical_energy(state, PARAMS)
    assert abs(e1 - e0) / abs(e0) < 1e-5


def test_attitude_stays_orthonormal_through_aggressive_tumbling():
    state = RigidBodyState(omega=np.array([8.0, -5.0, 3.0]))

    def deriv(s):
        return derivative(s, 0.0, np.zeros(3), PARAMS)

    for _ in range(10_000):
        state = integrate_step(state, deriv, 1e-3)
    assert is_rotation(state.R, tol=1e-9)


def test_disturbance_force_accelerates_the_mass():
    dist = Disturbance(force=np.array([0.57, 0.0, 0.0]))
    _, dv, _, _ = derivative(RigidBodyState(), HOVER_THRUST, np.zeros(3),
                             PARAMS, dist)
    assert dv[0] == pytest.approx(0.5, rel=1e-12)


def test_default_inertia_is_point_masses_at_arm_tips():
    j = default_inertia(1.14, 0.18)
    a = 0.5 * 1.14 * 0.18**2
    assert np.allclose(j, np.diag([a, a, 2 * a]), rtol=1e-14)


def test_inertial_params_validation():
    with pytest.raises(ValueError):
        InertialParams(mass=0.0)
    with pytest.raises(ValueError):
        InertialParams(inertia=np.diag([1.0, 1.0, -1.0]))
    skew = np.diag([1.0, 1.0, 1.0])
    skew[0, 1] = 0.5
    with pytest.raises(ValueError):
        InertialParams(inertia=skew)


class TestSimulate:
    def test_unpowered_drop_hits_ground_at_free_fall_speed(self):
        start = RigidBodyState(x=np.array([0.0, 0.0, -0.25]))
        log = simulate(start, None, None, duration=0.25, dt=1e-4)
        crossing = np.argmax(log.x[:, 2] >= 0.0)
        assert crossing > 0
        speed = log.v[crossing, 2]
        assert speed == pytest.approx(math.sqrt(2 * GRAVITY * 0.25), abs=0.01)

    def test_identical_runs_produce_identical_logs(self):
        start = RigidBodyState(x=np.array([0.0, 0.0, -1.0]),
                               omega=np.array([1.0, 2.0, 3.0]))
        a = simulate(start, None, None, duration=0.2, dt=1e-3)
        b = simulate(start, None, None, duration=0.2, dt=1e-3)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.quat, b.quat)

    def test_contact_flag_switches_to_fine_steps(self):
        start = RigidBodyState()

        def contact(t, s):
            return np.zeros(3), t > 0.05

        log = simulate(start, None, contact, duration=0.1,
                       dt=1e-3, dt_contact=1e-4)
        dt_early = np.diff(log.t[:10])
        dt_late = np.diff(log.t[-10:])
        assert np.allclose(dt_early, 1e-3)
        assert np.allclose(dt_late, 1e-4)

    def test_divergence_guard_raises_with_diagnostic(self):
        start = RigidBodyState()

        def contact(t, s):
            return np.array([0.0, 0.0, 5000.0]), True

        with pytest.raises(DivergenceError) as err:
            simulate(start, None, contact, duration=1.0, dt=1e-3)
        assert err.value.speed > 100.0

    def test_strictly_increasing_time(self):
        log = simulate(RigidBodyState(), None, None, duration=0.1, dt=1e-3)
        assert np.all(np.diff(log.t) > 0.0)
