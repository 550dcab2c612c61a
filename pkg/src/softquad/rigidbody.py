"""Rigid-body plant: state container, equations of motion, RK4 stepping.

The translational equation is written in the z-down inertial frame,

    m * dv/dt = m*g*e3 - f * R @ e3 + df

so a positive total thrust f pushes along the body -z axis (upward when
level).  Attitude evolves as dR/dt = R @ hat(Omega) with the body angular
rate Omega; each step ends with a projection back onto SO(3) so the
rotation stays orthonormal over arbitrarily long runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geom import E3, hat, orthonormalize, rot_to_quat

GRAVITY = 9.81  # m/s^2

# Vehicle totals; inertia below is a point-mass-at-arms estimate because no
# measured tensor exists.  Both are overridable through the scenario config.
DEFAULT_MASS = 1.14  # kg
DEFAULT_ARM = 0.18   # m


class IntegrationError(RuntimeError):
    """Raised when a derivative evaluation produces non-finite values."""


class DivergenceError(RuntimeError):
    """Raised when the simulated speed exceeds the plausibility bound."""

    def __init__(self, t: float, speed: float):
        super().__init__(f"simulation diverged at t={t:.4f} s (speed {speed:.1f} m/s)")
        self.t = t
        self.speed = speed


def default_inertia(mass: float = DEFAULT_MASS, arm: float = DEFAULT_ARM) -> np.ndarray:
    """Diagonal inertia from four point masses at the arm tips."""
    a = 0.5 * mass * arm * arm
    return np.diag([a, a, 2.0 * a])


@dataclass
class InertialParams:
    mass: float = DEFAULT_MASS
    inertia: np.ndarray = field(default_factory=default_inertia)
    gravity: float = GRAVITY

    def __post_init__(self):
        self.inertia = np.asarray(self.inertia, dtype=float)
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if self.inertia.shape != (3, 3):
            raise ValueError("inertia must be 3x3")
        if np.linalg.norm(self.inertia - self.inertia.T) > 1e-12:
            raise ValueError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0.0):
            raise ValueError("inertia must be positive definite")
        self._inertia_inv = np.linalg.inv(self.inertia)

    @property
    def inertia_inv(self) -> np.ndarray:
        return self._inertia_inv


@dataclass
class Disturbance:
    """Inertial-frame force plus body-frame torque acting on the vehicle."""
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))


ZERO_DISTURBANCE = Disturbance()


@dataclass
class RigidBodyState:
    """Position/velocity in the inertial frame, attitude body->inertial,
    angular rate in body axes."""

    x: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)

    def copy(self) -> "RigidBodyState":
        return RigidBodyState(self.x.copy(), self.v.copy(), self.R.copy(), self.omega.copy())

    @property
    def altitude(self) -> float:
        """Height above the z=0 ground plane (positive up)."""
        return -self.x[2]

    def quaternion(self) -> np.ndarray:
        return rot_to_quat(self.R)


def derivative(state: RigidBodyState, thrust: float, moment: np.ndarray,
               params: InertialParams,
               dist: Disturbance = ZERO_DISTURBANCE):
    """Time derivative (dx, dv, dR, domega) of the rigid-body state.

    `thrust` is the total effective thrust along body -z; `moment` is the
    body torque.  Disturbance force is inertial, torque is body-frame.
    """
    dx = state.v
    dv = params.gravity * E3 - (thrust / params.mass) * (state.R @ E3) \
        + dist.force / params.mass
    dr = state.R @ hat(state.omega)
    j_om = params.inertia @ state.omega
    domega = params.inertia_inv @ (moment - np.cross(state.omega, j_om) + dist.torque)
    return dx, dv, dr, domega


def integrate_step(state: RigidBodyState, derivative_fn, dt: float) -> RigidBodyState:
    """Advance the state by one classical RK4 step.

    `derivative_fn(state)` must return the (dx, dv, dR, domega) tuple.
    The attitude block is summed as a raw matrix and projected back onto
    SO(3) afterwards.  Raises IntegrationError on non-finite derivatives.
    """
    if not 0.0 < dt <= 0.01:
        raise ValueError("dt must lie in (0, 0.01]")

    k1 = derivative_fn(state)
    s2 = _offset(state, k1, 0.5 * dt)
    k2 = derivative_fn(s2)
    s3 = _offset(state, k2, 0.5 * dt)
    k3 = derivative_fn(s3)
    s4 = _offset(state, k3, dt)
    k4 = derivative_fn(s4)

    h = dt / 6.0
    x = state.x + h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v = state.v + h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    r = state.R + h * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    om = state.omega + h * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])

    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))
            and np.all(np.isfinite(r)) and np.all(np.isfinite(om))):
        raise IntegrationError("non-finite state after integration step")

    return RigidBodyState(x, v, orthonormalize(r), om)


def _offset(state: RigidBodyState, k, h: float) -> RigidBodyState:
    return RigidBodyState(state.x + h * k[0], state.v + h * k[1],
                          state.R + h * k[2], state.omega + h * k[3])


def mechanical_energy(state: RigidBodyState, params: InertialParams) -> float:
    """Kinetic plus potential energy; potential is -m*g*altitude, i.e.
    m*g*z in the z-down frame, so falling converts potential to kinetic."""
    trans = 0.5 * params.mass * float(np.dot(state.v, state.v))
    rot = 0.5 * float(state.omega @ (params.inertia @ state.omega))
    pot = -params.mass * params.gravity * float(state.x[2])
    return trans + rot + pot


def angular_momentum_inertial(state: RigidBodyState, params: InertialParams) -> np.ndarray:
    return state.R @ (params.inertia @ state.omega)


@dataclass
class TrajectoryLog:
    """Time-indexed record of a simulation run."""
    t: np.ndarray
    x: np.ndarray        # (N, 3)
    v: np.ndarray        # (N, 3)
    quat: np.ndarray     # (N, 4) attitude as w,x,y,z for compact storage
    omega: np.ndarray    # (N, 3)
    thrusts: np.ndarray  # (N, 4) commanded motor thrusts
    contact_force: np.ndarray  # (N,) normal force magnitude

    def __len__(self) -> int:
        return len(self.t)


def simulate(initial: RigidBodyState, controller, contact_fn, duration: float,
             dt: float = 1e-3, *, params: InertialParams | None = None,
             forward_model=None, dt_contact: float = 1e-4,
             speed_limit: float = 100.0) -> TrajectoryLog:
    """Fixed-step simulation of the bare plant.

    Parameters
    ----------
    initial : RigidBodyState
    controller : callable (t, state) -> array of 4 commanded motor thrusts,
        or None for unpowered flight.
    contact_fn : callable (t, state) -> (force Vec3 inertial, active flag),
        or None for free flight.
    duration, dt : total simulated time and the free-flight step.
    params : inertial parameters (defaults to the stock vehicle).
    forward_model : callable (motors, state) -> (total thrust, moment,
        inertial drift force); defaults to a lossless ideal mixer.
    dt_contact : step used while the contact flag is active; contact
        stiffness makes the system stiff only during impact.
    speed_limit : divergence guard on the speed norm.

    Deterministic: identical inputs produce identical logs.
    """
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    p = params if params is not None else InertialParams()
    fwd = forward_model if forward_model is not None else _ideal_forward(p)

    state = initial.copy()
    t = 0.0
    rows_t = [0.0]
    rows_x = [state.x.copy()]
    rows_v = [state.v.copy()]
    rows_q = [state.quaternion()]
    rows_om = [state.omega.copy()]
    rows_f = [np.zeros(4)]
    rows_c = [0.0]

    while t < duration - 1e-12:
        if controller is not None:
            motors = np.asarray(controller(t, state), dtype=float)
        else:
            motors = np.zeros(4)
        thrust, moment, drift = fwd(motors, state)

        if contact_fn is not None:
            cforce, active = contact_fn(t, state)
        else:
            cforce, active = np.zeros(3), False
        step = dt_contact if active else dt
        step = min(step, duration - t)

        dist = Disturbance(drift + cforce, np.zeros(3))

        def deriv(s):
            return derivative(s, thrust, moment, p, dist)

        state = integrate_step(state, deriv, step)
        t += step

        speed = float(np.linalg.norm(state.v))
        if speed > speed_limit:
            raise DivergenceError(t, speed)

        rows_t.append(t)
        rows_x.append(state.x.copy())
        rows_v.append(state.v.copy())
        rows_q.append(state.quaternion())
        rows_om.append(state.omega.copy())
        rows_f.append(motors)
        rows_c.append(float(np.linalg.norm(cforce)))

    return TrajectoryLog(
        np.array(rows_t), np.array(rows_x), np.array(rows_v),
        np.array(rows_q), np.array(rows_om), np.array(rows_f),
        np.array(rows_c))


def _ideal_forward(params: InertialParams):
    """Lossless forward map: no arm bending, no drift, ideal mixer."""
    from .control import AllocationParams, allocation_matrix

    a = allocation_matrix(AllocationParams())

    def fwd(motors: np.ndarray, state: RigidBodyState):
        u = a @ motors
        return float(u[0]), u[1:4], np.zeros(3)

    return fwd
