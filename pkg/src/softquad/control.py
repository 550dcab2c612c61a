"""Motor mixing and the cascaded flight controller.

Two layers live here:

* allocation — the linear map between the four motor thrusts and the
  collective thrust / body moments, its inverse with clamping, and the
  fixed-point compensation that converts a desired *effective* thrust into
  the larger *commanded* thrust a bent arm must produce;
* the tracking controller — an outer proportional position loop feeding a
  PID velocity loop, whose acceleration demand is turned into a desired
  thrust vector and attitude, closed by a geometric attitude loop on the
  rotation manifold.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .airframe import AirframeModel, drift_force
from .geom import E3, vee
from .rigidbody import InertialParams, RigidBodyState

MAX_MOTOR_THRUST = 10.0  # N, per-motor ceiling
MIN_MOTOR_THRUST = 0.0


@dataclass
class AllocationParams:
    """Geometry of the mixer: motor offset from the mass centre and the
    yaw reaction-torque per unit thrust."""
    arm_offset: float = 0.18       # m
    reaction_coeff: float = 0.0245  # m (torque per newton of thrust)

    def __post_init__(self):
        if self.arm_offset <= 0.0 or self.reaction_coeff <= 0.0:
            raise ValueError("allocation parameters must be positive")


@functools.lru_cache(maxsize=32)
def _mixer(d: float, c: float) -> tuple:
    a = np.array([
        [1.0, 1.0, 1.0, 1.0],
        [0.0, -d, 0.0, d],
        [d, 0.0, -d, 0.0],
        [-c, c, -c, c],
    ])
    return a, np.linalg.inv(a)


def allocation_matrix(params: AllocationParams) -> np.ndarray:
    """Map motor thrusts [F1..F4] to [collective, Mx, My, Mz].

    Motors sit on +x (1), -y (2), -x (3), +y (4); spin directions
    alternate so yaw torque is -,+,-,+ per unit thrust.
    """
    return _mixer(params.arm_offset, params.reaction_coeff)[0].copy()


@dataclass
class ControlInput:
    """Collective thrust along body -z plus body torque."""
    thrust: float
    moment: np.ndarray

    def __post_init__(self):
        self.moment = np.asarray(self.moment, dtype=float)
        if self.thrust < 0.0:
            raise ValueError("collective thrust must be non-negative")


@dataclass(frozen=True)
class AllocationResult:
    thrusts: np.ndarray    # (4,) clamped to [0, 10] N
    requested: np.ndarray  # (4,) raw inverse solution
    clamped: bool          # True when any motor left the admissible range


def allocate(u: ControlInput, params: AllocationParams) -> AllocationResult:
    """Invert the mixer for per-motor effective thrusts, clamping to the
    admissible [0, 10] N range and flagging when clamping occurred."""
    a_inv = _mixer(params.arm_offset, params.reaction_coeff)[1]
    rhs = np.array([u.thrust, u.moment[0], u.moment[1], u.moment[2]])
    raw = a_inv @ rhs
    clipped = np.clip(raw, MIN_MOTOR_THRUST, MAX_MOTOR_THRUST)
    return AllocationResult(clipped, raw, bool(np.any(np.abs(clipped - raw) > 1e-12)))


def wrench_from_thrusts(thrusts: np.ndarray, params: AllocationParams) -> ControlInput:
    """Forward mixer: motor thrusts to collective thrust and body moment."""
    u = allocation_matrix(params) @ np.asarray(thrusts, dtype=float)
    return ControlInput(max(u[0], 0.0), u[1:4])


@dataclass(frozen=True)
class CompensationResult:
    commanded: float   # N, what the motor must produce
    saturated: bool    # True when the requirement exceeded the 10 N ceiling
    iterations: int


def compensate_thrust_loss(effective: float, airframe: AirframeModel,
                           max_iters: int = 20, tol: float = 1e-6) -> CompensationResult:
    """Solve F*cos(theta(F)) = effective for the commanded thrust F.

    Fixed-point iteration F <- effective / cos(theta(F)) starting at F =
    effective; since cos <= 1 the solution satisfies F >= effective.  A
    requirement beyond the 10 N motor ceiling is clamped and flagged.
    """
    if effective < 0.0:
        raise ValueError("effective thrust must be non-negative")
    if effective == 0.0:
        return CompensationResult(0.0, False, 0)
    f_cmd = effective
    iterations = 0
    for iterations in range(1, max_iters + 1):
        factor = airframe.tip_deflection(f_cmd).thrust_factor
        f_next = effective / factor
        if abs(f_next - f_cmd) < tol:
            f_cmd = f_next
            break
        f_cmd = f_next
    f_cmd = max(f_cmd, effective)
    if f_cmd > MAX_MOTOR_THRUST:
        return CompensationResult(MAX_MOTOR_THRUST, True, iterations)
    return CompensationResult(f_cmd, False, iterations)


@dataclass
class ControllerGains:
    """Cascade gains; per-axis arrays. Defaults were tuned in simulation —
    no measured values exist for the real vehicle."""
    pos_p: np.ndarray = field(default_factory=lambda: np.array([1.1, 1.1, 1.6]))
    vel_p: np.ndarray = field(default_factory=lambda: np.array([3.2, 3.2, 5.0]))
    vel_i: np.ndarray = field(default_factory=lambda: np.array([1.2, 1.2, 2.0]))
    vel_d: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0]))
    att_p: np.ndarray = field(default_factory=lambda: np.array([9.0, 9.0, 2.5]))
    att_d: np.ndarray = field(default_factory=lambda: np.array([0.55, 0.55, 0.3]))
    integral_clamp: float = 2.0  # N-equivalent anti-windup bound per axis

    def __post_init__(self):
        for name in ("pos_p", "vel_p", "vel_i", "vel_d", "att_p", "att_d"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,) or np.any(arr < 0.0):
                raise ValueError(f"{name} must be three non-negative gains")
            setattr(self, name, arr)
        if self.integral_clamp <= 0.0:
            raise ValueError("integral_clamp must be positive")


@dataclass
class Setpoint:
    """Per-axis reference: axes with position_mask True track position
    (plus velocity feed-forward), the rest track velocity only."""
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    position_mask: np.ndarray = field(default_factory=lambda: np.ones(3, dtype=bool))
    yaw: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.position_mask = np.asarray(self.position_mask, dtype=bool)

    @staticmethod
    def hold(position, yaw: float = 0.0) -> "Setpoint":
        return Setpoint(np.asarray(position, dtype=float), np.zeros(3),
                        np.ones(3, dtype=bool), yaw)

    @staticmethod
    def descend(xy, vertical_speed: float, yaw: float = 0.0) -> "Setpoint":
        """Hold x-y position while commanding a downward velocity
        (positive speed = descending, i.e. +z in the z-down frame)."""
        pos = np.array([xy[0], xy[1], 0.0])
        vel = np.array([0.0, 0.0, abs(vertical_speed)])
        return Setpoint(pos, vel, np.array([True, True, False]), yaw)


class GeometricController:
    """Position P -> velocity PID -> thrust vector + geometric attitude loop.

    Holds the velocity-loop integrator, so use one instance per run.
    """

    def __init__(self, gains: ControllerGains | None = None,
                 params: InertialParams | None = None):
        self.gains = gains if gains is not None else ControllerGains()
        self.params = params if params is not None else InertialParams()
        self._integral = np.zeros(3)
        self._prev_vel_err = None

    def reset(self) -> None:
        self._integral[:] = 0.0
        self._prev_vel_err = None

    def update(self, state: RigidBodyState, setpoint: Setpoint, dt: float) -> ControlInput:
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        g = self.gains
        m = self.params.mass

        v_cmd = setpoint.velocity.copy()
        pos_err = setpoint.position - state.x
        v_cmd[setpoint.position_mask] += (g.pos_p * pos_err)[setpoint.position_mask]

        vel_err = v_cmd - state.v
        # Anti-windup: keep the integral's force contribution within the clamp.
        self._integral += vel_err * dt
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = np.where(g.vel_i > 0.0,
                             g.integral_clamp / (m * np.maximum(g.vel_i, 1e-12)),
                             0.0)
        self._integral = np.clip(self._integral, -bound, bound)

        if self._prev_vel_err is None:
            err_rate = np.zeros(3)
        else:
            err_rate = (vel_err - self._prev_vel_err) / dt
        self._prev_vel_err = vel_err.copy()

        accel_cmd = g.vel_p * vel_err + g.vel_i * self._integral + g.vel_d * err_rate

        # In the z-down frame: m*dv/dt = m*g*e3 - f*R@e3, so the thrust
        # vector that realizes accel_cmd is m*(g*e3 - accel_cmd).
        force_vec = m * (self.params.gravity * E3 - accel_cmd)

        # Rotors cannot pull the vehicle down: a demanded net downward
        # acceleration beyond gravity is unreachable.  Floor the vertical
        # demand, and scale the lateral demand against the *unfloored*
        # vertical request (45-degree tilt at full authority).  When the
        # vertical request collapses toward free fall there is no thrust
        # left to tilt with, so the attitude target fades to level instead
        # of chasing x-y errors with pure tilt -- during a ballistic
        # descent a tilting body would swing any tool mounted below the
        # airframe far off the approach line.
        fz_raw = float(force_vec[2])
        fz_min = 0.05 * m * self.params.gravity
        fz = max(fz_raw, fz_min)
        lat = math.hypot(force_vec[0], force_vec[1])
        lat_cap = max(fz_raw, 0.0)
        if lat > lat_cap:
            s = 0.0 if lat == 0.0 else lat_cap / lat
            force_vec = np.array([force_vec[0] * s, force_vec[1] * s, fz])
        else:
            force_vec = np.array([force_vec[0], force_vec[1], fz])

        body_z = state.R @ E3
        thrust = max(float(force_vec @ body_z), 0.0)
        b3_des = force_vec / float(np.linalg.norm(force_vec))
        r_des = _attitude_from_thrust_dir(b3_des, setpoint.yaw)

        att_err = 0.5 * vee(r_des.T @ state.R - state.R.T @ r_des)
        rate_err = state.omega  # desired body rate is zero for these refs
        j_om = self.params.inertia @ state.omega
        moment = -g.att_p * att_err - g.att_d * rate_err + np.cross(state.omega, j_om)
        return ControlInput(thrust, moment)


def _attitude_from_thrust_dir(b3: np.ndarray, yaw: float) -> np.ndarray:
    """Rotation whose third column is b3 and whose first column points as
    close to the yaw heading as the b3 constraint allows."""
    heading = np.array([math.cos(yaw), math.sin(yaw), 0.0])
    b2 = np.cross(b3, heading)
    n2 = float(np.linalg.norm(b2))
    if n2 < 1e-9:  # thrust direction (anti)parallel to heading: degenerate
        heading = np.array([-math.sin(yaw), math.cos(yaw), 0.0])
        b2 = np.cross(b3, heading)
        n2 = float(np.linalg.norm(b2))
    b2 /= n2
    b1 = np.cross(b2, b3)
    return np.column_stack([b1, b2, b3])


@dataclass(frozen=True)
class MotorCommand:
    motors: np.ndarray          # (4,) commanded thrusts, N
    effective: np.ndarray       # (4,) effective thrusts after allocation clamp
    allocation_clamped: bool
    any_saturated: bool         # compensation hit the motor ceiling


def motor_commands(u: ControlInput, alloc: AllocationParams,
                   airframe: AirframeModel | None = None) -> MotorCommand:
    """Allocate a control input to motors and pre-compensate arm bending.

    Without an airframe model the commanded thrusts equal the allocated
    effective thrusts (rigid assumption).
    """
    res = allocate(u, alloc)
    if airframe is None or airframe.rigid:
        return MotorCommand(res.thrusts.copy(), res.thrusts, res.clamped, False)
    commanded = np.empty(4)
    saturated = False
    for i, f_eff in enumerate(res.thrusts):
        comp = compensate_thrust_loss(float(f_eff), airframe)
        commanded[i] = comp.commanded
        saturated = saturated or comp.saturated
    return MotorCommand(commanded, res.thrusts, res.clamped, saturated)


def plant_forward(alloc: AllocationParams, airframe: AirframeModel | None = None,
                  include_drift: bool = True):
    """Physical forward map used by the simulator: commanded motor thrusts
    -> (collective effective thrust, body moment, inertial drift force).

    Each arm bends under its commanded thrust; the cosine of the tip
    rotation scales the useful thrust and the sines leave a lateral drift
    force (rotated into the inertial frame with the current attitude).
    """
    a = allocation_matrix(alloc)

    bend = None if (airframe is None or airframe.rigid) \
        else airframe.bending_coefficient()

    def fwd(motors: np.ndarray, state: RigidBodyState):
        f_cmd = np.clip(np.asarray(motors, dtype=float),
                        MIN_MOTOR_THRUST, MAX_MOTOR_THRUST)
        if bend is None:
            u = a @ f_cmd
            return float(max(u[0], 0.0)), u[1:4], np.zeros(3)
        rotations = bend * f_cmd   # linear cantilever: tip angle per newton
        f_eff = f_cmd * np.cos(rotations)
        u = a @ f_eff
        if include_drift:
            drift = state.R @ drift_force(f_cmd, rotations)
        else:
            drift = np.zeros(3)
        return float(max(u[0], 0.0)), u[1:4], drift

    return fwd
