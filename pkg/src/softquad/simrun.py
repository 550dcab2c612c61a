"""End-to-end perch flights: 6-DOF vehicle + compliant contact + bistable
grasper + mission sequencer, wired into one deterministic run loop.

Contact geometry is deliberately minimal: the grasper palm is a single
point a fixed distance below the mass center along the body z axis.  It
meets two surfaces — the perch object's top, modeled as a horizontal
disc (the curvature of a cylindrical perch is ignored; the configured
lateral placement noise stays within the disc), and the ground plane.
Both use the same compliant normal-force law as the drop tests, with the
full vehicle mass riding on it.

Engagement is one-shot, as a bistable mechanism is: the fingers snap
when the palm force crosses the activation threshold, and they can only
capture the object during that same unbroken contact episode, while the
vehicle is slow enough and the palm force is within the grasp capacity.
If the frame rebounds first, later impacts land on the already-curled
fingers and can never engage — the vehicle bounces until the descent
times out.  A soft frame stretches the impact long enough (and keeps
the force low enough) to capture on the first hit; a rigid frame does
not.

While engaged the vehicle is welded to the perch (positions frozen,
velocities zero); the weld releases when the pneumatic recoil finishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .airframe import AirframeModel
from .contact import ContactModel, contact_force
from .control import (AllocationParams, ControllerGains, GeometricController,
                      motor_commands, plant_forward)
from .geom import E3
from .grasper import (GrasperMode, GrasperSpec, GrasperState, advance,
                      begin_activation, check_activation, grasp_capacity,
                      recoil)
from .mission import (MissionParams, MissionPhase, initial_state,
                      step as mission_step)
from .rigidbody import (DEFAULT_MASS, Disturbance, InertialParams,
                        RigidBodyState, derivative, integrate_step)

PALM_OFFSET = 0.10          # m below the mass center along body z
CAPTURE_SPEED = 0.25        # m/s; max vehicle speed at engagement
LOG_INTERVAL = 0.01         # s between trajectory-log rows


@dataclass
class PerchObject:
    """Perch target: a horizontal disc top at a fixed height plus the
    grasp diameter used for capacity lookup."""
    center_xy: tuple = (0.0, 0.0)
    top_z: float = -0.55          # z-down coordinate of the top surface
    patch_radius: float = 0.0275  # m, disc radius (cylinder radius)
    diameter_mm: float = 55.0     # grasped diameter for capacity lookup
    name: str = "cylinder-55mm"

    def __post_init__(self):
        if self.patch_radius <= 0.0 or self.diameter_mm <= 0.0:
            raise ValueError("patch_radius and diameter_mm must be positive")


@dataclass
class PerchScenario:
    """Everything one perch flight needs.  `start` defaults to a lateral
    offset from the hover point so the Approach phase does real work."""
    airframe: AirframeModel
    contact: ContactModel
    grasper: GrasperSpec
    mission: MissionParams
    perch: PerchObject = field(default_factory=PerchObject)
    start: np.ndarray | None = None
    mass: float = DEFAULT_MASS
    duration: float = 60.0
    dt_free: float = 2e-3
    dt_contact: float = 1e-4
    dt_near: float = 5e-4        # inside the proximity band, not touching
    dt_welded: float = 5e-3      # no dynamics while welded, only timers
    dt_settled: float = 1e-3     # resting quasi-statically on a surface
    proximity_band: float = 0.03  # m; switch to dt_near this far out
    settle_speed: float = 0.05   # m/s, below this a contact counts as settled
    palm_offset: float = PALM_OFFSET
    capture_speed: float = CAPTURE_SPEED
    supply_pressure_kpa: float = 100.0   # feeds the recoil
    lateral_noise: float = 0.02          # m, uniform +/- on perch placement
    inertia: np.ndarray | None = None    # 3x3 body inertia; None = default
    gains: ControllerGains = field(default_factory=ControllerGains)
    allocation: AllocationParams = field(default_factory=AllocationParams)
    name: str = "perch"

    def __post_init__(self):
        if self.start is None:
            self.start = self.mission.hover_point + np.array([-0.8, 0.0, 0.0])
        self.start = np.asarray(self.start, dtype=float)
        if self.dt_free <= 0.0 or self.dt_contact <= 0.0:
            raise ValueError("time steps must be positive")
        if self.lateral_noise < 0.0:
            raise ValueError("lateral_noise must be non-negative")


@dataclass(frozen=True)
class LogRow:
    t: float
    x: np.ndarray
    v: np.ndarray
    quat: np.ndarray
    omega: np.ndarray
    thrusts: np.ndarray
    contact_force: float
    grasper_mode: str
    mission_phase: str


@dataclass
class TrialResult:
    seed: int
    final_phase: MissionPhase
    success: bool
    events: list
    elapsed: float
    perch_offset: np.ndarray
    rows: list

    @property
    def phase_sequence(self) -> list:
        seq = [MissionPhase.APPROACH]
        seq.extend(ev.phase_to for ev in self.events)
        return seq


def _palm_contact(state: RigidBodyState, palm_offset: float,
                  perch_center: np.ndarray, perch: PerchObject,
                  model: ContactModel, band: float = 0.0):
    """Normal force at the palm point against perch top or ground.

    Returns (force_vec_inertial, torque_body, magnitude, surface, near):
    surface in {'perch', 'ground', None}; `near` is True when the palm is
    within `band` above either surface (tight-timestep zone).
    """
    # Cheapest possible reject: the palm cannot be deeper than the mass
    # center plus the full palm offset.
    deepest = state.x[2] + palm_offset
    if deepest < perch_center[2] - band and deepest < -band:
        return None, None, 0.0, None, False

    body_down = state.R @ E3
    p = state.x + palm_offset * body_down
    near = p[2] >= -band

    surface = None
    if p[2] >= perch_center[2] - band:
        r_lat = math.hypot(p[0] - perch_center[0], p[1] - perch_center[1])
        if r_lat <= perch.patch_radius + band:
            near = True
        if r_lat <= perch.patch_radius and p[2] >= perch_center[2]:
            depth = p[2] - perch_center[2]
            # The disc only pushes back on a palm pressing its top; a
            # palm far below the top plane is beside the perch, not on
            # it, and side contact is not modeled.
            if depth <= model.max_compression + 0.05:
                surface = "perch"
    if surface is None and p[2] >= 0.0:
        surface = "ground"
        depth = p[2]
    if surface is None:
        return None, None, 0.0, None, near

    pdot = state.v + palm_offset * (state.R @ np.cross(state.omega, E3))
    mag = contact_force(depth, pdot[2], model)
    if mag == 0.0:
        return None, None, 0.0, None, near
    f = np.array([0.0, 0.0, -mag])          # surface pushes up (z is down)
    torque_body = state.R.T @ np.cross(palm_offset * body_down, f)
    return f, torque_body, mag, surface, near


def run_perch_trial(scenario: PerchScenario, seed: int, *,
                    record: bool = True) -> TrialResult:
    """One seeded flight.  The seed draws the perch-placement noise and
    fully determines the run."""
    rng = np.random.default_rng(seed)
    offset = rng.uniform(-scenario.lateral_noise, scenario.lateral_noise, size=2)
    perch_center = np.array([scenario.perch.center_xy[0] + offset[0],
                             scenario.perch.center_xy[1] + offset[1],
                             scenario.perch.top_z])

    if scenario.inertia is None:
        params = InertialParams(mass=scenario.mass)
    else:
        params = InertialParams(mass=scenario.mass, inertia=scenario.inertia)
    controller = GeometricController(scenario.gains, params)
    fwd = plant_forward(scenario.allocation, scenario.airframe)
    capacity = grasp_capacity(scenario.grasper, scenario.perch.diameter_mm)

    state = RigidBodyState(x=scenario.start.copy())
    gs = GrasperState()
    mission = initial_state(scenario.mission)

    welded = False
    weld_x = weld_r = None
    armed = False              # activation happened in the current episode
    t = 0.0
    next_log = 0.0
    events: list = []
    rows: list = []

    zero4 = np.zeros(4)
    while t < scenario.duration and not mission.terminal:
        _, _, fmag, surface, near = _palm_contact(
            state, scenario.palm_offset, perch_center, scenario.perch,
            scenario.contact, scenario.proximity_band)
        in_contact = surface is not None
        if not in_contact:
            armed = False

        # Bistable trigger: snap the fingers on threshold palm force.
        if (gs.mode is GrasperMode.STRAIGHT and in_contact
                and check_activation(fmag, scenario.grasper)):
            gs = begin_activation(gs)
            armed = True

        speed = float(np.linalg.norm(state.v))
        if welded:
            dt = scenario.dt_welded
        elif in_contact and speed < scenario.settle_speed \
                and float(np.linalg.norm(state.omega)) < scenario.settle_speed:
            dt = scenario.dt_settled
        elif in_contact:
            dt = scenario.dt_contact
        elif near:
            dt = scenario.dt_near
        else:
            dt = scenario.dt_free

        # One-shot capture: same contact episode, slow enough, force the
        # fingers can actually hold.
        if (not welded and armed and surface == "perch"
                and gs.mode is GrasperMode.CURLED
                and speed <= scenario.capture_speed
                and fmag <= capacity):
            welded = True
            # Hold the pose with the frame compression relaxed: shift the
            # vehicle up so the palm sits flush on the perch top, so the
            # later release does not start inside the surface.
            weld_x = state.x.copy()
            weld_r = state.R.copy()
            palm_z = weld_x[2] + scenario.palm_offset * float((weld_r @ E3)[2])
            weld_x[2] -= palm_z - perch_center[2]
            gs = GrasperState(mode=gs.mode, mode_timer=gs.mode_timer,
                              engaged_object=scenario.perch.name)

        mres = mission_step(mission, state, gs, dt, spec=scenario.grasper)
        mission = mres.state
        events.extend(mres.events)

        # Grasper time update (recoil while the mission commands it).
        if mres.recoil:
            gs = recoil(gs, scenario.grasper, scenario.supply_pressure_kpa, dt)
        else:
            gs = advance(gs, scenario.grasper, dt)

        # Motor commands.
        if mres.motors_on and mres.setpoint is not None:
            u = controller.update(state, mres.setpoint, dt)
            cmd = motor_commands(u, scenario.allocation, scenario.airframe)
            motors = cmd.motors
        else:
            controller.reset()
            motors = zero4

        if welded:
            # Kinematic weld: hold pose, zero velocities.  Release when
            # the recoil has straightened the fingers.
            state = RigidBodyState(x=weld_x.copy(), v=np.zeros(3),
                                   R=weld_r.copy(), omega=np.zeros(3))
            thrust_total = float(sum(scenario.airframe.effective_thrust(float(m))
                                     for m in motors))
            support = scenario.mass * params.gravity - thrust_total
            fmag = max(support, 0.0)
            if gs.mode is GrasperMode.STRAIGHT:
                welded = False
                gs = GrasperState(mode=gs.mode, mode_timer=gs.mode_timer,
                                  engaged_object=None)
        else:
            thrust_cmd, moment_cmd, drift = fwd(motors, state)

            def deriv(s):
                fvec, tau_body, _, _, _ = _palm_contact(
                    s, scenario.palm_offset, perch_center, scenario.perch,
                    scenario.contact)
                if fvec is None:
                    dist = Disturbance(force=drift)
                else:
                    dist = Disturbance(force=drift + fvec, torque=tau_body)
                return derivative(s, thrust_cmd, moment_cmd, params, dist)

            state = integrate_step(state, deriv, dt)

        t += dt

        if record and t >= next_log - 1e-12:
            rows.append(LogRow(t, state.x.copy(), state.v.copy(),
                               state.quaternion(), state.omega.copy(),
                               np.asarray(motors, dtype=float).copy(),
                               fmag, gs.mode.value, mission.phase.value))
            next_log += LOG_INTERVAL

    return TrialResult(seed=seed, final_phase=mission.phase,
                       success=mission.phase is MissionPhase.DONE,
                       events=events, elapsed=t, perch_offset=offset,
                       rows=rows)


@dataclass
class BatchResult:
    trials: list

    @property
    def successes(self) -> int:
        return sum(1 for tr in self.trials if tr.success)

    @property
    def phases(self) -> list:
        return [tr.final_phase for tr in self.trials]


def run_perch_batch(scenario: PerchScenario, trials: int,
                    base_seed: int, *, record: bool = False) -> BatchResult:
    """Seeded batch: trial i uses seed base_seed + i."""
    if trials < 0:
        raise ValueError("trials must be non-negative")
    out = [run_perch_trial(scenario, base_seed + i, record=record)
           for i in range(trials)]
    return BatchResult(out)
