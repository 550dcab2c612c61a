"""Autonomous perching mission sequencer.

A single finite-state machine drives one perch-and-recover flight:

    Approach -> Hover -> Descent -> Perched -> Wait -> Recovery
             -> Takeoff -> Land -> Done

Transitions are event-triggered (position converged, grasper engaged,
velocities zero, recoil complete, landed) or time-triggered (wait
elapsed, per-phase timeout).  A slip or a timeout in any non-terminal
phase fails the mission.  Each `step` call advances at most one
transition and emits exactly one event per transition, so replaying the
event log through the transition map reproduces the final phase.

Axis convention: z points down (gravity positive z), so the hover point
sits at the target with a *negative* vertical offset and altitude is -z.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .control import Setpoint
from .grasper import (GrasperMode, GrasperSpec, GrasperState,
                      min_approach_velocity_height)
from .rigidbody import RigidBodyState


class MissionPhase(str, enum.Enum):
    APPROACH = "Approach"
    HOVER = "Hover"
    DESCENT = "Descent"
    PERCHED = "Perched"
    WAIT = "Wait"
    RECOVERY = "Recovery"
    TAKEOFF = "Takeoff"
    LAND = "Land"
    DONE = "Done"
    FAILED = "Failed"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


TERMINAL_PHASES = frozenset({MissionPhase.DONE, MissionPhase.FAILED})


class EventKind(str, enum.Enum):
    POSITION_CONVERGED = "PositionConverged"
    GRASPER_ENGAGED = "GrasperEngaged"
    VELOCITIES_ZERO = "VelocitiesZero"
    WAIT_ELAPSED = "WaitElapsed"
    RECOIL_COMPLETE = "RecoilComplete"
    LANDED = "Landed"
    SLIP_DETECTED = "SlipDetected"
    TIMEOUT = "Timeout"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class MissionEvent:
    timestamp: float
    kind: EventKind
    phase_from: MissionPhase
    phase_to: MissionPhase


# The nominal phase graph; slip and timeout apply from any non-terminal
# phase and are resolved by `next_phase`.
TRANSITIONS: dict[tuple[MissionPhase, EventKind], MissionPhase] = {
    (MissionPhase.APPROACH, EventKind.POSITION_CONVERGED): MissionPhase.HOVER,
    (MissionPhase.HOVER, EventKind.POSITION_CONVERGED): MissionPhase.DESCENT,
    (MissionPhase.DESCENT, EventKind.GRASPER_ENGAGED): MissionPhase.PERCHED,
    (MissionPhase.PERCHED, EventKind.VELOCITIES_ZERO): MissionPhase.WAIT,
    (MissionPhase.WAIT, EventKind.WAIT_ELAPSED): MissionPhase.RECOVERY,
    (MissionPhase.RECOVERY, EventKind.RECOIL_COMPLETE): MissionPhase.TAKEOFF,
    (MissionPhase.TAKEOFF, EventKind.POSITION_CONVERGED): MissionPhase.LAND,
    (MissionPhase.LAND, EventKind.LANDED): MissionPhase.DONE,
}


def next_phase(phase: MissionPhase, kind: EventKind) -> MissionPhase | None:
    """Successor phase for an event, or None when the event does not apply."""
    if phase in TERMINAL_PHASES:
        return None
    if kind in (EventKind.SLIP_DETECTED, EventKind.TIMEOUT):
        return MissionPhase.FAILED
    return TRANSITIONS.get((phase, kind))


def replay(events, start: MissionPhase = MissionPhase.APPROACH) -> MissionPhase:
    """Fold an event log through the transition map (replay determinism)."""
    phase = start
    for ev in events:
        nxt = next_phase(phase, ev.kind)
        if nxt is None:
            raise ValueError(f"event {ev.kind} does not apply in phase {phase}")
        phase = nxt
    return phase


def descent_velocity(spec: GrasperSpec) -> float:
    """Downward reference speed for the descent phase: the free-fall
    speed from the grasper's minimum reliable drop height."""
    return min_approach_velocity_height(spec)


DEFAULT_TIMEOUTS: dict[MissionPhase, float] = {
    MissionPhase.APPROACH: 15.0,
    MissionPhase.HOVER: 15.0,
    MissionPhase.DESCENT: 10.0,
    MissionPhase.PERCHED: 5.0,
    MissionPhase.RECOVERY: 10.0,
    MissionPhase.TAKEOFF: 15.0,
    MissionPhase.LAND: 20.0,
}


@dataclass
class MissionParams:
    """Scenario-level mission knobs.  `target` is the perch-object top
    center in z-down coordinates; the hover point sits `hover_offset`
    meters above it."""
    target: np.ndarray
    hover_offset: float = 0.30
    position_tolerance: float = 0.05   # m; not stated upstream, see docs
    velocity_tolerance: float = 0.05   # m/s, "velocities almost zero"
    hover_settle: float = 0.5          # s to dwell in Hover before descent
    wait_time: float = 2.0             # s perched before recovery
    descent_speed: float | None = None  # m/s; None -> from grasper spec
    land_speed: float = 0.4            # m/s downward during Land
    land_altitude: float = 0.02        # m; Landed when at or below
    land_xy: tuple | None = None       # landing spot; None -> hover x-y
    yaw: float = 0.0
    recovery_mode: str = "automatic"   # 'automatic' | 'manual'
    timeouts: dict = field(default_factory=dict)

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float)
        if self.target.shape != (3,):
            raise ValueError("target must be a 3-vector")
        if self.position_tolerance <= 0.0 or self.velocity_tolerance <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.recovery_mode not in ("automatic", "manual"):
            raise ValueError("recovery_mode must be 'automatic' or 'manual'")

    @property
    def hover_point(self) -> np.ndarray:
        # z is down, so "above" subtracts from z.
        return self.target - np.array([0.0, 0.0, self.hover_offset])

    def timeout_for(self, phase: MissionPhase) -> float | None:
        if phase in self.timeouts:
            return self.timeouts[phase]
        if phase is MissionPhase.WAIT:
            return self.wait_time + 5.0
        return DEFAULT_TIMEOUTS.get(phase)


@dataclass
class MissionState:
    params: MissionParams
    phase: MissionPhase = MissionPhase.APPROACH
    phase_timer: float = 0.0
    elapsed: float = 0.0

    @property
    def terminal(self) -> bool:
        return self.phase in TERMINAL_PHASES


def initial_state(params: MissionParams) -> MissionState:
    return MissionState(params=params)


@dataclass
class StepResult:
    state: MissionState
    setpoint: Setpoint | None   # None -> motors off
    motors_on: bool
    recoil: bool                # grasper recoil command active
    events: list


def _setpoint_for(phase: MissionPhase, params: MissionParams,
                  spec: GrasperSpec | None) -> tuple[Setpoint | None, bool, bool]:
    """Returns (setpoint, motors_on, recoil) for a phase."""
    hover = params.hover_point
    if phase in (MissionPhase.APPROACH, MissionPhase.HOVER):
        return Setpoint.hold(hover, yaw=params.yaw), True, False
    if phase is MissionPhase.DESCENT:
        if params.descent_speed is not None:
            speed = params.descent_speed
        else:
            speed = descent_velocity(spec if spec is not None
                                     else GrasperSpec.three_finger())
        return Setpoint.descend(params.target[:2], speed, yaw=params.yaw), True, False
    if phase in (MissionPhase.PERCHED, MissionPhase.WAIT):
        return None, False, False
    if phase is MissionPhase.RECOVERY:
        # Spool the rotors back to a hover command while still welded to
        # the perch; the grasper recoils underneath.
        return Setpoint.hold(hover, yaw=params.yaw), True, True
    if phase is MissionPhase.TAKEOFF:
        return Setpoint.hold(hover, yaw=params.yaw), True, False
    if phase is MissionPhase.LAND:
        xy = params.land_xy if params.land_xy is not None else hover[:2]
        return Setpoint.descend(np.asarray(xy, dtype=float), params.land_speed,
                                yaw=params.yaw), True, False
    return None, False, False  # Done / Failed


def _fire(state: MissionState, kind: EventKind) -> tuple[MissionState, MissionEvent]:
    target = next_phase(state.phase, kind)
    if target is None:
        raise ValueError(f"event {kind} does not apply in phase {state.phase}")
    ev = MissionEvent(state.elapsed, kind, state.phase, target)
    new = replace(state, phase=target, phase_timer=0.0)
    return new, ev


def step(mission: MissionState, vehicle: RigidBodyState,
         grasper: GrasperState, dt: float, *, spec: GrasperSpec | None = None,
         slip: bool = False, manual_recover: bool = False) -> StepResult:
    """Advance the mission clock by dt and take at most one transition.

    `spec` supplies the grasper geometry for the descent-speed reference
    (a standard three-finger grasper when omitted); `slip` reports a
    detected grasp slip this step (fails the mission); `manual_recover`
    releases the Wait phase when recovery_mode is 'manual'.  Condition
    checks run before the timeout check, so a phase that converges
    exactly at its deadline still progresses.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    p = mission.params
    if mission.terminal:
        sp, on, rc = _setpoint_for(mission.phase, p, spec)
        return StepResult(mission, sp, on, rc, [])

    state = replace(mission, phase_timer=mission.phase_timer + dt,
                    elapsed=mission.elapsed + dt)
    events: list[MissionEvent] = []

    def fire(kind: EventKind):
        nonlocal state
        state, ev = _fire(state, kind)
        events.append(ev)

    pos_err = float(np.linalg.norm(vehicle.x - p.hover_point))
    speed = float(np.linalg.norm(vehicle.v))

    if slip:
        fire(EventKind.SLIP_DETECTED)
    elif mission.phase is MissionPhase.APPROACH:
        if pos_err < p.position_tolerance:
            fire(EventKind.POSITION_CONVERGED)
    elif mission.phase is MissionPhase.HOVER:
        if state.phase_timer >= p.hover_settle and pos_err < p.position_tolerance:
            fire(EventKind.POSITION_CONVERGED)
    elif mission.phase is MissionPhase.DESCENT:
        # Engaged means the fingers are curled around something, not
        # merely curled: the vehicle resting on a closed fist after a
        # missed capture must keep descending until the phase times out.
        if (grasper.mode is GrasperMode.CURLED
                and grasper.engaged_object is not None):
            fire(EventKind.GRASPER_ENGAGED)
    elif mission.phase is MissionPhase.PERCHED:
        if speed < p.velocity_tolerance:
            fire(EventKind.VELOCITIES_ZERO)
    elif mission.phase is MissionPhase.WAIT:
        ready = (state.phase_timer >= p.wait_time
                 if p.recovery_mode == "automatic" else manual_recover)
        if ready:
            fire(EventKind.WAIT_ELAPSED)
    elif mission.phase is MissionPhase.RECOVERY:
        if grasper.mode is GrasperMode.STRAIGHT:
            fire(EventKind.RECOIL_COMPLETE)
    elif mission.phase is MissionPhase.TAKEOFF:
        if pos_err < p.position_tolerance:
            fire(EventKind.POSITION_CONVERGED)
    elif mission.phase is MissionPhase.LAND:
        if vehicle.altitude <= p.land_altitude:
            fire(EventKind.LANDED)

    if not events and not state.terminal:
        limit = p.timeout_for(state.phase)
        if limit is not None and state.phase_timer > limit:
            fire(EventKind.TIMEOUT)

    sp, on, rc = _setpoint_for(state.phase, p, spec)
    return StepResult(state, sp, on, rc, events)
