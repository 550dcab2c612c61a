"""Perch-mission state machine: transition map, event-triggered and
time-triggered progression, setpoint/motor policies per phase."""

import math

import numpy as np
import pytest

from softquad.grasper import GrasperMode, GrasperSpec, GrasperState
from softquad.mission import (DEFAULT_TIMEOUTS, EventKind, MissionParams,
                              MissionPhase, TERMINAL_PHASES, TRANSITIONS,
                              descent_velocity, initial_state, next_phase,
                              replay, step)
from softquad.rigidbody import GRAVITY, RigidBodyState

TARGET = np.array([0.0, 0.0, -0.55])   # perch top at 0.55 m altitude


def make_params(**kw):
    return MissionParams(target=TARGET.copy(), **kw)


def at_hover(params):
    return RigidBodyState(x=params.hover_point.copy())


class TestTransitionMap:
    def test_nominal_chain_reaches_done(self):
        order = [MissionPhase.APPROACH, MissionPhase.HOVER,
                 MissionPhase.DESCENT, MissionPhase.PERCHED,
                 MissionPhase.WAIT, MissionPhase.RECOVERY,
                 MissionPhase.TAKEOFF, MissionPhase.LAND, MissionPhase.DONE]
        kinds = [EventKind.POSITION_CONVERGED, EventKind.POSITION_CONVERGED,
                 EventKind.GRASPER_ENGAGED, EventKind.VELOCITIES_ZERO,
                 EventKind.WAIT_ELAPSED, EventKind.RECOIL_COMPLETE,
                 EventKind.POSITION_CONVERGED, EventKind.LANDED]
        for src, kind, dst in zip(order, kinds, order[1:]):
            assert TRANSITIONS[(src, kind)] is dst
            assert next_phase(src, kind) is dst

    def test_slip_and_timeout_fail_from_any_live_phase(self):
        for phase in MissionPhase:
            if phase in TERMINAL_PHASES:
                continue
            assert next_phase(phase, EventKind.SLIP_DETECTED) is MissionPhase.FAILED
            assert next_phase(phase, EventKind.TIMEOUT) is MissionPhase.FAILED

    def test_terminal_phases_absorb_every_event(self):
        for phase in TERMINAL_PHASES:
            for kind in EventKind:
                assert next_phase(phase, kind) is None

    def test_inapplicable_events_return_none(self):
        assert next_phase(MissionPhase.APPROACH, EventKind.LANDED) is None
        assert next_phase(MissionPhase.WAIT, EventKind.GRASPER_ENGAGED) is None


class TestTimeouts:
    def test_defaults(self):
        p = make_params()
        for phase, limit in DEFAULT_TIMEOUTS.items():
            assert p.timeout_for(phase) == limit

    def test_wait_timeout_tracks_the_wait_time(self):
        assert make_params(wait_time=2.0).timeout_for(MissionPhase.WAIT) == 7.0
        assert make_params(wait_time=4.0).timeout_for(MissionPhase.WAIT) == 9.0

    def test_explicit_override_wins(self):
        p = make_params(timeouts={MissionPhase.DESCENT: 3.0})
        assert p.timeout_for(MissionPhase.DESCENT) == 3.0
        assert p.timeout_for(MissionPhase.HOVER) == DEFAULT_TIMEOUTS[MissionPhase.HOVER]


class TestFullWalk:
    def test_scripted_flight_reaches_done_and_replays(self):
        params = make_params()
        mission = initial_state(params)
        assert mission.phase is MissionPhase.APPROACH

        vehicle = at_hover(params)
        grasper = GrasperState()
        log = []

        def advance(dt, veh, gr, **kw):
            nonlocal mission
            res = step(mission, veh, gr, dt, **kw)
            assert len(res.events) <= 1      # at most one transition per call
            mission = res.state
            log.extend(res.events)
            return res

        res = advance(0.1, vehicle, grasper)
        assert mission.phase is MissionPhase.HOVER
        assert np.allclose(res.setpoint.position, params.hover_point)
        assert res.motors_on and not res.recoil

        advance(0.1, vehicle, grasper)        # dwell too short
        assert mission.phase is MissionPhase.HOVER
        res = advance(0.5, vehicle, grasper)  # dwell satisfied
        assert mission.phase is MissionPhase.DESCENT
        assert list(res.setpoint.position_mask) == [True, True, False]
        assert res.setpoint.velocity[2] == pytest.approx(
            math.sqrt(2.0 * GRAVITY * 0.30), rel=1e-12)

        grasper.mode = GrasperMode.CURLED
        grasper.engaged_object = "perch-top"
        res = advance(0.1, vehicle, grasper)
        assert mission.phase is MissionPhase.PERCHED
        assert res.setpoint is None and not res.motors_on

        res = advance(0.1, vehicle, grasper)  # already stationary
        assert mission.phase is MissionPhase.WAIT
        assert res.setpoint is None and not res.motors_on

        res = advance(2.5, vehicle, grasper)  # wait_time elapsed
        assert mission.phase is MissionPhase.RECOVERY
        assert res.recoil and res.motors_on
        assert np.allclose(res.setpoint.position, params.hover_point)

        grasper.mode = GrasperMode.STRAIGHT
        grasper.engaged_object = None
        advance(0.1, vehicle, grasper)
        assert mission.phase is MissionPhase.TAKEOFF

        res = advance(0.1, vehicle, grasper)  # back at the hover point
        assert mission.phase is MissionPhase.LAND
        assert np.allclose(res.setpoint.position[:2], params.hover_point[:2])
        assert res.setpoint.velocity[2] == params.land_speed

        grounded = RigidBodyState(x=np.array([0.0, 0.0, -0.01]))
        advance(0.1, grounded, grasper)
        assert mission.phase is MissionPhase.DONE

        kinds = [ev.kind for ev in log]
        assert kinds == [EventKind.POSITION_CONVERGED,
                         EventKind.POSITION_CONVERGED,
                         EventKind.GRASPER_ENGAGED,
                         EventKind.VELOCITIES_ZERO,
                         EventKind.WAIT_ELAPSED,
                         EventKind.RECOIL_COMPLETE,
                         EventKind.POSITION_CONVERGED,
                         EventKind.LANDED]
        assert replay(log) is MissionPhase.DONE
        stamps = [ev.timestamp for ev in log]
        assert stamps == sorted(stamps)

    def test_land_xy_override_steers_the_landing_spot(self):
        params = make_params(land_xy=(0.6, 0.0))
        mission = initial_state(params)
        mission.phase = MissionPhase.LAND
        res = step(mission, at_hover(params), GrasperState(), 0.1)
        assert np.allclose(res.setpoint.position[:2], [0.6, 0.0])


class TestGuards:
    def test_hover_requires_both_dwell_and_convergence(self):
        params = make_params()
        mission = initial_state(params)
        mission = step(mission, at_hover(params), GrasperState(), 0.1).state
        assert mission.phase is MissionPhase.HOVER
        # Converged but not settled: nothing fires.
        res = step(mission, at_hover(params), GrasperState(), 0.3)
        assert res.state.phase is MissionPhase.HOVER
        # Settled but far away: nothing fires either.
        far = RigidBodyState(x=params.hover_point + np.array([0.3, 0.0, 0.0]))
        m2 = step(res.state, far, GrasperState(), 1.0).state
        assert m2.phase is MissionPhase.HOVER

    def test_engagement_needs_a_held_object_not_just_curled_fingers(self):
        params = make_params()
        mission = initial_state(params)
        mission = step(mission, at_hover(params), GrasperState(), 0.1).state
        mission = step(mission, at_hover(params), GrasperState(), 0.6).state
        assert mission.phase is MissionPhase.DESCENT
        fist = GrasperState(mode=GrasperMode.CURLED, engaged_object=None)
        res = step(mission, at_hover(params), fist, 0.1)
        assert res.state.phase is MissionPhase.DESCENT
        assert res.events == []

    def test_unconverged_approach_times_out_into_failed(self):
        params = make_params()
        mission = initial_state(params)
        far = RigidBodyState(x=params.hover_point + np.array([1.0, 0.0, 0.0]))
        res = step(mission, far, GrasperState(), 15.5)
        assert res.state.phase is MissionPhase.FAILED
        assert res.events[0].kind is EventKind.TIMEOUT
        assert not res.motors_on and res.setpoint is None

    def test_convergence_exactly_at_the_deadline_still_progresses(self):
        params = make_params()
        mission = initial_state(params)
        res = step(mission, at_hover(params), GrasperState(), 15.5)
        assert res.state.phase is MissionPhase.HOVER
        assert res.events[0].kind is EventKind.POSITION_CONVERGED

    def test_slip_fails_the_mission_from_descent(self):
        params = make_params()
        mission = initial_state(params)
        mission = step(mission, at_hover(params), GrasperState(), 0.1).state
        mission = step(mission, at_hover(params), GrasperState(), 0.6).state
        res = step(mission, at_hover(params), GrasperState(), 0.1, slip=True)
        assert res.state.phase is MissionPhase.FAILED
        assert res.events[0].kind is EventKind.SLIP_DETECTED

    def test_terminal_phase_absorbs_everything(self):
        params = make_params()
        mission = initial_state(params)
        mission.phase = MissionPhase.DONE
        res = step(mission, at_hover(params), GrasperState(), 1.0, slip=True)
        assert res.state.phase is MissionPhase.DONE
        assert res.events == []

    def test_dt_must_be_positive(self):
        mission = initial_state(make_params())
        with pytest.raises(ValueError):
            step(mission, at_hover(mission.params), GrasperState(), 0.0)


class TestManualRecovery:
    def make_waiting(self, **kw):
        params = make_params(recovery_mode="manual", **kw)
        mission = initial_state(params)
        mission.phase = MissionPhase.WAIT
        return params, mission

    def test_waits_for_the_operator(self):
        params, mission = self.make_waiting()
        veh = at_hover(params)
        for _ in range(3):
            res = step(mission, veh, GrasperState(), 1.0)
            mission = res.state
            assert mission.phase is MissionPhase.WAIT
        res = step(mission, veh, GrasperState(), 1.0, manual_recover=True)
        assert res.state.phase is MissionPhase.RECOVERY
        assert res.events[0].kind is EventKind.WAIT_ELAPSED

    def test_operator_silence_times_out(self):
        params, mission = self.make_waiting(wait_time=2.0)
        res = step(mission, at_hover(params), GrasperState(), 7.5)
        assert res.state.phase is MissionPhase.FAILED


class TestDescentSpeed:
    def test_reference_comes_from_the_grasper_spec(self):
        assert descent_velocity(GrasperSpec.three_finger()) == pytest.approx(
            math.sqrt(2.0 * GRAVITY * 0.30), rel=1e-12)
        assert descent_velocity(GrasperSpec.two_finger()) == pytest.approx(
            math.sqrt(2.0 * GRAVITY * 0.20), rel=1e-12)

    def test_two_finger_spec_lowers_the_descent_setpoint(self):
        params = make_params()
        mission = initial_state(params)
        mission.phase = MissionPhase.DESCENT
        res = step(mission, at_hover(params), GrasperState(), 0.01,
                   spec=GrasperSpec.two_finger())
        assert res.setpoint.velocity[2] == pytest.approx(
            math.sqrt(2.0 * GRAVITY * 0.20), rel=1e-12)

    def test_explicit_descent_speed_overrides(self):
        params = make_params(descent_speed=1.0)
        mission = initial_state(params)
        mission.phase = MissionPhase.DESCENT
        res = step(mission, at_hover(params), GrasperState(), 0.01)
        assert res.setpoint.velocity[2] == 1.0


class TestReplay:
    def test_inapplicable_event_is_rejected(self):
        from softquad.mission import MissionEvent
        bad = MissionEvent(0.0, EventKind.LANDED, MissionPhase.APPROACH,
                           MissionPhase.DONE)
        with pytest.raises(ValueError):
            replay([bad])


class TestParamsValidation:
    def test_target_shape(self):
        with pytest.raises(ValueError):
            MissionParams(target=np.zeros(2))

    def test_tolerances_positive(self):
        with pytest.raises(ValueError):
            make_params(position_tolerance=0.0)
        with pytest.raises(ValueError):
            make_params(velocity_tolerance=-0.1)

    def test_recovery_mode_checked(self):
        with pytest.raises(ValueError):
            make_params(recovery_mode="assisted")

    def test_hover_point_sits_above_the_target(self):
        p = make_params(hover_offset=0.3)
        assert np.allclose(p.hover_point, TARGET - [0.0, 0.0, 0.3])
        assert -p.hover_point[2] == pytest.approx(0.85)  # altitude up
