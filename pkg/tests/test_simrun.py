"""End-to-end perch flights: seeded determinism, the weld invariant, and
the soft-versus-rigid engagement outcome."""

import numpy as np
import pytest

from softquad.airframe import AirframeModel
from softquad.config import default_calibration
from softquad.grasper import GrasperSpec
from softquad.mission import MissionParams, MissionPhase, replay
from softquad.simrun import (PerchObject, PerchScenario, run_perch_batch,
                             run_perch_trial)

CAL = default_calibration()


def soft_scenario(**mission_kw):
    mission = MissionParams(target=np.array([0.0, 0.0, -0.55]),
                            land_xy=(0.6, 0.0), land_altitude=0.12,
                            **mission_kw)
    return PerchScenario(
        airframe=AirframeModel(pressure_kpa=207.0, config="plus"),
        contact=CAL["soft-207-plus"].model,
        grasper=GrasperSpec.three_finger(),
        mission=mission)


def rigid_scenario(**mission_kw):
    mission = MissionParams(target=np.array([0.0, 0.0, -0.55]),
                            land_xy=(0.6, 0.0), land_altitude=0.12,
                            **mission_kw)
    return PerchScenario(
        airframe=AirframeModel(rigid=True, config="plus"),
        contact=CAL["rigid-plus"].model,
        grasper=GrasperSpec.three_finger(),
        mission=mission)


@pytest.fixture(scope="module")
def soft_trial():
    return run_perch_trial(soft_scenario(), 1000, record=True)


class TestSoftFlight:
    def test_reaches_done_through_the_full_phase_ladder(self, soft_trial):
        assert soft_trial.success
        assert soft_trial.final_phase is MissionPhase.DONE
        assert soft_trial.phase_sequence == [
            MissionPhase.APPROACH, MissionPhase.HOVER, MissionPhase.DESCENT,
            MissionPhase.PERCHED, MissionPhase.WAIT, MissionPhase.RECOVERY,
            MissionPhase.TAKEOFF, MissionPhase.LAND, MissionPhase.DONE]
        assert soft_trial.elapsed < 60.0

    def test_event_log_replays_to_the_final_phase(self, soft_trial):
        assert replay(soft_trial.events) is soft_trial.final_phase
        stamps = [ev.timestamp for ev in soft_trial.events]
        assert stamps == sorted(stamps)

    def test_weld_holds_the_vehicle_stationary(self, soft_trial):
        held = [r for r in soft_trial.rows
                if r.mission_phase in ("Perched", "Wait")]
        assert len(held) > 10
        xs = np.array([r.x for r in held])
        assert np.abs(xs - xs[0]).max() < 1e-9
        assert all(np.linalg.norm(r.v) == 0.0 for r in held)
        assert all(r.grasper_mode == "curled" for r in held)

    def test_perch_placement_noise_stays_in_bounds(self, soft_trial):
        assert np.all(np.abs(soft_trial.perch_offset) <= 0.02)

    def test_log_times_strictly_increase_on_a_regular_cadence(self, soft_trial):
        t = np.array([r.t for r in soft_trial.rows])
        assert np.all(np.diff(t) > 0.0)
        assert np.median(np.diff(t)) == pytest.approx(0.01, rel=0.2)

    def test_touchdown_forces_stay_within_grasp_capacity(self, soft_trial):
        # 55 mm three-finger capacity is 176.43 N; the compliant frame
        # must engage far below it.
        peak = max(r.contact_force for r in soft_trial.rows)
        assert 0.0 < peak < 176.43


class TestDeterminism:
    def test_identical_seeds_reproduce_the_run_bit_for_bit(self, soft_trial):
        again = run_perch_trial(soft_scenario(), 1000, record=True)
        assert len(again.rows) == len(soft_trial.rows)
        for a, b in zip(again.rows, soft_trial.rows):
            assert a.t == b.t
            assert np.array_equal(a.x, b.x)
            assert np.array_equal(a.v, b.v)
            assert np.array_equal(a.quat, b.quat)
            assert np.array_equal(a.thrusts, b.thrusts)
            assert a.contact_force == b.contact_force
            assert a.mission_phase == b.mission_phase
        assert [ev.timestamp for ev in again.events] == \
               [ev.timestamp for ev in soft_trial.events]
        assert np.array_equal(again.perch_offset, soft_trial.perch_offset)

    def test_different_seed_draws_a_different_perch_offset(self, soft_trial):
        other = run_perch_trial(soft_scenario(), 1001, record=False)
        assert not np.array_equal(other.perch_offset,
                                  soft_trial.perch_offset)


class TestRigidFlight:
    def test_rigid_frame_bounces_and_fails(self):
        scn = rigid_scenario(timeouts={MissionPhase.DESCENT: 4.0})
        trial = run_perch_trial(scn, 1000, record=True)
        assert not trial.success
        assert trial.final_phase is MissionPhase.FAILED
        # It reached the descent, hit the perch, and never engaged.
        phases = {r.mission_phase for r in trial.rows}
        assert "Descent" in phases
        assert "Perched" not in phases
        assert max(r.contact_force for r in trial.rows) > 0.0


class TestBatch:
    def test_seeds_are_consecutive_from_the_base(self):
        batch = run_perch_batch(soft_scenario(), 2, 1000, record=False)
        assert [tr.seed for tr in batch.trials] == [1000, 1001]
        assert batch.successes == 2
        assert batch.phases == [MissionPhase.DONE, MissionPhase.DONE]
        assert all(tr.rows == [] for tr in batch.trials)

    def test_zero_trials_is_an_empty_batch(self):
        batch = run_perch_batch(soft_scenario(), 0, 1000)
        assert batch.trials == []
        assert batch.successes == 0

    def test_negative_trials_rejected(self):
        with pytest.raises(ValueError):
            run_perch_batch(soft_scenario(), -1, 1000)


class TestScenarioValidation:
    def test_default_start_sits_back_from_the_hover_point(self):
        scn = soft_scenario()
        assert np.allclose(scn.start,
                           scn.mission.hover_point + [-0.8, 0.0, 0.0])

    def test_time_steps_must_be_positive(self):
        with pytest.raises(ValueError):
            soft = soft_scenario()
            PerchScenario(airframe=soft.airframe, contact=soft.contact,
                          grasper=soft.grasper, mission=soft.mission,
                          dt_free=0.0)

    def test_negative_noise_rejected(self):
        soft = soft_scenario()
        with pytest.raises(ValueError):
            PerchScenario(airframe=soft.airframe, contact=soft.contact,
                          grasper=soft.grasper, mission=soft.mission,
                          lateral_noise=-0.01)

    def test_perch_object_validation(self):
        with pytest.raises(ValueError):
            PerchObject(patch_radius=0.0)
        with pytest.raises(ValueError):
            PerchObject(diameter_mm=-55.0)
