"""Compliant normal-contact law, drop/wall impact integration, and the
parameter calibration against measured impact rows."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softquad.config import default_calibration, load_targets, packaged_targets_path
from softquad.contact import (BOTTOM_OUT_RATIO, CalibratedContact,
                              CalibrationTarget, ContactModel,
                              UnderdeterminedTargetsError, calibrate_contact,
                              contact_force, drop_test, energy_audit,
                              group_key, impact_speed_from_height,
                              simulate_impact, wall_collision)
from softquad.rigidbody import GRAVITY

CAL = default_calibration()


class TestForceLaw:
    model = ContactModel(stiffness=2000.0, damping=50.0, exponent=1.2,
                         max_compression=0.10)

    def test_zero_at_zero_penetration(self):
        assert contact_force(0.0, 5.0, self.model) == 0.0

    def test_negative_penetration_rejected(self):
        with pytest.raises(ValueError):
            contact_force(-1e-6, 0.0, self.model)

    def test_static_equilibrium_depth(self):
        weight = 1.14 * GRAVITY
        depth = (weight / self.model.stiffness) ** (1.0 / self.model.exponent)
        assert contact_force(depth, 0.0, self.model) == pytest.approx(
            weight, rel=1e-12)

    def test_pure_spring_at_zero_rate(self):
        d = 0.02
        expected = self.model.stiffness * d ** self.model.exponent
        assert contact_force(d, 0.0, self.model) == pytest.approx(
            expected, rel=1e-12)

    def test_compression_rate_stiffens_opening_softens(self):
        d = 0.02
        still = contact_force(d, 0.0, self.model)
        assert contact_force(d, 1.0, self.model) > still
        assert contact_force(d, -0.5, self.model) < still

    def test_force_never_negative(self):
        assert contact_force(0.02, -100.0, self.model) == 0.0

    def test_bottom_out_spring_engages_past_full_collapse(self):
        over = self.model.max_compression + 0.01
        base = self.model.stiffness * over ** self.model.exponent
        expected = base + BOTTOM_OUT_RATIO * self.model.stiffness * 0.01
        assert contact_force(over, 0.0, self.model) == pytest.approx(
            expected, rel=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            ContactModel(stiffness=0.0, damping=1.0)
        with pytest.raises(ValueError):
            ContactModel(stiffness=1.0, damping=-1.0)
        with pytest.raises(ValueError):
            ContactModel(stiffness=1.0, damping=1.0, exponent=0.9)
        with pytest.raises(ValueError):
            CalibratedContact(ContactModel(1.0, 1.0), effective_mass=0.0)


class TestFreeFallSpeed:
    def test_quarter_metre(self):
        assert impact_speed_from_height(0.25) == pytest.approx(
            math.sqrt(2.0 * GRAVITY * 0.25), rel=1e-12)
        assert impact_speed_from_height(0.25) == pytest.approx(2.21, abs=0.01)

    def test_half_metre(self):
        assert impact_speed_from_height(0.50) == pytest.approx(3.13, abs=0.01)

    def test_nonpositive_height_rejected(self):
        for h in (0.0, -0.1):
            with pytest.raises(ValueError):
                impact_speed_from_height(h)


class TestGroupKey:
    def test_canonical_names(self):
        assert group_key("rigid", "plus") == "rigid-plus"
        assert group_key("rigid", "x", 207.0) == "rigid-x"
        assert group_key("soft", "plus", 207.0) == "soft-207-plus"
        assert group_key("soft", "x", 69.0) == "soft-69-x"

    def test_validation(self):
        with pytest.raises(ValueError):
            group_key("foam", "plus")
        with pytest.raises(ValueError):
            group_key("soft", "cross", 69.0)
        with pytest.raises(ValueError):
            group_key("soft", "plus")  # soft frame needs a pressure


class TestPackagedCalibration:
    def test_all_eight_groups_present(self):
        expected = {"rigid-plus", "rigid-x",
                    "soft-69-plus", "soft-69-x",
                    "soft-138-plus", "soft-138-x",
                    "soft-207-plus", "soft-207-x"}
        assert set(CAL) == expected

    def test_rigid_plus_drop_reproduces_its_targets(self):
        m = drop_test("rigid", "plus", 0.25, CAL)
        assert m.impact_time == pytest.approx(0.008, rel=0.02)
        assert m.peak_force == pytest.approx(430.0, rel=0.02)
        assert m.impact_speed == pytest.approx(2.2147, rel=0.005)

    def test_soft_207_plus_drop_reproduces_its_target(self):
        m = drop_test("soft", "plus", 0.25, CAL, pressure_kpa=207.0)
        assert m.impact_time == pytest.approx(0.0723, rel=0.30)

    def test_soft_207_x_half_metre(self):
        m = drop_test("soft", "x", 0.50, CAL, pressure_kpa=207.0)
        assert m.impact_time == pytest.approx(0.1084, rel=0.01)
        assert m.impact_speed == pytest.approx(3.1321, rel=0.005)

    def test_soft_impact_lasts_much_longer_with_far_lower_force(self):
        rigid = drop_test("rigid", "plus", 0.25, CAL)
        soft = drop_test("soft", "plus", 0.25, CAL, pressure_kpa=207.0)
        assert soft.impact_time / rigid.impact_time >= 8.0
        assert soft.peak_force / rigid.peak_force <= 1.0 / 3.0

    def test_unknown_group_lists_available(self):
        with pytest.raises(KeyError, match="soft-80-plus"):
            drop_test("soft", "plus", 0.25, CAL, pressure_kpa=80.0)
        with pytest.raises(KeyError, match="available"):
            drop_test("soft", "plus", 0.25, CAL, pressure_kpa=80.0)


class TestWallCollision:
    def test_zero_speed_returns_zero_metrics(self):
        m = wall_collision(0.0, CAL["soft-207-plus"].model, 0.9)
        assert m.peak_force == 0.0
        assert m.rebound_speed == 0.0
        assert m.restitution == 0.0

    def test_flight_configuration_soaks_a_two_metre_per_second_hit(self):
        cal = CAL["soft-207-plus"]
        m = wall_collision(2.0, cal.model, cal.effective_mass)
        assert m.rebound_speed <= 1.5
        assert m.rebound_speed > 0.0
        assert m.restitution <= 0.75001

    def test_negative_speed_rejected(self):
        with pytest.raises(ValueError):
            wall_collision(-1.0, CAL["soft-207-plus"].model, 0.9)


class TestEnergyAccounting:
    def test_damping_work_matches_kinetic_loss(self):
        cal = CAL["soft-207-plus"]
        m, series = wall_collision(2.0, cal.model, cal.effective_mass,
                                   record=True)
        audit = energy_audit(series, cal.model, cal.effective_mass)
        assert audit["damping_work"] == pytest.approx(
            audit["kinetic_loss"], rel=1e-3)
        ke_in = 0.5 * cal.effective_mass * 2.0 ** 2
        assert abs(audit["elastic_residual"]) < 1e-3 * ke_in

    def test_every_packaged_group_is_passive_on_a_wall_hit(self):
        for key, cal in CAL.items():
            for speed in (0.5, 1.0, 2.0, 3.0):
                m = wall_collision(speed, cal.model, cal.effective_mass)
                assert m.rebound_speed <= speed + 1e-9, key


@settings(max_examples=40, deadline=None)
@given(
    stiffness=st.floats(min_value=500.0, max_value=2e5),
    damping=st.floats(min_value=0.0, max_value=5e4),
    exponent=st.floats(min_value=1.0, max_value=1.5),
    speed=st.floats(min_value=0.05, max_value=4.0),
)
def test_wall_impacts_never_return_more_speed_than_they_received(
        stiffness, damping, exponent, speed):
    model = ContactModel(stiffness=stiffness, damping=damping,
                         exponent=exponent, max_compression=0.12)
    m = wall_collision(speed, model, 0.9, dt=1e-5)
    assert m.rebound_speed <= speed * (1.0 + 1e-6)


class TestImpactTrends:
    def test_restitution_falls_as_damping_rises(self):
        rests = []
        for c in (0.0, 50.0, 200.0, 800.0):
            model = ContactModel(stiffness=2000.0, damping=c)
            rests.append(wall_collision(1.5, model, 0.9).restitution)
        assert rests[0] == pytest.approx(1.0, abs=1e-3)  # lossless spring
        assert all(b < a for a, b in zip(rests, rests[1:]))
        assert all(0.0 <= r <= 1.0 + 1e-6 for r in rests)

    def test_contact_time_falls_as_stiffness_rises(self):
        times = []
        for k in (500.0, 2000.0, 8000.0, 32000.0):
            model = ContactModel(stiffness=k, damping=20.0)
            times.append(wall_collision(1.5, model, 0.9, dt=5e-6).impact_time)
        assert all(b < a for a, b in zip(times, times[1:]))

    def test_linear_undamped_half_period(self):
        # An undamped linear spring releases after half its natural period.
        k, m = 3000.0, 0.9
        model = ContactModel(stiffness=k, damping=0.0)
        metrics = wall_collision(1.0, model, m, dt=1e-6)
        assert metrics.impact_time == pytest.approx(
            math.pi * math.sqrt(m / k), rel=1e-3)

    def test_settling_impact_caps_out_with_zero_rebound(self):
        # Overdamped drop under gravity: the body never separates.
        model = ContactModel(stiffness=500.0, damping=5e4)
        metrics = simulate_impact(model, 1.0, 0.9, t_cap=0.05)
        assert metrics.rebound_speed == 0.0


class TestCalibration:
    def test_packaged_fit_matches_packaged_defaults(self, packaged_fits):
        for key, fit in packaged_fits.items():
            packaged = CAL[key]
            assert fit.calibrated.model.stiffness == pytest.approx(
                packaged.model.stiffness, rel=1e-9), key
            assert fit.calibrated.model.damping == pytest.approx(
                packaged.model.damping, rel=1e-9), key
            assert fit.calibrated.effective_mass == pytest.approx(
                packaged.effective_mass, rel=1e-9), key

    def test_fit_quality_bound_holds_for_most_groups(self, packaged_fits):
        for key, fit in packaged_fits.items():
            if key == "soft-138-x":
                continue  # covered by the xfail below
            assert fit.max_abs_residual <= 0.30, (key, fit.residuals)

    @pytest.mark.xfail(
        reason="the two 138 kPa diagonal-configuration rows report a longer "
        "impact from the lower drop, which no passive spring-damper can "
        "reproduce; the least-squares compromise leaves ~37% on one row "
        "(see the decisions ledger)", strict=True)
    def test_fit_quality_bound_for_the_inverted_group(self, packaged_fits):
        assert packaged_fits["soft-138-x"].max_abs_residual <= 0.30

    def test_refit_on_own_output_is_near_exact(self):
        # Simulate rows with a known model, then ask the calibrator to
        # recover it: residuals should collapse to ~0.
        for key in ("soft-207-x", "soft-69-plus"):
            cal = CAL[key]
            frame, pressure, config = "soft", float(key.split("-")[1]), key.split("-")[2]
            rows = []
            for h in (0.25, 0.50):
                m = drop_test(frame, config, h, CAL, pressure_kpa=pressure)
                rows.append(CalibrationTarget(
                    frame=frame, config=config, pressure_kpa=pressure,
                    kind="drop", height=h, impact_time=m.impact_time))
            fits = calibrate_contact(rows)
            assert fits[key].max_abs_residual < 5e-3, key

    def test_empty_targets_raise(self):
        with pytest.raises(UnderdeterminedTargetsError,
                           match="no calibration targets"):
            calibrate_contact([])

    def test_single_quantity_group_raises_with_its_name(self):
        lone = CalibrationTarget(frame="soft", config="x", pressure_kpa=69.0,
                                 kind="drop", height=0.25, impact_time=0.1)
        with pytest.raises(UnderdeterminedTargetsError, match="soft-69-x"):
            calibrate_contact([lone])

    def test_packaged_targets_cover_all_groups(self):
        targets = load_targets(packaged_targets_path())
        assert len(targets) == 16
        keys = {t.key for t in targets}
        assert keys == set(CAL)

    def test_target_row_validation(self):
        with pytest.raises(ValueError):
            CalibrationTarget(frame="rigid", config="plus", kind="drop",
                              height=0.25)  # no measured quantity
        with pytest.raises(ValueError):
            CalibrationTarget(frame="rigid", config="plus", kind="wall",
                              speed=2.0)  # no rebound target
        with pytest.raises(ValueError):
            CalibrationTarget(frame="rigid", config="plus", kind="bounce",
                              height=0.25, impact_time=0.01)
