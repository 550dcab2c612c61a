"""Pneumatic-arm compliance model.

Each motor arm is an inflatable cantilever.  Under a motor thrust F applied
at the free end the arm takes a tip deflection and tip rotation from linear
cantilever theory,

    y     = F L^3 / (3 E I)         tip displacement
    theta = F L^2 / (2 E I)         tip rotation
    I     = (pi/4) r^4              area moment of a solid circular section

with the identity theta = (3/2) * y / L between them.  The effective
modulus E depends on inflation pressure and is calibrated from two bench
anchors; between the anchors E is linearly interpolated, outside them the
model refuses to extrapolate.

The tip rotation tilts the thrust vector, so only F*cos(theta) of a
commanded thrust acts along the body vertical; the in-plane components of
the four tilted thrust vectors leave a net lateral drift force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ARM_LENGTH = 0.18    # m, hub-to-motor distance
BEAM_RADIUS = 0.015  # m, arm cross-section radius
MAX_SMALL_ANGLE = math.radians(20.0)  # beyond this the linear theory is suspect

# Calibration anchors: (pressure kPa, thrust N, observed tip response).
# At 207 kPa a 10 N tip load displaces the tip 12 mm; at 69 kPa the same
# load rotates the tip 14.93 degrees.
_ANCHOR_HIGH = (207.0, 10.0, 0.012)            # pressure, F, tip displacement m
_ANCHOR_LOW = (69.0, 10.0, math.radians(14.93))  # pressure, F, tip rotation rad


class OutOfCalibrationError(ValueError):
    """Pressure lies outside the calibrated modulus table."""


def second_moment(radius: float) -> float:
    return 0.25 * math.pi * radius ** 4


def modulus_from_tip_displacement(force: float, disp: float,
                                  length: float = ARM_LENGTH,
                                  radius: float = BEAM_RADIUS) -> float:
    """Invert the cantilever displacement relation for E."""
    return force * length ** 3 / (3.0 * disp * second_moment(radius))


def modulus_from_tip_rotation(force: float, rot: float,
                              length: float = ARM_LENGTH,
                              radius: float = BEAM_RADIUS) -> float:
    """Invert the cantilever rotation relation for E."""
    return force * length ** 2 / (2.0 * rot * second_moment(radius))


def default_modulus_table() -> list[tuple[float, float]]:
    """(pressure kPa, modulus Pa) rows from the two bench anchors."""
    p_lo, f_lo, th_lo = _ANCHOR_LOW
    p_hi, f_hi, y_hi = _ANCHOR_HIGH
    return [
        (p_lo, modulus_from_tip_rotation(f_lo, th_lo)),
        (p_hi, modulus_from_tip_displacement(f_hi, y_hi)),
    ]


@dataclass(frozen=True)
class DeflectionResult:
    displacement: float      # m, tip deflection transverse to the arm
    rotation: float          # rad, tip rotation
    thrust_factor: float     # cos(rotation), effective/commanded thrust
    small_angle_exceeded: bool


@dataclass
class AirframeModel:
    """Geometry plus pressure-dependent stiffness of the four arms.

    `config` selects the motor layout used elsewhere ('plus' or 'x');
    `rigid=True` bypasses the compliance model (zero deflection).
    """

    pressure_kpa: float = 207.0
    config: str = "plus"
    arm_length: float = ARM_LENGTH
    beam_radius: float = BEAM_RADIUS
    modulus_table: list[tuple[float, float]] = field(default_factory=default_modulus_table)
    rigid: bool = False

    def __post_init__(self):
        if self.config not in ("plus", "x"):
            raise ValueError("config must be 'plus' or 'x'")
        if self.arm_length <= 0.0 or self.beam_radius <= 0.0:
            raise ValueError("arm geometry must be positive")
        table = sorted((float(p), float(e)) for p, e in self.modulus_table)
        if len(table) < 2 and not self.rigid:
            raise ValueError("modulus table needs at least two pressure points")
        if any(e <= 0.0 for _, e in table):
            raise ValueError("modulus values must be positive")
        if any(abs(table[i + 1][0] - table[i][0]) < 1e-9 for i in range(len(table) - 1)):
            raise ValueError("modulus table has duplicate pressure points")
        self.modulus_table = table
        self._modulus_cache: float | None = None
        self._bending_cache: float | None = None

    @property
    def second_moment(self) -> float:
        return second_moment(self.beam_radius)

    def modulus(self) -> float:
        """Effective modulus at the configured pressure (Pa), linear in
        pressure between table rows; refuses to extrapolate."""
        if self._modulus_cache is not None:
            return self._modulus_cache
        table = self.modulus_table
        p = self.pressure_kpa
        if p < table[0][0] - 1e-9 or p > table[-1][0] + 1e-9:
            raise OutOfCalibrationError(
                f"pressure {p:g} kPa outside calibrated range "
                f"[{table[0][0]:g}, {table[-1][0]:g}] kPa")
        pressures = [row[0] for row in table]
        moduli = [row[1] for row in table]
        self._modulus_cache = float(np.interp(p, pressures, moduli))
        return self._modulus_cache

    def bending_coefficient(self) -> float:
        """L^2 / (2 E I): tip rotation per newton of tip load."""
        if self._bending_cache is None:
            self._bending_cache = self.arm_length ** 2 / (
                2.0 * self.modulus() * self.second_moment)
        return self._bending_cache

    def tip_deflection(self, force: float) -> DeflectionResult:
        """Linear cantilever response of one arm to tip load `force` (N >= 0)."""
        if force < 0.0:
            raise ValueError("thrust must be non-negative")
        if self.rigid:
            return DeflectionResult(0.0, 0.0, 1.0, False)
        rot = self.bending_coefficient() * force
        disp = rot * (2.0 * self.arm_length / 3.0)
        return DeflectionResult(disp, rot, math.cos(rot), rot > MAX_SMALL_ANGLE)

    def effective_thrust(self, force: float) -> float:
        """Vertical component F*cos(theta(F)) of a commanded thrust."""
        return force * self.tip_deflection(force).thrust_factor


def drift_force(thrusts: np.ndarray, rotations: np.ndarray) -> np.ndarray:
    """Net in-plane force from the four tilted thrust vectors (body frame).

    Arms 1..4 lie on +x, -y, -x, +y (indices 0..3); each bent arm tilts its
    thrust inboard, so opposite arms fight each other and only the
    imbalance survives:

        dfx = F1*sin(th1) - F3*sin(th3)
        dfy = F2*sin(th2) - F4*sin(th4)
    """
    f = np.asarray(thrusts, dtype=float)
    th = np.asarray(rotations, dtype=float)
    if f.shape != (4,) or th.shape != (4,):
        raise ValueError("need four thrusts and four rotations")
    s = f * np.sin(th)
    return np.array([s[0] - s[2], s[1] - s[3], 0.0])


def worst_case_drift(rot_lo: float, rot_hi: float,
                     thrust_lo: float, thrust_hi: float) -> float:
    """Largest per-axis |drift| over independent per-arm ranges.

    F*sin(theta) is monotone in both arguments over [0, pi/2], so the
    extreme sits at a corner: one arm at (F_hi, th_hi), its opposite at
    (F_lo, th_lo).
    """
    if not (0.0 <= rot_lo <= rot_hi < math.pi / 2.0):
        raise ValueError("rotation range must lie in [0, pi/2)")
    if not (0.0 <= thrust_lo <= thrust_hi):
        raise ValueError("thrust range must be ordered and non-negative")
    return thrust_hi * math.sin(rot_hi) - thrust_lo * math.sin(rot_lo)
