"""Compliant normal-contact model, drop/wall impact simulation, and the
least-squares calibration that fits per-frame parameter groups to measured
impact times and peak forces.

Force law (Hunt-Crossley family):

    F = k * d^n * (1 + (3c / 2k) * d_rate),   floored at F >= 0

with penetration d >= 0.  Beyond ``max_compression`` the structure has
fully collapsed and a much stiffer linear "bottom-out" spring engages on
the excess penetration.  The velocity-proportional term dissipates energy
while vanishing smoothly at zero penetration, so a full impact never
returns more energy than it received.

Impacts are reduced to a single vertical degree of freedom: a lumped
*effective mass* striking the surface at the free-fall speed.  Only part
of the structure decelerates with the instrumented chassis during the
short force spike — compliant mounts isolate the rest — so the effective
mass is a fitted fraction of the vehicle mass and is reported alongside
the force-law parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import least_squares

from .rigidbody import DEFAULT_MASS, GRAVITY

BOTTOM_OUT_RATIO = 50.0  # bottom-out spring stiffness as a multiple of k

# Effective masses assumed for target groups too small to identify their
# own (fewer than three rows); values follow the fully-determined sibling
# groups.  Not measured on hardware.
RIGID_EFFECTIVE_MASS = 0.50  # kg
SOFT_EFFECTIVE_MASS = 0.90   # kg

# Penetration at which the structure is fully collapsed and the chassis
# takes over.  Not measured; the soft figure sits below the arm's full
# geometric collapse range, the rigid figure is landing-gear-scale.
SOFT_MAX_COMPRESSION = 0.12  # m
RIGID_MAX_COMPRESSION = 0.05  # m


class UnderdeterminedTargetsError(ValueError):
    """A calibration group has too few target rows to pin its parameters."""


@dataclass(frozen=True)
class ContactModel:
    """Parameters of the compliant normal-force law."""
    stiffness: float                 # N/m^n
    damping: float                   # N*s/m^(n+1)
    exponent: float = 1.0            # dimensionless, >= 1
    max_compression: float = SOFT_MAX_COMPRESSION  # m

    def __post_init__(self):
        if self.stiffness <= 0.0:
            raise ValueError("stiffness must be positive")
        if self.damping < 0.0:
            raise ValueError("damping must be non-negative")
        if self.exponent < 1.0:
            raise ValueError("exponent must be >= 1")
        if self.max_compression <= 0.0:
            raise ValueError("max_compression must be positive")


@dataclass(frozen=True)
class CalibratedContact:
    """A fitted force law plus the lumped mass it was identified with."""
    model: ContactModel
    effective_mass: float  # kg

    def __post_init__(self):
        if self.effective_mass <= 0.0:
            raise ValueError("effective_mass must be positive")


def contact_force(penetration: float, rate: float, model: ContactModel) -> float:
    """Normal force for penetration (m, >= 0) and penetration rate (m/s,
    positive while compressing)."""
    if penetration < 0.0:
        raise ValueError("penetration must be non-negative")
    if penetration == 0.0:
        return 0.0
    k = model.stiffness
    f = k * penetration ** model.exponent \
        * (1.0 + (3.0 * model.damping / (2.0 * k)) * rate)
    if penetration > model.max_compression:
        f += BOTTOM_OUT_RATIO * k * (penetration - model.max_compression)
    return max(f, 0.0)


@dataclass(frozen=True)
class ImpactMetrics:
    """Summary of one simulated impact episode."""
    impact_time: float     # s, duration for which the normal force was > 0
    peak_force: float      # N
    peak_accel: float      # m/s^2, peak_force / effective mass
    rebound_speed: float   # m/s (0 when the body never separates)
    impact_speed: float    # m/s approach speed at first touch
    effective_mass: float  # kg, lumped mass used in the 1-DOF model

    @property
    def restitution(self) -> float:
        return self.rebound_speed / self.impact_speed if self.impact_speed > 0 else 0.0


@dataclass
class ImpactSeries:
    """Optional per-step record of an impact (for audits and plots)."""
    t: np.ndarray
    penetration: np.ndarray
    rate: np.ndarray
    force: np.ndarray


def simulate_impact(model: ContactModel, approach_speed: float, mass: float,
                    *, gravity: float = GRAVITY, dt: float = 2e-5,
                    t_cap: float = 0.6, record: bool = False):
    """Integrate the 1-DOF impact from first touch until separation.

    Starts at zero penetration with the given closing speed; classical
    RK4 at fixed dt.  Ends when the body separates (penetration back at
    zero while opening) or at ``t_cap`` for impacts that never rebound
    (the body settles; rebound_speed is then 0).

    Returns ImpactMetrics, or (ImpactMetrics, ImpactSeries) with record.
    """
    if approach_speed < 0.0:
        raise ValueError("approach speed must be non-negative")
    if mass <= 0.0 or dt <= 0.0:
        raise ValueError("mass and dt must be positive")

    k = model.stiffness
    n = model.exponent
    three_c_over_2k = 3.0 * model.damping / (2.0 * k)
    dmax = model.max_compression
    bk = BOTTOM_OUT_RATIO * k

    def force(d: float, dd: float) -> float:
        if d <= 0.0:
            return 0.0
        f = k * d ** n * (1.0 + three_c_over_2k * dd)
        if d > dmax:
            f += bk * (d - dmax)
        return f if f > 0.0 else 0.0

    d, dd = 0.0, approach_speed
    t = 0.0
    t_positive = 0.0
    f_peak = 0.0
    rebound = 0.0
    ts, ds, dds, fs = [], [], [], []

    while t < t_cap:
        f = force(d, dd)
        if record:
            ts.append(t)
            ds.append(d)
            dds.append(dd)
            fs.append(f)
        if f > 0.0:
            t_positive += dt
            if f > f_peak:
                f_peak = f
        if d <= 0.0 and dd < 0.0:
            rebound = -dd
            break
        # RK4 on (d, dd) with dd' = gravity - F/m
        a1 = gravity - force(d, dd) / mass
        d2, dd2 = d + 0.5 * dt * dd, dd + 0.5 * dt * a1
        a2 = gravity - force(d2, dd2) / mass
        d3, dd3 = d + 0.5 * dt * dd2, dd + 0.5 * dt * a2
        a3 = gravity - force(d3, dd3) / mass
        d4, dd4 = d + dt * dd3, dd + dt * a3
        a4 = gravity - force(d4, dd4) / mass
        d += dt / 6.0 * (dd + 2.0 * dd2 + 2.0 * dd3 + dd4)
        dd += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        t += dt

    metrics = ImpactMetrics(
        impact_time=t_positive, peak_force=f_peak,
        peak_accel=f_peak / mass, rebound_speed=rebound,
        impact_speed=approach_speed, effective_mass=mass)
    if record:
        series = ImpactSeries(np.array(ts), np.array(ds),
                              np.array(dds), np.array(fs))
        return metrics, series
    return metrics


def impact_speed_from_height(height: float, gravity: float = GRAVITY) -> float:
    """Free-fall closing speed sqrt(2*g*h) (air resistance neglected)."""
    if height <= 0.0:
        raise ValueError("drop height must be positive")
    return math.sqrt(2.0 * gravity * height)


def group_key(frame: str, config: str, pressure_kpa: float | None = None) -> str:
    """Canonical calibration-group key, e.g. 'rigid-plus', 'soft-207-x'."""
    if frame not in ("rigid", "soft"):
        raise ValueError("frame must be 'rigid' or 'soft'")
    if config not in ("plus", "x"):
        raise ValueError("config must be 'plus' or 'x'")
    if frame == "rigid":
        return f"rigid-{config}"
    if pressure_kpa is None:
        raise ValueError("soft frame needs an inflation pressure")
    return f"soft-{pressure_kpa:g}-{config}"


def drop_test(frame: str, config: str, height: float,
              calibration: Mapping[str, CalibratedContact],
              pressure_kpa: float | None = None, mass: float | None = None,
              *, dt: float | None = None, record: bool = False):
    """Simulate a vertical drop onto the ground with the calibrated law
    for (frame, config, pressure).  ``mass`` defaults to the group's
    fitted effective mass."""
    key = group_key(frame, config, pressure_kpa)
    if key not in calibration:
        raise KeyError(
            f"no calibrated contact group '{key}'; available: "
            f"{', '.join(sorted(calibration))}")
    cal = calibration[key]
    v0 = impact_speed_from_height(height)
    m = cal.effective_mass if mass is None else mass
    step = dt if dt is not None else (5e-6 if frame == "rigid" else 2e-5)
    return simulate_impact(cal.model, v0, m, dt=step, record=record)


def wall_collision(speed: float, model: ContactModel, mass: float,
                   *, dt: float = 2e-5, record: bool = False):
    """Head-on wall impact: same 1-DOF law with gravity absent (the wall
    normal is horizontal). Returns the rebound metrics."""
    if speed < 0.0:
        raise ValueError("approach speed must be non-negative")
    if speed == 0.0:
        zero = ImpactMetrics(0.0, 0.0, 0.0, 0.0, 0.0, mass)
        if record:
            return zero, ImpactSeries(*(np.zeros(0),) * 4)
        return zero
    return simulate_impact(model, speed, mass, gravity=0.0, dt=dt, record=record)


def energy_audit(series: ImpactSeries, model: ContactModel, mass: float) -> dict:
    """Energy bookkeeping along a recorded impact.

    Splits the applied force into its elastic part (position-only) and
    the remainder, and integrates each against the penetration rate.
    Over a full impact the elastic work nets out, so the remainder's work
    equals the kinetic-energy loss (gravity-free case).
    """
    k = model.stiffness
    n = model.exponent
    dmax = model.max_compression
    d = series.penetration
    elastic = k * np.maximum(d, 0.0) ** n
    over = np.maximum(d - dmax, 0.0)
    elastic = elastic + BOTTOM_OUT_RATIO * k * over
    non_elastic = series.force - elastic
    damping_work = float(np.trapezoid(non_elastic * series.rate, series.t))
    v_in = series.rate[0] if len(series.rate) else 0.0
    v_out = -series.rate[-1] if len(series.rate) else 0.0
    ke_loss = 0.5 * mass * (v_in ** 2 - max(v_out, 0.0) ** 2)
    return {"damping_work": damping_work, "kinetic_loss": ke_loss,
            "elastic_residual": float(np.trapezoid(elastic * series.rate, series.t))}


# --------------------------------------------------------------------------
# Calibration against measured impact times / peak forces / wall rebounds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationTarget:
    """One measured row: a drop (height + time and/or force) or a wall
    rebound (speed + rebound target)."""
    frame: str                   # 'rigid' | 'soft'
    config: str                  # 'plus' | 'x'
    pressure_kpa: float | None = None
    kind: str = "drop"           # 'drop' | 'wall'
    height: float | None = None          # m, drop rows
    speed: float | None = None           # m/s, wall rows
    impact_time: float | None = None     # s
    peak_force: float | None = None      # N
    rebound_speed: float | None = None   # m/s

    def __post_init__(self):
        if self.kind not in ("drop", "wall"):
            raise ValueError("target kind must be 'drop' or 'wall'")
        if self.kind == "drop":
            if self.height is None or self.height <= 0.0:
                raise ValueError("drop target needs a positive height")
            if self.impact_time is None and self.peak_force is None:
                raise ValueError("drop target needs impact_time or peak_force")
        else:
            if self.speed is None or self.speed <= 0.0:
                raise ValueError("wall target needs a positive speed")
            if self.rebound_speed is None:
                raise ValueError("wall target needs a rebound_speed")

    @property
    def key(self) -> str:
        return group_key(self.frame, self.config, self.pressure_kpa)

    def describe(self) -> str:
        if self.kind == "drop":
            parts = [f"drop h={self.height:g} m"]
            if self.impact_time is not None:
                parts.append(f"t={self.impact_time * 1e3:g} ms")
            if self.peak_force is not None:
                parts.append(f"F={self.peak_force:g} N")
            return " ".join(parts)
        return f"wall v={self.speed:g} m/s -> {self.rebound_speed:g} m/s"


# Residual weights: times carry full weight, forces half (force peaks are
# noisy measurements), rebound rows full.
WEIGHT_TIME = 1.0
WEIGHT_FORCE = 0.5
WEIGHT_REBOUND = 1.0

_SEEDS_RIGID = [(8e4, 1.5e4, 1.05, 0.55), (2e4, 5e3, 1.2, 0.50),
                (1.4e5, 3e4, 1.05, 0.90)]
_SEEDS_SOFT = [(2.2e3, 450.0, 1.05, 0.95), (1.0e3, 150.0, 1.0, 0.90),
               (5e3, 800.0, 1.1, 0.70)]


@dataclass
class GroupFit:
    """Fit result for one (frame, config, pressure) group."""
    key: str
    calibrated: CalibratedContact
    residuals: dict                  # row description -> relative error
    cost: float
    n_rows: int

    @property
    def max_abs_residual(self) -> float:
        return max((abs(v) for v in self.residuals.values()), default=0.0)


def _group_rows(targets: Iterable[CalibrationTarget]) -> dict[str, list[CalibrationTarget]]:
    groups: dict[str, list[CalibrationTarget]] = {}
    for t in targets:
        groups.setdefault(t.key, []).append(t)
    return groups


def _count_rows(rows: list[CalibrationTarget]) -> int:
    n = 0
    for r in rows:
        if r.kind == "drop":
            n += (r.impact_time is not None) + (r.peak_force is not None)
        else:
            n += 1
    return n


def _row_residuals(rows: list[CalibrationTarget], model: ContactModel,
                   m_eff: float, dt: float) -> list[tuple[str, float, float]]:
    """(description, relative error, weight) per measured quantity."""
    out = []
    for r in rows:
        if r.kind == "drop":
            v0 = impact_speed_from_height(r.height)
            m = simulate_impact(model, v0, m_eff, dt=dt)
            if r.impact_time is not None:
                out.append((r.describe() + " [time]",
                            (m.impact_time - r.impact_time) / r.impact_time,
                            WEIGHT_TIME))
            if r.peak_force is not None:
                out.append((r.describe() + " [force]",
                            (m.peak_force - r.peak_force) / r.peak_force,
                            WEIGHT_FORCE))
        else:
            m = simulate_impact(model, r.speed, m_eff, gravity=0.0, dt=dt)
            out.append((r.describe(),
                        (m.rebound_speed - r.rebound_speed) / r.rebound_speed,
                        WEIGHT_REBOUND))
    return out


def calibrate_contact(targets: Iterable[CalibrationTarget], *,
                      max_nfev: int = 60) -> dict[str, GroupFit]:
    """Fit (stiffness, damping[, exponent, effective mass]) per group.

    Groups with >= 3 measured quantities fit all four parameters; groups
    with exactly 2 fit stiffness and damping at exponent 1 and the class
    default effective mass; fewer than 2 is underdetermined and raises.
    Deterministic: fixed multistart seeds, best final cost wins.
    """
    targets = list(targets)
    if not targets:
        raise UnderdeterminedTargetsError("no calibration targets given")
    groups = _group_rows(targets)

    thin = {k: rows for k, rows in groups.items() if _count_rows(rows) < 2}
    if thin:
        msg = "; ".join(
            f"group '{k}' has only {_count_rows(rows)} measured quantity "
            f"({', '.join(r.describe() for r in rows)}) — at least 2 needed "
            "to pin stiffness and damping" for k, rows in thin.items())
        raise UnderdeterminedTargetsError(msg)

    fits: dict[str, GroupFit] = {}
    for key in sorted(groups):
        rows = groups[key]
        rigid = rows[0].frame == "rigid"
        dt = 5e-6 if rigid else 2e-5
        dmax = RIGID_MAX_COMPRESSION if rigid else SOFT_MAX_COMPRESSION
        m_default = RIGID_EFFECTIVE_MASS if rigid else SOFT_EFFECTIVE_MASS
        n_rows = _count_rows(rows)
        full_fit = n_rows >= 3
        seeds = _SEEDS_RIGID if rigid else _SEEDS_SOFT

        if rigid:
            lo_k, hi_k = math.log(1e3), math.log(5e6)
            lo_c, hi_c = math.log(1e1), math.log(1e7)
        else:
            lo_k, hi_k = math.log(1e2), math.log(1e5)
            lo_c, hi_c = math.log(1e0), math.log(1e5)

        def unpack(x):
            k = math.exp(x[0])
            c = math.exp(x[1])
            if full_fit:
                n, me = x[2], x[3]
            else:
                n, me = 1.0, m_default
            return ContactModel(k, c, n, dmax), me

        def resid(x):
            model, me = unpack(x)
            return [e * w for _, e, w in _row_residuals(rows, model, me, dt)]

        best = None
        for k0, c0, n0, me0 in seeds:
            if full_fit:
                x0 = [math.log(k0), math.log(c0), n0, me0]
                lb = [lo_k, lo_c, 1.0, 0.3]
                ub = [hi_k, hi_c, 2.0, DEFAULT_MASS]
            else:
                x0 = [math.log(k0), math.log(c0)]
                lb = [lo_k, lo_c]
                ub = [hi_k, hi_c]
            res = least_squares(resid, x0, bounds=(lb, ub), diff_step=0.02,
                                xtol=1e-12, ftol=1e-12, max_nfev=max_nfev)
            if best is None or res.cost < best.cost:
                best = res

        model, m_eff = unpack(best.x)
        raw = _row_residuals(rows, model, m_eff, dt)
        fits[key] = GroupFit(
            key=key,
            calibrated=CalibratedContact(model, m_eff),
            residuals={desc: err for desc, err, _ in raw},
            cost=float(best.cost),
            n_rows=n_rows)
    return fits
