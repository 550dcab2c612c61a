"""Figure rendering for the CLI report paths.

Each renderer writes one PNG next to the delimited output and returns
the path.  The non-interactive backend is forced so rendering works in
headless environments; nothing here is needed by the simulation or
analysis code paths.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .wrench import contact_wrenches  # noqa: E402

_DPI = 110


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def perch_figure(rows, events, path) -> Path:
    """Altitude and contact force over one flight, with phase changes."""
    t = np.array([r.t for r in rows])
    alt = np.array([-r.x[2] for r in rows])
    force = np.array([r.contact_force for r in rows])

    fig, (ax1, ax2) = plt.subplots(
        2, 1, sharex=True, figsize=(9.0, 6.0),
        gridspec_kw={"height_ratios": [2.0, 1.0]})
    ax1.plot(t, alt, lw=1.4)
    ax1.set_ylabel("altitude [m]")
    ax1.grid(True, alpha=0.3)
    top = float(alt.max()) if len(alt) else 1.0
    for ev in events:
        ax1.axvline(ev.timestamp, color="gray", lw=0.7, alpha=0.7)
        ax1.annotate(ev.phase_to.name.title(), (ev.timestamp, top),
                     rotation=90, fontsize=7, va="top", ha="right",
                     color="dimgray")
    ax2.plot(t, force, lw=1.0, color="firebrick")
    ax2.set_ylabel("palm force [N]")
    ax2.set_xlabel("time [s]")
    ax2.grid(True, alpha=0.3)
    fig.suptitle("perch flight")
    return _save(fig, path)


def impact_figure(series_by_label, path, *, title="impact") -> Path:
    """Normal force and compression over time, one curve set per label."""
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(8.0, 5.5))
    for label, series in series_by_label.items():
        ax1.plot(series.t * 1e3, series.force, lw=1.2, label=label)
        ax2.plot(series.t * 1e3, series.penetration * 1e3, lw=1.2, label=label)
    ax1.set_ylabel("force [N]")
    ax2.set_ylabel("compression [mm]")
    ax2.set_xlabel("time since touch [ms]")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    ax1.legend(fontsize=8)
    fig.suptitle(title)
    return _save(fig, path)


def collide_figure(series_by_label, path) -> Path:
    """Closing speed during a wall hit, one curve per label."""
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    for label, series in series_by_label.items():
        ax.plot(series.t * 1e3, series.rate, lw=1.2, label=label)
    ax.axhline(0.0, color="gray", lw=0.7)
    ax.set_xlabel("time since touch [ms]")
    ax.set_ylabel("closing speed [m/s]")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.suptitle("wall collision")
    return _save(fig, path)


def wrench_figure(verdict, path) -> Path:
    """Two planar projections of the reachable-wrench hull, with the
    generators and the external wrench endpoints marked."""
    gens = np.array([g.wrench.as_array()
                     for g in contact_wrenches(verdict.scenario)])
    hull_pts = verdict.hull.vertices
    ext = np.array([r.external.as_array() for r in verdict.results])
    resisted = -ext  # the wrench the grasp must supply

    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.6))
    for ax, (i, j, xi, yi) in zip(axes, ((0, 1, "fx [N]", "fy [N]"),
                                         (0, 2, "fx [N]", "torque [N m]"))):
        ax.scatter(hull_pts[:, i], hull_pts[:, j], s=10, color="steelblue",
                   alpha=0.6, label="hull vertices")
        for g in gens:
            ax.annotate("", xy=(g[i], g[j]), xytext=(0.0, 0.0),
                        arrowprops=dict(arrowstyle="->", color="gray", lw=0.8))
        ax.scatter(resisted[:, i], resisted[:, j], marker="*", s=120,
                   color="firebrick", label="required wrench")
        ax.axhline(0.0, color="black", lw=0.5)
        ax.axvline(0.0, color="black", lw=0.5)
        ax.set_xlabel(xi)
        ax.set_ylabel(yi)
        ax.grid(True, alpha=0.3)
    axes[0].legend(fontsize=8)
    word = "resistible" if verdict.resistible else "NOT resistible"
    fig.suptitle(f"{verdict.scenario.name}: external load {word}")
    return _save(fig, path)


def beam_figure(airframe, path, forces=None) -> Path:
    """Arm-tip deflection and rotation versus applied force."""
    if forces is None:
        forces = np.linspace(0.0, 12.0, 61)
    defl = []
    rot = []
    for f in forces:
        r = airframe.tip_deflection(f)
        defl.append(r.displacement * 1e3)
        rot.append(np.degrees(r.rotation))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    label = ("rigid" if airframe.rigid
             else f"{airframe.pressure_kpa:g} kPa {airframe.config}")
    ax1.plot(forces, defl, lw=1.4)
    ax1.set_xlabel("arm-tip force [N]")
    ax1.set_ylabel("tip deflection [mm]")
    ax2.plot(forces, rot, lw=1.4, color="darkorange")
    ax2.set_xlabel("arm-tip force [N]")
    ax2.set_ylabel("tip rotation [deg]")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.suptitle(f"cantilever arm response — {label}")
    return _save(fig, path)


def calibration_figure(fits, path) -> Path:
    """Relative residuals of every fitted group, one bar per target row."""
    labels = []
    values = []
    for key in sorted(fits):
        for desc, res in sorted(fits[key].residuals.items()):
            labels.append(f"{key}\n{desc}")
            values.append(100.0 * res)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.8 * len(labels)), 4.5))
    ax.bar(range(len(values)), values, color="steelblue")
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, fontsize=6, rotation=45, ha="right")
    ax.set_ylabel("relative error [%]")
    ax.grid(True, axis="y", alpha=0.3)
    fig.suptitle("contact-fit residuals")
    return _save(fig, path)
