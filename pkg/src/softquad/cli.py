"""Command-line entry point.

Subcommands
-----------
- ``drop-test``          simulate calibrated vertical drops, print/write metrics
- ``collide``            simulate a head-on wall hit with a calibrated frame
- ``perch``              fly a full perch scenario from a config file
- ``wrench-hull``        analyze a grasp's reachable wrench set from a config file
- ``beam-calib``         tabulate the arm bending model across its pressure table
- ``calibrate-contact``  fit contact parameters to a measured-targets file

The ``--config`` flag means two different things, deliberately matching
each subcommand's vocabulary: for ``drop-test`` and ``collide`` it is
the motor layout (``plus`` or ``x``); for ``perch`` and ``wrench-hull``
it is the path of a scenario file.

Pressures on the command line are in kPa (a bare ``--pressure 207``
means 207 kPa); an explicit suffix is also accepted (``'207 kPa'``,
``'207000 Pa'``).  Inside files, plain numbers are strict SI (Pa).

Exit codes: 0 success, 1 scenario failure (a perch trial ended Failed),
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .airframe import AirframeModel, OutOfCalibrationError
from .config import (ConfigError, PerchConfig, WrenchConfig,
                     default_calibration, load_scenario, load_targets,
                     packaged_targets_path, parse_pressure_kpa)
from .contact import (UnderdeterminedTargetsError, calibrate_contact,
                      drop_test, group_key, impact_speed_from_height,
                      wall_collision)
from .runlog import (BEAM_COLUMNS, METRICS_COLUMNS, format_table, mean_row,
                     metrics_row, table_lines, write_events, write_run_log,
                     write_table)
from .simrun import run_perch_trial
from .wrench import closure_verdict, contact_wrenches

PERCH_SUMMARY_COLUMNS = ("trial", "seed", "final_phase", "success",
                         "elapsed_s", "event_count")
RESIDUAL_COLUMNS = ("group", "row", "relative_error")


def _pressure_flag(text: str) -> float:
    """CLI pressure: bare numbers are kPa; suffixed strings are explicit."""
    try:
        return float(text)
    except ValueError:
        return parse_pressure_kpa(text, "--pressure")


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _frame_args(args) -> tuple:
    frame = args.frame
    config = args.config
    pressure = args.pressure
    if frame == "soft" and pressure is None:
        raise ConfigError("--pressure is required for a soft frame"
                          " (kPa, e.g. --pressure 207)")
    if frame == "rigid":
        pressure = None
    # Validates the combination and produces the lookup key early so
    # unknown groups fail with the available options listed.
    key = group_key(frame, config, pressure)
    table = default_calibration()
    if key not in table:
        raise ConfigError(f"no calibrated contact group '{key}'; available: "
                          f"{', '.join(sorted(table))}")
    return frame, config, pressure, table


# ---------------------------------------------------------------------------
# drop-test

def _cmd_drop_test(args) -> int:
    frame, config, pressure, table = _frame_args(args)
    if args.height <= 0.0:
        raise ConfigError("--height must be positive (meters)")
    if args.trials < 0:
        raise ConfigError("--trials must be non-negative")
    out = _out_dir(args)

    rng = np.random.default_rng(args.seed)
    rows = []
    series_by_label = {}
    for i in range(args.trials):
        height = args.height
        if args.trials > 1:
            height *= 1.0 + rng.uniform(-0.01, 0.01)
        metrics, series = drop_test(frame, config, height, table,
                                    pressure_kpa=pressure, record=True)
        rows.append(metrics_row(i + 1, frame, config, pressure, "drop",
                                height, metrics))
        if len(series_by_label) < 5:
            series_by_label[f"trial {i + 1}"] = series
    if rows:
        rows.append(mean_row(rows))

    print(f"drop test: frame={frame} config={config}"
          + (f" pressure={pressure:g} kPa" if pressure is not None else "")
          + f" height={args.height:g} m"
          + f" (impact speed {impact_speed_from_height(args.height):.4g} m/s)")
    print(format_table(rows, METRICS_COLUMNS))
    if out is not None:
        write_table(out / "drop_test.csv", rows, METRICS_COLUMNS)
        if series_by_label:
            from .report import impact_figure
            impact_figure(series_by_label, out / "drop_test.png",
                          title=f"drop test {frame}/{config}")
        print(f"wrote {out / 'drop_test.csv'}")
    return 0


# ---------------------------------------------------------------------------
# collide

def _cmd_collide(args) -> int:
    frame, config, pressure, table = _frame_args(args)
    if args.speed < 0.0:
        raise ConfigError("--speed must be non-negative (m/s)")
    out = _out_dir(args)

    cal = table[group_key(frame, config, pressure)]
    metrics, series = wall_collision(args.speed, cal.model,
                                     cal.effective_mass, record=True)
    rows = [metrics_row(1, frame, config, pressure, "wall", None, metrics)]
    print(f"wall collision: frame={frame} config={config}"
          + (f" pressure={pressure:g} kPa" if pressure is not None else "")
          + f" approach={args.speed:g} m/s -> rebound"
          f" {metrics.rebound_speed:.3g} m/s"
          f" (restitution {metrics.restitution:.3g})")
    print(format_table(rows, METRICS_COLUMNS))
    if out is not None:
        write_table(out / "collide.csv", rows, METRICS_COLUMNS)
        from .report import collide_figure
        collide_figure({f"{args.speed:g} m/s": series}, out / "collide.png")
        print(f"wrote {out / 'collide.csv'}")
    return 0


# ---------------------------------------------------------------------------
# perch

def _cmd_perch(args) -> int:
    cfg = load_scenario(args.config)
    if not isinstance(cfg, PerchConfig):
        raise ConfigError(f"'{args.config}' is a '{cfg.raw.get('kind')}'"
                          " scenario; the perch subcommand needs kind: perch")
    seed = cfg.seed if args.seed is None else args.seed
    trials = cfg.trials if args.trials is None else args.trials
    if trials < 0:
        raise ConfigError("--trials must be non-negative")
    out = _out_dir(args)

    print(f"perch scenario '{cfg.name}' (config {cfg.hash}),"
          f" contact group {cfg.contact_group},"
          f" {trials} trial(s), base seed {seed}")
    successes = 0
    failures = 0
    summary = []
    for i in range(trials):
        trial_seed = seed + i
        result = run_perch_trial(cfg.scenario, trial_seed, record=True)
        successes += result.success
        failures += not result.success
        verdict = result.final_phase.name.title()
        print(f"  trial {i + 1} seed {trial_seed}: {verdict}"
              f" after {result.elapsed:.3f} s,"
              f" {len(result.events)} events")
        summary.append({
            "trial": i + 1, "seed": trial_seed,
            "final_phase": result.final_phase.name,
            "success": result.success,
            "elapsed_s": result.elapsed,
            "event_count": len(result.events),
        })
        if out is not None:
            tag = f"seed{trial_seed}"
            write_run_log(out / f"run_{tag}.csv", result.rows,
                          name=cfg.name, config_hash=cfg.hash,
                          seed=trial_seed)
            write_events(out / f"events_{tag}.jsonl", result.events)
            from .report import perch_figure
            perch_figure(result.rows, result.events,
                         out / f"flight_{tag}.png")
    print(f"successes: {successes}/{trials}")
    if out is not None:
        write_table(out / "summary.csv", summary, PERCH_SUMMARY_COLUMNS,
                    comments=(f"scenario: {cfg.name}",
                              f"config_hash: {cfg.hash}"))
        print(f"wrote {out / 'summary.csv'}")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# wrench-hull

def _cmd_wrench_hull(args) -> int:
    cfg = load_scenario(args.config)
    if not isinstance(cfg, WrenchConfig):
        raise ConfigError(f"'{args.config}' is a '{cfg.raw.get('kind')}'"
                          " scenario; wrench-hull needs kind: wrench")
    out = _out_dir(args)
    verdict = closure_verdict(cfg.scenario)
    gens = contact_wrenches(cfg.scenario)

    print(f"wrench scenario '{cfg.name}' (config {cfg.hash})")
    print(f"generators: {len(gens)}")
    for g in gens:
        w = g.wrench
        print(f"  {g.label:<14} [{w.fx: .4g}, {w.fy: .4g}, {w.torque: .4g}]")
    for res in verdict.results:
        ext = res.external
        word = "resistible" if res.resistible else "NOT resistible"
        print(f"external [{ext.fx:.4g}, {ext.fy:.4g}, {ext.torque:.4g}]"
              f" -> {word} (residual {res.residual:.2e})")
        if res.resistible and res.coefficients is not None:
            used = [f"{g.label}={lam:.3g}"
                    for g, lam in zip(gens, res.coefficients) if lam > 1e-9]
            print(f"  certificate: {', '.join(used) if used else 'zero wrench'}")
        elif res.plane is not None:
            n = res.plane.normal
            print(f"  certificate: separating plane normal"
                  f" [{n[0]:.4g}, {n[1]:.4g}, {n[2]:.4g}],"
                  f" margin {res.plane.margin:.3g}")
    print(f"verdict: {'Resistible' if verdict.resistible else 'NotResistible'}")
    print(f"hull vertices: {len(verdict.hull.vertices)}"
          + (" (degenerate)" if verdict.hull.degenerate else ""))

    if out is not None:
        hull_rows = [{"fx_n": v[0], "fy_n": v[1], "torque_nm": v[2]}
                     for v in verdict.hull.vertices]
        write_table(out / "wrench_hull.csv", hull_rows,
                    ("fx_n", "fy_n", "torque_nm"),
                    comments=(f"scenario: {cfg.name}",
                              f"config_hash: {cfg.hash}"))
        payload = {
            "scenario": cfg.name,
            "config_hash": cfg.hash,
            "resistible": verdict.resistible,
            "endpoints": [
                {
                    "external": list(res.external.as_array()),
                    "resistible": res.resistible,
                    "residual": res.residual,
                    "coefficients": (None if res.coefficients is None
                                     else [round(float(c), 12)
                                           for c in res.coefficients]),
                    "separating_plane": (None if res.plane is None else {
                        "normal": [float(x) for x in res.plane.normal],
                        "margin": float(res.plane.margin),
                    }),
                }
                for res in verdict.results
            ],
        }
        (out / "wrench_verdict.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")
        from .report import wrench_figure
        wrench_figure(verdict, out / "wrench_hull.png")
        print(f"wrote {out / 'wrench_hull.csv'}")
    return 0


# ---------------------------------------------------------------------------
# beam-calib

def _cmd_beam_calib(args) -> int:
    if args.force <= 0.0:
        raise ConfigError("--force must be positive (newtons)")
    out = _out_dir(args)
    probe = AirframeModel(config=args.config)  # pressure replaced per row
    rows = []
    for pressure, modulus in probe.modulus_table:
        frame = AirframeModel(pressure_kpa=pressure, config=args.config,
                              modulus_table=probe.modulus_table)
        r = frame.tip_deflection(args.force)
        rows.append({
            "pressure_kpa": pressure,
            "modulus_pa": modulus,
            "bend_coeff_per_n": frame.bending_coefficient(),
            "tip_deflection_m": r.displacement,
            "tip_rotation_deg": float(np.degrees(r.rotation)),
            "thrust_factor": r.thrust_factor,
        })
    print(f"arm bending across the pressure table at {args.force:g} N tip force")
    print(format_table(rows, BEAM_COLUMNS))
    if out is not None:
        write_table(out / "beam_calib.csv", rows, BEAM_COLUMNS,
                    comments=(f"tip force: {args.force:g} N",))
        from .report import beam_figure
        pressure = args.pressure if args.pressure is not None \
            else probe.modulus_table[-1][0]
        beam_figure(AirframeModel(pressure_kpa=pressure, config=args.config),
                    out / "beam_calib.png")
        print(f"wrote {out / 'beam_calib.csv'}")
    return 0


# ---------------------------------------------------------------------------
# calibrate-contact

def _cmd_calibrate_contact(args) -> int:
    targets_path = Path(args.targets) if args.targets is not None \
        else packaged_targets_path()
    if not targets_path.is_file():
        raise ConfigError(f"targets file not found: {targets_path}")
    targets = load_targets(targets_path)
    out = _out_dir(args)

    fits = calibrate_contact(targets)
    residual_rows = []
    print(f"fitted {len(fits)} group(s) from {len(targets)} target row(s)")
    for key in sorted(fits):
        fit = fits[key]
        m = fit.calibrated.model
        print(f"  {key}: stiffness={m.stiffness:.6g} N/m^n,"
              f" damping={m.damping:.6g}, exponent={m.exponent:.4g},"
              f" effective_mass={fit.calibrated.effective_mass:.4g} kg")
        for desc, res in sorted(fit.residuals.items()):
            print(f"    {desc}: {100.0 * res:+.1f}%")
            residual_rows.append({"group": key, "row": desc,
                                  "relative_error": res})

    if out is not None:
        lines = [
            "# Fitted compliant-contact parameters, one group per frame",
            "# build.  stiffness N/m^exponent, damping N s/m^(exponent+1),",
            "# max_compression m, effective_mass kg.",
            "groups:",
        ]
        for key in sorted(fits):
            cal = fits[key].calibrated
            m = cal.model
            lines.append(f"  {key}:")
            lines.append(f"    stiffness: {float(m.stiffness)!r}")
            lines.append(f"    damping: {float(m.damping)!r}")
            lines.append(f"    exponent: {float(m.exponent)!r}")
            lines.append(f"    max_compression: {float(m.max_compression)!r}")
            lines.append(f"    effective_mass: {float(cal.effective_mass)!r}")
        (out / "fitted_contact.yaml").write_text("\n".join(lines) + "\n")
        write_table(out / "calibration_residuals.csv", residual_rows,
                    RESIDUAL_COLUMNS)
        from .report import calibration_figure
        calibration_figure(fits, out / "calibration_residuals.png")
        print(f"wrote {out / 'fitted_contact.yaml'}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softquad",
        description="Soft-frame quadrotor simulation and grasp analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("drop-test",
                       help="calibrated vertical drop onto the ground")
    p.add_argument("--frame", required=True, choices=("rigid", "soft"))
    p.add_argument("--config", default="plus", choices=("plus", "x"),
                   help="motor layout (this subcommand's --config)")
    p.add_argument("--pressure", type=_pressure_flag, default=None,
                   help="inflation pressure in kPa (soft frames)")
    p.add_argument("--height", type=float, required=True,
                   help="drop height in meters")
    p.add_argument("--trials", type=int, default=1,
                   help="trial count; >1 adds seeded ±1%% height jitter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_drop_test)

    p = sub.add_parser("collide", help="head-on wall collision")
    p.add_argument("--frame", required=True, choices=("rigid", "soft"))
    p.add_argument("--config", default="plus", choices=("plus", "x"),
                   help="motor layout (this subcommand's --config)")
    p.add_argument("--pressure", type=_pressure_flag, default=None,
                   help="inflation pressure in kPa (soft frames)")
    p.add_argument("--speed", type=float, required=True,
                   help="approach speed in m/s")
    p.add_argument("--seed", type=int, default=0, help="unused; accepted for"
                   " flag uniformity")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_collide)

    p = sub.add_parser("perch", help="full perch mission from a scenario file")
    p.add_argument("--config", required=True,
                   help="scenario file (kind: perch)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario's base seed")
    p.add_argument("--trials", type=int, default=None,
                   help="override the scenario's trial count")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_perch)

    p = sub.add_parser("wrench-hull",
                       help="grasp wrench-space analysis from a scenario file")
    p.add_argument("--config", required=True,
                   help="scenario file (kind: wrench)")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_wrench_hull)

    p = sub.add_parser("beam-calib",
                       help="tabulate the arm bending model")
    p.add_argument("--config", default="plus", choices=("plus", "x"),
                   help="motor layout (this subcommand's --config)")
    p.add_argument("--pressure", type=_pressure_flag, default=None,
                   help="pressure (kPa) for the response figure")
    p.add_argument("--force", type=float, default=10.0,
                   help="tip force (N) for the table")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_beam_calib)

    p = sub.add_parser("calibrate-contact",
                       help="fit contact parameters to measured targets")
    p.add_argument("--targets", default=None,
                   help="targets file (default: the packaged measured set)")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_calibrate_contact)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except UnderdeterminedTargetsError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OutOfCalibrationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"config error: {exc.args[0] if exc.args else exc}",
              file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
