"""Scenario configuration: one structured-text (YAML) file = one experiment.

Two scenario kinds exist: ``kind: perch`` describes a full flight
(airframe, contact law, grasper, mission, perch object, run controls)
and ``kind: wrench`` describes a planar grasp-wrench analysis case.

Conventions
-----------
- Units are strict SI (m, s, kg, N, Pa).  Pressures may alternatively be
  written with an explicit suffix: ``207 kPa`` or ``207000 Pa``.
- Heights in scenario files are altitudes (meters above ground, positive
  up); the simulation's internal z-down frame is not exposed here.
- Unknown keys are rejected with the offending path named, so typos fail
  loudly instead of silently falling back to defaults.
- Gravity is fixed at 9.81 m/s^2 and is not configurable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .airframe import AirframeModel
from .contact import (CalibratedContact, CalibrationTarget, ContactModel,
                      group_key)
from .control import AllocationParams, ControllerGains
from .grasper import GrasperSpec
from .mission import MissionParams
from .simrun import PerchObject, PerchScenario
from .wrench import (WrenchScenario, circle_two_finger_scenario,
                     rect_scenario, wrapped_circle_scenario)


class ConfigError(ValueError):
    """A scenario or targets file failed validation."""


# ---------------------------------------------------------------------------
# Primitive readers

def _mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"'{path}' must be a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown key '{path}.{unknown[0]}'"
            f" (allowed keys: {', '.join(sorted(allowed))})")


def _num(value, path: str, *, positive: bool = False,
         nonnegative: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    out = float(value)
    if positive and out <= 0.0:
        raise ConfigError(f"'{path}' must be positive, got {out:g}")
    if nonnegative and out < 0.0:
        raise ConfigError(f"'{path}' must be non-negative, got {out:g}")
    return out


def _int(value, path: str, *, nonnegative: bool = False) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{path}' must be an integer, got {value!r}")
    if nonnegative and value < 0:
        raise ConfigError(f"'{path}' must be non-negative, got {value}")
    return value


def _vec(value, path: str, n: int) -> list:
    if (not isinstance(value, (list, tuple)) or len(value) != n
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in value)):
        raise ConfigError(f"'{path}' must be a list of {n} numbers")
    return [float(v) for v in value]


def parse_pressure_kpa(value, path: str) -> float:
    """Pressure in Pa (plain number) or '<value> kPa' / '<value> Pa'
    (explicit suffix); returns kPa."""
    if isinstance(value, bool):
        raise ConfigError(f"'{path}' must be a pressure, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value) / 1e3
    if isinstance(value, str):
        text = value.strip()
        for suffix, scale in (("kPa", 1.0), ("Pa", 1e-3)):
            if text.endswith(suffix):
                number = text[: -len(suffix)].strip()
                try:
                    return float(number) * scale
                except ValueError:
                    break
        raise ConfigError(
            f"'{path}': cannot parse pressure {value!r}; use a plain number"
            " in Pa or an explicit suffix like '207 kPa'")
    raise ConfigError(f"'{path}' must be a number or suffixed string")


def config_hash(data) -> str:
    """Stable 16-hex-digit digest of a fully-resolved config structure."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"),
                           ensure_ascii=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Packaged calibration defaults

_CAL_KEYS = {"stiffness", "damping", "exponent", "max_compression",
             "effective_mass"}


def _calibration_from_dict(raw: dict, path: str) -> dict:
    groups = _mapping(raw.get("groups", {}), f"{path}.groups")
    if not groups:
        raise ConfigError(f"'{path}.groups' is empty")
    out = {}
    for key, row in groups.items():
        row = _mapping(row, f"{path}.groups.{key}")
        _check_keys(row, _CAL_KEYS, f"{path}.groups.{key}")
        missing = sorted(_CAL_KEYS - set(row))
        if missing:
            raise ConfigError(
                f"'{path}.groups.{key}' is missing keys: {', '.join(missing)}")
        out[key] = CalibratedContact(
            model=ContactModel(
                stiffness=_num(row["stiffness"], f"{path}.groups.{key}.stiffness", positive=True),
                damping=_num(row["damping"], f"{path}.groups.{key}.damping", nonnegative=True),
                exponent=_num(row["exponent"], f"{path}.groups.{key}.exponent"),
                max_compression=_num(row["max_compression"], f"{path}.groups.{key}.max_compression", positive=True)),
            effective_mass=_num(row["effective_mass"], f"{path}.groups.{key}.effective_mass", positive=True))
    return out


def load_calibration(path) -> dict:
    """Load a fitted-contact groups file -> {group key: CalibratedContact}."""
    p = Path(path)
    raw = yaml.safe_load(p.read_text())
    return _calibration_from_dict(_mapping(raw, p.name), p.name)


_default_calibration_cache: dict | None = None


def default_calibration() -> dict:
    """The packaged fitted-contact parameter set (see data/)."""
    global _default_calibration_cache
    if _default_calibration_cache is None:
        text = (resources.files("softquad") / "data" /
                "contact_defaults.yaml").read_text()
        _default_calibration_cache = _calibration_from_dict(
            _mapping(yaml.safe_load(text), "contact_defaults.yaml"),
            "contact_defaults.yaml")
    return dict(_default_calibration_cache)


# ---------------------------------------------------------------------------
# Calibration targets file

_TARGET_KEYS = {"frame", "config", "pressure", "kind", "height", "speed",
                "impact_time", "peak_force", "rebound_speed"}


def load_targets(path) -> list:
    """Read measured-impact targets for `calibrate-contact`."""
    p = Path(path)
    raw = _mapping(yaml.safe_load(p.read_text()), p.name)
    _check_keys(raw, {"targets"}, p.name)
    rows = raw.get("targets")
    if not isinstance(rows, list):
        raise ConfigError(f"'{p.name}.targets' must be a list")
    out = []
    for i, row in enumerate(rows):
        where = f"{p.name}.targets[{i}]"
        row = _mapping(row, where)
        _check_keys(row, _TARGET_KEYS, where)
        pressure = row.get("pressure")
        if pressure is not None:
            pressure = parse_pressure_kpa(pressure, f"{where}.pressure")
        try:
            target = CalibrationTarget(
                frame=row.get("frame"), config=row.get("config"),
                pressure_kpa=pressure, kind=row.get("kind", "drop"),
                height=row.get("height"), speed=row.get("speed"),
                impact_time=row.get("impact_time"),
                peak_force=row.get("peak_force"),
                rebound_speed=row.get("rebound_speed"))
            target.key  # frame/config/pressure combination is coherent
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        out.append(target)
    return out


def packaged_targets_path() -> Path:
    """Path of the packaged measured-targets file."""
    return Path(str(resources.files("softquad") / "data" /
                    "contact_targets.yaml"))


# ---------------------------------------------------------------------------
# Perch scenario

_PERCH_TOP = {"kind", "name", "seed", "trials", "duration", "frame",
              "inertial", "contact", "grasper", "gains", "allocation",
              "mission", "perch", "run"}
_FRAME_KEYS = {"type", "pressure", "config", "arm_length", "beam_radius",
               "modulus_table"}
_INERTIAL_KEYS = {"mass", "inertia_diag"}
_CONTACT_KEYS = {"stiffness", "damping", "exponent", "max_compression",
                 "calibration"}
_GRASPER_KEYS = {"fingers", "springs_per_finger", "activation_force",
                 "activation_time", "recoil_time", "recoil_pressure",
                 "tip_force", "max_grasp_diameter"}
_GAINS_KEYS = {"pos_p", "vel_p", "vel_i", "vel_d", "att_p", "att_d",
               "integral_clamp"}
_ALLOC_KEYS = {"arm_offset", "reaction_coeff"}
_MISSION_KEYS = {"hover_offset", "position_tolerance", "velocity_tolerance",
                 "hover_settle", "wait_time", "descent_speed", "land_speed",
                 "land_altitude", "land_xy", "yaw", "recovery_mode"}
_PERCH_OBJ_KEYS = {"center_xy", "top_altitude", "patch_radius", "diameter",
                   "name"}
_RUN_KEYS = {"dt_free", "dt_contact", "dt_near", "dt_welded", "dt_settled",
             "proximity_band", "settle_speed", "capture_speed",
             "supply_pressure", "lateral_noise", "start"}


def _build_airframe(raw: dict) -> AirframeModel:
    frame = _mapping(raw, "frame")
    _check_keys(frame, _FRAME_KEYS, "frame")
    kind = frame.get("type")
    if kind not in ("soft", "rigid"):
        raise ConfigError("'frame.type' must be 'soft' or 'rigid'")
    config = frame.get("config", "plus")
    if config not in ("plus", "x"):
        raise ConfigError("'frame.config' must be 'plus' or 'x'")
    kwargs = {"config": config}
    if "arm_length" in frame:
        kwargs["arm_length"] = _num(frame["arm_length"], "frame.arm_length", positive=True)
    if "beam_radius" in frame:
        kwargs["beam_radius"] = _num(frame["beam_radius"], "frame.beam_radius", positive=True)
    if kind == "rigid":
        if "pressure" in frame:
            raise ConfigError("'frame.pressure' is meaningless for a rigid frame")
        return AirframeModel(rigid=True, **kwargs)
    if "pressure" not in frame:
        raise ConfigError("'frame.pressure' is required for a soft frame")
    kwargs["pressure_kpa"] = parse_pressure_kpa(frame["pressure"], "frame.pressure")
    if "modulus_table" in frame:
        rows = frame["modulus_table"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError("'frame.modulus_table' must be a non-empty list")
        table = []
        for i, row in enumerate(rows):
            if not isinstance(row, (list, tuple)) or len(row) != 2:
                raise ConfigError(
                    f"'frame.modulus_table[{i}]' must be [pressure, modulus Pa]")
            table.append((parse_pressure_kpa(row[0], f"frame.modulus_table[{i}][0]"),
                          _num(row[1], f"frame.modulus_table[{i}][1]", positive=True)))
        kwargs["modulus_table"] = table
    try:
        return AirframeModel(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"frame: {exc}") from exc


def _build_contact(raw, airframe: AirframeModel, base_dir: Path):
    """Resolve the contact law: inline parameters, an external fitted
    file, or the packaged defaults keyed by the frame group."""
    key = group_key("rigid" if airframe.rigid else "soft", airframe.config,
                    None if airframe.rigid else airframe.pressure_kpa)
    if raw is None:
        table = default_calibration()
    else:
        section = _mapping(raw, "contact")
        _check_keys(section, _CONTACT_KEYS, "contact")
        if "calibration" in section:
            extra = sorted(set(section) - {"calibration"})
            if extra:
                raise ConfigError(
                    "'contact.calibration' cannot be combined with inline "
                    f"parameters ({', '.join(extra)})")
            table = load_calibration(base_dir / section["calibration"])
        else:
            for k in ("stiffness", "damping"):
                if k not in section:
                    raise ConfigError(f"'contact.{k}' is required for an inline contact law")
            try:
                model = ContactModel(
                    stiffness=_num(section["stiffness"], "contact.stiffness", positive=True),
                    damping=_num(section["damping"], "contact.damping", nonnegative=True),
                    exponent=_num(section.get("exponent", 1.0), "contact.exponent"),
                    max_compression=_num(section.get("max_compression", 0.12),
                                         "contact.max_compression", positive=True))
            except ValueError as exc:
                raise ConfigError(f"contact: {exc}") from exc
            return model, key
    if key not in table:
        raise ConfigError(
            f"no calibrated contact group '{key}'; available: "
            f"{', '.join(sorted(table))}")
    return table[key].model, key


def _build_grasper(raw) -> GrasperSpec:
    if raw is None:
        return GrasperSpec.three_finger()
    section = _mapping(raw, "grasper")
    _check_keys(section, _GRASPER_KEYS, "grasper")
    kwargs = {}
    if "fingers" in section:
        kwargs["finger_count"] = _int(section["fingers"], "grasper.fingers")
    if "springs_per_finger" in section:
        kwargs["springs_per_finger"] = _int(section["springs_per_finger"],
                                            "grasper.springs_per_finger")
    for k in ("activation_force", "activation_time", "recoil_time",
              "tip_force", "max_grasp_diameter"):
        if k in section:
            kwargs[k] = _num(section[k], f"grasper.{k}", positive=True)
    if "recoil_pressure" in section:
        kwargs["recoil_pressure"] = parse_pressure_kpa(
            section["recoil_pressure"], "grasper.recoil_pressure")
    try:
        return GrasperSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"grasper: {exc}") from exc


def _build_gains(raw) -> ControllerGains:
    if raw is None:
        return ControllerGains()
    section = _mapping(raw, "gains")
    _check_keys(section, _GAINS_KEYS, "gains")
    kwargs = {}
    for k in ("pos_p", "vel_p", "vel_i", "vel_d", "att_p", "att_d"):
        if k in section:
            kwargs[k] = np.array(_vec(section[k], f"gains.{k}", 3))
    if "integral_clamp" in section:
        kwargs["integral_clamp"] = _num(section["integral_clamp"],
                                        "gains.integral_clamp", positive=True)
    try:
        return ControllerGains(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"gains: {exc}") from exc


def _build_perch_object(raw) -> PerchObject:
    section = _mapping(raw if raw is not None else {}, "perch")
    _check_keys(section, _PERCH_OBJ_KEYS, "perch")
    kwargs = {}
    if "center_xy" in section:
        kwargs["center_xy"] = tuple(_vec(section["center_xy"], "perch.center_xy", 2))
    top_alt = _num(section.get("top_altitude", 0.55), "perch.top_altitude", positive=True)
    kwargs["top_z"] = -top_alt
    if "patch_radius" in section:
        kwargs["patch_radius"] = _num(section["patch_radius"], "perch.patch_radius", positive=True)
    if "diameter" in section:
        kwargs["diameter_mm"] = 1e3 * _num(section["diameter"], "perch.diameter", positive=True)
    if "name" in section:
        kwargs["name"] = str(section["name"])
    try:
        return PerchObject(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"perch: {exc}") from exc


@dataclass
class PerchConfig:
    """A fully-resolved flight scenario plus its run bookkeeping."""
    name: str
    seed: int
    trials: int
    scenario: PerchScenario
    contact_group: str
    hash: str
    raw: dict


@dataclass
class WrenchConfig:
    """A fully-resolved planar grasp-wrench case."""
    name: str
    scenario: WrenchScenario
    hash: str
    raw: dict


def _build_perch(raw: dict, base_dir: Path) -> PerchConfig:
    _check_keys(raw, _PERCH_TOP, "scenario")
    airframe = _build_airframe(raw.get("frame", {"type": "soft", "pressure": "207 kPa"}))
    contact, contact_group = _build_contact(raw.get("contact"), airframe, base_dir)
    grasper = _build_grasper(raw.get("grasper"))
    gains = _build_gains(raw.get("gains"))
    perch = _build_perch_object(raw.get("perch"))

    alloc_raw = raw.get("allocation")
    if alloc_raw is None:
        allocation = AllocationParams()
    else:
        section = _mapping(alloc_raw, "allocation")
        _check_keys(section, _ALLOC_KEYS, "allocation")
        try:
            allocation = AllocationParams(
                arm_offset=_num(section.get("arm_offset", 0.18), "allocation.arm_offset", positive=True),
                reaction_coeff=_num(section.get("reaction_coeff", 0.0245),
                                    "allocation.reaction_coeff", positive=True))
        except ValueError as exc:
            raise ConfigError(f"allocation: {exc}") from exc

    inertial = _mapping(raw.get("inertial", {}), "inertial")
    _check_keys(inertial, _INERTIAL_KEYS, "inertial")
    mass = _num(inertial.get("mass", 1.14), "inertial.mass", positive=True)
    inertia = None
    if "inertia_diag" in inertial:
        inertia = np.diag(_vec(inertial["inertia_diag"], "inertial.inertia_diag", 3))

    mission_raw = _mapping(raw.get("mission", {}), "mission")
    _check_keys(mission_raw, _MISSION_KEYS, "mission")
    target = np.array([perch.center_xy[0], perch.center_xy[1], perch.top_z])
    mkwargs = {"target": target}
    for k in ("hover_offset", "position_tolerance", "velocity_tolerance",
              "hover_settle", "wait_time", "land_speed", "land_altitude"):
        if k in mission_raw:
            mkwargs[k] = _num(mission_raw[k], f"mission.{k}", positive=True)
    if "descent_speed" in mission_raw:
        mkwargs["descent_speed"] = _num(mission_raw["descent_speed"],
                                        "mission.descent_speed", positive=True)
    if "land_xy" in mission_raw:
        mkwargs["land_xy"] = tuple(_vec(mission_raw["land_xy"], "mission.land_xy", 2))
    if "yaw" in mission_raw:
        mkwargs["yaw"] = _num(mission_raw["yaw"], "mission.yaw")
    if "recovery_mode" in mission_raw:
        mkwargs["recovery_mode"] = mission_raw["recovery_mode"]
    try:
        mission = MissionParams(**mkwargs)
    except ValueError as exc:
        raise ConfigError(f"mission: {exc}") from exc

    run = _mapping(raw.get("run", {}), "run")
    _check_keys(run, _RUN_KEYS, "run")
    skwargs = {}
    for k in ("dt_free", "dt_contact", "dt_near", "dt_welded", "dt_settled",
              "proximity_band", "settle_speed", "capture_speed"):
        if k in run:
            skwargs[k] = _num(run[k], f"run.{k}", positive=True)
    if "supply_pressure" in run:
        skwargs["supply_pressure_kpa"] = parse_pressure_kpa(
            run["supply_pressure"], "run.supply_pressure")
    if "lateral_noise" in run:
        skwargs["lateral_noise"] = _num(run["lateral_noise"], "run.lateral_noise",
                                        nonnegative=True)
    if "start" in run:
        x, y, alt = _vec(run["start"], "run.start", 3)
        skwargs["start"] = np.array([x, y, -alt])

    name = str(raw.get("name", "perch"))
    try:
        scenario = PerchScenario(
            airframe=airframe, contact=contact, grasper=grasper,
            mission=mission, perch=perch, mass=mass, inertia=inertia,
            duration=_num(raw.get("duration", 60.0), "duration", positive=True),
            gains=gains, allocation=allocation, name=name, **skwargs)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc

    resolved = {"raw": raw,
                "contact": [contact.stiffness, contact.damping,
                            contact.exponent, contact.max_compression]}
    return PerchConfig(
        name=name,
        seed=_int(raw.get("seed", 0), "seed"),
        trials=_int(raw.get("trials", 1), "trials", nonnegative=True),
        scenario=scenario, contact_group=contact_group,
        hash=config_hash(resolved), raw=raw)


# ---------------------------------------------------------------------------
# Wrench scenario

_WRENCH_TOP = {"kind", "name", "object", "vehicle", "contacts"}
_WRENCH_OBJ_KEYS = {"shape", "diameter", "width", "height"}
_WRENCH_VEHICLE_KEYS = {"mass", "tilt_deg", "residual_thrust", "palm_lever"}
_WRENCH_CONTACT_KEYS = {"friction", "tip_force", "tip_angle_deg",
                        "tip_magnitude", "loss_cone_deg",
                        "finger_normal_force", "finger_angle_deg"}


def _build_wrench(raw: dict) -> WrenchConfig:
    _check_keys(raw, _WRENCH_TOP, "scenario")
    obj = _mapping(raw.get("object", {}), "object")
    _check_keys(obj, _WRENCH_OBJ_KEYS, "object")
    shape = obj.get("shape")
    if shape not in ("circle", "rectangle", "wrapped-circle"):
        raise ConfigError("'object.shape' must be 'circle', 'rectangle', or"
                          " 'wrapped-circle'")

    veh = _mapping(raw.get("vehicle", {}), "vehicle")
    _check_keys(veh, _WRENCH_VEHICLE_KEYS, "vehicle")
    con = _mapping(raw.get("contacts", {}), "contacts")
    _check_keys(con, _WRENCH_CONTACT_KEYS, "contacts")

    common = {}
    if "mass" in veh:
        common["mass"] = _num(veh["mass"], "vehicle.mass", positive=True)
    if "residual_thrust" in veh:
        common["residual_thrust"] = _num(veh["residual_thrust"],
                                         "vehicle.residual_thrust", nonnegative=True)
    if "palm_lever" in veh:
        common["palm_lever"] = _num(veh["palm_lever"], "vehicle.palm_lever", positive=True)
    if "friction" in con:
        common["friction"] = _num(con["friction"], "contacts.friction", positive=True)

    def reject(keys, context):
        for k in keys:
            if k in con or k in veh:
                raise ConfigError(f"'{k}' does not apply to a {context} scenario")

    try:
        if shape == "circle":
            reject(("tip_magnitude", "finger_normal_force", "finger_angle_deg"),
                   "circle")
            kwargs = dict(common)
            if "diameter" in obj:
                kwargs["diameter"] = _num(obj["diameter"], "object.diameter", positive=True)
            if "tilt_deg" in veh:
                kwargs["tilt_deg"] = _num(veh["tilt_deg"], "vehicle.tilt_deg")
            if "tip_force" in con:
                kwargs["tip_force"] = _num(con["tip_force"], "contacts.tip_force", positive=True)
            if "tip_angle_deg" in con:
                kwargs["tip_angle_deg"] = _num(con["tip_angle_deg"], "contacts.tip_angle_deg")
            if "loss_cone_deg" in con:
                kwargs["loss_cone_deg"] = _num(con["loss_cone_deg"], "contacts.loss_cone_deg",
                                               nonnegative=True)
            scenario = circle_two_finger_scenario(**kwargs)
        elif shape == "rectangle":
            reject(("tilt_deg", "tip_force", "tip_angle_deg",
                    "finger_normal_force", "finger_angle_deg"), "rectangle")
            kwargs = dict(common)
            if "width" in obj:
                kwargs["width"] = _num(obj["width"], "object.width", positive=True)
            if "height" in obj:
                kwargs["height"] = _num(obj["height"], "object.height", positive=True)
            if "tip_magnitude" in con:
                kwargs["tip_magnitude"] = _num(con["tip_magnitude"],
                                               "contacts.tip_magnitude", positive=True)
            if "loss_cone_deg" in con:
                kwargs["loss_cone_deg"] = _num(con["loss_cone_deg"], "contacts.loss_cone_deg",
                                               nonnegative=True)
            scenario = rect_scenario(**kwargs)
        else:
            reject(("tilt_deg", "tip_force", "tip_angle_deg", "tip_magnitude",
                    "loss_cone_deg"), "wrapped-circle")
            kwargs = dict(common)
            if "diameter" in obj:
                kwargs["diameter"] = _num(obj["diameter"], "object.diameter", positive=True)
            if "finger_normal_force" in con:
                kwargs["finger_normal_force"] = _num(con["finger_normal_force"],
                                                     "contacts.finger_normal_force", positive=True)
            if "finger_angle_deg" in con:
                kwargs["finger_angle_deg"] = _num(con["finger_angle_deg"],
                                                  "contacts.finger_angle_deg")
            scenario = wrapped_circle_scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"wrench scenario: {exc}") from exc

    if "name" in raw:
        scenario.name = str(raw["name"])
    return WrenchConfig(name=scenario.name, scenario=scenario,
                        hash=config_hash(raw), raw=raw)


# ---------------------------------------------------------------------------
# Entry point

def scenario_from_dict(raw, *, base_dir=".") -> PerchConfig | WrenchConfig:
    raw = _mapping(raw, "scenario")
    kind = raw.get("kind")
    if kind == "perch":
        return _build_perch(raw, Path(base_dir))
    if kind == "wrench":
        return _build_wrench(raw)
    raise ConfigError("scenario 'kind' must be 'perch' or 'wrench'")


def load_scenario(path) -> PerchConfig | WrenchConfig:
    """Parse and validate one scenario file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"scenario file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p.name}: invalid YAML: {exc}") from exc
    return scenario_from_dict(raw, base_dir=p.parent)
