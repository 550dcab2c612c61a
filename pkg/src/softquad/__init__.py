"""Deterministic simulation and analysis toolkit for a quadrotor with a
pneumatically tunable soft frame and a bistable contact-triggered
grasper.

Layers, bottom up:

- ``geom``      rotation helpers (SO(3), quaternions, skew maps)
- ``airframe``  inflated-beam arm bending and thrust-loss factors
- ``rigidbody`` 6-DOF rigid-body state and fixed-step integration
- ``control``   cascaded position/attitude controller and motor mixing
- ``contact``   compliant normal-force law, impact metrics, calibration
- ``grasper``   bistable finger activation, capacity, pneumatic recoil
- ``wrench``    planar grasp wrench sets and force-closure certificates
- ``mission``   event-driven perch mission state machine
- ``simrun``    end-to-end seeded perch flights
- ``config``    YAML scenario files -> validated run objects
- ``runlog``    deterministic CSV/JSONL writers and readers
- ``report``    matplotlib figure rendering for the CLI
- ``cli``       the ``softquad`` command
"""

from .airframe import AirframeModel, DeflectionResult, OutOfCalibrationError
from .config import (ConfigError, PerchConfig, WrenchConfig,
                     default_calibration, load_calibration, load_scenario,
                     load_targets)
from .contact import (CalibratedContact, CalibrationTarget, ContactModel,
                      ImpactMetrics, UnderdeterminedTargetsError,
                      calibrate_contact, contact_force, drop_test,
                      group_key, impact_speed_from_height, simulate_impact,
                      wall_collision)
from .control import (AllocationParams, ControllerGains, GeometricController,
                      Setpoint, compensate_thrust_loss, motor_commands,
                      plant_forward)
from .grasper import (GrasperMode, GrasperSpec, GrasperState, advance,
                      begin_activation, check_activation, grasp_capacity,
                      recoil)
from .mission import (MissionEvent, MissionParams, MissionPhase,
                      initial_state)
from .rigidbody import (DEFAULT_MASS, GRAVITY, Disturbance, InertialParams,
                        RigidBodyState, integrate_step)
from .simrun import (PerchObject, PerchScenario, TrialResult,
                     run_perch_batch, run_perch_trial)
from .wrench import (ClosureResult, PlanarWrench, ScenarioVerdict,
                     WrenchScenario, circle_two_finger_scenario,
                     closure_verdict, force_closure, rect_scenario,
                     wrench_hull, wrapped_circle_scenario)

__version__ = "0.1.0"

__all__ = [
    "AirframeModel", "DeflectionResult", "OutOfCalibrationError",
    "ConfigError", "PerchConfig", "WrenchConfig", "default_calibration",
    "load_calibration", "load_scenario", "load_targets",
    "CalibratedContact", "CalibrationTarget", "ContactModel",
    "ImpactMetrics", "UnderdeterminedTargetsError", "calibrate_contact",
    "contact_force", "drop_test", "group_key", "impact_speed_from_height",
    "simulate_impact", "wall_collision",
    "AllocationParams", "ControllerGains", "GeometricController",
    "Setpoint", "compensate_thrust_loss", "motor_commands", "plant_forward",
    "GrasperMode", "GrasperSpec", "GrasperState", "advance",
    "begin_activation", "check_activation", "grasp_capacity", "recoil",
    "MissionEvent", "MissionParams", "MissionPhase", "initial_state",
    "DEFAULT_MASS", "GRAVITY", "Disturbance", "InertialParams",
    "RigidBodyState", "integrate_step",
    "PerchObject", "PerchScenario", "TrialResult", "run_perch_batch",
    "run_perch_trial",
    "ClosureResult", "PlanarWrench", "ScenarioVerdict", "WrenchScenario",
    "circle_two_finger_scenario", "closure_verdict", "force_closure",
    "rect_scenario", "wrench_hull", "wrapped_circle_scenario",
    "__version__",
]
