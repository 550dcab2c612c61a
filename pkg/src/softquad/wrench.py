"""Planar grasp-wrench analysis: can the grasper's contact forces cancel
the external load on the perch?

Everything is two-dimensional in the object's cross-section plane: a
wrench is (f_x, f_y, torque-about-object-center).  The wrench frame sits
at the object center, x along the surface tangent, y away from the perch
surface toward the vehicle, so gravity on a tilted perch loads -x and the
contact pressing load is +y.

Contacts come in two kinds:

* friction-cone contacts — a palm or corner pressed on with a normal-force
  budget f_n; the transmissible tangential force is bounded by the cone
  half-angle arctan(mu).  Following the source characterization, each cone
  emits its two edge directions with magnitude mu * f_n.
* finger-tip point contacts — a small bench-measured tip force nominally
  through the object center, uncertain within a +/-5 degree "loss cone";
  each emits the two cone-edge directions.  Tip torques are neglected
  (the nominal line of action passes through the center).

Closure is decided by linear-programming feasibility: the external wrench
is resistible when its negation is a combination of the generators with
coefficients in [0, 1] (each generator already carries its maximum
magnitude).  Infeasibility is certified by a separating hyperplane from a
bounded least-squares projection.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, lsq_linear
from scipy.spatial import ConvexHull, QhullError

from .rigidbody import DEFAULT_MASS, GRAVITY

DEFAULT_FRICTION = 0.7
DEFAULT_LOSS_CONE_DEG = 5.0
DEFAULT_PALM_LEVER = 0.050  # m, mass-center to palm contact along body z


@dataclass(frozen=True)
class PlanarWrench:
    fx: float
    fy: float
    torque: float

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy, self.torque])

    @staticmethod
    def from_array(a) -> "PlanarWrench":
        return PlanarWrench(float(a[0]), float(a[1]), float(a[2]))

    def __neg__(self) -> "PlanarWrench":
        return PlanarWrench(-self.fx, -self.fy, -self.torque)


def _rot2(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _cross2(r, f) -> float:
    return float(r[0] * f[1] - r[1] * f[0])


@dataclass(frozen=True)
class ConeContact:
    """Pressed contact with friction: position and inward unit normal in
    the object frame, a normal-force budget, and a friction coefficient."""
    position: tuple          # (x, y) m
    normal: tuple            # unit, pointing into the object
    normal_force: float      # N available at this contact
    friction: float = DEFAULT_FRICTION

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-9:
            raise ValueError("contact normal must be unit length")
        if self.normal_force < 0.0 or self.friction <= 0.0:
            raise ValueError("normal force must be >= 0 and friction > 0")

    @property
    def half_angle(self) -> float:
        """Friction-cone half angle arctan(mu)."""
        return math.atan(self.friction)

    def edge_wrenches(self) -> list[PlanarWrench]:
        p = np.asarray(self.position, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        mag = self.friction * self.normal_force
        out = []
        for sign in (+1.0, -1.0):
            f = _rot2(sign * self.half_angle) @ n * mag
            out.append(PlanarWrench(f[0], f[1], _cross2(p, f)))
        return out


@dataclass(frozen=True)
class TipContact:
    """Frictionless finger-tip push: nominal direction with a small
    angular uncertainty cone; torque neglected (nominal line of action
    passes through the object center)."""
    position: tuple       # (x, y) m
    direction: tuple      # unit, nominal push direction
    magnitude: float      # N
    loss_cone_deg: float = DEFAULT_LOSS_CONE_DEG

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
            raise ValueError("tip direction must be unit length")
        if self.magnitude < 0.0 or self.loss_cone_deg < 0.0:
            raise ValueError("magnitude and loss cone must be non-negative")

    def nominal_wrench(self) -> PlanarWrench:
        d = np.asarray(self.direction, dtype=float) * self.magnitude
        return PlanarWrench(d[0], d[1], 0.0)

    def edge_wrenches(self) -> list[PlanarWrench]:
        d = np.asarray(self.direction, dtype=float)
        half = math.radians(self.loss_cone_deg)
        out = []
        for sign in (+1.0, -1.0):
            f = _rot2(sign * half) @ d * self.magnitude
            out.append(PlanarWrench(f[0], f[1], 0.0))
        return out


@dataclass
class WrenchScenario:
    """One perch geometry with its contact set and external-load data."""
    name: str
    vehicle_mass: float = DEFAULT_MASS
    tilt: float = 0.0                 # rad, perch surface tilt
    residual_thrust: float = 0.0      # N, remaining rotor thrust while perched
    friction: float = DEFAULT_FRICTION
    object_shape: str = "circle"      # 'circle' | 'rectangle'
    diameter: float = 0.115           # m (circle)
    width: float = 0.020              # m (rectangle)
    height: float = 0.040             # m (rectangle)
    palm_lever: float = DEFAULT_PALM_LEVER  # m, mass center to palm contact
    tip_force: float = 0.55           # N
    tip_loss_cone_deg: float = DEFAULT_LOSS_CONE_DEG
    contacts: list = field(default_factory=list)
    gravity: float = GRAVITY

    def __post_init__(self):
        if self.object_shape not in ("circle", "rectangle"):
            raise ValueError("object_shape must be 'circle' or 'rectangle'")
        if self.friction <= 0.0:
            raise ValueError("friction must be positive")
        for name in ("vehicle_mass", "diameter", "width", "height", "palm_lever"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def center_lever(self) -> float:
        """Moment arm from the mass center to the object center: palm
        lever plus the contact-to-center distance."""
        if self.object_shape == "circle":
            return self.palm_lever + 0.5 * self.diameter
        return self.palm_lever + 0.5 * self.height


@dataclass(frozen=True)
class ExternalWrench:
    """External load components; the pressing force f_y is only bounded,
    so closure is checked at both interval endpoints."""
    fx: float
    fy_bounds: tuple   # (low, high)
    torque: float

    def at_fy(self, fy: float) -> PlanarWrench:
        return PlanarWrench(self.fx, fy, self.torque)

    def endpoints(self) -> list[PlanarWrench]:
        return [self.at_fy(self.fy_bounds[0]), self.at_fy(self.fy_bounds[1])]


def external_wrench(scenario: WrenchScenario) -> ExternalWrench:
    """Gravity + residual-thrust load transferred to the object center.

    On a perch tilted by beta, the weight component along the surface
    loads -x and twists about a circular object's center through the
    moment arm; a flat-topped object takes no external torque.  The
    pressing component is bracketed between zero and the full weight
    component less residual thrust.
    """
    m, g, beta = scenario.vehicle_mass, scenario.gravity, scenario.tilt
    fx = -m * g * math.sin(beta)
    fy_high = max(m * g * math.cos(beta) - scenario.residual_thrust, 0.0)
    if scenario.object_shape == "circle":
        torque = m * g * math.sin(beta) * scenario.center_lever
    else:
        torque = 0.0
    return ExternalWrench(fx, (0.0, fy_high), torque)


def palm_normal_budget(scenario: WrenchScenario) -> float:
    """Normal force available at the pressed palm contact: the weight
    component into the surface less any residual thrust."""
    return max(scenario.vehicle_mass * scenario.gravity * math.cos(scenario.tilt)
               - scenario.residual_thrust, 0.0)


# --------------------------------------------------------------------------
# Scenario builders for the three shipped fixture geometries
# --------------------------------------------------------------------------

# Finger-tip placement on a circle too large to wrap: the tips press
# inward from just above the horizontal diameter.  The angle reproduces
# the bench-measured tip wrench direction.
LARGE_CIRCLE_TIP_ANGLE_DEG = 169.5096


def circle_two_finger_scenario(diameter: float = 0.115,
                               tilt_deg: float = 30.0,
                               mass: float = DEFAULT_MASS,
                               friction: float = DEFAULT_FRICTION,
                               residual_thrust: float = 0.0,
                               tip_force: float = 0.55,
                               tip_angle_deg: float = LARGE_CIRCLE_TIP_ANGLE_DEG,
                               loss_cone_deg: float = DEFAULT_LOSS_CONE_DEG,
                               palm_lever: float = DEFAULT_PALM_LEVER) -> WrenchScenario:
    """Two-finger grasper on a circular perch wider than its workspace:
    one friction cone where the palm presses the top, and two tip pushes
    toward the center from either side."""
    s = WrenchScenario(
        name=f"circle-{diameter * 1e3:g}mm-2finger",
        vehicle_mass=mass, tilt=math.radians(tilt_deg),
        residual_thrust=residual_thrust, friction=friction,
        object_shape="circle", diameter=diameter, palm_lever=palm_lever,
        tip_force=tip_force, tip_loss_cone_deg=loss_cone_deg)
    r = 0.5 * diameter
    budget = palm_normal_budget(s)
    s.contacts.append(ConeContact((0.0, r), (0.0, -1.0), budget, friction))
    # The tips press inward from either side, just above the horizontal
    # diameter (mirrored about the vertical axis).
    ang = math.radians(tip_angle_deg)
    for a in (ang, math.pi - ang):
        pos = (r * math.cos(a), r * math.sin(a))
        direction = (-math.cos(a), -math.sin(a))  # toward the center
        s.contacts.append(TipContact(pos, direction, tip_force, loss_cone_deg))
    return s


def rect_scenario(width: float = 0.020, height: float = 0.040,
                  mass: float = DEFAULT_MASS,
                  friction: float = DEFAULT_FRICTION,
                  residual_thrust: float = 0.0,
                  tip_magnitude: float = 0.52,
                  loss_cone_deg: float = DEFAULT_LOSS_CONE_DEG,
                  palm_lever: float = DEFAULT_PALM_LEVER) -> WrenchScenario:
    """Narrow rectangular object within the grasp radius, perched flat:
    friction cones at both top corners plus two 45-degree tip pushes
    toward the center from the lower side walls."""
    s = WrenchScenario(
        name=f"rect-{width * 1e3:g}x{height * 1e3:g}mm",
        vehicle_mass=mass, tilt=0.0, residual_thrust=residual_thrust,
        friction=friction, object_shape="rectangle", width=width,
        height=height, palm_lever=palm_lever, tip_force=tip_magnitude,
        tip_loss_cone_deg=loss_cone_deg)
    s.contacts.extend(rect_contact_set(s))
    return s


def rect_contact_set(scenario: WrenchScenario) -> list:
    """The four-contact model for a flat-topped rectangle: two friction
    cones at the top corners (full weight budget each) and two tip pushes
    at 45 degrees through the center from the lower side walls."""
    if scenario.object_shape != "rectangle":
        raise ValueError("rect_contact_set needs a rectangle scenario")
    half_w = 0.5 * scenario.width
    budget = palm_normal_budget(scenario)
    top = 0.5 * scenario.height
    contacts = [
        ConeContact((-half_w, top), (0.0, -1.0), budget, scenario.friction),
        ConeContact((half_w, top), (0.0, -1.0), budget, scenario.friction),
    ]
    u = math.sqrt(0.5)
    for side in (-1.0, 1.0):
        pos = (side * half_w, -half_w)     # 45-degree ray through the center
        direction = (-side * u, u)
        contacts.append(TipContact(pos, direction, scenario.tip_force,
                                   scenario.tip_loss_cone_deg))
    return contacts


def wrapped_circle_scenario(diameter: float = 0.055,
                            mass: float = DEFAULT_MASS,
                            friction: float = DEFAULT_FRICTION,
                            residual_thrust: float = 0.0,
                            finger_normal_force: float = 20.0,
                            finger_angle_deg: float = 130.0,
                            palm_lever: float = DEFAULT_PALM_LEVER) -> WrenchScenario:
    """Object small enough for the fingers to wrap: palm cone on top and
    a friction cone where each curled finger squeezes from below.  The
    squeeze budget is a representative value — the verdict (closure) does
    not depend on its scale."""
    s = WrenchScenario(
        name=f"wrap-{diameter * 1e3:g}mm",
        vehicle_mass=mass, tilt=0.0, residual_thrust=residual_thrust,
        friction=friction, object_shape="circle", diameter=diameter,
        palm_lever=palm_lever)
    r = 0.5 * diameter
    s.contacts.append(ConeContact((0.0, r), (0.0, -1.0),
                                  palm_normal_budget(s), friction))
    for a in (math.radians(-90.0 - (finger_angle_deg - 90.0)),
              math.radians(-90.0 + (finger_angle_deg - 90.0))):
        pos = (r * math.cos(a), r * math.sin(a))
        normal = (-math.cos(a), -math.sin(a))
        s.contacts.append(ConeContact(pos, normal, finger_normal_force, friction))
    return s


# --------------------------------------------------------------------------
# Generators, hull, closure
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    wrench: PlanarWrench
    label: str
    source: str   # 'cone-edge' | 'tip-edge'


def contact_wrenches(scenario: WrenchScenario) -> list[Generator]:
    """All generator wrenches: friction-cone edges plus tip loss-cone
    edges, each at its maximum magnitude."""
    gens: list[Generator] = []
    cone_i = tip_i = 0
    for c in scenario.contacts:
        if isinstance(c, ConeContact):
            cone_i += 1
            for j, w in enumerate(c.edge_wrenches()):
                gens.append(Generator(w, f"cone{cone_i}-edge{j + 1}", "cone-edge"))
        elif isinstance(c, TipContact):
            tip_i += 1
            for j, w in enumerate(c.edge_wrenches()):
                gens.append(Generator(w, f"tip{tip_i}-edge{j + 1}", "tip-edge"))
        else:
            raise TypeError(f"unknown contact kind {type(c).__name__}")
    return gens


def tip_nominal_wrenches(scenario: WrenchScenario) -> list[PlanarWrench]:
    """Nominal (loss-cone center) tip wrenches, for reporting."""
    return [c.nominal_wrench() for c in scenario.contacts
            if isinstance(c, TipContact)]


def cone_edge_wrenches(scenario: WrenchScenario) -> list[PlanarWrench]:
    """Friction-cone edge wrenches, for reporting."""
    out = []
    for c in scenario.contacts:
        if isinstance(c, ConeContact):
            out.extend(c.edge_wrenches())
    return out


@dataclass
class WrenchHull:
    """Convex hull of every sub-sum of the generators (the set of wrenches
    reachable with coefficients in {0,1}, whose hull equals the reachable
    set with coefficients in [0,1])."""
    vertices: np.ndarray          # (m, 3)
    equations: np.ndarray | None  # hull facets as [a, b] rows: a@x + b <= 0
    degenerate: bool

    def contains(self, w: PlanarWrench, tol: float = 1e-9) -> bool:
        if self.equations is None:
            return False
        x = w.as_array()
        return bool(np.all(self.equations[:, :3] @ x + self.equations[:, 3] <= tol))


def wrench_hull(generators: list[Generator]) -> WrenchHull:
    g = np.array([gen.wrench.as_array() for gen in generators])
    if len(g) == 0:
        raise ValueError("degenerate generator set: no generators")
    points = []
    for mask in itertools.product((0.0, 1.0), repeat=len(g)):
        points.append(np.asarray(mask) @ g)
    pts = np.unique(np.round(np.array(points), 12), axis=0)
    try:
        hull = ConvexHull(pts)
        return WrenchHull(pts[hull.vertices], hull.equations, False)
    except QhullError:
        return WrenchHull(pts, None, True)


@dataclass(frozen=True)
class SeparatingPlane:
    """Certificate of non-closure: normal h with h @ target strictly above
    the maximum of h over every reachable combination."""
    normal: np.ndarray
    margin: float


@dataclass
class ClosureResult:
    resistible: bool
    coefficients: np.ndarray | None      # per generator, in [0, 1]
    plane: SeparatingPlane | None
    residual: float                      # ||G lambda + external|| at best effort
    external: PlanarWrench


def force_closure(generators: list[Generator],
                  external: PlanarWrench) -> ClosureResult:
    """Decide whether -external is reachable as sum(lambda_i * g_i) with
    lambda in [0, 1]; certify either way."""
    if not generators:
        raise ValueError("degenerate generator set: no generators")
    g = np.array([gen.wrench.as_array() for gen in generators]).T  # 3 x n
    if not np.any(np.abs(g) > 0.0):
        raise ValueError("degenerate generator set: all generators zero")
    n = g.shape[1]
    target = -external.as_array()
    scale = max(1.0, float(np.max(np.abs(g))), float(np.max(np.abs(target))))

    # Feasibility LP: min sum(s+ + s-) s.t. G@lam + s+ - s- = target.
    c = np.concatenate([np.zeros(n), np.ones(6)])
    a_eq = np.hstack([g, np.eye(3), -np.eye(3)])
    bounds = [(0.0, 1.0)] * n + [(0.0, None)] * 6
    lp = linprog(c, A_eq=a_eq, b_eq=target, bounds=bounds, method="highs")
    if not lp.success:
        raise RuntimeError(f"closure LP failed: {lp.message}")
    slack = float(lp.fun)

    if slack <= 1e-9 * scale:
        lam = np.clip(lp.x[:n], 0.0, 1.0)
        residual = float(np.linalg.norm(g @ lam - target))
        return ClosureResult(True, lam, None, residual, external)

    # Projection of the target onto the reachable set for a separating plane.
    proj = lsq_linear(g, target, bounds=(0.0, 1.0))
    lam = proj.x
    reached = g @ lam
    normal = target - reached
    norm = float(np.linalg.norm(normal))
    if norm > 0.0:
        normal = normal / norm
    reach_max = float(np.sum(np.maximum(g.T @ normal, 0.0)))
    margin = float(normal @ target - reach_max)
    plane = SeparatingPlane(normal, margin)
    return ClosureResult(False, None, plane, float(np.linalg.norm(reached - target)),
                         external)


@dataclass
class ScenarioVerdict:
    scenario: WrenchScenario
    resistible: bool
    results: list[ClosureResult]         # one per pressing-force endpoint
    hull: WrenchHull

    @property
    def verdict(self) -> str:
        return "Resistible" if self.resistible else "NotResistible"


def closure_verdict(scenario: WrenchScenario) -> ScenarioVerdict:
    """Closure for the scenario's external wrench, worst-cased over the
    pressing-force interval endpoints."""
    gens = contact_wrenches(scenario)
    ext = external_wrench(scenario)
    results = [force_closure(gens, w) for w in ext.endpoints()]
    hull = wrench_hull(gens)
    return ScenarioVerdict(scenario, all(r.resistible for r in results),
                           results, hull)
