#!/usr/bin/env python3
"""
Modelo de escena, lectura/validación de ficheros de escena y escenarios incluidos

Formato: un documento JSON UTF-8 con claves `format_version`, `robot`,
`obstacles`, `privacy_regions` y `meta` (ver docs/scene-format.md).
Ángulos en grados dentro del fichero y en radianes en memoria; longitudes en metros.
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import SceneParseError, SceneValidationError
from .geometry import Primitive, PrimitiveKind, Transform
from .kinematics import DEFAULT_BASE_WEIGHTS, JointKind, JointSpec, RobotModel, SensorMount


SCENE_FORMAT_VERSION = 1

# Rutas a los escenarios incluidos
DATA_DIR = os.path.join(os.path.dirname(__file__), "../../data")
SCENARIOS_DIR = os.path.join(DATA_DIR, "scenarios")
BUILTIN_SCENARIOS = ("manip_1", "manip_3", "nav_9")

# Valores por defecto cuando un fichero de escena no trae bloque meta.scenario
DEFAULT_RESOLUTION = 0.05
DEFAULT_PRIVACY_RESOLUTION = 0.05
DEFAULT_ROADMAP_N = 500
DEFAULT_CONN_RADIUS = 1.0
DEFAULT_WEIGHTS = (1.0, 2.0, 5.0, 10.0, -2.0, -5.0, -10.0)
DEFAULT_QUERY_ATTEMPTS = 10000


@dataclass(frozen=True, eq=False)
class PrivacyRegion:
    """Región de privacidad esférica (centro en el mundo, radio en metros)"""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.array(self.center, dtype=float).reshape(3)
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        if not self.radius > 0:
            raise ValueError("privacy region radius must be > 0")


@dataclass(frozen=True, eq=False)
class Scene:
    """Espacio de trabajo: obstáculos o, regiones de privacidad R_p (k = len) y el robot"""

    name: str
    robot: RobotModel
    obstacles: Tuple[Primitive, ...] = ()
    privacy_regions: Tuple[PrivacyRegion, ...] = ()
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "privacy_regions", tuple(self.privacy_regions))

    @property
    def privacy_centers(self) -> np.ndarray:
        return np.array([r.center for r in self.privacy_regions]).reshape(-1, 3)

    @property
    def privacy_radii(self) -> np.ndarray:
        return np.array([r.radius for r in self.privacy_regions], dtype=float)


@dataclass(frozen=True)
class RoadmapDefaults:
    n: int = DEFAULT_ROADMAP_N
    conn_radius: float = DEFAULT_CONN_RADIUS
    resolution: float = DEFAULT_RESOLUTION
    privacy_resolution: float = DEFAULT_PRIVACY_RESOLUTION


@dataclass(frozen=True)
class QuerySpec:
    """Regla de generación de inicio/objetivo: muestreo uniforme con rechazo"""

    rule: str = "uniform_rejection"
    max_attempts: int = DEFAULT_QUERY_ATTEMPTS


@dataclass(frozen=True)
class ScenarioBundle:
    scene: Scene
    query: QuerySpec = QuerySpec()
    roadmap: RoadmapDefaults = RoadmapDefaults()
    weights: Tuple[float, ...] = DEFAULT_WEIGHTS

    def __post_init__(self):
        if not self.weights:
            raise SceneValidationError("meta.scenario.weights", "weight sweep must not be empty")
        if 1.0 not in self.weights:
            raise SceneValidationError("meta.scenario.weights", "weight sweep must contain the agnostic weight 1")


# ============================================================================
# LECTURA Y VALIDACIÓN
# ============================================================================

def _fail(path: str, message: str):
    raise SceneValidationError(path, message)


def _require(obj: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if key not in obj:
        _fail(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _number(value: Any, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(path, "expected a finite number")
    if positive and not value > 0:
        _fail(path, "must be > 0")
    return float(value)


def _vector(value: Any, size: int, path: str) -> List[float]:
    if not isinstance(value, list) or len(value) != size:
        _fail(path, f"expected a list of {size} numbers")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _interval(value: Any, path: str, degrees: bool = False) -> Tuple[float, float]:
    lo, hi = _vector(value, 2, path)
    if not lo < hi:
        _fail(path, "lower limit must be < upper limit")
    if degrees:
        return math.radians(lo), math.radians(hi)
    return lo, hi


def _unit_axis(value: Any, path: str) -> List[float]:
    axis = _vector(value, 3, path)
    if abs(math.sqrt(sum(a * a for a in axis)) - 1.0) > 1e-9:
        _fail(path, "axis must be a unit vector")
    return axis


def _pose(obj: Optional[Dict[str, Any]], path: str) -> Transform:
    if obj is None:
        return Transform.identity()
    if not isinstance(obj, dict):
        _fail(path, "expected an object with xyz / rpy_deg")
    xyz = _vector(obj.get("xyz", [0.0, 0.0, 0.0]), 3, f"{path}.xyz")
    rpy = _vector(obj.get("rpy_deg", [0.0, 0.0, 0.0]), 3, f"{path}.rpy_deg")
    return Transform.from_xyz_rpy(xyz, [math.radians(a) for a in rpy])


def _primitive(obj: Dict[str, Any], path: str) -> Primitive:
    kind = _require(obj, "kind", path)
    try:
        kind = PrimitiveKind(kind)
    except ValueError:
        _fail(f"{path}.kind", f"unknown primitive kind '{kind}'")
    pose = _pose(obj.get("pose"), f"{path}.pose")
    if kind is PrimitiveKind.SPHERE:
        return Primitive.sphere(_number(_require(obj, "radius", path), f"{path}.radius", positive=True), pose)
    if kind is PrimitiveKind.CAPSULE:
        radius = _number(_require(obj, "radius", path), f"{path}.radius", positive=True)
        length = _number(_require(obj, "length", path), f"{path}.length", positive=True)
        return Primitive.capsule(radius, length, pose)
    size = _vector(_require(obj, "size", path), 3, f"{path}.size")
    for i, s in enumerate(size):
        if not s > 0:
            _fail(f"{path}.size[{i}]", "must be > 0")
    return Primitive.box(size, pose)


def _joint(obj: Dict[str, Any], path: str) -> Tuple[JointSpec, Optional[Primitive]]:
    kind = _require(obj, "kind", path)
    try:
        kind = JointKind(kind)
    except ValueError:
        _fail(f"{path}.kind", f"unknown joint kind '{kind}'")
    name = str(obj.get("name", path))
    origin = _pose(obj.get("origin"), f"{path}.origin")
    link = _primitive(obj["link"], f"{path}.link") if obj.get("link") is not None else None

    if kind is JointKind.PLANAR_BASE:
        limits = _require(obj, "limits", path)
        if not isinstance(limits, dict):
            _fail(f"{path}.limits", "expected an object with x, y, yaw_deg")
        x = _interval(_require(limits, "x", f"{path}.limits"), f"{path}.limits.x")
        y = _interval(_require(limits, "y", f"{path}.limits"), f"{path}.limits.y")
        yaw = _interval(limits.get("yaw_deg", [-180.0, 180.0]), f"{path}.limits.yaw_deg", degrees=True)
        weights = obj.get("metric_weight", list(DEFAULT_BASE_WEIGHTS))
        weights = [_number(w, f"{path}.metric_weight[{i}]", positive=True)
                   for i, w in enumerate(_vector(weights, 3, f"{path}.metric_weight"))]
        return JointSpec.planar_base(name, x, y, yaw, origin, weights), link

    axis = _unit_axis(_require(obj, "axis", path), f"{path}.axis")
    weight = _number(obj.get("metric_weight", 1.0), f"{path}.metric_weight", positive=True)
    if kind is JointKind.REVOLUTE:
        limits = _interval(_require(obj, "limits_deg", path), f"{path}.limits_deg", degrees=True)
        return JointSpec.revolute(name, axis, limits, origin, weight), link
    limits = _interval(_require(obj, "limits", path), f"{path}.limits")
    return JointSpec.prismatic(name, axis, limits, origin, weight), link


def _robot(obj: Dict[str, Any]) -> RobotModel:
    joints_raw = _require(obj, "joints", "robot")
    if not isinstance(joints_raw, list) or not joints_raw:
        _fail("robot.joints", "robot needs at least one joint")
    parsed = [_joint(j, f"robot.joints[{i}]") for i, j in enumerate(joints_raw)]

    sensor = _require(obj, "sensor", "robot")
    link = _require(sensor, "link", "robot.sensor")
    if isinstance(link, bool) or not isinstance(link, int) or not 0 <= link < len(parsed):
        _fail("robot.sensor.link", f"link index must be an integer in [0, {len(parsed) - 1}]")
    fov = _number(_require(sensor, "fov_deg", "robot.sensor"), "robot.sensor.fov_deg", positive=True)
    if not fov < 180.0:
        _fail("robot.sensor.fov_deg", "field of view must be < 180 degrees")
    cone_range = _number(_require(sensor, "range", "robot.sensor"), "robot.sensor.range", positive=True)
    mount = SensorMount.from_fov(link, _pose(sensor.get("mount"), "robot.sensor.mount"),
                                 math.radians(fov), cone_range)

    return RobotModel(
        joints=tuple(j for j, _ in parsed),
        links=tuple(p for _, p in parsed),
        sensor_mount=mount,
        base=_pose(obj.get("base"), "robot.base"),
        name=str(obj.get("name", "robot")),
    )


def _scene_from_document(doc: Any) -> Scene:
    if not isinstance(doc, dict):
        _fail("<root>", "expected a JSON object")
    version = _require(doc, "format_version", "")
    if version != SCENE_FORMAT_VERSION:
        _fail("format_version", f"unsupported format_version {version!r} (expected {SCENE_FORMAT_VERSION})")

    robot = _robot(_require(doc, "robot", ""))

    obstacles_raw = doc.get("obstacles", [])
    if not isinstance(obstacles_raw, list):
        _fail("obstacles", "expected a list")
    obstacles = [_primitive(o, f"obstacles[{i}]") for i, o in enumerate(obstacles_raw)]

    regions_raw = doc.get("privacy_regions", [])
    if not isinstance(regions_raw, list):
        _fail("privacy_regions", "expected a list")
    regions = []
    for i, region in enumerate(regions_raw):
        center = _vector(_require(region, "center", f"privacy_regions[{i}]"), 3, f"privacy_regions[{i}].center")
        radius = _number(_require(region, "radius", f"privacy_regions[{i}]"),
                         f"privacy_regions[{i}].radius", positive=True)
        regions.append(PrivacyRegion(center, radius))

    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        _fail("meta", "expected an object")
    return Scene(str(meta.get("name", robot.name)), robot, tuple(obstacles), tuple(regions), meta)


def _read_document(source: Union[str, Path]) -> Any:
    if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
        with open(source, "r", encoding="utf-8") as f:
            text = f.read()
    else:
        text = str(source)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneParseError(e.msg, e.lineno, e.colno) from e


def load_scene(source: Union[str, Path]) -> Scene:
    """
    Carga y valida una escena

    Args:
        source: ruta al fichero o el propio texto JSON

    Returns:
        Scene totalmente validada
    """
    return _scene_from_document(_read_document(source))


def _bundle_from_meta(scene: Scene) -> ScenarioBundle:
    spec = scene.meta.get("scenario")
    if spec is None:
        return ScenarioBundle(scene)
    if not isinstance(spec, dict):
        _fail("meta.scenario", "expected an object")
    roadmap = spec.get("roadmap", {})
    if not isinstance(roadmap, dict):
        _fail("meta.scenario.roadmap", "expected an object")
    n = roadmap.get("n", DEFAULT_ROADMAP_N)
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        _fail("meta.scenario.roadmap.n", "expected a non-negative integer")
    defaults = RoadmapDefaults(
        n=n,
        conn_radius=_number(roadmap.get("conn_radius", DEFAULT_CONN_RADIUS),
                            "meta.scenario.roadmap.conn_radius", positive=True),
        resolution=_number(roadmap.get("resolution", DEFAULT_RESOLUTION),
                           "meta.scenario.roadmap.resolution", positive=True),
        privacy_resolution=_number(roadmap.get("privacy_resolution", DEFAULT_PRIVACY_RESOLUTION),
                                   "meta.scenario.roadmap.privacy_resolution", positive=True),
    )
    weights = spec.get("weights", list(DEFAULT_WEIGHTS))
    if not isinstance(weights, list):
        _fail("meta.scenario.weights", "expected a list of numbers")
    weights = tuple(_number(w, f"meta.scenario.weights[{i}]") for i, w in enumerate(weights))
    for i, w in enumerate(weights):
        if abs(w) < 1.0:
            _fail(f"meta.scenario.weights[{i}]", "weight magnitude must be ≥ 1")
    query = spec.get("query", {})
    if not isinstance(query, dict):
        _fail("meta.scenario.query", "expected an object")
    attempts = query.get("max_attempts", DEFAULT_QUERY_ATTEMPTS)
    if isinstance(attempts, bool) or not isinstance(attempts, int) or attempts < 1:
        _fail("meta.scenario.query.max_attempts", "expected a positive integer")
    rule = query.get("rule", "uniform_rejection")
    if rule != "uniform_rejection":
        _fail("meta.scenario.query.rule", f"unknown query rule '{rule}'")
    return ScenarioBundle(scene, QuerySpec(rule, attempts), defaults, weights)


def load_scenario_file(source: Union[str, Path]) -> ScenarioBundle:
    """Escena + bloque meta.scenario (parámetros de roadmap, barrido de pesos, regla de consultas)"""
    return _bundle_from_meta(load_scene(source))


def builtin_scenario_names() -> Tuple[str, ...]:
    return BUILTIN_SCENARIOS


def builtin_scenario(name: str) -> ScenarioBundle:
    """Escenarios manip_1 / manip_3 (brazo de 8 gdl) y nav_9 (base + cabeza, 5 gdl)"""
    if name not in BUILTIN_SCENARIOS:
        raise ValueError(f"unknown scenario '{name}'. Options: {list(BUILTIN_SCENARIOS)}")
    return load_scenario_file(Path(SCENARIOS_DIR) / f"{name}.json")


# ============================================================================
# SERIALIZACIÓN
# ============================================================================

def _pose_to_dict(t: Transform) -> Dict[str, List[float]]:
    return {
        "xyz": [float(v) for v in t.translation],
        "rpy_deg": [math.degrees(float(a)) for a in t.rpy()],
    }


def _primitive_to_dict(p: Primitive) -> Dict[str, Any]:
    out: Dict[str, Any] = {"kind": p.kind.value}
    if p.kind is PrimitiveKind.BOX:
        out["size"] = list(p.dimensions)
    else:
        out["radius"] = p.dimensions[0]
        if p.kind is PrimitiveKind.CAPSULE:
            out["length"] = p.dimensions[1]
    out["pose"] = _pose_to_dict(p.pose)
    return out


def _joint_to_dict(joint: JointSpec, link: Optional[Primitive]) -> Dict[str, Any]:
    out: Dict[str, Any] = {"name": joint.name, "kind": joint.kind.value}
    if joint.kind is JointKind.PLANAR_BASE:
        (x, y, yaw) = joint.limits
        out["limits"] = {"x": list(x), "y": list(y), "yaw_deg": [math.degrees(a) for a in yaw]}
        out["metric_weight"] = list(joint.metric_weights)
    else:
        out["axis"] = [float(a) for a in joint.axis]
        lo, hi = joint.limits[0]
        if joint.kind is JointKind.REVOLUTE:
            out["limits_deg"] = [math.degrees(lo), math.degrees(hi)]
        else:
            out["limits"] = [lo, hi]
        out["metric_weight"] = joint.metric_weights[0]
    out["origin"] = _pose_to_dict(joint.origin)
    if link is not None:
        out["link"] = _primitive_to_dict(link)
    return out


def scene_to_document(scene: Scene) -> Dict[str, Any]:
    robot = scene.robot
    mount = robot.sensor_mount
    return {
        "format_version": SCENE_FORMAT_VERSION,
        "meta": dict(scene.meta, name=scene.name),
        "robot": {
            "name": robot.name,
            "base": _pose_to_dict(robot.base),
            "joints": [_joint_to_dict(j, l) for j, l in zip(robot.joints, robot.links)],
            "sensor": {
                "link": mount.link,
                "mount": _pose_to_dict(mount.transform),
                "fov_deg": math.degrees(2.0 * mount.half_angle),
                "range": mount.range,
            },
        },
        "obstacles": [_primitive_to_dict(o) for o in scene.obstacles],
        "privacy_regions": [
            {"center": [float(c) for c in r.center], "radius": r.radius} for r in scene.privacy_regions
        ],
    }


def serialize_scene(scene: Scene) -> str:
    """Texto JSON canónico de la escena (inverso de load_scene)"""
    return json.dumps(scene_to_document(scene), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def scene_digest(scene: Scene) -> str:
    """sha256 de la serialización canónica; liga un roadmap guardado a su escena"""
    return hashlib.sha256(serialize_scene(scene).encode("utf-8")).hexdigest()
