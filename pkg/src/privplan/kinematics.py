#!/usr/bin/env python3
"""
Modelo cinemático de cadena serie

Cinemática directa (vectorizada por lotes de configuraciones), pose del cono
del sensor, métrica ponderada del espacio de configuraciones, interpolación
lineal y muestreo uniforme con semilla.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError
from .geometry import Cone, Primitive, Transform, UNIT_TOLERANCE


# Pesos de la métrica por defecto: metros y radianes a 1, el yaw de la base a 0.5
DEFAULT_METRIC_WEIGHT = 1.0
DEFAULT_BASE_WEIGHTS = (1.0, 1.0, 0.5)

# Config: vector de d escalares articulares (rad o m)
Config = np.ndarray


class JointKind(str, Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"
    PLANAR_BASE = "planar_base"


@dataclass(frozen=True, eq=False)
class JointSpec:
    """
    Articulación de la cadena

    planar_base agrupa tres grados de libertad escalares (x, y, yaw); el resto aporta uno.
    limits y metric_weights llevan una entrada por grado de libertad escalar.
    """

    name: str
    kind: JointKind
    limits: Tuple[Tuple[float, float], ...]
    metric_weights: Tuple[float, ...]
    axis: Optional[np.ndarray] = None
    origin: Optional[Transform] = None

    def __post_init__(self):
        kind = JointKind(self.kind)
        object.__setattr__(self, "kind", kind)
        limits = tuple((float(lo), float(hi)) for lo, hi in self.limits)
        weights = tuple(float(w) for w in self.metric_weights)
        dof = 3 if kind is JointKind.PLANAR_BASE else 1
        if len(limits) != dof or len(weights) != dof:
            raise ValueError(f"joint '{self.name}' needs {dof} limits and metric weights")
        for lo, hi in limits:
            if not lo < hi:
                raise ValueError(f"joint '{self.name}': lower limit must be < upper limit")
        if any(not w > 0 for w in weights):
            raise ValueError(f"joint '{self.name}': metric_weight must be > 0")
        object.__setattr__(self, "limits", limits)
        object.__setattr__(self, "metric_weights", weights)
        if self.origin is None:
            object.__setattr__(self, "origin", Transform.identity())
        if kind is JointKind.PLANAR_BASE:
            object.__setattr__(self, "axis", None)
            return
        if self.axis is None:
            raise ValueError(f"joint '{self.name}' needs an axis")
        axis = np.array(self.axis, dtype=float).reshape(3)
        if abs(float(np.linalg.norm(axis)) - 1.0) > UNIT_TOLERANCE:
            raise ValueError(f"joint '{self.name}': axis must be a unit vector")
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)

    @classmethod
    def revolute(cls, name: str, axis: Sequence[float], limits: Tuple[float, float],
                 origin: Optional[Transform] = None, metric_weight: float = DEFAULT_METRIC_WEIGHT) -> "JointSpec":
        return cls(name, JointKind.REVOLUTE, (tuple(limits),), (metric_weight,), axis, origin)

    @classmethod
    def prismatic(cls, name: str, axis: Sequence[float], limits: Tuple[float, float],
                  origin: Optional[Transform] = None, metric_weight: float = DEFAULT_METRIC_WEIGHT) -> "JointSpec":
        return cls(name, JointKind.PRISMATIC, (tuple(limits),), (metric_weight,), axis, origin)

    @classmethod
    def planar_base(cls, name: str, x_limits: Tuple[float, float], y_limits: Tuple[float, float],
                    yaw_limits: Tuple[float, float] = (-math.pi, math.pi),
                    origin: Optional[Transform] = None,
                    metric_weights: Sequence[float] = DEFAULT_BASE_WEIGHTS) -> "JointSpec":
        return cls(name, JointKind.PLANAR_BASE, (tuple(x_limits), tuple(y_limits), tuple(yaw_limits)),
                   tuple(metric_weights), None, origin)

    @property
    def dof(self) -> int:
        return len(self.limits)

    @cached_property
    def origin_matrix(self) -> np.ndarray:
        return self.origin.as_matrix()

    def motion(self, values: np.ndarray) -> np.ndarray:
        """Transformaciones homogéneas (N, 4, 4) del movimiento articular para valores (N, dof)"""
        count = values.shape[0]
        out = np.zeros((count, 4, 4))
        out[:, 3, 3] = 1.0
        if self.kind is JointKind.PRISMATIC:
            out[:, 0, 0] = out[:, 1, 1] = out[:, 2, 2] = 1.0
            out[:, :3, 3] = values[:, :1] * self.axis
            return out
        if self.kind is JointKind.PLANAR_BASE:
            cos_yaw, sin_yaw = np.cos(values[:, 2]), np.sin(values[:, 2])
            out[:, 0, 0], out[:, 0, 1] = cos_yaw, -sin_yaw
            out[:, 1, 0], out[:, 1, 1] = sin_yaw, cos_yaw
            out[:, 2, 2] = 1.0
            out[:, 0, 3], out[:, 1, 3] = values[:, 0], values[:, 1]
            return out
        # Rodrigues: R = I + sinθ K + (1 − cosθ) K²
        kx, ky, kz = self.axis
        k = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
        theta = values[:, 0]
        out[:, :3, :3] = (np.eye(3)[None] + np.sin(theta)[:, None, None] * k[None]
                          + (1.0 - np.cos(theta))[:, None, None] * (k @ k)[None])
        return out


@dataclass(frozen=True, eq=False)
class SensorMount:
    """Cámara montada en un eslabón: el eje del cono es el +x del marco de montaje"""

    link: int
    transform: Transform
    half_angle: float
    range: float

    @classmethod
    def from_fov(cls, link: int, transform: Transform, fov: float, range: float) -> "SensorMount":
        return cls(link, transform, fov / 2.0, range)

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.transform.as_matrix()


@dataclass(frozen=True, eq=False)
class RobotModel:
    """
    Robot A con d grados de libertad: cadena de articulaciones, primitiva opcional
    por eslabón (en el marco del eslabón) y montaje del sensor
    """

    joints: Tuple[JointSpec, ...]
    links: Tuple[Optional[Primitive], ...]
    sensor_mount: SensorMount
    base: Optional[Transform] = None
    name: str = "robot"

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "links", tuple(self.links))
        if not self.joints:
            raise ValueError("robot needs at least one joint")
        if len(self.links) != len(self.joints):
            raise ValueError("robot needs one (optional) link primitive per joint")
        if not 0 <= self.sensor_mount.link < len(self.joints):
            raise ValueError(f"sensor mount link index {self.sensor_mount.link} out of range")
        if self.base is None:
            object.__setattr__(self, "base", Transform.identity())

    @cached_property
    def dof(self) -> int:
        return sum(joint.dof for joint in self.joints)

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        starts, total = [], 0
        for joint in self.joints:
            starts.append(total)
            total += joint.dof
        return tuple(starts)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([lo for joint in self.joints for lo, _ in joint.limits])

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([hi for joint in self.joints for _, hi in joint.limits])

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([w for joint in self.joints for w in joint.metric_weights])

    def check_config(self, q: Sequence[float]) -> Config:
        q = np.asarray(q, dtype=float)
        if q.ndim != 1 or q.shape[0] != self.dof:
            raise DimensionError(self.dof, q.shape[-1] if q.ndim else 1)
        return q

    def check_batch(self, configs: np.ndarray) -> np.ndarray:
        configs = np.asarray(configs, dtype=float)
        if configs.ndim == 1:
            configs = configs[None, :]
        if configs.ndim != 2 or configs.shape[1] != self.dof:
            raise DimensionError(self.dof, configs.shape[-1])
        return configs

    def within_limits(self, configs: np.ndarray) -> np.ndarray:
        configs = self.check_batch(configs)
        return np.all((configs >= self.lower) & (configs <= self.upper), axis=1)

    def with_base(self, base: Transform) -> "RobotModel":
        return replace(self, base=base)


# ============================================================================
# CINEMÁTICA DIRECTA
# ============================================================================

def forward_kinematics_batch(robot: RobotModel, configs: np.ndarray) -> np.ndarray:
    """
    Poses de los eslabones en el mundo para un lote de configuraciones

    Returns:
        Array (N, J, 4, 4) con una transformación homogénea por articulación
    """
    configs = robot.check_batch(configs)
    count = configs.shape[0]
    current = np.broadcast_to(robot.base.as_matrix(), (count, 4, 4))
    poses = np.empty((count, len(robot.joints), 4, 4))
    for index, (joint, start) in enumerate(zip(robot.joints, robot.offsets)):
        current = current @ joint.origin_matrix
        current = current @ joint.motion(configs[:, start:start + joint.dof])
        poses[:, index] = current
    return poses


def forward_kinematics(robot: RobotModel, q: Config) -> List[Transform]:
    """Una Transform en el mundo por articulación/eslabón, compuestas en orden de cadena"""
    q = robot.check_config(q)
    poses = forward_kinematics_batch(robot, q[None, :])[0]
    return [Transform.from_matrix(pose) for pose in poses]


def sensor_cones_batch(robot: RobotModel, configs: np.ndarray, poses: Optional[np.ndarray] = None):
    """
    Vértices y ejes (N, 3) de los conos del sensor para un lote de configuraciones
    """
    if poses is None:
        poses = forward_kinematics_batch(robot, configs)
    mount = robot.sensor_mount
    frames = poses[:, mount.link] @ mount.matrix
    axes = frames[:, :3, 0]
    axes = axes / np.linalg.norm(axes, axis=1, keepdims=True)
    return frames[:, :3, 3], axes


def sensor_cone_at(robot: RobotModel, q: Config) -> Cone:
    q = robot.check_config(q)
    apexes, axes = sensor_cones_batch(robot, q[None, :])
    mount = robot.sensor_mount
    return Cone(apexes[0], axes[0], mount.half_angle, mount.range)


# ============================================================================
# MÉTRICA, INTERPOLACIÓN Y MUESTREO
# ============================================================================

def cspace_distance(robot: RobotModel, a: Config, b: Config) -> float:
    """Distancia euclídea ponderada sqrt(Σ w_i² (a_i − b_i)²)"""
    a = robot.check_config(a)
    b = robot.check_config(b)
    return float(np.linalg.norm(robot.weights * (a - b)))


def interpolate(a: Config, b: Config, t: float) -> Config:
    """Interpolación en línea recta; t=0 devuelve a y t=1 devuelve b exactamente"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(a.shape[-1], b.shape[-1])
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"interpolation parameter t={t} outside [0, 1]")
    return (1.0 - t) * a + t * b


def interpolate_batch(a: Config, b: Config, ts: np.ndarray) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)[:, None]
    return (1.0 - ts) * a[None, :] + ts * b[None, :]


def subdivision_count(length: float, resolution: float) -> int:
    """Intervalos ⌈length / δ⌉ (0 para un tramo de longitud nula)"""
    if length <= 0.0:
        return 0
    return max(1, int(math.ceil(length / resolution)))


def derive_seed(seed: int, *keys: int) -> int:
    """Semilla entera de 32 bits derivada de (semilla maestra, claves)"""
    return int(np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1)[0])


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Generador PCG64 para el flujo (semilla, claves)

    Los flujos con distinta clave son independientes, lo que hace que las
    ejecuciones en paralelo sean deterministas.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def sample_config(robot: RobotModel, rng: np.random.Generator) -> Config:
    """Configuración uniforme dentro de los límites articulares"""
    return rng.uniform(robot.lower, robot.upper)


def sample_configs(robot: RobotModel, rng: np.random.Generator, count: int) -> np.ndarray:
    """Bloque de `count` muestras; consume el generador igual que `count` llamadas a sample_config"""
    return rng.uniform(robot.lower, robot.upper, size=(count, robot.dof))
