#!/usr/bin/env python3
"""
Geometría de cuerpo rígido y predicados geométricos

Transformaciones rígidas (cuaternión + traslación), primitivas de colisión
(esfera, cápsula, caja), el cono de visión finito del sensor y los predicados
exactos que usan el chequeo de validez y la evaluación de privacidad.

Todas las funciones son puras sobre valores inmutables.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation


# Casos rasantes dentro de esta tolerancia cuentan como intersección (conjuntos cerrados)
GRAZING_TOLERANCE = 1e-9
UNIT_TOLERANCE = 1e-9

# Iteraciones de sección áurea para minimizar una SDF convexa sobre un segmento
GOLDEN_ITERATIONS = 48
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _as_vector(values, size: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=float).reshape(-1)
    if array.shape != (size,):
        raise ValueError(f"{name} must have {size} components, got {array.shape[0]}")
    array.setflags(write=False)
    return array


# ============================================================================
# TRANSFORMACIONES RÍGIDAS
# ============================================================================

@dataclass(frozen=True, eq=False)
class Transform:
    """
    Transformación rígida: rotación (cuaternión unitario x, y, z, w) + traslación en metros
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = _as_vector(self.rotation, 4, "rotation")
        if abs(float(np.linalg.norm(rotation)) - 1.0) > UNIT_TOLERANCE:
            raise ValueError("rotation quaternion must have unit norm")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", _as_vector(self.translation, 3, "translation"))

    @classmethod
    def identity(cls) -> "Transform":
        return cls(rotation=(0.0, 0.0, 0.0, 1.0), translation=(0.0, 0.0, 0.0))

    @classmethod
    def from_rotation(cls, rotation: Rotation, translation: Sequence[float] = (0.0, 0.0, 0.0)) -> "Transform":
        return cls(rotation=rotation.as_quat(), translation=translation)

    @classmethod
    def from_xyz_rpy(cls, xyz: Sequence[float] = (0.0, 0.0, 0.0), rpy: Sequence[float] = (0.0, 0.0, 0.0)) -> "Transform":
        """
        Construye la transformación desde traslación y roll-pitch-yaw (radianes, ejes fijos)
        """
        return cls.from_rotation(Rotation.from_euler("xyz", rpy), xyz)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Transform":
        matrix = np.asarray(matrix, dtype=float)
        return cls.from_rotation(Rotation.from_matrix(matrix[:3, :3]), matrix[:3, 3])

    @property
    def rot(self) -> Rotation:
        return Rotation.from_quat(self.rotation)

    def rpy(self) -> np.ndarray:
        return self.rot.as_euler("xyz")

    def compose(self, other: "Transform") -> "Transform":
        """self ∘ other: aplica primero `other` y luego `self`"""
        rot = self.rot
        return Transform.from_rotation(rot * other.rot, rot.apply(other.translation) + self.translation)

    def inverse(self) -> "Transform":
        inv = self.rot.inv()
        return Transform.from_rotation(inv, -inv.apply(self.translation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.rot.apply(np.asarray(points, dtype=float)) + self.translation

    def rotate(self, vectors: np.ndarray) -> np.ndarray:
        return self.rot.apply(np.asarray(vectors, dtype=float))

    def as_matrix(self) -> np.ndarray:
        matrix = np.eye(4)
        matrix[:3, :3] = self.rot.as_matrix()
        matrix[:3, 3] = self.translation
        return matrix

    def allclose(self, other: "Transform", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.as_matrix(), other.as_matrix(), atol=atol, rtol=0.0))


def transform_point(t: Transform, p: Sequence[float]) -> np.ndarray:
    """Movimiento rígido de un punto"""
    return t.apply(np.asarray(p, dtype=float).reshape(3))


def transform_direction(t: Transform, v: Sequence[float]) -> np.ndarray:
    """Solo la rotación: las direcciones no se trasladan"""
    return t.rotate(np.asarray(v, dtype=float).reshape(3))


# ============================================================================
# PRIMITIVAS DE COLISIÓN
# ============================================================================

class PrimitiveKind(str, Enum):
    SPHERE = "sphere"
    CAPSULE = "capsule"
    BOX = "box"


@dataclass(frozen=True, eq=False)
class Primitive:
    """
    Primitiva de colisión posada

    dimensions según el tipo:
        sphere  -> (radius,)
        capsule -> (radius, length)  segmento central sobre el eje z local, centrado en el origen
        box     -> (size_x, size_y, size_z)  extensiones completas
    """

    kind: PrimitiveKind
    dimensions: Tuple[float, ...]
    pose: Transform = None

    def __post_init__(self):
        kind = PrimitiveKind(self.kind)
        dims = tuple(float(d) for d in self.dimensions)
        expected = {PrimitiveKind.SPHERE: 1, PrimitiveKind.CAPSULE: 2, PrimitiveKind.BOX: 3}[kind]
        if len(dims) != expected:
            raise ValueError(f"{kind.value} needs {expected} dimensions, got {len(dims)}")
        if any(not d > 0 for d in dims):
            raise ValueError(f"{kind.value} dimensions must be > 0")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "dimensions", dims)
        if self.pose is None:
            object.__setattr__(self, "pose", Transform.identity())

    @classmethod
    def sphere(cls, radius: float, pose: Optional[Transform] = None) -> "Primitive":
        return cls(PrimitiveKind.SPHERE, (radius,), pose)

    @classmethod
    def capsule(cls, radius: float, length: float, pose: Optional[Transform] = None) -> "Primitive":
        return cls(PrimitiveKind.CAPSULE, (radius, length), pose)

    @classmethod
    def box(cls, size: Sequence[float], pose: Optional[Transform] = None) -> "Primitive":
        return cls(PrimitiveKind.BOX, tuple(size), pose)

    @property
    def is_round(self) -> bool:
        return self.kind is not PrimitiveKind.BOX

    @property
    def radius(self) -> float:
        if not self.is_round:
            raise AttributeError("box has no radius")
        return self.dimensions[0]

    @property
    def half_length(self) -> float:
        return self.dimensions[1] / 2.0 if self.kind is PrimitiveKind.CAPSULE else 0.0

    @property
    def half_extents(self) -> np.ndarray:
        if self.kind is not PrimitiveKind.BOX:
            raise AttributeError(f"{self.kind.value} has no extents")
        return np.asarray(self.dimensions) / 2.0

    @property
    def bounding_radius(self) -> float:
        if self.kind is PrimitiveKind.BOX:
            return float(np.linalg.norm(self.half_extents))
        return self.radius + self.half_length

    def posed(self, t: Transform) -> "Primitive":
        """La misma primitiva expresada a través de `t` (p. ej. marco del eslabón -> mundo)"""
        return Primitive(self.kind, self.dimensions, t.compose(self.pose))

    def local_segment(self) -> Tuple[np.ndarray, np.ndarray]:
        h = self.half_length
        return np.array([0.0, 0.0, -h]), np.array([0.0, 0.0, h])

    def segment(self) -> Tuple[np.ndarray, np.ndarray]:
        """Extremos del segmento central en el mundo (coinciden para la esfera)"""
        p0, p1 = self.local_segment()
        return self.pose.apply(p0), self.pose.apply(p1)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """SDF de la primitiva evaluada en puntos del mundo (..., 3); negativa dentro"""
        points = np.asarray(points, dtype=float)
        rot = self.pose.rot
        local = rot.inv().apply((points - self.pose.translation).reshape(-1, 3))
        return _local_sdf(self, local).reshape(points.shape[:-1])


def _local_sdf(primitive: Primitive, local: np.ndarray) -> np.ndarray:
    if primitive.kind is PrimitiveKind.SPHERE:
        return np.linalg.norm(local, axis=-1) - primitive.radius
    if primitive.kind is PrimitiveKind.CAPSULE:
        h = primitive.half_length
        nearest_z = np.clip(local[..., 2], -h, h)
        offset = local.copy()
        offset[..., 2] -= nearest_z
        return np.linalg.norm(offset, axis=-1) - primitive.radius
    q = np.abs(local) - primitive.half_extents
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(np.max(q, axis=-1), 0.0)
    return outside + inside


# ============================================================================
# DISTANCIAS ENTRE PRIMITIVAS
# ============================================================================

def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distancia de puntos (..., 3) a segmentos [a, b] (difunde por broadcasting)"""
    ab = b - a
    denom = np.sum(ab * ab, axis=-1)
    safe = np.where(denom > 1e-24, denom, 1.0)
    t = np.where(denom > 1e-24, np.sum((points - a) * ab, axis=-1) / safe, 0.0)
    t = np.clip(t, 0.0, 1.0)
    nearest = a + t[..., None] * ab
    return np.linalg.norm(points - nearest, axis=-1)


def segment_segment_distance(p0: np.ndarray, p1: np.ndarray, q0: np.ndarray, q1: np.ndarray) -> np.ndarray:
    """Distancia mínima entre segmentos [p0, p1] y [q0, q1], vectorizada"""
    p0, p1, q0, q1 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p0, p1, q0, q1)))
    eps = 1e-24
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    denom = a * e - b * b

    a_safe = np.where(a > eps, a, 1.0)
    e_safe = np.where(e > eps, e, 1.0)
    denom_safe = np.where(denom > eps, denom, 1.0)

    # Caso general: s sobre la recta de P, luego t, reproyectando al salir de [0, 1]
    s = np.where(denom > eps, np.clip((b * f - c * e) / denom_safe, 0.0, 1.0), 0.0)
    t = (b * s + f) / e_safe
    s = np.where(t < 0.0, np.clip(-c / a_safe, 0.0, 1.0), s)
    s = np.where(t > 1.0, np.clip((b - c) / a_safe, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)

    # Segmentos degenerados (puntos)
    p_point = a <= eps
    q_point = e <= eps
    s = np.where(p_point, 0.0, s)
    t = np.where(p_point, np.clip(f / e_safe, 0.0, 1.0), t)
    t = np.where(q_point, 0.0, t)
    s = np.where(q_point & ~p_point, np.clip(-c / a_safe, 0.0, 1.0), s)
    s = np.where(p_point & q_point, 0.0, s)
    t = np.where(p_point & q_point, 0.0, t)

    closest_p = p0 + s[..., None] * d1
    closest_q = q0 + t[..., None] * d2
    return np.linalg.norm(closest_p - closest_q, axis=-1)


def _golden_section_min(fn, count: int, iterations: int) -> np.ndarray:
    """Mínimo de funciones convexas sobre t ∈ [0, 1], una por fila"""
    a = np.zeros(count)
    b = np.ones(count)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = fn(c)
    fd = fn(d)
    for _ in range(iterations):
        left = fc <= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nuevo = np.where(left, b - _GOLDEN * (b - a), a + _GOLDEN * (b - a))
        fp = fn(nuevo)
        c, d = np.where(left, nuevo, d), np.where(left, c, nuevo)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
    best = np.minimum(fn((a + b) / 2.0), np.minimum(fc, fd))
    return np.minimum(best, np.minimum(fn(np.zeros(count)), fn(np.ones(count))))


def segment_primitive_distance(
    p0: np.ndarray,
    p1: np.ndarray,
    primitive: Primitive,
    iterations: int = GOLDEN_ITERATIONS,
) -> np.ndarray:
    """
    Mínimo de la SDF de `primitive` a lo largo de los segmentos [p0, p1] (N, 3)

    Para esfera y cápsula es cerrado; para la caja se minimiza la SDF (convexa)
    sobre el parámetro del segmento.
    """
    p0 = np.atleast_2d(np.asarray(p0, dtype=float))
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    if primitive.kind is PrimitiveKind.SPHERE:
        center = primitive.pose.translation
        return point_segment_distance(center, p0, p1) - primitive.radius
    if primitive.kind is PrimitiveKind.CAPSULE:
        q0, q1 = primitive.segment()
        return segment_segment_distance(p0, p1, q0, q1) - primitive.radius

    inv = primitive.pose.inverse()
    local0 = inv.apply(p0)
    direction = inv.apply(p1) - local0

    def sdf_along(t):
        return _local_sdf(primitive, local0 + t[:, None] * direction)

    return _golden_section_min(sdf_along, p0.shape[0], iterations)


def _sat_separation(a: Primitive, b: Primitive) -> float:
    """Mayor hueco proyectado sobre los 15 ejes del teorema del eje separador"""
    ra_axes = a.pose.rot.as_matrix()
    rb_axes = b.pose.rot.as_matrix()
    ha, hb = a.half_extents, b.half_extents
    delta = b.pose.translation - a.pose.translation
    axes = [ra_axes[:, i] for i in range(3)] + [rb_axes[:, i] for i in range(3)]
    for i in range(3):
        for j in range(3):
            cross = np.cross(ra_axes[:, i], rb_axes[:, j])
            norm = np.linalg.norm(cross)
            if norm > 1e-9:
                axes.append(cross / norm)
    best = -math.inf
    for axis in axes:
        proj_a = float(np.sum(ha * np.abs(ra_axes.T @ axis)))
        proj_b = float(np.sum(hb * np.abs(rb_axes.T @ axis)))
        best = max(best, abs(float(axis @ delta)) - proj_a - proj_b)
    return best


def _box_box_distance(a: Primitive, b: Primitive) -> float:
    separation = _sat_separation(a, b)
    if separation <= 0.0:
        return separation

    ra, rb = a.pose.rot.as_matrix(), b.pose.rot.as_matrix()
    ta, tb = a.pose.translation, b.pose.translation
    ha, hb = a.half_extents, b.half_extents

    def objective(x):
        diff = (ra @ x[:3] + ta) - (rb @ x[3:] + tb)
        return float(diff @ diff), np.concatenate([2.0 * ra.T @ diff, -2.0 * rb.T @ diff])

    start = np.concatenate([
        np.clip(ra.T @ (tb - ta), -ha, ha),
        np.clip(rb.T @ (ta - tb), -hb, hb),
    ])
    bounds = [(-h, h) for h in ha] + [(-h, h) for h in hb]
    result = minimize(objective, start, jac=True, method="L-BFGS-B", bounds=bounds,
                      options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500})
    return max(math.sqrt(max(result.fun, 0.0)), separation)


def _canonical_key(p: Primitive) -> tuple:
    return (p.kind.value, p.dimensions, tuple(p.pose.translation), tuple(p.pose.rotation))


def primitive_pair_distance(a: Primitive, b: Primitive) -> float:
    """
    Distancia de separación con signo entre dos primitivas (≤ 0 en contacto o penetración)

    Simétrica en sus argumentos.
    """
    if a.is_round and b.is_round:
        a0, a1 = a.segment()
        b0, b1 = b.segment()
        forward = float(segment_primitive_distance(a0, a1, b)[0]) - a.radius
        backward = float(segment_primitive_distance(b0, b1, a)[0]) - b.radius
        return min(forward, backward)
    if a.is_round or b.is_round:
        round_prim, box = (a, b) if a.is_round else (b, a)
        r0, r1 = round_prim.segment()
        return float(segment_primitive_distance(r0, r1, box)[0]) - round_prim.radius
    first, second = sorted((a, b), key=_canonical_key)
    return _box_box_distance(first, second)


# ============================================================================
# CONO DE VISIÓN
# ============================================================================

@dataclass(frozen=True, eq=False)
class Cone:
    """
    Cono de visión finito, truncado por el disco plano a distancia `range` sobre el eje
    """

    apex: np.ndarray
    axis: np.ndarray
    half_angle: float
    range: float

    def __post_init__(self):
        object.__setattr__(self, "apex", _as_vector(self.apex, 3, "apex"))
        axis = _as_vector(self.axis, 3, "axis")
        if abs(float(np.linalg.norm(axis)) - 1.0) > UNIT_TOLERANCE:
            raise ValueError("cone axis must be a unit vector")
        object.__setattr__(self, "axis", axis)
        if not 0.0 < self.half_angle < math.pi / 2:
            raise ValueError("cone half_angle must lie in (0, pi/2)")
        if not self.range > 0.0:
            raise ValueError("cone range must be > 0")

    @classmethod
    def from_direction(cls, apex, direction, half_angle: float, range: float) -> "Cone":
        direction = np.asarray(direction, dtype=float)
        return cls(apex, direction / np.linalg.norm(direction), half_angle, range)

    def transformed(self, t: Transform) -> "Cone":
        return Cone.from_direction(t.apply(self.apex), t.rotate(self.axis), self.half_angle, self.range)


def _cone_distance(x: np.ndarray, y: np.ndarray, tan_half: float, cone_range: float) -> np.ndarray:
    """
    Distancia en el semiplano (x sobre el eje, y ≥ 0 radial) al triángulo
    O=(0,0), P=(R,0), Q=(R, R·tanα): la sección meridiana del cono sólido.
    """
    inside = (x >= 0.0) & (x <= cone_range) & (y <= x * tan_half)
    slant = cone_range * math.sqrt(1.0 + tan_half * tan_half)
    cos_a = 1.0 / math.sqrt(1.0 + tan_half * tan_half)
    sin_a = tan_half * cos_a
    s = np.clip(x * cos_a + y * sin_a, 0.0, slant)
    lateral = np.hypot(x - s * cos_a, y - s * sin_a)
    cap_y = np.clip(y, 0.0, cone_range * tan_half)
    cap = np.hypot(x - cone_range, y - cap_y)
    return np.where(inside, 0.0, np.minimum(lateral, cap))


def point_cone_distance(cone: Cone, points: np.ndarray) -> np.ndarray:
    """Distancia exacta de puntos (..., 3) al cono sólido (0 en su interior)"""
    v = np.asarray(points, dtype=float) - cone.apex
    x = v @ cone.axis
    y = np.sqrt(np.maximum(np.sum(v * v, axis=-1) - x * x, 0.0))
    return _cone_distance(x, y, math.tan(cone.half_angle), cone.range)


def cone_sphere_intersect(cone: Cone, center: Sequence[float], radius: float) -> bool:
    """True si la bola cerrada toca el volumen cerrado del cono finito"""
    if not radius > 0.0:
        raise ValueError("sphere radius must be > 0")
    distance = float(point_cone_distance(cone, np.asarray(center, dtype=float).reshape(3)))
    return distance <= radius + GRAZING_TOLERANCE


def cones_spheres_intersect(
    apexes: np.ndarray,
    axes: np.ndarray,
    half_angle: float,
    cone_range: float,
    centers: np.ndarray,
    radii: np.ndarray,
) -> np.ndarray:
    """
    Versión por lotes: N conos con la misma apertura y alcance contra k esferas -> (N, k) bool
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, 3)
    radii = np.asarray(radii, dtype=float).reshape(-1)
    v = centers[None, :, :] - apexes[:, None, :]
    x = np.einsum("nkj,nj->nk", v, axes)
    y = np.sqrt(np.maximum(np.sum(v * v, axis=-1) - x * x, 0.0))
    distance = _cone_distance(x, y, math.tan(half_angle), cone_range)
    return distance <= radii[None, :] + GRAZING_TOLERANCE
