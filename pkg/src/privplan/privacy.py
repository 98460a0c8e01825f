#!/usr/bin/env python3
"""
Predicado de privacidad, clasificación de trayectorias y perfiles de coste

Una configuración es "violadora" cuando el cono del sensor toca alguna esfera
de privacidad. Las oclusiones se ignoran: el cono ve a través de los obstáculos.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import cones_spheres_intersect
from .kinematics import (
    Config,
    cspace_distance,
    interpolate_batch,
    sensor_cones_batch,
    subdivision_count,
)
from .scene import DEFAULT_PRIVACY_RESOLUTION, Scene

logger = logging.getLogger(__name__)

AGNOSTIC = "agnostic"
PRESERVING = "preserving"
VIOLATING = "violating"


# ============================================================================
# PERFILES DE COSTE
# ============================================================================

@dataclass(frozen=True)
class CostProfile:
    """
    Perfil de coste parametrizado por el peso de privacidad w (|w| ≥ 1)

    - w = 1: agnóstico, coste = longitud
    - w > 1: preserva la privacidad, multiplica lo violador y divide lo limpio
    - w < −1: viola la privacidad, divide lo violador y multiplica lo limpio
    """

    weight: float = 1.0

    def __post_init__(self):
        weight = float(self.weight)
        if not math.isfinite(weight) or abs(weight) < 1.0:
            raise ValueError("weight magnitude must be ≥ 1")
        object.__setattr__(self, "weight", weight)

    @classmethod
    def agnostic(cls) -> "CostProfile":
        return cls(1.0)

    @property
    def mode(self) -> str:
        if abs(self.weight) == 1.0:
            return AGNOSTIC
        return PRESERVING if self.weight > 0 else VIOLATING

    @property
    def label(self) -> str:
        """Etiqueta corta para consola y ficheros, p.ej. 'w=-5 (violating)'"""
        return f"w={self.weight:g} ({self.mode})"

    def multipliers(self) -> Tuple[float, float]:
        """Factores (violador, limpio) aplicados a cada longitud de arco"""
        magnitude = abs(self.weight)
        mode = self.mode
        if mode == AGNOSTIC:
            return 1.0, 1.0
        if mode == PRESERVING:
            return magnitude, 1.0 / magnitude
        return 1.0 / magnitude, magnitude

    def cost(self, violating_length: float, clean_length: float) -> float:
        on, off = self.multipliers()
        return on * violating_length + off * clean_length


# ============================================================================
# CLASIFICACIÓN DE TRAYECTORIAS
# ============================================================================

@dataclass(frozen=True, eq=False)
class SegmentClassification:
    """
    Discretización de una trayectoria: una longitud y una etiqueta por subsegmento

    `edge_counts[i]` es el número de subsegmentos del tramo i (0 si el tramo
    tiene longitud nula).
    """

    lengths: np.ndarray
    violating: np.ndarray
    edge_counts: Tuple[int, ...] = ()

    def __post_init__(self):
        lengths = np.array(self.lengths, dtype=float).reshape(-1)
        violating = np.array(self.violating, dtype=bool).reshape(-1)
        if lengths.shape != violating.shape:
            raise ValueError("lengths and violating labels must have the same size")
        if np.any(lengths <= 0.0):
            raise ValueError("subsegment lengths must be > 0")
        lengths.setflags(write=False)
        violating.setflags(write=False)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "violating", violating)
        object.__setattr__(self, "edge_counts", tuple(int(c) for c in self.edge_counts))

    @property
    def total_length(self) -> float:
        return float(np.sum(self.lengths))

    @property
    def violating_length(self) -> float:
        return float(np.sum(self.lengths[self.violating]))

    @property
    def clean_length(self) -> float:
        return float(np.sum(self.lengths[~self.violating]))

    def __len__(self) -> int:
        return int(self.lengths.size)


def privacy_cost(classification: SegmentClassification, profile: CostProfile) -> float:
    """
    Coste de una trayectoria clasificada bajo un perfil

    Se suma subsegmento a subsegmento, así que con w = 1 coincide con la
    longitud total.
    """
    on, off = profile.multipliers()
    factors = np.where(classification.violating, on, off)
    return float(np.sum(classification.lengths * factors))


def violation_fraction(classification: SegmentClassification) -> float:
    """Fracción de longitud de arco violadora (0 para trayectorias de longitud nula)"""
    total = classification.total_length
    if total <= 0.0:
        return 0.0
    return min(1.0, max(0.0, classification.violating_length / total))


# ============================================================================
# MODELO DE PRIVACIDAD DE UNA ESCENA
# ============================================================================

class PrivacyModel:
    """
    Evalúa el predicado de privacidad del robot de una escena

    Las etiquetas de cada subsegmento se toman en su punto medio.
    """

    def __init__(self, scene: Scene, resolution: float = DEFAULT_PRIVACY_RESOLUTION):
        if not resolution > 0:
            raise ValueError("privacy resolution must be > 0")
        self.scene = scene
        self.robot = scene.robot
        self.resolution = float(resolution)
        self._centers = scene.privacy_centers
        self._radii = scene.privacy_radii

    @property
    def num_regions(self) -> int:
        return int(self._radii.size)

    def observed_matrix(self, configs: np.ndarray, poses: Optional[np.ndarray] = None) -> np.ndarray:
        """
        (N, k) bool: qué regiones toca el cono en cada configuración

        `poses` son las poses de forward_kinematics_batch ya calculadas para `configs`.
        """
        configs = self.robot.check_batch(configs)
        if self.num_regions == 0:
            return np.zeros((configs.shape[0], 0), dtype=bool)
        apexes, axes = sensor_cones_batch(self.robot, configs, poses)
        mount = self.robot.sensor_mount
        return cones_spheres_intersect(apexes, axes, mount.half_angle, mount.range, self._centers, self._radii)

    def privacy_violated_batch(self, configs: np.ndarray, poses: Optional[np.ndarray] = None) -> np.ndarray:
        return self.observed_matrix(configs, poses).any(axis=1)

    def privacy_violated(self, q: Config) -> bool:
        """True si el cono del sensor en q interseca alguna esfera de privacidad"""
        q = self.robot.check_config(q)
        return bool(self.privacy_violated_batch(q[None, :])[0])

    def _midpoints(self, path: np.ndarray):
        points: List[np.ndarray] = []
        lengths: List[np.ndarray] = []
        counts: List[int] = []
        for a, b in zip(path[:-1], path[1:]):
            length = cspace_distance(self.robot, a, b)
            n = subdivision_count(length, self.resolution)
            counts.append(n)
            if n == 0:
                continue
            points.append(interpolate_batch(a, b, (np.arange(n) + 0.5) / n))
            lengths.append(np.full(n, length / n))
        if not points:
            return np.empty((0, self.robot.dof)), np.empty(0), counts
        return np.concatenate(points), np.concatenate(lengths), counts

    def _as_path(self, path: Sequence[Config]) -> np.ndarray:
        path = np.asarray(path, dtype=float)
        if path.ndim != 2 or path.shape[0] < 2:
            raise ValueError("path must contain at least 2 configurations")
        return self.robot.check_batch(path)

    def classify_path(self, path: Sequence[Config]) -> SegmentClassification:
        """
        Subdivide cada tramo con separación ≤ δ_p y etiqueta cada subsegmento

        Raises:
            ValueError: si la trayectoria tiene menos de 2 configuraciones
        """
        path = self._as_path(path)
        points, lengths, counts = self._midpoints(path)
        if lengths.size == 0:
            return SegmentClassification(lengths, np.zeros(0, dtype=bool), counts)
        return SegmentClassification(lengths, self.privacy_violated_batch(points), counts)

    def classify_edges(self, starts: np.ndarray, ends: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Longitud base y longitud violadora de varios tramos sueltos

        Equivale a `classify_path([a, b])` tramo a tramo, evaluando todos los
        puntos medios en un único lote.
        """
        starts = self.robot.check_batch(starts)
        ends = self.robot.check_batch(ends)
        base = np.zeros(len(starts))
        counts = np.zeros(len(starts), dtype=int)
        points: List[np.ndarray] = []
        for index, (a, b) in enumerate(zip(starts, ends)):
            base[index] = cspace_distance(self.robot, a, b)
            counts[index] = subdivision_count(base[index], self.resolution)
            if counts[index]:
                points.append(interpolate_batch(a, b, (np.arange(counts[index]) + 0.5) / counts[index]))
        violating = np.zeros(len(starts))
        if not points:
            return base, violating
        flags = self.privacy_violated_batch(np.concatenate(points))
        owners = np.repeat(np.arange(len(starts)), counts)
        hits = np.bincount(owners, weights=flags.astype(float), minlength=len(starts))
        nonzero = counts > 0
        violating[nonzero] = hits[nonzero] * (base[nonzero] / counts[nonzero])
        return base, violating

    def regions_observed(self, path: Sequence[Config]) -> Tuple[int, ...]:
        """Índices de las regiones que el cono llega a tocar a lo largo de la trayectoria"""
        path = self._as_path(path)
        if self.num_regions == 0:
            return ()
        points, _, _ = self._midpoints(path)
        samples = np.concatenate([path, points]) if len(points) else path
        seen = self.observed_matrix(samples).any(axis=0)
        return tuple(int(i) for i in np.flatnonzero(seen))
