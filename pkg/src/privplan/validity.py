#!/usr/bin/env python3
"""
Función de factibilidad v: límites articulares + ausencia de colisión robot/obstáculos

Los movimientos se validan discretizados: ⌈dist/δ⌉ intervalos uniformes con
los extremos incluidos. No se comprueban autocolisiones y las esferas de
privacidad no son obstáculos.
"""

import logging
from typing import List, Tuple

import numpy as np

from .errors import InfeasibleSceneError
from .geometry import Primitive, Transform, primitive_pair_distance, segment_primitive_distance
from .kinematics import (
    Config,
    cspace_distance,
    forward_kinematics_batch,
    interpolate_batch,
    sample_configs,
    subdivision_count,
)
from .scene import DEFAULT_RESOLUTION, Scene

logger = logging.getLogger(__name__)

# Configuraciones por bloque en las comprobaciones vectorizadas
BATCH_SIZE = 16384
SAMPLE_BLOCK = 256


class ValidityChecker:
    """
    Comprobador de colisiones sobre una escena inmutable

    Seguro para consultas concurrentes: solo lee la escena.
    """

    def __init__(self, scene: Scene, resolution: float = DEFAULT_RESOLUTION):
        if not resolution > 0:
            raise ValueError("motion-check resolution must be > 0")
        self.scene = scene
        self.robot = scene.robot
        self.resolution = float(resolution)
        self._links: List[Tuple[int, Primitive]] = [
            (index, prim) for index, prim in enumerate(self.robot.links) if prim is not None
        ]

    # ========================================================================
    # CONFIGURACIONES
    # ========================================================================

    def valid_mask(self, configs: np.ndarray) -> np.ndarray:
        """
        Factibilidad de un lote de configuraciones (N, d) -> (N,) bool
        """
        configs = self.robot.check_batch(configs)
        mask = self.robot.within_limits(configs)
        if not self.scene.obstacles or not self._links or not mask.any():
            return mask
        for start in range(0, configs.shape[0], BATCH_SIZE):
            block = slice(start, start + BATCH_SIZE)
            alive = np.flatnonzero(mask[block]) + start
            if alive.size == 0:
                continue
            mask[alive] = self._collision_free(forward_kinematics_batch(self.robot, configs[alive]))
        return mask

    def _collision_free(self, poses: np.ndarray) -> np.ndarray:
        free = np.ones(poses.shape[0], dtype=bool)
        for link_index, prim in self._links:
            frames = poses[:, link_index] @ prim.pose.as_matrix()
            if prim.is_round:
                local0, local1 = prim.local_segment()
                p0 = frames[:, :3, :3] @ local0 + frames[:, :3, 3]
                p1 = frames[:, :3, :3] @ local1 + frames[:, :3, 3]
                for obstacle in self.scene.obstacles:
                    idx = np.flatnonzero(free)
                    if idx.size == 0:
                        return free
                    # Descarte grueso por esferas envolventes
                    centers = (p0[idx] + p1[idx]) / 2.0
                    gap = (np.linalg.norm(centers - obstacle.pose.translation, axis=1)
                           - prim.bounding_radius - obstacle.bounding_radius)
                    near = idx[gap <= 0.0]
                    if near.size:
                        distance = segment_primitive_distance(p0[near], p1[near], obstacle) - prim.radius
                        free[near] = distance > 0.0
            else:
                # Eslabón con forma de caja: camino escalar
                for row in np.flatnonzero(free):
                    posed = Primitive(prim.kind, prim.dimensions, Transform.from_matrix(frames[row]))
                    free[row] = all(primitive_pair_distance(posed, o) > 0.0 for o in self.scene.obstacles)
        return free

    def is_config_valid(self, q: Config) -> bool:
        """True si q está dentro de límites y todos los eslabones tienen distancia positiva a los obstáculos"""
        q = self.robot.check_config(q)
        return bool(self.valid_mask(q[None, :])[0])

    # ========================================================================
    # MOVIMIENTOS
    # ========================================================================

    def motion_samples(self, a: Config, b: Config) -> np.ndarray:
        """
        Puntos de chequeo del segmento [a, b] con separación ≤ δ, extremos incluidos

        El orden de los extremos se normaliza para que el conjunto de puntos no
        dependa del sentido del movimiento.
        """
        a = self.robot.check_config(a)
        b = self.robot.check_config(b)
        if tuple(b) < tuple(a):
            a, b = b, a
        intervals = subdivision_count(cspace_distance(self.robot, a, b), self.resolution)
        if intervals == 0:
            return a[None, :].copy()
        return interpolate_batch(a, b, np.arange(intervals + 1) / intervals)

    def is_motion_valid(self, a: Config, b: Config) -> bool:
        return bool(np.all(self.valid_mask(self.motion_samples(a, b))))

    def motions_valid(self, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        """Validez de varios segmentos a la vez, agrupando sus puntos de chequeo en bloques"""
        results = np.ones(len(starts), dtype=bool)
        pending: List[np.ndarray] = []
        owners: List[int] = []
        size = 0

        def flush():
            if not pending:
                return
            mask = self.valid_mask(np.concatenate(pending))
            offsets = np.cumsum([0] + [len(p) for p in pending])
            for owner, lo, hi in zip(owners, offsets[:-1], offsets[1:]):
                results[owner] = bool(np.all(mask[lo:hi]))
            pending.clear()
            owners.clear()

        for index, (a, b) in enumerate(zip(starts, ends)):
            samples = self.motion_samples(a, b)
            pending.append(samples)
            owners.append(index)
            size += len(samples)
            if size >= BATCH_SIZE:
                flush()
                size = 0
        flush()
        return results

    # ========================================================================
    # MUESTREO
    # ========================================================================

    def sample_valid(self, rng: np.random.Generator, max_attempts: int) -> Config:
        """
        Muestreo uniforme con rechazo hasta encontrar una configuración válida

        Raises:
            InfeasibleSceneError: si se agotan los intentos
        """
        for _ in range(max_attempts):
            q = rng.uniform(self.robot.lower, self.robot.upper)
            if self.is_config_valid(q):
                return q
        raise InfeasibleSceneError(max_attempts)

    def sample_valid_many(self, rng: np.random.Generator, count: int, max_rejections: int) -> np.ndarray:
        """
        Las `count` primeras muestras válidas del flujo `rng`

        Los candidatos se sacan en bloques de tamaño fijo, así que pedir más
        muestras con la misma semilla extiende la lista sin alterar su prefijo.
        """
        accepted: List[np.ndarray] = []
        rejected = 0
        while len(accepted) < count:
            block = sample_configs(self.robot, rng, SAMPLE_BLOCK)
            mask = self.valid_mask(block)
            for q, ok in zip(block, mask):
                if ok:
                    accepted.append(q)
                    if len(accepted) == count:
                        break
                else:
                    rejected += 1
            if rejected > max_rejections:
                raise InfeasibleSceneError(rejected)
        logger.debug("Muestreo: %d válidas, %d rechazadas", len(accepted), rejected)
        return np.array(accepted).reshape(count, self.robot.dof)
