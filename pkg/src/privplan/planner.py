#!/usr/bin/env python3
"""
PrivacyAwarePlanner - Roadmap probabilístico con costes de privacidad

El roadmap se construye una sola vez: cada arista guarda su longitud y la
parte de esa longitud en la que el cono del sensor observa alguna región de
privacidad. Cambiar de perfil de coste solo recalcula pesos, nunca la
topología, y la búsqueda de coste uniforme devuelve el camino óptimo del
roadmap.
"""

import heapq
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import NoPathError
from .kinematics import Config, derive_rng
from .privacy import (
    CostProfile,
    PrivacyModel,
    SegmentClassification,
    privacy_cost,
    violation_fraction,
)
from .scene import DEFAULT_PRIVACY_RESOLUTION, DEFAULT_RESOLUTION, Scene, scene_digest
from .validity import ValidityChecker

logger = logging.getLogger(__name__)

# Flujos aleatorios derivados de la semilla maestra
ROADMAP_STREAM = 0
QUERY_STREAM = 1

# Rechazos permitidos por muestra pedida
REJECTIONS_PER_SAMPLE = 1000

# Aristas candidatas por tarea del pool de hilos
EDGE_CHUNK = 512


# ============================================================================
# ROADMAP
# ============================================================================

@dataclass(frozen=True)
class RoadmapParams:
    """Parámetros de construcción, guardados junto al roadmap"""

    n: int
    conn_radius: float
    resolution: float = DEFAULT_RESOLUTION
    privacy_resolution: float = DEFAULT_PRIVACY_RESOLUTION
    seed: int = 0
    scene_digest: str = ""


@dataclass(frozen=True)
class RoadmapEdge:
    """Arista no dirigida i < j con su partición violadora/limpia"""

    i: int
    j: int
    base_length: float
    violating_length: float
    clean_length: float

    @classmethod
    def annotated(cls, i: int, j: int, base_length: float, violating_length: float) -> "RoadmapEdge":
        i, j = (int(i), int(j)) if i < j else (int(j), int(i))
        base_length = float(base_length)
        violating_length = min(max(float(violating_length), 0.0), base_length)
        return cls(i, j, base_length, violating_length, base_length - violating_length)


def edge_weight(edge: RoadmapEdge, profile: CostProfile) -> float:
    """Peso de la arista bajo un perfil, a partir de la partición guardada"""
    return profile.cost(edge.violating_length, edge.clean_length)


@dataclass(frozen=True, eq=False)
class Roadmap:
    nodes: np.ndarray
    edges: Tuple[RoadmapEdge, ...]
    params: RoadmapParams

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2:
            raise ValueError("roadmap nodes must be a (n, d) array")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(self.edges))
        seen = set()
        for edge in self.edges:
            if edge.i == edge.j:
                raise ValueError(f"self-loop on node {edge.i}")
            if not (0 <= edge.i < len(nodes) and 0 <= edge.j < len(nodes)):
                raise ValueError(f"edge ({edge.i}, {edge.j}) references a missing node")
            key = (min(edge.i, edge.j), max(edge.i, edge.j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)

    @property
    def num_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def dof(self) -> int:
        return int(self.nodes.shape[1])

    @cached_property
    def adjacency(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        table: List[List[Tuple[int, int]]] = [[] for _ in range(self.num_nodes)]
        for index, edge in enumerate(self.edges):
            table[edge.i].append((edge.j, index))
            table[edge.j].append((edge.i, index))
        return tuple(tuple(sorted(row)) for row in table)

    def neighbors(self, i: int) -> List[int]:
        return [j for j, _ in self.adjacency[i]]

    def num_components(self) -> int:
        if self.num_nodes == 0:
            return 0
        rows = [e.i for e in self.edges]
        cols = [e.j for e in self.edges]
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.num_nodes, self.num_nodes))
        count, _ = connected_components(graph, directed=False)
        return int(count)

    def same_as(self, other: "Roadmap") -> bool:
        """Igualdad campo a campo (nodos, aristas y parámetros)"""
        return (
            self.params == other.params
            and self.nodes.shape == other.nodes.shape
            and bool(np.array_equal(self.nodes, other.nodes))
            and self.edges == other.edges
        )


# ============================================================================
# BÚSQUEDA DE COSTE UNIFORME
# ============================================================================

def shortest_path(
    roadmap: Roadmap,
    source: int,
    target: int,
    profile: CostProfile,
    extra_edges: Iterable[RoadmapEdge] = (),
) -> Tuple[float, Tuple[int, ...]]:
    """
    Búsqueda de coste uniforme sobre los índices de nodo

    `extra_edges` añade aristas temporales (las conexiones de inicio y
    objetivo usan los índices n y n+1). Entre caminos de igual coste gana la
    secuencia de índices lexicográficamente menor.

    Returns:
        (coste, secuencia de nodos)

    Raises:
        NoPathError: si source y target no están conectados
    """
    extra: Dict[int, List[Tuple[int, float]]] = {}
    for edge in extra_edges:
        weight = edge_weight(edge, profile)
        extra.setdefault(edge.i, []).append((edge.j, weight))
        extra.setdefault(edge.j, []).append((edge.i, weight))

    base_weights = [edge_weight(edge, profile) for edge in roadmap.edges]

    def successors(u: int):
        if u < roadmap.num_nodes:
            for v, index in roadmap.adjacency[u]:
                yield v, base_weights[index]
        yield from extra.get(u, ())

    best: Dict[int, Tuple[float, Tuple[int, ...]]] = {source: (0.0, (source,))}
    frontier: List[Tuple[float, Tuple[int, ...]]] = [(0.0, (source,))]
    closed = set()
    while frontier:
        cost, path = heapq.heappop(frontier)
        u = path[-1]
        if u in closed:
            continue
        if u == target:
            return cost, path
        closed.add(u)
        for v, weight in successors(u):
            if v in closed:
                continue
            candidate = (cost + weight, path + (v,))
            if v not in best or candidate < best[v]:
                best[v] = candidate
                heapq.heappush(frontier, candidate)
    raise NoPathError()


# ============================================================================
# SOLUCIONES
# ============================================================================

@dataclass(frozen=True, eq=False)
class PathSolution:
    """
    Camino π como polilínea: waypoints[0] es el inicio y el último el objetivo
    """

    waypoints: np.ndarray
    node_path: Tuple[int, ...]
    profile: CostProfile
    cost: float
    length: float
    violation_fraction: float
    classification: SegmentClassification
    regions_observed: Tuple[int, ...] = field(default=())

    @property
    def start(self) -> Config:
        return self.waypoints[0]

    @property
    def goal(self) -> Config:
        return self.waypoints[-1]

    def summary(self) -> Dict[str, object]:
        return {
            "weight": self.profile.weight,
            "mode": self.profile.mode,
            "cost": self.cost,
            "length": self.length,
            "violation_fraction": self.violation_fraction,
            "regions_observed": list(self.regions_observed),
            "node_path": list(self.node_path),
            "waypoints": self.waypoints.tolist(),
        }


@dataclass(frozen=True, eq=False)
class QueryConnection:
    """Aristas temporales que unen inicio (n) y objetivo (n+1) al roadmap"""

    start: Config
    goal: Config
    edges: Tuple[RoadmapEdge, ...]

    @property
    def trivial(self) -> bool:
        return bool(np.array_equal(self.start, self.goal))


# ============================================================================
# PLANIFICADOR
# ============================================================================

class PrivacyAwarePlanner:
    """
    Planificador PRM de radio fijo con anotación de privacidad por arista

    Flujo de uso:
    1. build_roadmap(): muestrea nodos válidos y conecta pares a distancia ≤ r_conn
    2. query(): conecta inicio/objetivo y resuelve con búsqueda de coste uniforme
    3. compare_profiles(): misma consulta bajo varios perfiles de coste
    """

    def __init__(
        self,
        scene: Scene,
        resolution: float = DEFAULT_RESOLUTION,
        privacy_resolution: float = DEFAULT_PRIVACY_RESOLUTION,
        threads: int = 1,
        verbose: bool = False,
    ):
        """
        Args:
            scene: Escena con robot, obstáculos y regiones de privacidad
            resolution: Separación δ de los chequeos de colisión
            privacy_resolution: Separación δ_p de la clasificación de privacidad
            threads: Hilos para validar aristas candidatas (no cambia el resultado)
            verbose: Registrar el progreso a nivel INFO
        """
        if threads < 1:
            raise ValueError("threads must be ≥ 1")
        self.scene = scene
        self.robot = scene.robot
        self.checker = ValidityChecker(scene, resolution)
        self.privacy = PrivacyModel(scene, privacy_resolution)
        self.threads = int(threads)
        self.verbose = verbose
        self._log_level = logging.INFO if verbose else logging.DEBUG
        logger.log(self._log_level, "✓ PrivacyAwarePlanner inicializado (escena '%s', %d gdl, %d regiones)",
                   scene.name, self.robot.dof, self.privacy.num_regions)

    # ========================================================================
    # CONSTRUCCIÓN
    # ========================================================================

    def _validate_chunk(self, chunk: Tuple[np.ndarray, np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        starts, ends = chunk
        valid = self.checker.motions_valid(starts, ends)
        base, violating = self.privacy.classify_edges(starts[valid], ends[valid])
        return valid, base, violating

    def _map_chunks(self, chunks: List[Tuple[np.ndarray, np.ndarray]]):
        if self.threads == 1 or len(chunks) <= 1:
            return [self._validate_chunk(chunk) for chunk in chunks]
        # executor.map conserva el orden de entrada
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(self._validate_chunk, chunks))

    def build_roadmap(self, n: int, conn_radius: float, seed: int) -> Roadmap:
        """
        Construye el roadmap de radio fijo

        Args:
            n: Número de nodos válidos a muestrear
            conn_radius: Radio de conexión r_conn en el espacio de configuraciones
            seed: Semilla maestra; el resultado no depende de `threads`

        Raises:
            InfeasibleSceneError: si se superan REJECTIONS_PER_SAMPLE·n rechazos
        """
        if isinstance(n, bool) or int(n) != n or n < 0:
            raise ValueError("roadmap size n must be a non-negative integer")
        if not conn_radius > 0:
            raise ValueError("connection radius must be > 0")
        n = int(n)
        params = RoadmapParams(
            n=n,
            conn_radius=float(conn_radius),
            resolution=self.checker.resolution,
            privacy_resolution=self.privacy.resolution,
            seed=int(seed),
            scene_digest=scene_digest(self.scene),
        )
        rng = derive_rng(seed, ROADMAP_STREAM)
        nodes = self.checker.sample_valid_many(rng, n, REJECTIONS_PER_SAMPLE * max(n, 1))
        logger.log(self._log_level, "✓ %d nodos válidos muestreados", n)
        if n < 2:
            return Roadmap(nodes, (), params)

        weighted = nodes * self.robot.weights
        pairs = cKDTree(weighted).query_pairs(conn_radius, output_type="ndarray")
        if len(pairs):
            pairs = np.sort(pairs, axis=1)
            pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
            # Recorte exacto con la misma métrica que las consultas
            gaps = np.linalg.norm(weighted[pairs[:, 0]] - weighted[pairs[:, 1]], axis=1)
            pairs = pairs[gaps <= conn_radius]
        chunks = [
            (nodes[pairs[k:k + EDGE_CHUNK, 0]], nodes[pairs[k:k + EDGE_CHUNK, 1]])
            for k in range(0, len(pairs), EDGE_CHUNK)
        ]
        edges: List[RoadmapEdge] = []
        for k, (valid, base, violating) in zip(range(0, len(pairs), EDGE_CHUNK), self._map_chunks(chunks)):
            kept = pairs[k:k + EDGE_CHUNK][valid]
            edges.extend(
                RoadmapEdge.annotated(i, j, b, v) for (i, j), b, v in zip(kept, base, violating)
            )
        roadmap = Roadmap(nodes, tuple(edges), params)
        logger.log(self._log_level, "✓ Roadmap: %d nodos, %d/%d aristas válidas, %d componentes",
                   roadmap.num_nodes, roadmap.num_edges, len(pairs), roadmap.num_components())
        return roadmap

    # ========================================================================
    # CONSULTAS
    # ========================================================================

    def _check_endpoint(self, q: Config, name: str) -> Config:
        q = self.robot.check_config(q)
        if not self.checker.is_config_valid(q):
            raise ValueError(f"{name} configuration is not valid (joint limits or collision)")
        return q.copy()

    def connect(self, roadmap: Roadmap, start: Config, goal: Config) -> QueryConnection:
        """
        Conecta inicio y objetivo con los nodos a distancia ≤ r_conn mediante
        movimientos válidos, anotando esas aristas al vuelo
        """
        if roadmap.num_nodes and roadmap.dof != self.robot.dof:
            raise ValueError("roadmap dimension does not match the scene robot")
        start = self._check_endpoint(start, "start")
        goal = self._check_endpoint(goal, "goal")
        n = roadmap.num_nodes
        radius = roadmap.params.conn_radius
        if np.array_equal(start, goal):
            return QueryConnection(start, goal, ())

        owners: List[int] = []
        others: List[int] = []
        for index, q in ((n, start), (n + 1, goal)):
            if n:
                gaps = np.linalg.norm((roadmap.nodes - q) * self.robot.weights, axis=1)
                near = np.flatnonzero(gaps <= radius)
                owners.extend([index] * len(near))
                others.extend(int(j) for j in near)
        if np.linalg.norm((start - goal) * self.robot.weights) <= radius:
            owners.append(n)
            others.append(n + 1)

        endpoints = {n: start, n + 1: goal}

        def stack(indices: List[int]) -> np.ndarray:
            rows = [endpoints[i] if i >= n else roadmap.nodes[i] for i in indices]
            return np.array(rows, dtype=float).reshape(-1, self.robot.dof)

        firsts = stack(owners)
        seconds = stack(others)
        valid = self.checker.motions_valid(firsts, seconds) if owners else np.zeros(0, dtype=bool)
        base, violating = self.privacy.classify_edges(firsts[valid], seconds[valid])
        kept = [(i, j) for (i, j), ok in zip(zip(owners, others), valid) if ok]
        edges = tuple(RoadmapEdge.annotated(i, j, b, v) for (i, j), b, v in zip(kept, base, violating))
        logger.debug("Conexión de consulta: %d aristas temporales", len(edges))
        return QueryConnection(start, goal, edges)

    def solve(self, roadmap: Roadmap, connection: QueryConnection, profile: CostProfile) -> PathSolution:
        """
        Camino de coste mínimo bajo `profile`; longitud y fracción violadora
        se recalculan sobre la polilínea final

        Raises:
            NoPathError: si inicio y objetivo quedan en componentes distintas
        """
        n = roadmap.num_nodes
        if connection.trivial:
            node_path = (n, n + 1)
        else:
            _, node_path = shortest_path(roadmap, n, n + 1, profile, connection.edges)
        endpoints = {n: connection.start, n + 1: connection.goal}
        waypoints = np.array([endpoints[i] if i >= n else roadmap.nodes[i] for i in node_path])
        classification = self.privacy.classify_path(waypoints)
        return PathSolution(
            waypoints=waypoints,
            node_path=tuple(int(i) for i in node_path),
            profile=profile,
            cost=privacy_cost(classification, profile),
            length=classification.total_length,
            violation_fraction=violation_fraction(classification),
            classification=classification,
            regions_observed=self.privacy.regions_observed(waypoints),
        )

    def query(self, roadmap: Roadmap, start: Config, goal: Config, profile: CostProfile) -> PathSolution:
        return self.solve(roadmap, self.connect(roadmap, start, goal), profile)

    def compare_profiles(
        self,
        roadmap: Roadmap,
        start: Config,
        goal: Config,
        profiles: Sequence[CostProfile],
    ) -> List[PathSolution]:
        """Resuelve una misma consulta bajo varios perfiles, reutilizando la conexión"""
        connection = self.connect(roadmap, start, goal)
        return [self.solve(roadmap, connection, profile) for profile in profiles]

    def sample_query(self, rng: np.random.Generator, max_attempts: int) -> Tuple[Config, Config]:
        """Par inicio/objetivo válido por muestreo uniforme con rechazo"""
        return self.checker.sample_valid(rng, max_attempts), self.checker.sample_valid(rng, max_attempts)

    def roadmap_matches(self, roadmap: Roadmap) -> bool:
        """True si el roadmap se construyó sobre esta misma escena"""
        return roadmap.params.scene_digest in ("", scene_digest(self.scene))
