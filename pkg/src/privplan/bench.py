#!/usr/bin/env python3
"""
Benchmark de perfiles de privacidad

Barridos de pesos w sobre un escenario: un roadmap por escenario reutilizado
en todas las ejecuciones, y en cada ejecución un único par inicio/objetivo
compartido por todos los pesos (diseño pareado). Exporta registros por
(ejecución, peso), tablas agregadas por peso y trazas del cono del sensor.
"""

import csv
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from .errors import NoPathError
from .kinematics import (
    cspace_distance,
    derive_rng,
    derive_seed,
    forward_kinematics_batch,
    interpolate_batch,
    sensor_cones_batch,
    subdivision_count,
)
from .planner import QUERY_STREAM, PathSolution, PrivacyAwarePlanner, Roadmap
from .privacy import CostProfile, PrivacyModel
from .scene import (
    DEFAULT_CONN_RADIUS,
    DEFAULT_PRIVACY_RESOLUTION,
    DEFAULT_QUERY_ATTEMPTS,
    DEFAULT_RESOLUTION,
    DEFAULT_ROADMAP_N,
    DEFAULT_WEIGHTS,
    Scene,
    ScenarioBundle,
)

logger = logging.getLogger(__name__)

RECORD_FIELDS = [
    "scenario", "run", "seed", "weight", "success",
    "violation_fraction", "path_length", "solve_ms",
]

SUMMARY_FIELDS = [
    "weight", "mode", "runs", "successes", "success_rate",
    "violation_mean", "violation_median", "violation_min", "violation_max", "violation_std",
    "length_mean", "length_median", "length_min", "length_max", "length_std",
    "length_ratio", "violation_ratio",
]


def format_number(value: Optional[float]) -> str:
    """9 cifras significativas; vacío para valores ausentes"""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(float(value), ".9g")


def _parse_optional(text: str) -> Optional[float]:
    return float(text) if text != "" else None


# ============================================================================
# ESPECIFICACIÓN Y REGISTROS
# ============================================================================

@dataclass(frozen=True)
class ExperimentSpec:
    """Barrido de pesos: `runs` consultas pareadas sobre un roadmap común"""

    scenario: str
    runs: int
    weights: Tuple[float, ...] = DEFAULT_WEIGHTS
    n: int = DEFAULT_ROADMAP_N
    conn_radius: float = DEFAULT_CONN_RADIUS
    resolution: float = DEFAULT_RESOLUTION
    privacy_resolution: float = DEFAULT_PRIVACY_RESOLUTION
    seed: int = 0
    query_attempts: int = DEFAULT_QUERY_ATTEMPTS

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if isinstance(self.runs, bool) or int(self.runs) != self.runs or self.runs < 1:
            raise ValueError("runs must be ≥ 1")
        if not self.weights:
            raise ValueError("weight sweep must not be empty")
        for w in self.weights:
            CostProfile(w)
        if 1.0 not in self.weights:
            raise ValueError("weight sweep must contain the agnostic weight 1")
        if len(set(self.weights)) != len(self.weights):
            raise ValueError("weight sweep contains duplicates")

    @classmethod
    def from_bundle(cls, name: str, bundle: ScenarioBundle, runs: int, seed: int, **overrides) -> "ExperimentSpec":
        """Valores del bloque meta.scenario, sustituidos por los que se pasen explícitamente"""
        values = dict(
            weights=bundle.weights,
            n=bundle.roadmap.n,
            conn_radius=bundle.roadmap.conn_radius,
            resolution=bundle.roadmap.resolution,
            privacy_resolution=bundle.roadmap.privacy_resolution,
            query_attempts=bundle.query.max_attempts,
        )
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(scenario=name, runs=runs, seed=seed, **values)

    @property
    def profiles(self) -> List[CostProfile]:
        return [CostProfile(w) for w in self.weights]


@dataclass(frozen=True)
class RunRecord:
    """
    Resultado de una consulta (ejecución, peso)

    `start` y `goal` guardan la procedencia del par pareado; no se exportan
    al CSV ni cuentan para la igualdad.
    """

    scenario: str
    run: int
    seed: int
    weight: float
    success: bool
    violation_fraction: Optional[float] = None
    path_length: Optional[float] = None
    solve_ms: Optional[float] = None
    start: Optional[Tuple[float, ...]] = field(default=None, compare=False)
    goal: Optional[Tuple[float, ...]] = field(default=None, compare=False)

    def as_row(self) -> List[str]:
        return [
            self.scenario,
            str(self.run),
            str(self.seed),
            format_number(self.weight),
            "true" if self.success else "false",
            format_number(self.violation_fraction),
            format_number(self.path_length),
            format_number(self.solve_ms),
        ]

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "RunRecord":
        if row["success"] not in ("true", "false"):
            raise ValueError(f"invalid success flag '{row['success']}'")
        return cls(
            scenario=row["scenario"],
            run=int(row["run"]),
            seed=int(row["seed"]),
            weight=float(row["weight"]),
            success=row["success"] == "true",
            violation_fraction=_parse_optional(row["violation_fraction"]),
            path_length=_parse_optional(row["path_length"]),
            solve_ms=_parse_optional(row["solve_ms"]),
        )


def write_records_csv(records: Sequence[RunRecord], output: Union[str, Path, TextIO]):
    """CSV UTF-8 con cabecera fija y finales de línea LF"""
    if isinstance(output, (str, Path)):
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="") as f:
            write_records_csv(records, f)
        return
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for record in records:
        writer.writerow(record.as_row())


def read_records_csv(source: Union[str, Path]) -> List[RunRecord]:
    with open(source, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != RECORD_FIELDS:
            raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
        return [RunRecord.from_row(row) for row in reader]


# ============================================================================
# AGREGADOS
# ============================================================================

@dataclass(frozen=True)
class MetricStats:
    mean: float
    median: float
    min: float
    max: float
    std: float

    @classmethod
    def of(cls, values: Sequence[float]) -> Optional["MetricStats"]:
        if not len(values):
            return None
        data = np.asarray(values, dtype=float)
        return cls(
            mean=float(np.mean(data)),
            median=float(np.median(data)),
            min=float(np.min(data)),
            max=float(np.max(data)),
            std=float(np.std(data)),
        )


@dataclass(frozen=True)
class WeightSummary:
    """Fila agregada por peso; las métricas solo cuentan ejecuciones con éxito"""

    weight: float
    runs: int
    successes: int
    violation: Optional[MetricStats]
    length: Optional[MetricStats]

    @property
    def success_rate(self) -> float:
        return self.successes / self.runs if self.runs else 0.0

    @property
    def mode(self) -> str:
        return CostProfile(self.weight).mode


def summarize(records: Sequence[RunRecord]) -> List[WeightSummary]:
    """
    Agregados por peso, ordenados de preservar (w alto) a violar (w más negativo)

    Raises:
        ValueError: si no hay registros
    """
    if not records:
        raise ValueError("cannot summarize an empty record list")
    groups: Dict[float, List[RunRecord]] = {}
    for record in records:
        groups.setdefault(record.weight, []).append(record)
    summaries = []
    for weight in sorted(groups, reverse=True):
        group = groups[weight]
        ok = [r for r in group if r.success]
        summaries.append(WeightSummary(
            weight=weight,
            runs=len(group),
            successes=len(ok),
            violation=MetricStats.of([r.violation_fraction for r in ok]),
            length=MetricStats.of([r.path_length for r in ok]),
        ))
    return summaries


@dataclass(frozen=True)
class RelativeMetrics:
    """Cociente de medias respecto al perfil agnóstico (None si no es calculable)"""

    weight: float
    length_ratio: Optional[float]
    violation_ratio: Optional[float]


def relative_to_agnostic(summaries: Sequence[WeightSummary]) -> List[RelativeMetrics]:
    baseline = next((s for s in summaries if s.weight == 1.0), None)

    def ratio(value: Optional[MetricStats], reference: Optional[MetricStats]) -> Optional[float]:
        if value is None or reference is None or reference.mean == 0.0:
            return None
        return value.mean / reference.mean

    return [
        RelativeMetrics(
            weight=s.weight,
            length_ratio=ratio(s.length, baseline.length if baseline else None),
            violation_ratio=ratio(s.violation, baseline.violation if baseline else None),
        )
        for s in summaries
    ]


def _stats_cells(stats: Optional[MetricStats]) -> List[str]:
    if stats is None:
        return [""] * 5
    return [format_number(v) for v in (stats.mean, stats.median, stats.min, stats.max, stats.std)]


def write_summary_csv(summaries: Sequence[WeightSummary], output: Union[str, Path]):
    relative = {r.weight: r for r in relative_to_agnostic(summaries)}
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_FIELDS)
        for s in summaries:
            writer.writerow(
                [format_number(s.weight), s.mode, s.runs, s.successes, format_number(s.success_rate)]
                + _stats_cells(s.violation)
                + _stats_cells(s.length)
                + [format_number(relative[s.weight].length_ratio), format_number(relative[s.weight].violation_ratio)]
            )


def print_summary(summaries: Sequence[WeightSummary], scenario: str = "", out: TextIO = sys.stdout):
    """Resumen por consola: tasa de éxito, fracción violadora y longitud por peso"""
    relative = {r.weight: r for r in relative_to_agnostic(summaries)}
    print("\n" + "=" * 80, file=out)
    print(f"RESUMEN DE RESULTADOS{f' - {scenario}' if scenario else ''}", file=out)
    print("=" * 80, file=out)
    print(f"{'peso':>8} {'modo':>11} {'éxito':>7} {'viol. media':>12} {'long. media':>12} {'L/L(1)':>8}", file=out)
    for s in summaries:
        violation = f"{s.violation.mean:.4f}" if s.violation else "-"
        length = f"{s.length.mean:.4f}" if s.length else "-"
        ratio = relative[s.weight].length_ratio
        print(
            f"{s.weight:>8g} {s.mode:>11} {s.success_rate:>7.1%} {violation:>12} {length:>12} "
            f"{(f'{ratio:.3f}' if ratio is not None else '-'):>8}",
            file=out,
        )
    print(file=out)


# ============================================================================
# TRAZAS DEL CONO
# ============================================================================

def trace_rows(solution: PathSolution, privacy: PrivacyModel) -> np.ndarray:
    """
    Muestras ordenadas de la solución: t, q, vértice, eje y bandera violadora

    Cada tramo aporta ⌈L/δ_p⌉ muestras (sin su extremo final) y se añade el
    último waypoint, así que un camino de longitud nula da una sola fila en t=0.
    """
    robot = privacy.robot
    waypoints = np.asarray(solution.waypoints, dtype=float)
    blocks: List[np.ndarray] = []
    arcs: List[np.ndarray] = []
    travelled = 0.0
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        length = cspace_distance(robot, a, b)
        n = subdivision_count(length, privacy.resolution)
        if n == 0:
            continue
        steps = np.arange(n) / n
        blocks.append(interpolate_batch(a, b, steps))
        arcs.append(travelled + steps * length)
        travelled += length
    blocks.append(waypoints[-1:])
    arcs.append(np.array([travelled]))
    configs = np.concatenate(blocks)
    arc = np.concatenate(arcs)
    t = arc / travelled if travelled > 0.0 else np.zeros_like(arc)
    poses = forward_kinematics_batch(robot, configs)
    apexes, axes = sensor_cones_batch(robot, configs, poses)
    flags = privacy.privacy_violated_batch(configs, poses)
    return np.column_stack([t, configs, apexes, axes, flags.astype(float)])


def export_trace(solution: PathSolution, privacy: PrivacyModel, path: Union[str, Path]) -> int:
    """
    Escribe la traza CSV `t,q0..q{d-1},apex_*,axis_*,violating`

    Returns:
        Número de filas escritas
    """
    rows = trace_rows(solution, privacy)
    dof = privacy.robot.dof
    header = (
        ["t"] + [f"q{i}" for i in range(dof)]
        + ["apex_x", "apex_y", "apex_z", "axis_x", "axis_y", "axis_z", "violating"]
    )
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row[:-1]] + ["true" if row[-1] else "false"])
    logger.info("✓ Traza guardada en: %s (%d filas)", path, len(rows))
    return len(rows)


# ============================================================================
# EVALUADOR PRINCIPAL
# ============================================================================

class BenchmarkEvaluator:
    """Evaluador del barrido de pesos sobre una escena"""

    def __init__(self, scene: Scene, threads: int = 1, verbose: bool = False, record_timing: bool = False):
        """
        Args:
            scene: Escena del experimento
            threads: Hilos para construir el roadmap y resolver ejecuciones (no cambia el resultado)
            verbose: Registrar el progreso a nivel INFO
            record_timing: Medir solve_ms (si es False la columna queda vacía)
        """
        if threads < 1:
            raise ValueError("threads must be ≥ 1")
        self.scene = scene
        self.threads = int(threads)
        self.verbose = verbose
        self.record_timing = record_timing
        self._log_level = logging.INFO if verbose else logging.DEBUG

    def _run_once(self, planner: PrivacyAwarePlanner, roadmap: Roadmap, spec: ExperimentSpec,
                  run: int) -> List[RunRecord]:
        run_seed = derive_seed(spec.seed, QUERY_STREAM, run)
        start, goal = planner.sample_query(derive_rng(run_seed), spec.query_attempts)
        connection = planner.connect(roadmap, start, goal)
        provenance = dict(start=tuple(start.tolist()), goal=tuple(goal.tolist()))
        records = []
        for profile in spec.profiles:
            began = time.perf_counter()
            try:
                solution = planner.solve(roadmap, connection, profile)
            except NoPathError:
                solution = None
            elapsed = (time.perf_counter() - began) * 1000.0 if self.record_timing else None
            records.append(RunRecord(
                scenario=spec.scenario,
                run=run,
                seed=run_seed,
                weight=profile.weight,
                success=solution is not None,
                violation_fraction=solution.violation_fraction if solution else None,
                path_length=solution.length if solution else None,
                solve_ms=elapsed,
                **provenance,
            ))
        return records

    def run_experiment(self, spec: ExperimentSpec, roadmap: Optional[Roadmap] = None) -> List[RunRecord]:
        """
        Ejecuta el barrido completo

        Args:
            spec: Especificación del experimento
            roadmap: Roadmap reutilizado; si no se da se construye con la semilla de `spec`

        Returns:
            Un registro por (ejecución, peso), ordenados por ejecución y peso
        """
        planner = PrivacyAwarePlanner(self.scene, spec.resolution, spec.privacy_resolution,
                                      threads=self.threads, verbose=self.verbose)
        if roadmap is None:
            roadmap = planner.build_roadmap(spec.n, spec.conn_radius, spec.seed)
        elif not planner.roadmap_matches(roadmap):
            raise ValueError("roadmap was built for a different scene")

        logger.log(self._log_level, "Benchmark '%s': %d ejecuciones x %d pesos",
                   spec.scenario, spec.runs, len(spec.weights))
        runs = range(spec.runs)
        if self.threads == 1:
            batches = [self._run_once(planner, roadmap, spec, run) for run in runs]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                batches = list(executor.map(lambda run: self._run_once(planner, roadmap, spec, run), runs))

        records = sorted((r for batch in batches for r in batch), key=lambda r: (r.run, r.weight))
        failures = sum(1 for r in records if not r.success)
        logger.log(self._log_level, "✓ %d registros (%d sin camino)", len(records), failures)
        return records

    def print_summary(self, records: Sequence[RunRecord], out: TextIO = sys.stdout):
        print_summary(summarize(records), records[0].scenario if records else "", out)

    def save_results(self, records: Sequence[RunRecord], output_path: Union[str, Path],
                     summary_path: Optional[Union[str, Path]] = None):
        """Guarda los registros (y opcionalmente la tabla agregada) en CSV"""
        write_records_csv(records, output_path)
        logger.log(self._log_level, "💾 Resultados guardados en: %s", os.fspath(output_path))
        if summary_path is not None:
            write_summary_csv(summarize(records), summary_path)
            logger.log(self._log_level, "💾 Resumen guardado en: %s", os.fspath(summary_path))
