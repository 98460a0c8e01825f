#!/usr/bin/env python3
"""
Interfaz de línea de comandos

Subcomandos: build-roadmap, plan, bench, export-trace y validate-scene.
Los diagnósticos van a stderr; los datos a ficheros o a stdout.

Códigos de salida: 0 éxito, 1 uso incorrecto, 2 error de dominio
(sin camino, escena inviable, fichero inválido), 3 error de E/S.
"""

import argparse
import json
import logging
import os
import re
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bench import (
    BenchmarkEvaluator,
    ExperimentSpec,
    export_trace,
    summarize,
    write_records_csv,
    write_summary_csv,
)
from .errors import PrivPlanError
from .kinematics import derive_rng, derive_seed
from .planner import QUERY_STREAM, PathSolution, PrivacyAwarePlanner, Roadmap
from .privacy import CostProfile
from .roadmap_io import load_roadmap, save_roadmap
from .scene import ScenarioBundle, builtin_scenario, builtin_scenario_names, load_scenario_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_IO = 3

# Opciones cuyo valor puede empezar por un signo menos (p.ej. --start -1.2,0.5)
SIGNED_VALUE_FLAGS = ("--start", "--goal", "--weight", "--weights")
_SIGNED_VALUE = re.compile(r"^-\.?\d")


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser que sale con código 1 ante un uso incorrecto"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ============================================================================
# TIPOS DE ARGUMENTO
# ============================================================================

def weight_value(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid weight '{text}'")
    try:
        CostProfile(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    return value


def weight_list(text: str) -> Tuple[float, ...]:
    """Lista de pesos separada por comas, p.ej. '1,-2,-5,-10,2,5,10'"""
    parts = [part.strip() for part in text.split(",") if part.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty weight list")
    return tuple(weight_value(part) for part in parts)


def config_value(text: str) -> np.ndarray:
    """Configuración como lista de números separada por comas"""
    try:
        return np.array([float(part) for part in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid configuration '{text}'")


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError("must be ≥ 1")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer '{text}'")
    if value < 0:
        raise argparse.ArgumentTypeError("must be ≥ 0")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number '{text}'")
    if not value > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


# ============================================================================
# PARSER
# ============================================================================

def _scene_options(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario", choices=builtin_scenario_names(),
                        help="bundled scenario name")
    source.add_argument("--scene", help="path to a scene JSON file")


def _roadmap_options(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, required=True,
                        help="master seed for roadmap sampling and start/goal queries")
    parser.add_argument("--roadmap-n", type=non_negative_int, default=None,
                        help="number of roadmap nodes (default: scenario value)")
    parser.add_argument("--conn-radius", type=positive_float, default=None,
                        help="roadmap connection radius in C-space units (default: scenario value)")
    parser.add_argument("--resolution", type=positive_float, default=None,
                        help="motion-check spacing δ (default: scenario value)")
    parser.add_argument("--privacy-resolution", type=positive_float, default=None,
                        help="privacy classification spacing δ_p (default: scenario value)")
    parser.add_argument("--threads", type=positive_int, default=1,
                        help="worker threads; never changes the output")


def _query_options(parser: argparse.ArgumentParser):
    parser.add_argument("--weight", type=weight_value, default=1.0,
                        help="privacy weight w with |w| ≥ 1 (1 agnostic, >1 preserving, <-1 violating)")
    parser.add_argument("--start", type=config_value, default=None,
                        help="start configuration as comma-separated values (default: sampled from --seed)")
    parser.add_argument("--goal", type=config_value, default=None,
                        help="goal configuration as comma-separated values (default: sampled from --seed)")


def build_parser() -> argparse.ArgumentParser:
    common = UsageParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="log progress to standard error")

    parser = UsageParser(
        prog="privplan",
        description="Privacy-aware motion planning: roadmaps, queries and weight-sweep benchmarks.",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    build = commands.add_parser("build-roadmap", parents=[common], help="build and save a roadmap")
    _scene_options(build)
    _roadmap_options(build)
    build.add_argument("--roadmap-file", "--out", dest="roadmap_file", required=True,
                       help="output roadmap file")

    plan = commands.add_parser("plan", parents=[common], help="solve one query and print the solution as JSON")
    _scene_options(plan)
    _roadmap_options(plan)
    _query_options(plan)
    plan.add_argument("--roadmap-file", default=None,
                      help="roadmap to reuse; built and saved there if it does not exist")
    plan.add_argument("--out", default=None, help="also write the solution JSON to this file")
    plan.add_argument("--trace", default=None, help="write the sensor-cone trace CSV to this file")

    bench = commands.add_parser("bench", parents=[common], help="run a seeded weight sweep")
    _scene_options(bench)
    _roadmap_options(bench)
    bench.add_argument("--runs", type=positive_int, default=100, help="number of paired start/goal runs")
    bench.add_argument("--weights", type=weight_list, default=None,
                       help="comma-separated weights; must contain 1 (default: scenario sweep)")
    bench.add_argument("--roadmap-file", default=None,
                       help="roadmap to reuse; built and saved there if it does not exist")
    bench.add_argument("--out", default=None, help="records CSV (default: standard output)")
    bench.add_argument("--summary-out", default=None, help="per-weight aggregate CSV")
    bench.add_argument("--timing", action="store_true",
                       help="record solve_ms (otherwise the column is left empty)")

    trace = commands.add_parser("export-trace", parents=[common], help="solve one query and export its trace CSV")
    _scene_options(trace)
    _roadmap_options(trace)
    _query_options(trace)
    trace.add_argument("--roadmap-file", default=None,
                       help="roadmap to reuse; built and saved there if it does not exist")
    trace.add_argument("--out", required=True, help="trace CSV output file")

    validate = commands.add_parser("validate-scene", parents=[common], help="parse and validate a scene file")
    _scene_options(validate)
    return parser


# ============================================================================
# SUBCOMANDOS
# ============================================================================

def _load_bundle(args) -> Tuple[str, ScenarioBundle]:
    if args.scenario:
        return args.scenario, builtin_scenario(args.scenario)
    bundle = load_scenario_file(args.scene)
    return bundle.scene.name, bundle


def _planner(args, bundle: ScenarioBundle) -> PrivacyAwarePlanner:
    defaults = bundle.roadmap
    return PrivacyAwarePlanner(
        bundle.scene,
        resolution=args.resolution or defaults.resolution,
        privacy_resolution=args.privacy_resolution or defaults.privacy_resolution,
        threads=args.threads,
        verbose=args.verbose,
    )


def _roadmap(args, bundle: ScenarioBundle, planner: PrivacyAwarePlanner) -> Roadmap:
    """Carga --roadmap-file si existe; si no, construye (y guarda si se pidió fichero)"""
    path = getattr(args, "roadmap_file", None)
    if path and args.command != "build-roadmap" and os.path.exists(path):
        roadmap = load_roadmap(path)
        if not planner.roadmap_matches(roadmap):
            raise ValueError(f"roadmap file {path} was built for a different scene")
        logger.info("Reutilizando roadmap de %s", path)
        return roadmap
    n = bundle.roadmap.n if args.roadmap_n is None else args.roadmap_n
    radius = args.conn_radius or bundle.roadmap.conn_radius
    roadmap = planner.build_roadmap(n, radius, args.seed)
    if path:
        save_roadmap(roadmap, path)
    return roadmap


def _query_endpoints(args, bundle: ScenarioBundle, planner: PrivacyAwarePlanner):
    start, goal = args.start, args.goal
    if start is None or goal is None:
        rng = derive_rng(derive_seed(args.seed, QUERY_STREAM, 0))
        sampled = planner.sample_query(rng, bundle.query.max_attempts)
        start = sampled[0] if start is None else start
        goal = sampled[1] if goal is None else goal
    return start, goal


def _solve(args) -> Tuple[str, PrivacyAwarePlanner, PathSolution]:
    name, bundle = _load_bundle(args)
    planner = _planner(args, bundle)
    roadmap = _roadmap(args, bundle, planner)
    start, goal = _query_endpoints(args, bundle, planner)
    solution = planner.query(roadmap, start, goal, CostProfile(args.weight))
    return name, planner, solution


def cmd_build_roadmap(args) -> int:
    name, bundle = _load_bundle(args)
    planner = _planner(args, bundle)
    roadmap = _roadmap(args, bundle, planner)
    print(json.dumps({
        "scenario": name,
        "roadmap_file": args.roadmap_file,
        "nodes": roadmap.num_nodes,
        "edges": roadmap.num_edges,
        "components": roadmap.num_components(),
    }, sort_keys=True))
    return EXIT_OK


def cmd_plan(args) -> int:
    name, planner, solution = _solve(args)
    document = dict(solution.summary(), scenario=name, seed=args.seed)
    text = json.dumps(document, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    if args.trace:
        export_trace(solution, planner.privacy, args.trace)
    return EXIT_OK


def cmd_export_trace(args) -> int:
    _, planner, solution = _solve(args)
    rows = export_trace(solution, planner.privacy, args.out)
    print(json.dumps({"trace": args.out, "rows": rows}, sort_keys=True))
    return EXIT_OK


def cmd_bench(args) -> int:
    name, bundle = _load_bundle(args)
    spec = ExperimentSpec.from_bundle(
        name, bundle, runs=args.runs, seed=args.seed,
        weights=args.weights,
        n=args.roadmap_n,
        conn_radius=args.conn_radius,
        resolution=args.resolution,
        privacy_resolution=args.privacy_resolution,
    )
    evaluator = BenchmarkEvaluator(bundle.scene, threads=args.threads, verbose=args.verbose,
                                   record_timing=args.timing)
    roadmap = None
    if args.roadmap_file:
        roadmap = _roadmap(args, bundle, PrivacyAwarePlanner(
            bundle.scene, spec.resolution, spec.privacy_resolution, threads=args.threads, verbose=args.verbose,
        ))
    records = evaluator.run_experiment(spec, roadmap)
    if args.out:
        evaluator.save_results(records, args.out, args.summary_out)
        evaluator.print_summary(records)
    else:
        write_records_csv(records, sys.stdout)
        if args.summary_out:
            write_summary_csv(summarize(records), args.summary_out)
    return EXIT_OK


def cmd_validate_scene(args) -> int:
    name, bundle = _load_bundle(args)
    scene = bundle.scene
    print(json.dumps({
        "scene": name,
        "valid": True,
        "dof": scene.robot.dof,
        "obstacles": len(scene.obstacles),
        "privacy_regions": len(scene.privacy_regions),
    }, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "build-roadmap": cmd_build_roadmap,
    "plan": cmd_plan,
    "bench": cmd_bench,
    "export-trace": cmd_export_trace,
    "validate-scene": cmd_validate_scene,
}


# ============================================================================
# FUNCIÓN PRINCIPAL
# ============================================================================

def join_signed_values(argv: Sequence[str]) -> List[str]:
    """
    Reescribe `--start -1,2` como `--start=-1,2`

    argparse solo reconoce números negativos sueltos; una lista separada por comas
    que empieza por '-' la toma como una opción desconocida.
    """
    joined = []
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token in SIGNED_VALUE_FLAGS and i + 1 < len(tokens) and _SIGNED_VALUE.match(tokens[i + 1]):
            joined.append(f"{token}={tokens[i + 1]}")
            i += 2
            continue
        joined.append(token)
        i += 1
    return joined


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(join_signed_values(sys.argv[1:] if argv is None else argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (PrivPlanError, ValueError) as e:
        print(f"privplan {args.command}: error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"privplan {args.command}: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
