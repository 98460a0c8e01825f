#!/usr/bin/env python3
"""
Script de Demostración del Planificador
Una misma consulta resuelta con los perfiles violador, agnóstico y preservador
"""

import argparse
import os
import sys

# Añadir directorio src al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from privplan import CostProfile, PrivacyAwarePlanner, builtin_scenario
from privplan.kinematics import derive_rng
from privplan.planner import QUERY_STREAM
from privplan.scene import builtin_scenario_names


def demo_profiles(scenario: str, seed: int, roadmap_n: int):
    """Compara w = -5, 1 y +5 sobre un único par inicio/objetivo"""

    print("=" * 80)
    print("DEMOSTRACIÓN: VIOLADOR vs AGNÓSTICO vs PRESERVADOR")
    print(f"Escenario: {scenario} | semilla: {seed}")
    print("=" * 80)

    bundle = builtin_scenario(scenario)
    scene = bundle.scene
    print(f"\n🔧 Escena: {scene.robot.dof} gdl, {len(scene.obstacles)} obstáculos, "
          f"{len(scene.privacy_regions)} regiones de privacidad")

    planner = PrivacyAwarePlanner(scene, bundle.roadmap.resolution, bundle.roadmap.privacy_resolution)

    print(f"\n🚀 Construyendo roadmap ({roadmap_n} nodos, r_conn = {bundle.roadmap.conn_radius})...")
    roadmap = planner.build_roadmap(roadmap_n, bundle.roadmap.conn_radius, seed)
    print(f"  • Aristas: {roadmap.num_edges}")
    print(f"  • Componentes conexas: {roadmap.num_components()}")

    start, goal = planner.sample_query(derive_rng(seed, QUERY_STREAM), bundle.query.max_attempts)
    profiles = [CostProfile(-5.0), CostProfile.agnostic(), CostProfile(5.0)]
    solutions = planner.compare_profiles(roadmap, start, goal, profiles)

    print("\n" + "=" * 80)
    print("COMPARACIÓN")
    print("=" * 80)
    print(f"\n{'Perfil':<24} {'Coste':>10} {'Longitud':>10} {'Fracción viol.':>15} {'Regiones':>10}")
    print("-" * 73)
    for solution in solutions:
        print(f"{solution.profile.label:<24} {solution.cost:>10.3f} {solution.length:>10.3f} "
              f"{solution.violation_fraction:>15.1%} {len(solution.regions_observed):>10}")

    print("\n" + "=" * 80)
    print("✅ DEMOSTRACIÓN COMPLETADA")
    print("=" * 80)
    print("\n💡 Para ejecutar el benchmark completo:")
    print(f"   python main.py bench --scenario {scenario} --runs 100 --seed 7 --out results/{scenario}.csv")
    print()


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Demo del planificador consciente de la privacidad")
    parser.add_argument("--scenario", choices=builtin_scenario_names(), default="manip_3",
                        help="Escenario incluido (default: manip_3)")
    parser.add_argument("--seed", type=int, default=7, help="Semilla (default: 7)")
    parser.add_argument("--roadmap-n", type=int, default=300, help="Nodos del roadmap (default: 300)")

    args = parser.parse_args()
    demo_profiles(args.scenario, args.seed, args.roadmap_n)
