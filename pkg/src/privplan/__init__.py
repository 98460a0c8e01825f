"""
Planificación de movimiento consciente de la privacidad
Roadmaps PRM con costes de privacidad y benchmark de barridos de pesos
"""

from .bench import BenchmarkEvaluator, ExperimentSpec, RunRecord, export_trace, summarize
from .errors import (
    DimensionError,
    InfeasibleSceneError,
    NoPathError,
    PrivPlanError,
    RoadmapChecksumError,
    RoadmapFormatError,
    RoadmapVersionError,
    SceneParseError,
    SceneValidationError,
)
from .geometry import Cone, Primitive, Transform, cone_sphere_intersect, primitive_pair_distance
from .kinematics import RobotModel, cspace_distance, forward_kinematics, interpolate, sensor_cone_at
from .planner import PathSolution, PrivacyAwarePlanner, Roadmap, edge_weight, shortest_path
from .privacy import CostProfile, PrivacyModel, SegmentClassification, privacy_cost, violation_fraction
from .roadmap_io import load_roadmap, save_roadmap
from .scene import Scene, builtin_scenario, load_scene, serialize_scene
from .validity import ValidityChecker

__all__ = [
    'BenchmarkEvaluator',
    'Cone',
    'CostProfile',
    'DimensionError',
    'ExperimentSpec',
    'InfeasibleSceneError',
    'NoPathError',
    'PathSolution',
    'Primitive',
    'PrivPlanError',
    'PrivacyAwarePlanner',
    'PrivacyModel',
    'RoadmapChecksumError',
    'RoadmapFormatError',
    'RoadmapVersionError',
    'Roadmap',
    'RobotModel',
    'RunRecord',
    'Scene',
    'SceneParseError',
    'SceneValidationError',
    'SegmentClassification',
    'Transform',
    'ValidityChecker',
    'builtin_scenario',
    'cone_sphere_intersect',
    'cspace_distance',
    'edge_weight',
    'export_trace',
    'forward_kinematics',
    'interpolate',
    'load_roadmap',
    'load_scene',
    'primitive_pair_distance',
    'privacy_cost',
    'save_roadmap',
    'sensor_cone_at',
    'serialize_scene',
    'shortest_path',
    'summarize',
    'violation_fraction',
]
