"""Tests de lectura, validación y serialización de escenas"""

import json
import math

import numpy as np
import pytest

from privplan.errors import SceneParseError, SceneValidationError
from privplan.scene import (
    builtin_scenario,
    builtin_scenario_names,
    load_scenario_file,
    load_scene,
    scene_digest,
    serialize_scene,
)
from privplan.validity import ValidityChecker
from privplan.kinematics import derive_rng


def minimal_document(**overrides):
    doc = {
        "format_version": 1,
        "robot": {
            "joints": [{"kind": "revolute", "axis": [0, 0, 1], "limits_deg": [-90, 90]}],
            "sensor": {"link": 0, "fov_deg": 42, "range": 2.0},
        },
        "obstacles": [],
        "privacy_regions": [{"center": [1.0, 0.0, 0.0], "radius": 0.4}],
    }
    doc.update(overrides)
    return doc


def assert_same_scene(a, b):
    assert a.name == b.name
    assert a.robot.dof == b.robot.dof
    np.testing.assert_allclose(a.robot.lower, b.robot.lower, atol=1e-12)
    np.testing.assert_allclose(a.robot.upper, b.robot.upper, atol=1e-12)
    np.testing.assert_allclose(a.robot.weights, b.robot.weights, atol=1e-12)
    assert a.robot.base.allclose(b.robot.base, atol=1e-12)
    for ja, jb in zip(a.robot.joints, b.robot.joints):
        assert ja.kind is jb.kind
        assert ja.origin.allclose(jb.origin, atol=1e-12)
    for la, lb in zip(a.robot.links, b.robot.links):
        assert (la is None) == (lb is None)
        if la is not None:
            assert la.kind is lb.kind
            assert la.dimensions == pytest.approx(lb.dimensions)
            assert la.pose.allclose(lb.pose, atol=1e-12)
    ma, mb = a.robot.sensor_mount, b.robot.sensor_mount
    assert ma.link == mb.link
    assert ma.half_angle == pytest.approx(mb.half_angle, abs=1e-12)
    assert ma.range == mb.range
    assert len(a.obstacles) == len(b.obstacles)
    for oa, ob in zip(a.obstacles, b.obstacles):
        assert oa.kind is ob.kind
        assert oa.pose.allclose(ob.pose, atol=1e-12)
    np.testing.assert_allclose(a.privacy_centers, b.privacy_centers)
    np.testing.assert_allclose(a.privacy_radii, b.privacy_radii)


# ============================================================================
# LECTURA
# ============================================================================

class TestLoadScene:
    def test_minimal_document(self):
        scene = load_scene(json.dumps(minimal_document()))
        assert scene.robot.dof == 1
        assert len(scene.privacy_regions) == 1
        assert scene.robot.sensor_mount.half_angle == pytest.approx(math.radians(21.0))
        assert scene.robot.upper[0] == pytest.approx(math.pi / 2)

    def test_loads_from_path(self, tmp_path):
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(minimal_document()), encoding="utf-8")
        assert load_scene(path).robot.dof == 1
        assert load_scene(str(path)).robot.dof == 1

    def test_negative_region_radius_names_field(self):
        doc = minimal_document(privacy_regions=[{"center": [1.0, 0.0, 0.0], "radius": -0.4}])
        with pytest.raises(SceneValidationError) as excinfo:
            load_scene(json.dumps(doc))
        assert excinfo.value.field == "privacy_regions[0].radius"
        assert "privacy_regions[0].radius" in str(excinfo.value)

    def test_unknown_joint_kind(self):
        doc = minimal_document()
        doc["robot"]["joints"][0]["kind"] = "helical"
        with pytest.raises(SceneValidationError, match="unknown joint kind"):
            load_scene(json.dumps(doc))

    def test_unsupported_version(self):
        with pytest.raises(SceneValidationError, match="format_version"):
            load_scene(json.dumps(minimal_document(format_version=2)))

    def test_missing_robot(self):
        doc = minimal_document()
        del doc["robot"]
        with pytest.raises(SceneValidationError) as excinfo:
            load_scene(json.dumps(doc))
        assert excinfo.value.field == "robot"

    def test_non_unit_axis(self):
        doc = minimal_document()
        doc["robot"]["joints"][0]["axis"] = [0, 0, 2]
        with pytest.raises(SceneValidationError) as excinfo:
            load_scene(json.dumps(doc))
        assert excinfo.value.field == "robot.joints[0].axis"

    def test_sensor_link_out_of_range(self):
        doc = minimal_document()
        doc["robot"]["sensor"]["link"] = 3
        with pytest.raises(SceneValidationError) as excinfo:
            load_scene(json.dumps(doc))
        assert excinfo.value.field == "robot.sensor.link"

    def test_bad_obstacle_size(self):
        doc = minimal_document(obstacles=[{"kind": "box", "size": [1.0, 0.0, 1.0]}])
        with pytest.raises(SceneValidationError) as excinfo:
            load_scene(json.dumps(doc))
        assert excinfo.value.field == "obstacles[0].size[1]"

    def test_malformed_json_reports_position(self):
        text = '{\n  "format_version": 1,\n  "robot": {,\n}'
        with pytest.raises(SceneParseError) as excinfo:
            load_scene(text)
        assert excinfo.value.line == 3
        assert excinfo.value.column is not None

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            load_scene(tmp_path / "missing.json")

    def test_name_from_meta(self):
        scene = load_scene(json.dumps(minimal_document(meta={"name": "corridor"})))
        assert scene.name == "corridor"


# ============================================================================
# META.SCENARIO
# ============================================================================

class TestScenarioMeta:
    def test_defaults_without_meta(self):
        bundle = load_scenario_file(json.dumps(minimal_document()))
        assert 1.0 in bundle.weights
        assert bundle.query.rule == "uniform_rejection"

    def test_reads_roadmap_and_weights(self):
        meta = {"scenario": {"roadmap": {"n": 50, "conn_radius": 0.8}, "weights": [1, 3, -3],
                             "query": {"max_attempts": 20}}}
        bundle = load_scenario_file(json.dumps(minimal_document(meta=meta)))
        assert bundle.roadmap.n == 50
        assert bundle.roadmap.conn_radius == 0.8
        assert bundle.weights == (1.0, 3.0, -3.0)
        assert bundle.query.max_attempts == 20

    def test_rejects_small_weight(self):
        meta = {"scenario": {"weights": [1, 0.5]}}
        with pytest.raises(SceneValidationError, match="weight magnitude"):
            load_scenario_file(json.dumps(minimal_document(meta=meta)))

    @pytest.mark.parametrize("block,value", [("roadmap", [30, 3.0]), ("query", "uniform_rejection")])
    def test_non_object_block_names_field(self, block, value):
        meta = {"scenario": {block: value}}
        with pytest.raises(SceneValidationError) as info:
            load_scenario_file(json.dumps(minimal_document(meta=meta)))
        assert info.value.field == f"meta.scenario.{block}"

    def test_requires_agnostic_weight(self):
        meta = {"scenario": {"weights": [2, 5]}}
        with pytest.raises(SceneValidationError):
            load_scenario_file(json.dumps(minimal_document(meta=meta)))


# ============================================================================
# ESCENARIOS INCLUIDOS
# ============================================================================

class TestBuiltinScenarios:
    def test_names(self):
        assert builtin_scenario_names() == ("manip_1", "manip_3", "nav_9")

    @pytest.mark.parametrize("name,dof,regions", [("manip_1", 8, 1), ("manip_3", 8, 3), ("nav_9", 5, 9)])
    def test_dimensions(self, name, dof, regions):
        scene = builtin_scenario(name).scene
        assert scene.robot.dof == dof
        assert len(scene.privacy_regions) == regions

    @pytest.mark.parametrize("name", ["manip_1", "manip_3", "nav_9"])
    def test_sensor_and_regions(self, name):
        scene = builtin_scenario(name).scene
        mount = scene.robot.sensor_mount
        assert mount.half_angle == pytest.approx(math.radians(21.0))
        assert mount.range == pytest.approx(2.0)
        assert np.allclose(scene.privacy_radii, 0.4)

    @pytest.mark.parametrize("name", ["manip_1", "manip_3", "nav_9"])
    def test_admits_valid_configurations(self, name):
        scene = builtin_scenario(name).scene
        checker = ValidityChecker(scene, 0.05)
        q = checker.sample_valid(derive_rng(0), 10000)
        assert checker.is_config_valid(q)

    def test_unknown_scenario(self):
        with pytest.raises(ValueError, match="unknown scenario"):
            builtin_scenario("kitchen")


# ============================================================================
# SERIALIZACIÓN
# ============================================================================

class TestSerialization:
    @pytest.mark.parametrize("name", ["manip_3", "nav_9"])
    def test_round_trip(self, name):
        scene = builtin_scenario(name).scene
        reloaded = load_scene(serialize_scene(scene))
        assert_same_scene(scene, reloaded)

    def test_round_trip_is_stable_text(self):
        scene = load_scene(json.dumps(minimal_document()))
        once = serialize_scene(scene)
        assert serialize_scene(load_scene(once)) == once

    def test_digest_tracks_content(self):
        a = load_scene(json.dumps(minimal_document()))
        b = load_scene(json.dumps(minimal_document()))
        c = load_scene(json.dumps(minimal_document(privacy_regions=[{"center": [2.0, 0.0, 0.0], "radius": 0.4}])))
        assert scene_digest(a) == scene_digest(b)
        assert scene_digest(a) != scene_digest(c)
