"""Tests de cinemática directa, cono del sensor, métrica y muestreo"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import HALF_ANGLE, planar_arm, point_robot
from privplan.errors import DimensionError
from privplan.geometry import Transform, transform_point
from privplan.kinematics import (
    JointSpec,
    RobotModel,
    SensorMount,
    cspace_distance,
    derive_rng,
    derive_seed,
    forward_kinematics,
    forward_kinematics_batch,
    interpolate,
    interpolate_batch,
    sample_config,
    sample_configs,
    sensor_cone_at,
    subdivision_count,
)


def tip(robot, q):
    """Extremo del brazo plano: punto a 1 m sobre x del último marco"""
    return transform_point(forward_kinematics(robot, q)[-1], (1.0, 0.0, 0.0))


# ============================================================================
# CINEMÁTICA DIRECTA
# ============================================================================

class TestForwardKinematics:
    def test_straight_arm(self, arm):
        np.testing.assert_allclose(tip(arm, [0.0, 0.0]), (2.0, 0.0, 0.0), atol=1e-12)

    def test_shoulder_quarter_turn(self, arm):
        np.testing.assert_allclose(tip(arm, [math.pi / 2, 0.0]), (0.0, 2.0, 0.0), atol=1e-12)

    def test_bent_arm(self, arm):
        np.testing.assert_allclose(tip(arm, [math.pi / 2, math.pi / 2]), (-1.0, 1.0, 0.0), atol=1e-12)

    def test_one_pose_per_link(self, arm):
        assert len(forward_kinematics(arm, [0.1, 0.2])) == 2

    def test_prismatic_joints_translate(self, point):
        poses = forward_kinematics(point, [1.5, -2.0])
        np.testing.assert_allclose(poses[-1].translation, (1.5, -2.0, 0.0))

    def test_planar_base(self):
        base = JointSpec.planar_base("base", (-5, 5), (-5, 5))
        robot = RobotModel((base,), (None,), SensorMount(0, Transform.identity(), HALF_ANGLE, 2.0))
        pose = forward_kinematics(robot, [1.0, 2.0, math.pi / 2])[0]
        np.testing.assert_allclose(transform_point(pose, (1.0, 0.0, 0.0)), (1.0, 3.0, 0.0), atol=1e-12)

    @pytest.mark.parametrize("q", [[0.0], [0.0, 0.0, 0.0], []])
    def test_dimension_mismatch(self, arm, q):
        with pytest.raises(DimensionError, match="config dimension"):
            forward_kinematics(arm, q)

    @settings(max_examples=40, deadline=None)
    @given(st.tuples(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0)),
           st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0)),
           st.tuples(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0)))
    def test_base_transform_composes_in_front(self, q, xyz, rpy):
        base = Transform.from_xyz_rpy(xyz, rpy)
        moved = planar_arm(base=base)
        plain = forward_kinematics(planar_arm(), q)
        for with_base, without in zip(forward_kinematics(moved, q), plain):
            assert with_base.allclose(base.compose(without), atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.tuples(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0)),
           st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0)),
           st.tuples(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0)))
    def test_sensor_cone_follows_base_transform(self, q, xyz, rpy):
        base = Transform.from_xyz_rpy(xyz, rpy)
        moved = sensor_cone_at(planar_arm(base=base), q)
        expected = sensor_cone_at(planar_arm(), q).transformed(base)
        np.testing.assert_allclose(moved.apex, expected.apex, atol=1e-9)
        np.testing.assert_allclose(moved.axis, expected.axis, atol=1e-9)
        assert moved.half_angle == expected.half_angle
        assert moved.range == expected.range

    def test_batch_matches_single(self, arm, rng):
        configs = sample_configs(arm, rng, 16)
        batch = forward_kinematics_batch(arm, configs)
        for q, poses in zip(configs, batch):
            for pose, single in zip(poses, forward_kinematics(arm, q)):
                np.testing.assert_allclose(pose, single.as_matrix(), atol=1e-12)


# ============================================================================
# CONO DEL SENSOR
# ============================================================================

class TestSensorCone:
    def test_identity_chain_looks_along_x(self, point):
        cone = sensor_cone_at(point, [0.0, 0.0])
        np.testing.assert_allclose(cone.apex, (0.0, 0.0, 0.0))
        np.testing.assert_allclose(cone.axis, (1.0, 0.0, 0.0))
        assert cone.half_angle == pytest.approx(HALF_ANGLE)
        assert cone.range == 2.0

    def test_yaw_rotates_axis(self):
        robot = point_robot(yaw=True)
        cone = sensor_cone_at(robot, [0.0, 0.0, math.pi / 2])
        np.testing.assert_allclose(cone.axis, (0.0, 1.0, 0.0), atol=1e-12)

    def test_mount_follows_arm(self, arm):
        cone = sensor_cone_at(arm, [math.pi / 2, 0.0])
        np.testing.assert_allclose(cone.apex, (0.0, 2.0, 0.0), atol=1e-12)
        np.testing.assert_allclose(cone.axis, (0.0, 1.0, 0.0), atol=1e-12)

    def test_from_fov_halves_the_angle(self):
        mount = SensorMount.from_fov(0, Transform.identity(), math.radians(42.0), 2.0)
        assert mount.half_angle == pytest.approx(math.radians(21.0))


# ============================================================================
# MÉTRICA E INTERPOLACIÓN
# ============================================================================

def weighted_robot(wx, wy):
    joints = (
        JointSpec.prismatic("x", (1, 0, 0), (-10, 10), metric_weight=wx),
        JointSpec.prismatic("y", (0, 1, 0), (-10, 10), metric_weight=wy),
    )
    return RobotModel(joints, (None, None), SensorMount(1, Transform.identity(), HALF_ANGLE, 2.0))


configs_2d = st.tuples(st.floats(-10.0, 10.0), st.floats(-10.0, 10.0))


class TestMetric:
    def test_unit_weights(self):
        assert cspace_distance(weighted_robot(1.0, 1.0), [0.0, 0.0], [3.0, 4.0]) == pytest.approx(5.0)

    def test_weighted(self):
        assert cspace_distance(weighted_robot(2.0, 1.0), [0.0, 0.0], [1.0, 1.0]) == pytest.approx(math.sqrt(5.0))

    def test_rejects_non_positive_weight(self):
        with pytest.raises(ValueError):
            weighted_robot(0.0, 1.0)

    @given(configs_2d, configs_2d, configs_2d)
    def test_metric_axioms(self, a, b, c):
        robot = weighted_robot(2.0, 0.5)
        assert cspace_distance(robot, a, a) == 0.0
        assert cspace_distance(robot, a, b) == pytest.approx(cspace_distance(robot, b, a))
        assert cspace_distance(robot, a, c) <= cspace_distance(robot, a, b) + cspace_distance(robot, b, c) + 1e-9

    def test_dimension_mismatch(self, point):
        with pytest.raises(DimensionError):
            cspace_distance(point, [0.0, 0.0], [0.0, 0.0, 0.0])


class TestInterpolate:
    def test_endpoints_are_exact(self):
        a, b = np.array([0.1, 0.7]), np.array([-0.3, 2.9])
        assert np.array_equal(interpolate(a, b, 0.0), a)
        assert np.array_equal(interpolate(a, b, 1.0), b)

    def test_midpoint(self):
        np.testing.assert_allclose(interpolate([0.0, 0.0], [2.0, 4.0], 0.5), (1.0, 2.0))

    @pytest.mark.parametrize("t", [-0.1, 1.5])
    def test_rejects_t_out_of_range(self, t):
        with pytest.raises(ValueError):
            interpolate([0.0], [1.0], t)

    def test_batch_matches_scalar(self):
        a, b = np.array([1.0, -1.0]), np.array([3.0, 2.0])
        ts = np.linspace(0.0, 1.0, 7)
        for t, q in zip(ts, interpolate_batch(a, b, ts)):
            np.testing.assert_allclose(q, interpolate(a, b, t))

    @pytest.mark.parametrize("length,resolution,expected", [
        (0.0, 0.05, 0), (0.05, 0.05, 1), (0.051, 0.05, 2), (1.0, 0.25, 4), (1e-9, 0.05, 1),
    ])
    def test_subdivision_count(self, length, resolution, expected):
        assert subdivision_count(length, resolution) == expected


# ============================================================================
# MUESTREO
# ============================================================================

class TestSampling:
    def test_samples_within_limits(self, arm, rng):
        configs = sample_configs(arm, rng, 1000)
        assert np.all(arm.within_limits(configs))

    def test_same_seed_same_samples(self, point):
        a = sample_configs(point, derive_rng(42, 0), 50)
        b = sample_configs(point, derive_rng(42, 0), 50)
        assert np.array_equal(a, b)

    def test_block_equals_repeated_single_draws(self, point):
        block = sample_configs(point, derive_rng(3), 10)
        rng = derive_rng(3)
        singles = np.array([sample_config(point, rng) for _ in range(10)])
        np.testing.assert_array_equal(block, singles)

    def test_streams_are_distinct(self, point):
        a = sample_configs(point, derive_rng(42, 0), 5)
        b = sample_configs(point, derive_rng(42, 1), 5)
        assert not np.array_equal(a, b)
        assert derive_seed(42, 1, 0) != derive_seed(42, 1, 1)
        assert derive_seed(42, 1, 0) == derive_seed(42, 1, 0)

    def test_uniform_mean(self):
        robot = point_robot(limits=(-1.0, 3.0))
        configs = sample_configs(robot, derive_rng(0), 100_000)
        np.testing.assert_allclose(configs.mean(axis=0), (1.0, 1.0), atol=0.02)
