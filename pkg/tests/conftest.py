"""Robots y escenas pequeñas compartidas por los tests"""

import math

import numpy as np
import pytest

from privplan.geometry import Primitive, Transform
from privplan.kinematics import JointSpec, RobotModel, SensorMount
from privplan.scene import PrivacyRegion, Scene

HALF_ANGLE = math.radians(21.0)


def planar_arm(link_radius=None, sensor_offset=(1.0, 0.0, 0.0), base=None):
    """Dos articulaciones de revolución en z con eslabones de 1 m sobre x"""
    link = None
    if link_radius is not None:
        link = Primitive.capsule(link_radius, 1.0, Transform.from_xyz_rpy((0.5, 0.0, 0.0), (0.0, math.pi / 2, 0.0)))
    joints = (
        JointSpec.revolute("j0", (0, 0, 1), (-math.pi, math.pi)),
        JointSpec.revolute("j1", (0, 0, 1), (-math.pi, math.pi), Transform.from_xyz_rpy((1.0, 0.0, 0.0))),
    )
    mount = SensorMount(1, Transform.from_xyz_rpy(sensor_offset), HALF_ANGLE, 2.0)
    return RobotModel(joints, (link, link), mount, base=base, name="planar_arm")


def point_robot(radius=0.1, limits=(-5.0, 5.0), yaw=False):
    """
    Robot puntual en el plano z=0: prismáticas x e y (y opcionalmente giro en z)
    con una esfera en el último eslabón; la cámara mira a +x del último marco
    """
    joints = [
        JointSpec.prismatic("x", (1, 0, 0), limits),
        JointSpec.prismatic("y", (0, 1, 0), limits),
    ]
    if yaw:
        joints.append(JointSpec.revolute("yaw", (0, 0, 1), (-math.pi, math.pi)))
    links = [None] * (len(joints) - 1) + [Primitive.sphere(radius)]
    mount = SensorMount(len(joints) - 1, Transform.identity(), HALF_ANGLE, 2.0)
    return RobotModel(tuple(joints), tuple(links), mount, name="point")


@pytest.fixture
def arm():
    return planar_arm()


@pytest.fixture
def point():
    return point_robot()


@pytest.fixture
def empty_scene():
    return Scene("empty", point_robot())


@pytest.fixture
def wall_scene():
    """Pared en x ∈ [-0.25, 0.25] con un hueco solo para y > 3"""
    wall = Primitive.box((0.5, 8.0, 1.0), Transform.from_xyz_rpy((0.0, -1.0, 0.0)))
    return Scene("wall", point_robot(), (wall,))


@pytest.fixture
def privacy_scene():
    """Una esfera de privacidad a 1 m del origen sobre +x"""
    return Scene("privacy", point_robot(), (), (PrivacyRegion((1.0, 0.0, 0.0), 0.4),))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
