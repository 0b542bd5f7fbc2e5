from collections import Counter

import numpy as np
import pytest

from app.errors import InvalidParameter
from app.geometry.shapes import SHAPES, capsule, make_shape


def _signed_volume(mesh):
    a, b, c = mesh.corners
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def _assert_closed_and_oriented(mesh):
    directed = Counter()
    for a, b, c in mesh.triangles.tolist():
        directed.update([(a, b), (b, c), (c, a)])
    # Every directed edge appears once and is matched by its reverse
    assert max(directed.values()) == 1
    assert all(directed[(b, a)] == 1 for a, b in directed)
    assert mesh.face_areas().min() > 0
    assert _signed_volume(mesh) > 0


@pytest.mark.parametrize("name", sorted(SHAPES))
def test_default_shapes_are_closed_and_outward(name):
    _assert_closed_and_oriented(make_shape(name))


def test_euler_characteristic():
    for name, chi in (("sphere", 2), ("capsule", 2), ("dumbbell", 2), ("box", 2), ("torus", 0)):
        mesh = make_shape(name)
        v = len(mesh.vertices)
        f = len(mesh.triangles)
        e = 3 * f // 2
        assert v - e + f == chi, name


def test_sphere_volume_and_zero_length_capsule():
    mesh = make_shape("sphere", subdivisions=4, radius=2.0)
    assert _signed_volume(mesh) == pytest.approx(4.0 / 3.0 * np.pi * 8.0, rel=0.01)
    ball = capsule(radius=0.3, length=0.0)
    _assert_closed_and_oriented(ball)
    assert np.linalg.norm(ball.vertices, axis=1) == pytest.approx(np.full(len(ball.vertices), 0.3))


def test_shape_parameters_are_validated():
    with pytest.raises(InvalidParameter):
        make_shape("teapot")
    with pytest.raises(InvalidParameter):
        make_shape("torus", major=0.2, minor=0.3)
    with pytest.raises(InvalidParameter):
        make_shape("dumbbell", neck=0.6)
