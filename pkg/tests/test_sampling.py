import numpy as np
import pytest

from app.candidates.sampling import SurfaceSampleSet, sample_mesh_surface
from app.errors import EmptyMesh
from app.fileio.mesh import TriangleMesh
from app.geometry.shapes import box, icosphere


def test_box_samples_lie_on_faces_with_outward_normals():
    mesh = box((2.0, 1.0, 0.5))
    samples = sample_mesh_surface(mesh, 500, seed=0)
    half = np.array([1.0, 0.5, 0.25])
    on_face = np.isclose(np.abs(samples.points), half).any(axis=1)
    assert on_face.all()
    assert np.all(np.abs(samples.points) <= half + 1e-12)
    assert np.einsum("ij,ij->i", samples.points, samples.normals).min() > 0


def test_sampling_is_area_uniform():
    # The two x faces of this box hold half of its area
    mesh = box((1.0, 2.0, 2.0))
    samples = sample_mesh_surface(mesh, 20000, seed=1)
    frac = np.mean(np.isclose(np.abs(samples.points[:, 0]), 0.5))
    assert frac == pytest.approx(0.5, abs=0.02)


def test_samples_are_a_prefix_of_larger_draws():
    mesh = icosphere(1)
    small = sample_mesh_surface(mesh, 10, seed=7)
    large = sample_mesh_surface(mesh, 40, seed=7)
    assert np.array_equal(small.points, large.points[:10])
    assert np.array_equal(small.normals, large.normals[:10])


def test_seed_and_stream_change_the_draw():
    mesh = icosphere(1)
    base = sample_mesh_surface(mesh, 50, seed=0, stream="cover").points
    assert np.array_equal(base, sample_mesh_surface(mesh, 50, seed=0, stream="cover").points)
    assert not np.array_equal(base, sample_mesh_surface(mesh, 50, seed=1, stream="cover").points)
    assert not np.array_equal(base, sample_mesh_surface(mesh, 50, seed=0, stream="gen").points)


def test_zero_area_mesh_cannot_be_sampled():
    flat = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float), np.array([[0, 1, 2]]))
    with pytest.raises(EmptyMesh):
        sample_mesh_surface(flat, 10, seed=0)


def test_sample_set_requires_unit_normals():
    with pytest.raises(ValueError):
        SurfaceSampleSet(np.zeros((2, 3)), np.array([[0, 0, 2.0], [0, 0, 1.0]]), "cloud")
    with pytest.raises(ValueError):
        SurfaceSampleSet(np.zeros((0, 3)), None, "mesh")
