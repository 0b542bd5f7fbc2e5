import numpy as np
import pytest

from app.candidates.generate import (
    CandidateSet,
    candidates_random,
    candidates_voronoi_cloud,
    candidates_voronoi_mesh,
    estimate_radii,
)
from app.candidates.inside import (
    cluster_filter,
    cluster_filter_indices,
    inside_cloud_label,
    inside_cloud_nearest,
    inside_mesh,
    inside_mesh_many,
)
from app.candidates.sampling import SurfaceSampleSet, as_samples, sample_mesh_surface
from app.fileio.mesh import OrientedPointCloud
from app.geometry.shapes import box, ellipsoid, icosphere, torus


def test_inside_mesh_on_box_and_sphere():
    cube = box((1.0, 1.0, 1.0))
    assert inside_mesh([0.0, 0.0, 0.0], cube)
    assert inside_mesh([0.49, -0.3, 0.2], cube)
    assert not inside_mesh([0.6, 0.0, 0.0], cube)
    assert not inside_mesh([2.0, 2.0, 2.0], cube)

    sphere = icosphere(2)
    pts = np.random.default_rng(0).uniform(-1.2, 1.2, size=(400, 3))
    r = np.linalg.norm(pts, axis=1)
    clear = (r < 0.9) | (r > 1.05)
    inside = inside_mesh_many(pts[clear], sphere)
    assert np.array_equal(inside, r[clear] < 0.9)


def test_inside_mesh_handles_a_hole():
    ring = torus(1.0, 0.3)
    assert not inside_mesh([0.0, 0.0, 0.0], ring)
    assert inside_mesh([1.0, 0.0, 0.0], ring)
    assert inside_mesh([0.0, -1.1, 0.05], ring)


def test_inside_cloud_tests():
    mesh = icosphere(2)
    samples = as_samples(OrientedPointCloud(mesh.vertices, mesh.vertices))
    assert inside_cloud_nearest([[0.0, 0.0, 0.0], [0.5, 0.1, 0.0], [1.5, 0.0, 0.0]], samples).tolist() == [
        True,
        True,
        False,
    ]
    # The origin sits behind every tangent plane of a sphere
    assert inside_cloud_label([0.0, 0.0, 0.0], [0, 1, 2, 3], samples)
    assert not inside_cloud_label([3.0, 0.0, 0.0], [0, 1, 2, 3], samples)


def test_cluster_filter_reaches_a_fixed_point():
    rng = np.random.default_rng(1)
    blob = rng.normal(scale=0.01, size=(60, 3))
    outliers = np.array([[1.0, 0.0, 0.0], [1.01, 0.0, 0.0], [-1.0, 0.5, 0.0]])
    pts = np.vstack([blob, outliers])
    keep = cluster_filter_indices(pts, k=10, radius=0.05, min_count=5)
    assert keep.tolist() == list(range(60))
    once = cluster_filter(pts, k=10, radius=0.05, min_count=5)
    assert np.array_equal(cluster_filter(once, k=10, radius=0.05, min_count=5), once)


def test_voronoi_mesh_candidates_are_inside():
    mesh = ellipsoid((1.0, 0.6, 0.4), subdivisions=2)
    gen = sample_mesh_surface(mesh, 400, seed=0, stream="gen")
    candidates, stats = candidates_voronoi_mesh(gen, mesh)
    assert len(candidates) == stats.generated > 0
    assert inside_mesh_many(candidates.centers, mesh).all()
    assert stats.rejected_outside > 0
    assert not candidates.has_radii


def test_voronoi_cloud_candidates_respect_normals():
    mesh = icosphere(2)
    gen = sample_mesh_surface(mesh, 400, seed=0, stream="gen")
    candidates, stats = candidates_voronoi_cloud(gen)
    assert stats.generated + stats.removed_by_cluster_filter > 0
    assert stats.generated == len(candidates)
    if len(candidates):
        assert np.linalg.norm(candidates.centers, axis=1).max() < 1.0


def test_random_candidates_on_a_mesh():
    mesh = box((1.0, 0.5, 0.5))
    candidates, stats = candidates_random(mesh, 300, seed=3)
    assert len(candidates) == 300
    assert np.all(np.abs(candidates.centers) <= [0.5, 0.25, 0.25])
    assert stats.trials >= 300
    again, _ = candidates_random(mesh, 300, seed=3)
    assert np.array_equal(candidates.centers, again.centers)


def test_estimate_radii_is_nearest_sample_distance():
    samples = SurfaceSampleSet(
        np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [2.0, 0.0, 0.0]]),
        None,
        "mesh",
    )
    candidates = CandidateSet.from_centers(np.array([[0.0, 0.0, 0.5], [1.5, 0.0, 0.0], [2.0, 0.0, 0.0]]), "random")
    kept, dropped = estimate_radii(candidates, samples)
    assert dropped == 1
    assert kept.radii == pytest.approx([0.5, 0.5])
    assert kept.has_radii and not kept.has_dilation
    ball = kept[1]
    assert ball.center == (1.5, 0.0, 0.0)
    assert ball.origin == "random"
