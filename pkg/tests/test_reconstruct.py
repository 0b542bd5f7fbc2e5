import numpy as np
import pytest

from app.skeleton.model import Skeleton
from app.skeleton.reconstruct import (
    ErrorTriple,
    directed_hausdorff,
    field_distance,
    hausdorff,
    sample_reconstruction,
)

NO_EDGES = np.zeros((0, 2))
NO_TRIS = np.zeros((0, 3))


def test_sphere_and_cone_fields():
    ball = Skeleton([[0.0, 0.0, 0.0]], [1.0], NO_EDGES, NO_TRIS)
    assert field_distance([[2.0, 0.0, 0.0], [0.0, 0.0, 0.0]], ball) == pytest.approx([1.0, -1.0])

    rod = Skeleton([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [0.1, 0.1], [[0, 1]], NO_TRIS)
    assert field_distance([[0.5, 0.5, 0.0]], rod) == pytest.approx([0.4])
    # Beyond the end the cone clamps to its end sphere
    assert field_distance([[1.5, 0.0, 0.0]], rod) == pytest.approx([0.4])
    assert field_distance([[0.5, 0.5, 0.0], [0.5, 0.1, 0.0]], rod) == pytest.approx([0.4, 0.0])


def test_cone_field_takes_the_nearest_of_several_edges():
    chain = Skeleton(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0]],
        [0.1, 0.1, 0.1, 0.3],
        [[0, 1], [1, 2], [2, 3]],
        NO_TRIS,
    )
    queries = [[0.5, 0.5, 0.0], [1.5, 0.1, 0.0], [3.0, 0.0, 0.0], [2.0, 0.5, 0.0], [-1.0, 0.0, 0.0]]
    assert field_distance(queries, chain) == pytest.approx([0.4, 0.0, 0.9, -0.2, 0.9])


def test_slab_field_over_the_triangle_interior():
    tri = Skeleton([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [0.1, 0.1, 0.1], NO_EDGES, [[0, 1, 2]])
    assert field_distance([[0.25, 0.25, 0.3]], tri) == pytest.approx([0.2])
    assert field_distance([[0.25, 0.25, 0.0]], tri) == pytest.approx([-0.1])


def test_samples_of_one_sphere_lie_on_it():
    ball = Skeleton([[1.0, 2.0, 3.0]], [0.5], NO_EDGES, NO_TRIS)
    recon = sample_reconstruction(ball, 500, seed=0)
    assert recon.drawn == recon.kept == 500
    assert np.linalg.norm(recon.points - [1.0, 2.0, 3.0], axis=1) == pytest.approx(np.full(500, 0.5))


@pytest.mark.parametrize(
    "skeleton",
    [
        Skeleton([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [0.1, 0.3], [[0, 1]], NO_TRIS),
        Skeleton([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [0.1, 0.2, 0.15], [[0, 1]], [[0, 1, 2]]),
        Skeleton([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]], [0.1, 0.15, 0.1], [[0, 1], [1, 2]], NO_TRIS),
    ],
    ids=["cone", "slab", "chain"],
)
def test_kept_samples_lie_on_the_envelope(skeleton):
    recon = sample_reconstruction(skeleton, 3000, seed=1)
    assert 0 < recon.kept < recon.drawn
    assert np.abs(field_distance(recon.points, skeleton)).max() < 1e-6


def test_reconstruction_sampling_is_seeded():
    rod = Skeleton([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [0.1, 0.2], [[0, 1]], NO_TRIS)
    a = sample_reconstruction(rod, 200, seed=3)
    b = sample_reconstruction(rod, 200, seed=3)
    c = sample_reconstruction(rod, 200, seed=4)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_hausdorff_percentages():
    surface = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    recon = np.array([[0.0, 0.0, 0.0]])
    assert directed_hausdorff(surface, recon) == pytest.approx(1.0)
    assert directed_hausdorff(recon, surface) == pytest.approx(0.0)
    triple = hausdorff(surface, recon, diagonal=2.0)
    assert (triple.eps1, triple.eps2, triple.eps) == pytest.approx((50.0, 0.0, 50.0))
    assert triple.to_dict() == {"eps1_pct": 50.0, "eps2_pct": 0.0, "eps_pct": 50.0}
    assert hausdorff(surface, surface, 1.0) == ErrorTriple(0.0, 0.0)
    with pytest.raises(ValueError):
        hausdorff(surface, recon, 0.0)


def test_single_ball_error_shrinks_with_sample_count():
    ball = Skeleton([[0.5, 0.5, 0.5]], [0.5], NO_EDGES, NO_TRIS)
    rng = np.random.default_rng(7)
    errors = []
    for n in (500, 5000, 20000):
        directions = rng.normal(size=(n, 3))
        surface = 0.5 + 0.5 * directions / np.linalg.norm(directions, axis=1, keepdims=True)
        recon = sample_reconstruction(ball, n, seed=0)
        errors.append(hausdorff(surface, recon.points, diagonal=np.sqrt(3.0)).eps)
    assert errors[0] > errors[1] > errors[2]
    # Random area sampling leaves roughly 2% at 5000 per side
    assert errors[1] < 4.0
    assert errors[2] < 2.5
