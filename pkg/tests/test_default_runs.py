import numpy as np
import pytest

from app.config import RunConfig
from app.controller.pipeline import load_input, perturb, run_pipeline
from app.fileio.mesh import write_mesh
from app.geometry.shapes import make_shape

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def run_shape(tmp_path_factory):
    """Run the pipeline with default settings on a procedural shape, caching each result."""
    root = tmp_path_factory.mktemp("defaults")
    cache = {}

    def _run(name, candidates="voronoi", **params):
        key = (name, candidates, tuple(sorted(params.items())))
        if key not in cache:
            stem = f"{name}_{candidates}_{len(cache)}"
            mesh = root / f"{stem}.obj"
            write_mesh(mesh, make_shape(name, **params))
            config = RunConfig(input=str(mesh), out=str(root / stem), candidates=candidates)
            result = run_pipeline(config)
            _, transform = load_input(str(mesh), "mesh")
            rows = np.loadtxt(result.paths.selection, comments="#", ndmin=2)
            cache[key] = (result.report, transform, rows)
        return cache[key]

    return _run


def _true_center(transform):
    return transform.apply(np.zeros((1, 3)))[0]


def test_sphere_is_one_central_ball(run_shape):
    report, transform, rows = run_shape("sphere")
    assert report.counts.selected == 1
    assert np.linalg.norm(rows[0, 1:4] - _true_center(transform)) < 0.05
    assert rows[0, 4] == pytest.approx(transform.scale, abs=0.05)
    # Sampling both sides at 5000 points leaves a floor of about 2%
    assert report.errors.eps_pct < 4.0


def test_random_candidates_keep_a_central_ball(run_shape):
    report, transform, rows = run_shape("sphere", candidates="random")
    assert report.status == "ok"
    assert report.counts.selected <= 12
    largest = rows[np.argmax(rows[:, 4])]
    assert np.linalg.norm(largest[1:4] - _true_center(transform)) < 0.12
    assert largest[4] > 0.4 * 2 * transform.scale


def test_capsule_centers_follow_the_axis(run_shape):
    report, transform, rows = run_shape("capsule", candidates="random", radius=0.1)
    assert report.status == "ok"
    original = transform.invert(rows[:, 1:4])
    axis_distance = np.hypot(original[:, 0], original[:, 1]) * transform.scale
    assert axis_distance.max() <= 1.5 * 0.02


@pytest.mark.parametrize("name", ["capsule", "dumbbell", "sphere"])
def test_genus_zero_error_at_default_settings(run_shape, name):
    report, _, _ = run_shape(name)
    assert report.status == "ok"
    assert report.counts.selected <= 150
    assert report.errors.eps_pct <= 5.0


def test_blob_skeleton_is_connected(run_shape):
    report, _, _ = run_shape("blob")
    assert report.skeleton.components == 1


def test_noisy_capsule_at_default_settings(tmp_path):
    clean = tmp_path / "capsule.obj"
    noisy = tmp_path / "noisy.obj"
    write_mesh(clean, make_shape("capsule"))
    perturb(str(clean), str(noisy), amplitude=0.005, seed=0)
    result = run_pipeline(RunConfig(input=str(noisy), out=str(tmp_path / "noisy")))
    assert result.report.status == "ok"
    assert result.report.errors.eps_pct <= 7.0
