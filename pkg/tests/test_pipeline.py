import json

import numpy as np
import pytest

from app.candidates.sampling import sample_mesh_surface
from app.config import RunConfig
from app.controller.pipeline import perturb, prepare_input, run_eval, run_pipeline, solve_instance
from app.errors import Infeasible, InvalidParameter
from app.fileio.indices import write_index_file
from app.fileio.mesh import OrientedPointCloud, load_mesh, write_mesh, write_point_cloud
from app.fileio.report import TIMING_KEYS
from app.fileio.skeleton import read_skeleton
from app.geometry.shapes import capsule, make_shape
from app.selection.coverage import verify_coverage

pytestmark = pytest.mark.slow

SMALL = dict(n_cover=300, n_gen=600, n_recon=2000)


@pytest.fixture(scope="module")
def capsule_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("shapes") / "capsule.obj"
    write_mesh(path, capsule(radius=0.15, length=0.6, segments=24, rings=6))
    return str(path)


@pytest.fixture(scope="module")
def exact_run(capsule_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "capsule"
    config = RunConfig(input=capsule_path, out=str(out), solver="exact", time_limit=30.0, **SMALL)
    return config, run_pipeline(config)


def _report(path):
    data = json.loads(path.read_text())
    for key in TIMING_KEYS:
        data.pop(key, None)
    return data


def test_run_writes_a_covering_skeleton(exact_run):
    config, result = exact_run
    report = result.report
    assert report.status == "ok"
    for path in (result.paths.skeleton, result.paths.radii, result.paths.selection, result.paths.report):
        assert path.exists()

    selected = report.counts.selected
    assert selected >= 2
    assert report.solver.objective == selected
    skeleton = read_skeleton(result.paths.skeleton)
    assert len(skeleton) == selected
    assert report.skeleton.vertices == selected
    assert report.skeleton.components >= 1

    rows = np.loadtxt(result.paths.selection, comments="#", ndmin=2)
    assert len(rows) == selected
    assert np.all(rows[:, 5] > rows[:, 4])

    prepared = prepare_input(config.input, "mesh", config.n_cover, config.n_gen, config.seed)
    assert len(verify_coverage(prepared.cover, rows[:, 1:4], rows[:, 5])) == 0

    assert report.errors is not None
    assert 0.0 < report.errors.eps_pct < 10.0
    assert set(report.timing_s) >= {"load_and_sample", "candidates", "coverage", "selection", "connect", "evaluate"}


def test_eval_reproduces_the_reported_error(exact_run):
    config, result = exact_run
    evaluated = run_eval(str(result.paths.skeleton), config.input, "mesh", config.seed, config.n_recon)
    assert evaluated.errors.eps == pytest.approx(result.report.errors.eps_pct, rel=1e-12)
    assert evaluated.recon_samples_kept == result.report.errors.recon_samples_kept
    assert evaluated.surface_samples == result.report.errors.surface_samples == config.n_recon


def test_identical_runs_write_identical_outputs(capsule_path, tmp_path):
    results = []
    for name in ("a", "b"):
        config = RunConfig(input=capsule_path, out=str(tmp_path / name), solver="greedy", **SMALL)
        results.append(run_pipeline(config, workers=1 if name == "a" else 4))
    first, second = results
    assert first.paths.skeleton.read_text() == second.paths.skeleton.read_text()
    assert first.paths.selection.read_text() == second.paths.selection.read_text()
    assert _report(first.paths.report) == _report(second.paths.report)


def test_scaling_dilation_and_partitioning(capsule_path, tmp_path):
    config = RunConfig(
        input=capsule_path,
        out=str(tmp_path / "parts"),
        solver="greedy",
        dilate="scale",
        sigma_r=1.3,
        partition_k=3,
        **SMALL,
    )
    report = run_pipeline(config, workers=3).report
    assert report.status == "ok"
    assert report.dilation.mode == "scale" and report.dilation.sigma_r == 1.3
    assert report.partition.parts == 3 and report.partition.mode == "kmeans"
    assert report.solver.name == "partitioned"


def test_forcing_every_candidate_out_is_infeasible(capsule_path, tmp_path):
    first = run_pipeline(RunConfig(input=capsule_path, out=str(tmp_path / "first"), solver="greedy", **SMALL))
    forced = tmp_path / "out.txt"
    write_index_file(forced, range(first.report.counts.candidates))
    config = RunConfig(
        input=capsule_path, out=str(tmp_path / "blocked"), solver="greedy", force_out=str(forced), **SMALL
    )
    with pytest.raises(Infeasible):
        run_pipeline(config)
    report = json.loads((tmp_path / "blocked.report.json").read_text())
    assert report["status"] == "infeasible"
    assert report["uncovered_samples"] == list(range(SMALL["n_cover"]))
    assert report["error"]["error"] == "infeasible"
    assert not (tmp_path / "blocked.skel.obj").exists()


def test_ignoring_every_sample_leaves_nothing_to_connect(capsule_path, tmp_path):
    ignore = tmp_path / "ignore.txt"
    write_index_file(ignore, range(SMALL["n_cover"]))
    config = RunConfig(input=capsule_path, out=str(tmp_path / "empty"), solver="greedy", ignore=str(ignore), **SMALL)
    with pytest.raises(InvalidParameter):
        run_pipeline(config)


def test_dumped_instance_solves_standalone(capsule_path, tmp_path):
    instance = tmp_path / "instance.txt"
    config = RunConfig(
        input=capsule_path, out=str(tmp_path / "dump"), solver="greedy", dump_instance=str(instance), **SMALL
    )
    report = run_pipeline(config).report
    exact = solve_instance(str(instance), "exact", time_limit=30.0)
    assert 0 < exact.objective <= report.counts.selected


def test_oriented_cloud_input(capsule_path, tmp_path):
    samples = sample_mesh_surface(load_mesh(capsule_path), 600, seed=5)
    cloud = tmp_path / "capsule.xyz"
    write_point_cloud(cloud, OrientedPointCloud(samples.points, samples.normals))
    config = RunConfig(input=str(cloud), type="cloud", out=str(tmp_path / "cloud"), solver="greedy", n_recon=2000)
    report = run_pipeline(config).report
    assert report.status == "ok"
    assert report.counts.surface_samples == report.counts.generator_samples == 600
    assert report.errors.surface_samples == 600
    assert report.counts.selected >= 1


def test_perturb_keeps_connectivity(capsule_path, tmp_path):
    out = tmp_path / "noisy.obj"
    count = perturb(capsule_path, str(out), amplitude=0.01, seed=2)
    original, noisy = load_mesh(capsule_path), load_mesh(out)
    assert count == len(original.vertices)
    assert np.array_equal(original.triangles, noisy.triangles)
    shift = np.linalg.norm(noisy.vertices - original.vertices, axis=1)
    assert 0.0 < shift.mean() < 0.05
    with pytest.raises(InvalidParameter):
        perturb(capsule_path, str(out), amplitude=-1.0)


def test_torus_skeleton_keeps_its_loop(tmp_path):
    path = tmp_path / "torus.obj"
    write_mesh(path, make_shape("torus", major=1.0, minor=0.3, segments=32, sides=12))
    config = RunConfig(input=str(path), out=str(tmp_path / "torus"), solver="greedy", **SMALL)
    report = run_pipeline(config).report
    assert report.status == "ok"
    assert report.skeleton.cycle_rank >= 1


def test_noisy_input_still_covers(capsule_path, tmp_path):
    noisy = tmp_path / "noisy.obj"
    perturb(capsule_path, str(noisy), amplitude=0.005, seed=1)
    config = RunConfig(input=str(noisy), out=str(tmp_path / "noisy"), solver="greedy", **SMALL)
    result = run_pipeline(config)
    assert result.report.status == "ok"
    rows = np.loadtxt(result.paths.selection, comments="#", ndmin=2)
    prepared = prepare_input(config.input, "mesh", config.n_cover, config.n_gen, config.seed)
    assert len(verify_coverage(prepared.cover, rows[:, 1:4], rows[:, 5])) == 0
    assert result.report.errors.eps_pct < 10.0
