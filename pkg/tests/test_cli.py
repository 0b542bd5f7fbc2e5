import json

import pytest

from app.cli import main
from app.fileio.mesh import load_mesh
from app.selection.coverage import CoverageMatrix, write_instance


def _last_json(text):
    return json.loads(text.strip().splitlines()[-1])


def test_solve_prints_the_cover(tmp_path, capsys):
    instance = tmp_path / "inst.txt"
    write_instance(instance, CoverageMatrix.from_columns(4, [[0, 1], [1, 2, 3], [3], [0]]))
    assert main(["solve", "--instance", str(instance), "--solver", "brute"]) == 0
    out = _last_json(capsys.readouterr().out)
    assert out["objective"] == 2
    assert out["chosen"] == [0, 1]
    assert out["optimal"] is True


def test_solve_with_fixings(tmp_path, capsys):
    instance = tmp_path / "inst.txt"
    write_instance(instance, CoverageMatrix.from_columns(3, [[0, 1, 2], [0], [1], [2]]))
    (tmp_path / "out.txt").write_text("0\n")
    (tmp_path / "ignore.txt").write_text("2\n")
    code = main(
        [
            "solve",
            "--instance", str(instance),
            "--force-out", str(tmp_path / "out.txt"),
            "--ignore", str(tmp_path / "ignore.txt"),
        ]
    )
    assert code == 0
    assert _last_json(capsys.readouterr().out)["chosen"] == [1, 2]


def test_errors_become_json_and_exit_codes(tmp_path, capsys):
    assert main(["solve", "--instance", str(tmp_path / "missing.txt")]) == 2
    err = _last_json(capsys.readouterr().err)
    assert err["error"] == "io_error"

    instance = tmp_path / "inst.txt"
    write_instance(instance, CoverageMatrix.from_columns(3, [[0], [1]]))
    assert main(["-q", "solve", "--instance", str(instance)]) == 5
    err = _last_json(capsys.readouterr().err)
    assert err["error"] == "infeasible"
    assert err["uncovered_rows"] == [2]


def test_run_rejects_invalid_parameters(tmp_path, capsys):
    code = main(["run", "--input", str(tmp_path / "x.obj"), "--dilate", "scale", "--sigma-r", "0.5"])
    assert code == 2
    assert _last_json(capsys.readouterr().err)["error"] == "invalid_parameter"

    code = main(["run", "--input", "x.obj", "--partition-k", "2", "--labels", "labels.txt"])
    assert code == 2


def test_run_reports_missing_input(tmp_path, capsys):
    assert main(["run", "--input", str(tmp_path / "nope.obj"), "--out", str(tmp_path / "r")]) == 2
    assert _last_json(capsys.readouterr().err)["error"] == "io_error"


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_shape_writes_a_mesh(tmp_path, capsys):
    out = tmp_path / "ball.obj"
    assert main(["shape", "sphere", "--out", str(out), "--param", "subdivisions=1", "--param", "radius=2"]) == 0
    mesh = load_mesh(out)
    assert (len(mesh.vertices), len(mesh.triangles)) == (42, 80)
    assert _last_json(capsys.readouterr().out)["triangles"] == 80

    assert main(["shape", "ellipsoid", "--out", str(out), "--param", "axes=1,0.5,0.25", "--param", "subdivisions=0"]) == 0
    assert load_mesh(out).vertices.max(axis=0).tolist()[0] <= 1.0

    assert main(["shape", "box", "--out", str(out), "--param", "size"]) == 2
    assert main(["shape", "torus", "--out", str(out), "--param", "lobes=3"]) == 2


@pytest.mark.slow
def test_run_and_eval_end_to_end(mesh_file, tmp_path, capsys):
    mesh = mesh_file("capsule", radius=0.15, length=0.5, segments=16, rings=4)
    prefix = tmp_path / "cap"
    args = ["run", "--input", mesh, "--out", str(prefix), "--n-cover", "200", "--n-gen", "400", "--n-recon", "1000"]
    assert main(args + ["--solver", "greedy"]) == 0
    summary = _last_json(capsys.readouterr().out)
    assert summary["status"] == "ok"
    assert summary["selected"] >= 1

    assert main(
        [
            "eval",
            "--skeleton", summary["skeleton"],
            "--input", mesh,
            "--n-recon", "1000",
        ]
    ) == 0
    scored = _last_json(capsys.readouterr().out)
    assert scored["eps_pct"] == pytest.approx(summary["eps_pct"], rel=1e-12)

    noisy = tmp_path / "noisy.obj"
    assert main(["perturb", "--input", mesh, "--output", str(noisy), "--amplitude", "0.002"]) == 0
    assert noisy.exists()
