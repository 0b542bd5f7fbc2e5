import pytest
from fastapi.testclient import TestClient

import app.controller.manager as manager_module
from app.config import ServiceConfig
from app.controller.manager import JobManager
from app.server.api import app as api


@pytest.fixture
def client(tmp_path, monkeypatch):
    manager = JobManager(ServiceConfig(output_dir=str(tmp_path / "runs"), max_time_limit_s=5.0, workers=2))
    monkeypatch.setattr(manager_module, "_singleton", manager)
    return TestClient(api)


def test_status_and_empty_job_list(client, tmp_path):
    status = client.get("/api/status").json()
    assert status["queued"] == 0
    assert status["current"] is None
    assert status["output_dir"] == str(tmp_path / "runs")
    assert client.get("/api/jobs").json() == []


def test_unknown_job_is_404(client):
    assert client.get("/api/jobs/nope").status_code == 404
    assert client.get("/api/jobs/nope/report").status_code == 404


def test_invalid_run_config_is_rejected(client):
    r = client.post("/api/run", json={"input": "x.obj", "dilate": "scale", "sigma_r": 0.5})
    assert r.status_code == 422
    r = client.post("/api/run", json={"solver": "exact"})
    assert r.status_code == 422


def test_eval_errors_are_unprocessable(client, tmp_path):
    r = client.post("/api/eval", json={"skeleton": str(tmp_path / "none.skel.obj"), "input": str(tmp_path / "none.obj")})
    assert r.status_code == 422
    assert r.json()["detail"]["error"] == "io_error"


def test_failed_job_records_its_category(client, tmp_path):
    job_id = client.post("/api/run", json={"input": str(tmp_path / "missing.obj")}).json()["job_id"]
    job = manager_module.get_manager().wait(job_id, timeout=30)
    assert job.state == "error"
    assert job.category == "io_error"
    body = client.get(f"/api/jobs/{job_id}").json()
    assert body["state"] == "error"
    assert client.get(f"/api/jobs/{job_id}/report").status_code == 404


@pytest.mark.slow
def test_job_runs_to_a_report(client, mesh_file, tmp_path):
    mesh = mesh_file("capsule", radius=0.15, length=0.5, segments=16, rings=4)
    payload = {
        "input": mesh,
        "n_cover": 200,
        "n_gen": 400,
        "n_recon": 1000,
        "time_limit": 600,
        "out": "/elsewhere/capsule",
    }
    job_id = client.post("/api/run", json=payload).json()["job_id"]
    job = manager_module.get_manager().wait(job_id, timeout=120)
    assert job.state == "done", job.error
    assert job.config.time_limit == 5.0
    assert job.paths.report.parent == tmp_path / "runs" / job_id

    report = client.get(f"/api/jobs/{job_id}/report").json()
    assert report["status"] == "ok"
    assert report["counts"]["selected"] >= 1
    assert [j["id"] for j in client.get("/api/jobs").json()] == [job_id]


def test_job_outputs_stay_under_the_job_directory(client, tmp_path):
    payload = {
        "input": str(tmp_path / "missing.obj"),
        "out": str(tmp_path / "elsewhere" / "skel"),
        "dump_instance": str(tmp_path / "elsewhere" / "instance.txt"),
    }
    job_id = client.post("/api/run", json=payload).json()["job_id"]
    job = manager_module.get_manager().wait(job_id, timeout=30)
    job_dir = tmp_path / "runs" / job_id
    assert job.config.out == str(job_dir / "skel")
    assert job.config.dump_instance == str(job_dir / "instance.txt")
    assert not (tmp_path / "elsewhere").exists()
