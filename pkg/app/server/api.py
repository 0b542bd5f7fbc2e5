from __future__ import annotations

import json
import logging
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from ..config import RunConfig, load_config
from ..controller.manager import get_manager
from ..controller.pipeline import run_eval
from ..errors import MedialCoverError

log = logging.getLogger(__name__)

# uvicorn owns the handlers; only the package level comes from the service config
logging.getLogger("app").setLevel(load_config().log_level)

app = FastAPI(title="MedialCover API", version="0.1.0")
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class EvalRequest(BaseModel):
    skeleton: str = Field(..., description="Skeleton OBJ with a .radii sidecar, unit-box coordinates")
    input: str
    type: Literal["mesh", "cloud"] = "mesh"
    seed: int = 0
    n_recon: int = Field(5000, ge=1)


def _job_or_404(job_id: str):
    job = get_manager().get(job_id)
    if job is None:
        raise HTTPException(404, detail="Job not found")
    return job


@app.get("/api/status")
def api_status():
    return get_manager().get_status()


@app.post("/api/run")
def api_run(config: RunConfig):
    job = get_manager().submit(config)
    return {"job_id": job.id}


@app.get("/api/jobs")
def api_jobs():
    return get_manager().list_jobs()


@app.get("/api/jobs/{job_id}")
def api_job(job_id: str):
    return _job_or_404(job_id).to_dict()


@app.get("/api/jobs/{job_id}/report")
def api_job_report(job_id: str):
    job = _job_or_404(job_id)
    path = job.paths.report
    if not path.exists():
        raise HTTPException(404, detail=f"No report yet (job is {job.state})")
    return json.loads(path.read_text(encoding="utf-8"))


@app.post("/api/eval")
def api_eval(req: EvalRequest):
    try:
        result = run_eval(req.skeleton, req.input, req.type, req.seed, req.n_recon)
    except MedialCoverError as e:
        raise HTTPException(422, detail={"error": e.category, "detail": str(e), **e.context()})
    return result.to_dict()
