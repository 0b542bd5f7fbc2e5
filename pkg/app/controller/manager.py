from __future__ import annotations

import logging
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional

from ..config import RunConfig, ServiceConfig, load_config
from ..errors import MedialCoverError
from .pipeline import OutputPaths, run_pipeline

log = logging.getLogger(__name__)


JobState = Literal["queued", "running", "done", "infeasible", "error"]


@dataclass
class Job:
    id: str
    config: RunConfig
    state: JobState = "queued"
    error: Optional[str] = None
    category: Optional[str] = None
    submitted: float = field(default_factory=time.time)
    finished: Optional[float] = None

    @property
    def paths(self) -> OutputPaths:
        return OutputPaths.for_prefix(self.config.out)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "state": self.state,
            "input": self.config.input,
            "error": self.error,
            "category": self.category,
            "report": str(self.paths.report),
            "skeleton": str(self.paths.skeleton),
            "submitted": self.submitted,
            "finished": self.finished,
        }


class JobManager:
    """Runs pipeline jobs one at a time on a background worker thread."""

    def __init__(self, cfg: Optional[ServiceConfig] = None):
        self.cfg: ServiceConfig = cfg or load_config()
        self.jobs: Dict[str, Job] = {}
        self.current: Optional[str] = None
        self._lock = threading.Lock()
        self._job_q: "queue.Queue[str]" = queue.Queue()
        self._worker = threading.Thread(target=self._worker_loop, daemon=True)
        self._worker.start()

    # Public API
    def submit(self, config: RunConfig) -> Job:
        job_id = uuid.uuid4().hex[:12]
        # Remote callers cannot pick output locations or exceed the time-limit cap
        job_dir = Path(self.cfg.output_dir) / job_id
        update = {
            "out": str(job_dir / Path(config.out).name),
            "time_limit": min(config.time_limit, self.cfg.max_time_limit_s),
        }
        if config.dump_instance:
            update["dump_instance"] = str(job_dir / Path(config.dump_instance).name)
        config = config.model_copy(update=update)
        job = Job(job_id, config)
        with self._lock:
            self.jobs[job_id] = job
        self._job_q.put(job_id)
        log.info(f"Queued job {job_id} for {config.input}")
        return job

    def get(self, job_id: str) -> Optional[Job]:
        with self._lock:
            return self.jobs.get(job_id)

    def list_jobs(self) -> List[dict]:
        with self._lock:
            return [job.to_dict() for job in self.jobs.values()]

    def get_status(self) -> dict:
        return {
            "queued": self._job_q.qsize(),
            "current": self.current,
            "jobs": len(self.jobs),
            "output_dir": self.cfg.output_dir,
        }

    def wait(self, job_id: str, timeout: float = 60.0) -> Job:
        """Block until the job leaves the queue; used by tests and scripts."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            job = self.get(job_id)
            if job is not None and job.state not in ("queued", "running"):
                return job
            time.sleep(0.05)
        raise TimeoutError(f"job {job_id} still running after {timeout}s")

    # Worker
    def _worker_loop(self) -> None:
        while True:
            job_id = self._job_q.get()
            job = self.get(job_id)
            if job is None:
                continue
            self.current = job_id
            job.state = "running"
            try:
                run_pipeline(job.config, workers=self.cfg.workers)
                job.state = "done"
            except MedialCoverError as e:
                log.warning(f"Job {job_id} failed: {e}")
                job.state = "infeasible" if e.category == "infeasible" else "error"
                job.error = str(e)
                job.category = e.category
            except Exception as e:
                log.exception("Job failed")
                job.state = "error"
                job.error = str(e)
                job.category = "internal_error"
            finally:
                job.finished = time.time()
                self.current = None


# Singleton getter
_singleton: Optional[JobManager] = None


def get_manager() -> JobManager:
    global _singleton
    if _singleton is None:
        _singleton = JobManager()
    return _singleton
