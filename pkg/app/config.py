from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator


# Stream ids for numpy's seed sequence; one per stochastic stage.
STREAMS = {
    "cover": 1,
    "gen": 2,
    "random_candidates": 3,
    "rays": 4,
    "kmeans": 5,
    "recon": 6,
    "perturb": 7,
    "eval": 8,
}


def rng_for(seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), STREAMS[stream]])


class RunConfig(BaseModel):
    input: str = Field(..., description="Mesh (.obj/.ply) or oriented point cloud (.xyz/.ply)")
    type: Literal["mesh", "cloud"] = "mesh"

    # Sampling
    n_cover: int = Field(1500, ge=1, description="Surface samples forming the set-cover universe")
    n_gen: int = Field(4000, ge=4, description="Surface samples generating Voronoi candidates")
    candidates: Literal["voronoi", "random"] = "voronoi"
    n_random: int = Field(10000, ge=1)

    # Dilation
    dilate: Literal["offset", "scale"] = "offset"
    delta_r: float = Field(0.02, gt=0.0)
    sigma_r: float = Field(1.5, gt=1.0)

    # Selection
    solver: Literal["greedy", "exact"] = "exact"
    time_limit: float = Field(120.0, gt=0.0, description="Exact solver limit in seconds")
    seed: int = 0
    ignore: Optional[str] = None
    force_in: Optional[str] = None
    force_out: Optional[str] = None
    partition_k: int = Field(1, ge=1)
    labels: Optional[str] = None

    # Connection and evaluation
    connect_boost: float = Field(1.0, gt=0.0)
    connect_with: Literal["gen", "cover"] = "gen"
    n_recon: int = Field(5000, ge=1)

    out: str = "out/skeleton"
    dump_instance: Optional[str] = None

    @model_validator(mode="after")
    def validate_inputs(self):
        if self.labels and self.partition_k != 1:
            raise ValueError("use either partition_k or labels, not both")
        if self.force_in and self.force_out and self.force_in == self.force_out:
            raise ValueError("force_in and force_out point to the same file")
        return self

    @property
    def dilation_parameter(self) -> float:
        return self.delta_r if self.dilate == "offset" else self.sigma_r


@dataclass
class ServiceConfig:
    # Where jobs submitted over HTTP write their outputs
    output_dir: str = "runs"
    log_level: str = "INFO"
    # Cap on the exact solver limit a remote caller may request
    max_time_limit_s: float = 600.0
    # Thread pool size used for per-part solves
    workers: int = 4


def load_config() -> ServiceConfig:
    cfg = ServiceConfig()
    cfg.output_dir = os.getenv("MEDIALCOVER_OUTPUT_DIR", cfg.output_dir)
    cfg.log_level = os.getenv("MEDIALCOVER_LOG_LEVEL", cfg.log_level).upper()
    cfg.max_time_limit_s = float(os.getenv("MEDIALCOVER_MAX_TIME_LIMIT", cfg.max_time_limit_s))
    cfg.workers = int(os.getenv("MEDIALCOVER_WORKERS", cfg.workers))
    return cfg
