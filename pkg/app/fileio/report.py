from __future__ import annotations

import json
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from .mesh import write_text

# Keys whose values legitimately differ between identical runs
TIMING_KEYS = ("timing_s",)


class Counts(BaseModel):
    surface_samples: int = Field(..., description="m, rows of the coverage matrix")
    generator_samples: int = 0
    candidates: int = Field(..., description="n, columns of the coverage matrix")
    selected: int = 0
    ignored_samples: int = 0


class Dilation(BaseModel):
    mode: Literal["offset", "scale"]
    delta_r: Optional[float] = None
    sigma_r: Optional[float] = None


class SolverInfo(BaseModel):
    name: str
    optimal: bool
    objective: int
    time_limit_s: Optional[float] = None
    nodes: int = 0
    forced_in: int = 0
    forced_out: int = 0
    reductions: Dict[str, int] = Field(default_factory=dict)


class Errors(BaseModel):
    eps1_pct: float = Field(..., description="surface -> reconstruction, % of bbox diagonal")
    eps2_pct: float = Field(..., description="reconstruction -> surface, % of bbox diagonal")
    eps_pct: float
    diagonal: float
    surface_samples: int
    recon_samples_drawn: int
    recon_samples_kept: int


class CandidateInfo(BaseModel):
    mode: Literal["voronoi", "random"]
    generated: int
    trials: int = 0
    rejected_outside: int = 0
    removed_by_cluster_filter: int = 0
    skipped_degenerate_tets: int = 0
    dropped_on_surface: int = 0


class SkeletonInfo(BaseModel):
    vertices: int
    edges: int
    faces: int
    components: int
    cycle_rank: int
    connect_with: str
    connect_boost: float
    sample_weight_radius: float
    redundant_balls: int
    jitter: float


class PartitionInfo(BaseModel):
    parts: int
    mode: Literal["none", "kmeans", "labels"]
    repaired_rows: int = 0
    note: str = "merged selection connected by the regular triangulation directly"


class RunReport(BaseModel):
    status: Literal["ok", "infeasible", "error"] = "ok"
    input: str
    input_type: Literal["mesh", "cloud"]
    seed: int
    counts: Counts
    dilation: Dilation
    transform: Dict[str, Any]
    candidates: Optional[CandidateInfo] = None
    solver: Optional[SolverInfo] = None
    partition: Optional[PartitionInfo] = None
    skeleton: Optional[SkeletonInfo] = None
    errors: Optional[Errors] = None
    uncovered_samples: List[int] = Field(default_factory=list)
    error: Optional[Dict[str, Any]] = None
    timing_s: Dict[str, float] = Field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


def write_report(path, report: RunReport) -> None:
    write_text(path, [report.to_json()])
