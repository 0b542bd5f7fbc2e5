"""Divide and conquer: split the sample universe into parts and solve each part alone."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from scipy.cluster.vq import kmeans2

from ..candidates.sampling import SurfaceSampleSet
from ..config import rng_for
from ..errors import BadLabels, Infeasible, InvalidParameter
from ..fileio.indices import read_index_file
from ..geometry.spatial import SpatialIndex, point_distances
from .base import CoverSolver, check_feasible
from .coverage import CoverageMatrix
from .models import NO_FIXINGS, Fixings, Selection

log = logging.getLogger(__name__)

KMEANS_ITERATIONS = 20


@dataclass(frozen=True)
class Partition:
    sample_labels: np.ndarray  # (m,) part per surface sample
    candidate_labels: np.ndarray  # (n,) part of each candidate's nearest sample
    k: int
    mode: Literal["none", "kmeans", "labels"]

    def rows(self, part: int) -> np.ndarray:
        return np.nonzero(self.sample_labels == part)[0]

    def columns(self, part: int) -> np.ndarray:
        return np.nonzero(self.candidate_labels == part)[0]


def _farthest_point_init(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    first = int(rng_for(seed, "kmeans").integers(len(points)))
    picks = [first]
    gap = point_distances(points, points[first])
    for _ in range(1, k):
        nxt = int(np.argmax(gap))
        picks.append(nxt)
        gap = np.minimum(gap, point_distances(points, points[nxt]))
    return points[picks].copy()


def kmeans_labels(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    if k == 1:
        return np.zeros(len(points), dtype=np.int64)
    init = _farthest_point_init(points, k, seed)
    _, labels = kmeans2(points, init, iter=KMEANS_ITERATIONS, minit="matrix", missing="warn")
    return labels.astype(np.int64)


def read_labels(path, m: int) -> np.ndarray:
    labels = np.asarray(read_index_file(path), dtype=np.int64)
    if len(labels) != m:
        raise BadLabels(f"{path}: {len(labels)} labels for {m} surface samples")
    if len(labels) and labels.min() < 0:
        raise BadLabels(f"{path}: negative part label {int(labels.min())}")
    return labels


def partition_samples(
    samples: SurfaceSampleSet,
    candidate_centers: np.ndarray,
    k: int = 1,
    seed: int = 0,
    labels: Optional[np.ndarray] = None,
) -> Partition:
    m = len(samples)
    if labels is not None:
        sample_labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if len(sample_labels) != m:
            raise BadLabels(f"{len(sample_labels)} labels for {m} surface samples")
        if m and sample_labels.min() < 0:
            raise BadLabels("part labels must be non-negative")
        k = int(sample_labels.max()) + 1 if m else 1
        mode = "labels"
    else:
        if k < 1:
            raise InvalidParameter(f"part count must be at least 1, got {k}")
        if k > m:
            raise InvalidParameter(f"cannot split {m} samples into {k} parts")
        sample_labels = kmeans_labels(samples.points, k, seed)
        mode = "kmeans" if k > 1 else "none"

    centers = np.asarray(candidate_centers, dtype=np.float64).reshape(-1, 3)
    if len(centers):
        nearest, _ = SpatialIndex(samples.points).nearest_many(centers, workers=-1)
        candidate_labels = sample_labels[nearest]
    else:
        candidate_labels = np.zeros(0, dtype=np.int64)
    sizes = np.bincount(sample_labels, minlength=k)
    log.info(f"Partitioned {m} samples into {k} parts ({mode}); sizes {sizes.tolist()}")
    return Partition(sample_labels, candidate_labels, k, mode)


def _uncoverable(matrix: CoverageMatrix, rows: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    reach = np.asarray(matrix.rows[rows][:, np.nonzero(allowed)[0]].sum(axis=1)).reshape(-1)
    return rows[reach == 0]


def solve_partitioned(
    matrix: CoverageMatrix,
    partition: Partition,
    solver: CoverSolver,
    fix: Fixings = NO_FIXINGS,
    workers: int = 4,
) -> Tuple[Selection, int]:
    """Solve every part on its own rows and candidates, then merge.

    Rows whose coverers all live in other parts are left to a final pass over
    the full matrix restricted to the still uncovered rows. Returns the merged
    selection and the number of rows that pass had to cover.
    """
    if partition.k == 1:
        return solver.solve(matrix, fix), 0
    if len(partition.sample_labels) != matrix.m or len(partition.candidate_labels) != matrix.n:
        raise BadLabels("partition does not match the coverage matrix shape")
    fix.check(matrix.n)
    start = time.perf_counter()

    allowed = np.ones(matrix.n, dtype=bool)
    allowed[list(fix.forced_out)] = False
    settled = np.zeros(matrix.m, dtype=bool)
    for c in fix.forced_in:
        settled[matrix.column(c)] = True
    open_rows = np.nonzero((matrix.required == 1) & ~settled)[0]

    stuck = _uncoverable(matrix, open_rows, allowed)
    if len(stuck):
        raise Infeasible(stuck, part=int(partition.sample_labels[stuck[0]]))

    def solve_part(part: int) -> List[int]:
        cols = partition.columns(part)
        cols = cols[allowed[cols] & ~np.isin(cols, list(fix.forced_in))]
        rows = np.intersect1d(partition.rows(part), open_rows)
        if len(rows) == 0 or len(cols) == 0:
            return []
        sub = matrix.restrict(rows, cols)
        keep = np.asarray(sub.rows.sum(axis=1)).reshape(-1) > 0
        if not keep.any():
            return []
        sub = sub.with_required(keep.astype(np.int8))
        chosen = solver.solve(sub, NO_FIXINGS).chosen
        log.debug(f"Part {part}: {int(keep.sum())} rows, {len(cols)} candidates, {len(chosen)} selected")
        return [int(cols[i]) for i in chosen]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        per_part = list(pool.map(solve_part, range(partition.k)))

    merged = set(fix.forced_in)
    for chosen in per_part:
        merged.update(chosen)
    gaps = matrix.uncovered_rows(sorted(merged))
    if len(gaps):
        log.info(f"Repairing {len(gaps)} rows covered only across part boundaries")
        required = np.zeros(matrix.m, dtype=np.int8)
        required[gaps] = 1
        repair = solver.solve(matrix.with_required(required), Fixings(frozenset(merged), fix.forced_out))
        merged.update(repair.chosen)

    selection = Selection(
        tuple(merged), matrix.n, "partitioned", optimal=False, wall_time=time.perf_counter() - start
    )
    log.info(f"Merged {partition.k} parts into {selection.objective} selected candidates")
    return check_feasible(matrix, selection), int(len(gaps))
