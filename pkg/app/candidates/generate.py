from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Literal, Optional, Tuple, Union

import numpy as np

from ..config import rng_for
from ..errors import SamplingStalled
from ..fileio.mesh import TriangleMesh
from ..geometry.primitives import Aabb, as_points
from ..geometry.spatial import SpatialIndex
from ..geometry.triangulation import delaunay, voronoi_vertices
from .inside import cluster_filter_indices, inside_cloud_nearest, inside_mesh_many, label_voronoi_vertices
from .sampling import SurfaceSampleSet

log = logging.getLogger(__name__)

# Rejection sampling gives up below this acceptance rate once STALL_TRIALS are spent
STALL_RATE = 1e-3
STALL_TRIALS = 1_000_000

Origin = Literal["voronoi", "random"]


@dataclass(frozen=True)
class CandidateBall:
    center: Tuple[float, float, float]
    radius: float
    dilated: float
    origin: Origin


@dataclass(frozen=True)
class CandidateSet:
    """Candidate inner balls as parallel arrays; radii are NaN until estimated."""

    centers: np.ndarray
    radii: np.ndarray
    dilated: np.ndarray
    origin: Origin

    @classmethod
    def from_centers(cls, centers, origin: Origin) -> "CandidateSet":
        c = as_points(centers) if len(centers) else np.zeros((0, 3))
        nan = np.full(len(c), np.nan)
        return cls(c, nan, nan.copy(), origin)

    def __len__(self) -> int:
        return len(self.centers)

    def __getitem__(self, i: int) -> CandidateBall:
        return CandidateBall(
            tuple(float(v) for v in self.centers[i]), float(self.radii[i]), float(self.dilated[i]), self.origin
        )

    def subset(self, idx) -> "CandidateSet":
        idx = np.asarray(idx, dtype=np.int64)
        return CandidateSet(self.centers[idx], self.radii[idx], self.dilated[idx], self.origin)

    def with_radii(self, radii) -> "CandidateSet":
        return replace(self, radii=np.asarray(radii, dtype=np.float64))

    def with_dilated(self, dilated) -> "CandidateSet":
        return replace(self, dilated=np.asarray(dilated, dtype=np.float64))

    @property
    def has_radii(self) -> bool:
        return len(self) == 0 or bool(np.all(np.isfinite(self.radii)))

    @property
    def has_dilation(self) -> bool:
        return len(self) == 0 or bool(np.all(np.isfinite(self.dilated)))


@dataclass
class GenerationStats:
    mode: Origin
    generated: int = 0
    trials: int = 0
    rejected_outside: int = 0
    removed_by_cluster_filter: int = 0
    skipped_degenerate_tets: int = 0
    dropped_on_surface: int = 0


Shape = Union[TriangleMesh, SurfaceSampleSet]


def _inside(shape: Shape, points: np.ndarray, seed: int, index: Optional[SpatialIndex]) -> np.ndarray:
    if isinstance(shape, TriangleMesh):
        return inside_mesh_many(points, shape, seed)
    if shape.normals is None:
        raise ValueError("point-cloud inside test needs oriented samples")
    return inside_cloud_nearest(points, shape, index)


def candidates_random(shape: Shape, n: int, seed: int) -> Tuple[CandidateSet, GenerationStats]:
    """Rejection-sample n interior points in the shape's bounding box.

    Oriented clouds use the nearest-sample sign test and then the clustering
    filter, so they can return fewer than n candidates.
    """
    if n < 1:
        raise ValueError("candidate count must be positive")
    is_mesh = isinstance(shape, TriangleMesh)
    box = Aabb.of(shape.vertices if is_mesh else shape.points)
    lo, extent = np.asarray(box.min), box.extent
    rng = rng_for(seed, "random_candidates")
    index = None if is_mesh else SpatialIndex(shape.points)

    stats = GenerationStats("random")
    chunks = []
    accepted = 0
    while accepted < n:
        rate = accepted / stats.trials if stats.trials else 0.5
        batch = int(min(200_000, max(1024, 1.2 * (n - accepted) / max(rate, STALL_RATE))))
        pts = lo + extent * rng.random((batch, 3))
        ok = _inside(shape, pts, seed, index)
        stats.trials += batch
        chunks.append(pts[ok])
        accepted += int(ok.sum())
        if stats.trials >= STALL_TRIALS and accepted < STALL_RATE * stats.trials:
            raise SamplingStalled(stats.trials, accepted)
    centers = np.concatenate(chunks)[:n]
    stats.rejected_outside = stats.trials - accepted

    if not is_mesh:
        keep = cluster_filter_indices(centers)
        stats.removed_by_cluster_filter = len(centers) - len(keep)
        centers = centers[keep]
    stats.generated = len(centers)
    log.info(
        f"Random candidates: {stats.generated} kept from {stats.trials} trials "
        f"(acceptance {accepted / stats.trials:.3f})"
    )
    return CandidateSet.from_centers(centers, "random"), stats


def candidates_voronoi_mesh(gen_samples: SurfaceSampleSet, mesh: TriangleMesh, seed: int = 0) -> Tuple[CandidateSet, GenerationStats]:
    """Voronoi vertices of the generator samples that fall inside the mesh."""
    vv = voronoi_vertices(delaunay(gen_samples.points))
    inside = inside_mesh_many(vv.centers, mesh, seed)
    stats = GenerationStats(
        "voronoi",
        generated=int(inside.sum()),
        rejected_outside=int((~inside).sum()),
        skipped_degenerate_tets=vv.skipped,
    )
    log.info(f"Voronoi candidates: {stats.generated} inside of {len(vv)} vertices")
    return CandidateSet.from_centers(vv.centers[inside], "voronoi"), stats


def candidates_voronoi_cloud(gen_samples: SurfaceSampleSet) -> Tuple[CandidateSet, GenerationStats]:
    """Voronoi vertices labeled inside by their generators' normals, then cluster-filtered."""
    if gen_samples.normals is None:
        raise ValueError("point-cloud candidates need oriented samples")
    t = delaunay(gen_samples.points)
    vv = voronoi_vertices(t)
    inside = label_voronoi_vertices(vv.centers, t.tetrahedra[vv.tetrahedra], gen_samples)
    centers = vv.centers[inside]
    keep = cluster_filter_indices(centers)
    stats = GenerationStats(
        "voronoi",
        generated=len(keep),
        rejected_outside=int((~inside).sum()),
        removed_by_cluster_filter=len(centers) - len(keep),
        skipped_degenerate_tets=vv.skipped,
    )
    log.info(
        f"Voronoi cloud candidates: {len(centers)} labeled inside, "
        f"{stats.removed_by_cluster_filter} removed as outliers"
    )
    return CandidateSet.from_centers(centers[keep], "voronoi"), stats


def estimate_radii(candidates: CandidateSet, cover_samples: SurfaceSampleSet) -> Tuple[CandidateSet, int]:
    """r_i = distance to the nearest cover sample; candidates sitting on a sample are dropped."""
    if len(candidates) == 0:
        return candidates.with_radii(np.zeros(0)), 0
    _, dist = SpatialIndex(cover_samples.points).nearest_many(candidates.centers, workers=-1)
    keep = np.nonzero(dist > 0.0)[0]
    dropped = len(candidates) - len(keep)
    if dropped:
        log.warning(f"Dropped {dropped} candidates coincident with a surface sample")
    return candidates.subset(keep).with_radii(dist[keep]), dropped
