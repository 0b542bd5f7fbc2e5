from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from ..config import rng_for
from ..fileio.mesh import TriangleMesh
from ..geometry.primitives import as_points
from ..geometry.spatial import SpatialIndex
from .sampling import SurfaceSampleSet

log = logging.getLogger(__name__)

RAY_VOTES = 3
# Hits this close to a triangle edge or vertex (in barycentric units) are re-cast
GRAZE_TOL = 1e-9
MAX_RECASTS = 8
# Upper bound on points x triangles evaluated per numpy chunk
_CHUNK_ELEMENTS = 500_000


def ray_directions(seed: int, count: int) -> np.ndarray:
    d = rng_for(seed, "rays").normal(size=(count, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


class _RayCaster:
    """Moller-Trumbore against every triangle for one shared ray direction."""

    def __init__(self, mesh: TriangleMesh, direction: np.ndarray):
        a, b, c = mesh.corners
        self.origin = a
        self.e1 = b - a
        self.e2 = c - a
        self.direction = direction
        self.pvec = np.cross(direction, self.e2)
        det = np.einsum("ij,ij->i", self.e1, self.pvec)
        scale = np.linalg.norm(self.e1, axis=1) * np.linalg.norm(self.e2, axis=1)
        # Triangles parallel to the ray never register a hit
        self.valid = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
        self.inv_det = np.where(self.valid, 1.0 / np.where(self.valid, det, 1.0), 0.0)

    def cast(self, points: np.ndarray):
        """Return (crossing parity, ambiguous) per point."""
        tvec = points[:, None, :] - self.origin[None, :, :]
        u = np.einsum("ptk,tk->pt", tvec, self.pvec) * self.inv_det
        qvec = np.cross(tvec, self.e1[None, :, :])
        v = np.einsum("ptk,k->pt", qvec, self.direction) * self.inv_det
        t = np.einsum("ptk,tk->pt", qvec, self.e2) * self.inv_det
        w = 1.0 - u - v
        forward = (t > 1e-12) & self.valid[None, :]
        inside_tri = (u >= -GRAZE_TOL) & (v >= -GRAZE_TOL) & (w >= -GRAZE_TOL)
        near_border = (np.abs(u) <= GRAZE_TOL) | (np.abs(v) <= GRAZE_TOL) | (np.abs(w) <= GRAZE_TOL)
        hit = forward & inside_tri
        ambiguous = np.any(hit & near_border, axis=1)
        parity = (np.count_nonzero(hit, axis=1) % 2) == 1
        return parity, ambiguous


def inside_mesh_many(points, mesh: TriangleMesh, seed: int = 0) -> np.ndarray:
    """Ray-parity test along RAY_VOTES seeded directions with a majority vote.

    A ray that grazes an edge or vertex is re-cast along the next direction of
    the seeded sequence for the affected points only.
    """
    pts = as_points(points)
    if len(pts) == 0:
        return np.zeros(0, dtype=bool)
    n_dirs = RAY_VOTES * (MAX_RECASTS + 1)
    directions = ray_directions(seed, n_dirs)
    casters = {}
    chunk = max(1, _CHUNK_ELEMENTS // max(len(mesh.triangles), 1))

    votes = np.zeros(len(pts), dtype=np.int64)
    for slot in range(RAY_VOTES):
        pending = np.arange(len(pts))
        for attempt in range(MAX_RECASTS + 1):
            d_idx = slot + RAY_VOTES * attempt
            if d_idx not in casters:
                casters[d_idx] = _RayCaster(mesh, directions[d_idx])
            caster = casters[d_idx]
            retry = []
            for start in range(0, len(pending), chunk):
                ids = pending[start:start + chunk]
                parity, ambiguous = caster.cast(pts[ids])
                last = attempt == MAX_RECASTS
                settled = ~ambiguous | last
                votes[ids[settled]] += parity[settled]
                retry.append(ids[~settled])
            pending = np.concatenate(retry) if retry else pending[:0]
            if len(pending) == 0:
                break
    return votes * 2 > RAY_VOTES


def inside_mesh(p, mesh: TriangleMesh, seed: int = 0) -> bool:
    return bool(inside_mesh_many(as_points(p), mesh, seed)[0])


def inside_cloud_label(voronoi_vertex, dual_generators: Sequence[int], samples: SurfaceSampleSet) -> bool:
    """Inside iff the vertex lies on the anti-normal side of every dual generator."""
    v = as_points(voronoi_vertex)[0]
    gens = np.asarray(dual_generators, dtype=np.int64)
    dots = np.einsum("ij,ij->i", v[None, :] - samples.points[gens], samples.normals[gens])
    return bool(np.all(dots < 0.0))


def label_voronoi_vertices(centers: np.ndarray, generators: np.ndarray, samples: SurfaceSampleSet) -> np.ndarray:
    """Vectorized inside_cloud_label: centers (k, 3), generators (k, 4)."""
    g = samples.points[generators]
    n = samples.normals[generators]
    dots = np.einsum("kgj,kgj->kg", centers[:, None, :] - g, n)
    return np.all(dots < 0.0, axis=1)


def inside_cloud_nearest(points, samples: SurfaceSampleSet, index: Optional[SpatialIndex] = None) -> np.ndarray:
    """p is inside iff (p - s) . n_s < 0 for its nearest sample s."""
    pts = as_points(points)
    index = index or SpatialIndex(samples.points)
    nearest, _ = index.nearest_many(pts)
    dots = np.einsum("ij,ij->i", pts - samples.points[nearest], samples.normals[nearest])
    return dots < 0.0


def cluster_filter_indices(points, k: int = 100, radius: float = 0.02, min_count: int = 20) -> np.ndarray:
    """Drop points with fewer than `min_count` of their `k` nearest neighbors within `radius`.

    Repeats until stable, so the result is a fixed point of the filter. Returns
    the indices of the kept points.
    """
    pts = as_points(points)
    keep = np.arange(len(pts))
    while len(keep):
        sub = pts[keep]
        kk = min(k, len(sub) - 1)
        if kk <= 0:
            counts = np.zeros(len(sub), dtype=np.int64)
        else:
            _, dist = SpatialIndex(sub).k_nearest(sub, kk + 1)
            # The query point itself sits among the k + 1 results at distance 0
            counts = np.count_nonzero(dist <= radius, axis=1) - 1
        ok = counts >= min_count
        if ok.all():
            break
        keep = keep[ok]
    return keep


def cluster_filter(points, k: int = 100, radius: float = 0.02, min_count: int = 20) -> np.ndarray:
    pts = as_points(points)
    return pts[cluster_filter_indices(pts, k, radius, min_count)]
