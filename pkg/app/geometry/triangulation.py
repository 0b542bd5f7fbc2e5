"""Delaunay and regular (weighted Delaunay) triangulations in 3D.

Each weighted point (p, w) is lifted to (p, |p|^2 - w) in 4D; the lower convex
hull of the lifted set projects to the regular triangulation, which is the dual
of the power diagram. With all weights equal this is the Delaunay
triangulation. The hull itself comes from Qhull through scipy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import DegenerateInput
from .primitives import as_points

log = logging.getLogger(__name__)

# Relative size of the deterministic coordinate jitter
JITTER_SCALE = 1e-9
# Seed of the jitter stream; row i of the stream always perturbs point i
_JITTER_SEED = 0x5EED
# Voronoi vertices farther than this many bbox diagonals are dropped
FAR_VERTEX_FACTOR = 10.0

_TET_FACES = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
_TET_EDGES = np.array([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])


@dataclass(frozen=True)
class Triangulation:
    points: np.ndarray
    weights: np.ndarray
    tetrahedra: np.ndarray  # (k, 4) point indices, positively oriented
    jitter: float
    redundant: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def weighted(self) -> bool:
        return bool(np.any(self.weights != 0.0))

    def adjacency(self) -> np.ndarray:
        """(k, 4) neighbor tetrahedron across the face opposite each vertex, -1 on the hull."""
        k = len(self.tetrahedra)
        faces = np.sort(self.tetrahedra[:, _TET_FACES].reshape(-1, 3), axis=1)
        _, inverse, counts = np.unique(faces, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        owner = np.arange(4 * k) // 4
        order = np.argsort(inverse, kind="stable")
        adj = np.full(4 * k, -1, dtype=np.int64)
        shared = counts[inverse[order]] == 2
        pos = np.nonzero(shared)[0]
        # Shared faces appear as consecutive pairs after sorting by face id
        first, second = order[pos[0::2]], order[pos[1::2]]
        adj[first] = owner[second]
        adj[second] = owner[first]
        return adj.reshape(k, 4)

    def edges(self) -> np.ndarray:
        return _unique_rows(self.tetrahedra[:, _TET_EDGES].reshape(-1, 2), 2)

    def triangles(self) -> np.ndarray:
        return _unique_rows(self.tetrahedra[:, _TET_FACES].reshape(-1, 3), 3)


def _unique_rows(rows: np.ndarray, width: int) -> np.ndarray:
    if len(rows) == 0:
        return np.zeros((0, width), dtype=np.int64)
    rows = np.sort(rows, axis=1)
    return np.unique(rows, axis=0).astype(np.int64)


def jitter_offsets(n: int, diagonal: float) -> np.ndarray:
    rng = np.random.default_rng(_JITTER_SEED)
    return rng.uniform(-1.0, 1.0, size=(n, 3)) * (JITTER_SCALE * diagonal)


def _check_affine_rank(points: np.ndarray) -> None:
    if len(points) < 4:
        raise DegenerateInput(f"need at least 4 points, got {len(points)}")
    centered = points - points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] == 0.0 or sv[2] <= 1e-12 * sv[0]:
        raise DegenerateInput("points are coplanar or collinear")


def regular_triangulation(points, weights=None) -> Triangulation:
    """Regular triangulation of weighted points (weights have squared-radius units)."""
    pts = as_points(points)
    w = np.zeros(len(pts)) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    if len(w) != len(pts):
        raise ValueError("points and weights differ in length")
    _check_affine_rank(pts)

    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diagonal = float(np.linalg.norm(hi - lo))
    jitter = JITTER_SCALE * diagonal
    moved = pts + jitter_offsets(len(pts), diagonal)

    # Center and scale before lifting; power-distance combinatorics are invariant
    center = 0.5 * (lo + hi)
    scale = diagonal
    q = (moved - center) / scale
    heights = np.einsum("ij,ij->i", q, q) - w / (scale * scale)

    # An apex far above the centroid keeps the hull full-dimensional for n = 4
    # and only ever joins upper facets.
    span = float(heights.max() - heights.min())
    apex = np.append(q.mean(axis=0), heights.max() + 10.0 * (span + 1.0))
    lifted = np.vstack([np.column_stack([q, heights]), apex])
    try:
        hull = ConvexHull(lifted, qhull_options="Qt")
    except QhullError as e:
        raise DegenerateInput(f"lifted hull construction failed: {e}") from e

    apex_id = len(pts)
    lower = hull.equations[:, 3] < -1e-10
    simplices = hull.simplices[lower]
    simplices = simplices[~np.any(simplices == apex_id, axis=1)]

    tets = _orient(simplices.astype(np.int64), q)
    used = np.zeros(len(pts), dtype=bool)
    used[tets.reshape(-1)] = True
    redundant = np.nonzero(~used)[0]
    if len(redundant) and np.any(w != 0):
        log.info(f"Regular triangulation: {len(redundant)} redundant weighted points")
    elif len(redundant):
        log.warning(f"Delaunay triangulation left {len(redundant)} points unused (duplicates?)")
    log.debug(f"Triangulated {len(pts)} points into {len(tets)} tetrahedra")
    return Triangulation(points=pts, weights=w, tetrahedra=tets, jitter=jitter, redundant=redundant)


def _orient(tets: np.ndarray, coords: np.ndarray) -> np.ndarray:
    if len(tets) == 0:
        return tets.reshape(0, 4)
    a = coords[tets[:, 0]]
    m = np.stack([coords[tets[:, 1]] - a, coords[tets[:, 2]] - a, coords[tets[:, 3]] - a], axis=1)
    det = np.linalg.det(m)
    flat = np.abs(det) <= 1e-15
    if np.any(flat):
        log.debug(f"Dropping {int(flat.sum())} flat tetrahedra")
    tets = tets[~flat].copy()
    neg = det[~flat] < 0
    tets[neg, 2], tets[neg, 3] = tets[neg, 3], tets[neg, 2].copy()
    return tets


def delaunay(points) -> Triangulation:
    return regular_triangulation(points, None)


def orthospheres(t: Triangulation) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthocenters and squared orthoradii per tetrahedron.

    Returns (centers, rho2, ok) where `ok` flags tetrahedra whose linear system
    was solvable; centers of the others are NaN.
    """
    tets = t.tetrahedra
    k = len(tets)
    centers = np.full((k, 3), np.nan)
    rho2 = np.full(k, np.nan)
    if k == 0:
        return centers, rho2, np.zeros(0, dtype=bool)
    p, w = t.points, t.weights
    a = p[tets[:, 0]]
    rel = np.stack([p[tets[:, j]] - a for j in (1, 2, 3)], axis=1)
    # 2 (x_j - a) . c' = |x_j - a|^2 - w_j + w_a, with c' = c - a
    rhs = np.einsum("kij,kij->ki", rel, rel) - w[tets[:, 1:]] + w[tets[:, :1]]
    det = np.linalg.det(rel)
    scale = np.einsum("kij,kij->k", rel, rel) ** 1.5
    ok = np.abs(det) > 1e-14 * np.maximum(scale, 1e-300)
    if np.any(ok):
        sol = np.linalg.solve(2.0 * rel[ok], rhs[ok][..., None])[..., 0]
        centers[ok] = sol + a[ok]
        rho2[ok] = np.einsum("ki,ki->k", sol, sol) - w[tets[ok, 0]]
    return centers, rho2, ok


@dataclass(frozen=True)
class VoronoiVertices:
    centers: np.ndarray
    radii: np.ndarray
    tetrahedra: np.ndarray  # index into Triangulation.tetrahedra, one per vertex
    skipped: int

    def __len__(self) -> int:
        return len(self.centers)


def voronoi_vertices(t: Triangulation) -> VoronoiVertices:
    """Circumcenter and circumradius of every tetrahedron of an unweighted triangulation.

    Near-degenerate tetrahedra (circumradius above FAR_VERTEX_FACTOR bbox
    diagonals) are skipped and counted.
    """
    if t.weighted:
        raise ValueError("voronoi_vertices expects an unweighted triangulation")
    centers, rho2, ok = orthospheres(t)
    diagonal = float(np.linalg.norm(t.points.max(axis=0) - t.points.min(axis=0)))
    radii = np.sqrt(np.where(ok, np.maximum(rho2, 0.0), np.inf))
    keep = ok & (radii <= FAR_VERTEX_FACTOR * diagonal)
    skipped = int((~keep).sum())
    if skipped:
        log.warning(f"Skipped {skipped} near-degenerate tetrahedra")
    idx = np.nonzero(keep)[0]
    return VoronoiVertices(centers=centers[idx], radii=radii[idx], tetrahedra=idx, skipped=skipped)


def simplices_among(t: Triangulation, marked) -> Tuple[np.ndarray, np.ndarray]:
    """Edges and triangles of `t` whose vertices are all marked, sorted by index tuple."""
    mask = np.zeros(len(t.points), dtype=bool)
    marked = np.asarray(list(marked) if not isinstance(marked, np.ndarray) else marked, dtype=np.int64)
    if len(marked):
        mask[marked] = True
    edges = t.edges()
    tris = t.triangles()
    edges = edges[mask[edges].all(axis=1)] if len(edges) else edges
    tris = tris[mask[tris].all(axis=1)] if len(tris) else tris
    return edges, tris


def tetrahedron_volumes(t: Triangulation, points: Optional[np.ndarray] = None) -> np.ndarray:
    p = t.points if points is None else points
    tets = t.tetrahedra
    a = p[tets[:, 0]]
    m = np.stack([p[tets[:, j]] - a for j in (1, 2, 3)], axis=1)
    return np.linalg.det(m) / 6.0
