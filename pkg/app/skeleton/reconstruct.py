"""Shape reconstruction from a skeleton and the two-sided Hausdorff error.

The reconstruction is the union of swept-sphere primitives: a sphere per
vertex, a cone per edge and a slab per triangle, with radii interpolated
linearly along each simplex. The implicit field below is the distance to the
closest simplex point minus the radius interpolated there, which is an
approximation of the exact envelope distance for cones and slabs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..config import rng_for
from ..geometry.primitives import as_points
from ..geometry.spatial import SpatialIndex
from .model import Skeleton

log = logging.getLogger(__name__)

# Samples with a field value below this lie strictly inside another primitive
INTERIOR_TOLERANCE = 1e-6
_CHUNK_ELEMENTS = 400_000


def _all_edges(s: Skeleton) -> np.ndarray:
    # Triangle borders are evaluated through their edges
    parts = [s.edges]
    if len(s.triangles):
        t = s.triangles
        parts.append(np.concatenate([t[:, [0, 1]], t[:, [0, 2]], t[:, [1, 2]]]))
    edges = np.concatenate(parts) if len(parts) > 1 else parts[0]
    if len(edges) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(np.sort(edges, axis=1), axis=0)


def _sphere_field(p: np.ndarray, s: Skeleton) -> np.ndarray:
    d = np.linalg.norm(p[:, None, :] - s.vertices[None, :, :], axis=2)
    return (d - s.radii[None, :]).min(axis=1)


def _cone_field(p: np.ndarray, a, b, ra, rb) -> np.ndarray:
    d = b - a
    length2 = np.einsum("ij,ij->i", d, d)
    rel = p[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pkj,kj->pk", rel, d) / length2[None, :], 0.0, 1.0)
    gap = rel - t[..., None] * d[None, :, :]
    return (np.linalg.norm(gap, axis=2) - (ra[None, :] + t * (rb - ra)[None, :])).min(axis=1)


def _slab_field(p: np.ndarray, a, b, c, ra, rb, rc) -> np.ndarray:
    """Field over triangle interiors; points projecting outside a triangle get +inf."""
    e1, e2 = b - a, c - a
    d11 = np.einsum("ij,ij->i", e1, e1)
    d12 = np.einsum("ij,ij->i", e1, e2)
    d22 = np.einsum("ij,ij->i", e2, e2)
    denom = d11 * d22 - d12 * d12
    rel = p[:, None, :] - a[None, :, :]
    q1 = np.einsum("pkj,kj->pk", rel, e1)
    q2 = np.einsum("pkj,kj->pk", rel, e2)
    v = (d22 * q1 - d12 * q2) / denom
    w = (d11 * q2 - d12 * q1) / denom
    u = 1.0 - v - w
    inside = (u >= 0) & (v >= 0) & (w >= 0)
    foot = a[None] + v[..., None] * e1[None] + w[..., None] * e2[None]
    dist = np.linalg.norm(p[:, None, :] - foot, axis=2)
    value = dist - (u * ra + v * rb + w * rc)
    return np.where(inside, value, np.inf).min(axis=1)


def field_distance(points, skeleton: Skeleton) -> np.ndarray:
    """Signed distance-like field of the reconstruction; negative inside the union."""
    if len(skeleton) == 0:
        raise ValueError("empty skeleton")
    pts = as_points(points)
    v, r = skeleton.vertices, skeleton.radii

    edges = _all_edges(skeleton)
    if len(edges):
        seg = v[edges[:, 1]] - v[edges[:, 0]]
        # Coincident endpoints collapse to the vertex spheres
        edges = edges[np.einsum("ij,ij->i", seg, seg) > 0.0]
    tris = skeleton.triangles
    if len(tris):
        cross = np.cross(v[tris[:, 1]] - v[tris[:, 0]], v[tris[:, 2]] - v[tris[:, 0]])
        tris = tris[np.linalg.norm(cross, axis=1) > 0.0]

    width = max(len(v), len(edges), len(tris), 1)
    chunk = max(1, _CHUNK_ELEMENTS // width)
    out = np.empty(len(pts))
    for start in range(0, len(pts), chunk):
        p = pts[start:start + chunk]
        f = _sphere_field(p, skeleton)
        if len(edges):
            i, j = edges[:, 0], edges[:, 1]
            f = np.minimum(f, _cone_field(p, v[i], v[j], r[i], r[j]))
        if len(tris):
            i, j, k = tris[:, 0], tris[:, 1], tris[:, 2]
            f = np.minimum(f, _slab_field(p, v[i], v[j], v[k], r[i], r[j], r[k]))
        out[start:start + chunk] = f
    return out


@dataclass(frozen=True)
class ReconstructionSamples:
    points: np.ndarray
    drawn: int

    @property
    def kept(self) -> int:
        return len(self.points)


def _perpendicular_frame(axis: np.ndarray):
    axis = axis / np.linalg.norm(axis, axis=1, keepdims=True)
    helper = np.where(np.abs(axis[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    return e1, np.cross(axis, e1)


def sample_reconstruction(skeleton: Skeleton, n: int, seed: int) -> ReconstructionSamples:
    """Area-weighted samples on the primitive envelopes, minus those buried in other primitives.

    Sample i consumes row i of one (n, 4) uniform draw: the first column picks
    the primitive, the remaining three place the point on it.
    """
    if len(skeleton) == 0:
        raise ValueError("empty skeleton")
    if n < 1:
        raise ValueError("sample count must be positive")
    v, r = skeleton.vertices, skeleton.radii

    edges = _all_edges(skeleton)
    if len(edges):
        ra, rb = r[edges[:, 0]], r[edges[:, 1]]
        length = np.linalg.norm(v[edges[:, 1]] - v[edges[:, 0]], axis=1)
        # A cone whose end sphere swallows the other has no lateral surface
        edges = edges[length > np.abs(rb - ra)]
    ra, rb = r[edges[:, 0]], r[edges[:, 1]]
    axis = v[edges[:, 1]] - v[edges[:, 0]]
    cone_area = np.pi * (ra + rb) * np.sqrt(np.einsum("ij,ij->i", axis, axis) + (rb - ra) ** 2)

    tris = skeleton.triangles
    if len(tris):
        cross = np.cross(v[tris[:, 1]] - v[tris[:, 0]], v[tris[:, 2]] - v[tris[:, 0]])
        area = 0.5 * np.linalg.norm(cross, axis=1)
        tris, cross, area = tris[area > 0], cross[area > 0], area[area > 0]
    else:
        cross, area = np.zeros((0, 3)), np.zeros(0)

    weights = np.concatenate([4.0 * np.pi * r * r, cone_area, 2.0 * area])
    cdf = np.cumsum(weights) / weights.sum()
    u = rng_for(seed, "recon").random((n, 4))
    prim = np.minimum(np.searchsorted(cdf, u[:, 0], side="right"), len(weights) - 1)
    points = np.empty((n, 3))

    nv, ne = len(v), len(edges)
    is_sphere = prim < nv
    if is_sphere.any():
        idx = prim[is_sphere]
        z = 2.0 * u[is_sphere, 1] - 1.0
        phi = 2.0 * np.pi * u[is_sphere, 2]
        ring = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        direction = np.column_stack([ring * np.cos(phi), ring * np.sin(phi), z])
        points[is_sphere] = v[idx] + r[idx, None] * direction

    is_cone = (prim >= nv) & (prim < nv + ne)
    if is_cone.any():
        idx = prim[is_cone] - nv
        a, b = ra[idx], rb[idx]
        w = u[is_cone, 1]
        # Inverse CDF of a density proportional to the interpolated radius
        t = w * (a + b) / (a + np.sqrt(a * a + w * (b * b - a * a)))
        rho = a + t * (b - a)
        e1, e2 = _perpendicular_frame(axis[idx])
        phi = 2.0 * np.pi * u[is_cone, 2]
        offset = rho[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
        points[is_cone] = v[edges[idx, 0]] + t[:, None] * axis[idx] + offset

    is_slab = prim >= nv + ne
    if is_slab.any():
        idx = prim[is_slab] - nv - ne
        s1 = np.sqrt(u[is_slab, 1])
        # u[:, 2] in [0, 0.5) picks the lower sheet; it is stretched back to [0, 1)
        upper = u[is_slab, 2] >= 0.5
        s2 = np.where(upper, 2.0 * u[is_slab, 2] - 1.0, 2.0 * u[is_slab, 2])
        w0, w1, w2 = 1.0 - s1, s1 * (1.0 - s2), s1 * s2
        corners = tris[idx]
        base = w0[:, None] * v[corners[:, 0]] + w1[:, None] * v[corners[:, 1]] + w2[:, None] * v[corners[:, 2]]
        rho = w0 * r[corners[:, 0]] + w1 * r[corners[:, 1]] + w2 * r[corners[:, 2]]
        normal = cross[idx] / np.linalg.norm(cross[idx], axis=1, keepdims=True)
        side = np.where(upper, 1.0, -1.0)
        points[is_slab] = base + (side * rho)[:, None] * normal

    keep = field_distance(points, skeleton) >= -INTERIOR_TOLERANCE
    log.debug(f"Reconstruction sampling kept {int(keep.sum())} of {n} samples")
    return ReconstructionSamples(points[keep], n)


@dataclass(frozen=True)
class ErrorTriple:
    """One-sided and two-sided Hausdorff distances as percentages of the bbox diagonal."""

    eps1: float  # surface -> reconstruction
    eps2: float  # reconstruction -> surface

    @property
    def eps(self) -> float:
        return max(self.eps1, self.eps2)

    def to_dict(self) -> dict:
        return {"eps1_pct": self.eps1, "eps2_pct": self.eps2, "eps_pct": self.eps}


def directed_hausdorff(source, target) -> float:
    _, dist = SpatialIndex(target).nearest_many(source, workers=-1)
    return float(dist.max())


def hausdorff(surface, reconstruction, diagonal: float) -> ErrorTriple:
    surface = as_points(surface)
    reconstruction = as_points(reconstruction)
    if len(surface) == 0 or len(reconstruction) == 0:
        raise ValueError("Hausdorff distance needs two nonempty point sets")
    if not diagonal > 0:
        raise ValueError("diagonal must be positive")
    eps1 = 100.0 * directed_hausdorff(surface, reconstruction) / diagonal
    eps2 = 100.0 * directed_hausdorff(reconstruction, surface) / diagonal
    return ErrorTriple(eps1, eps2)
