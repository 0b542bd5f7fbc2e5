from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..geometry.primitives import as_points


@dataclass(frozen=True)
class Skeleton:
    """Medial mesh: ball centers with their original radii, plus edges and triangles."""

    vertices: np.ndarray  # (V, 3)
    radii: np.ndarray  # (V,)
    edges: np.ndarray  # (E, 2)
    triangles: np.ndarray  # (F, 3)

    def __post_init__(self):
        verts = as_points(self.vertices) if len(self.vertices) else np.zeros((0, 3))
        radii = np.asarray(self.radii, dtype=np.float64).reshape(-1)
        edges = _canonical(self.edges, 2)
        tris = _canonical(self.triangles, 3)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "triangles", tris)
        if len(radii) != len(verts):
            raise ValueError("one radius per vertex required")
        if np.any(radii <= 0):
            raise ValueError("skeleton radii must be positive")
        for name, arr in (("edge", edges), ("triangle", tris)):
            if len(arr) and (arr.min() < 0 or arr.max() >= len(verts)):
                raise ValueError(f"{name} index out of range")

    def __len__(self) -> int:
        return len(self.vertices)

    def quantized(self, fmt: str = "%.9g") -> "Skeleton":
        """Values as they read back from the text files."""
        q = np.vectorize(lambda v: float(fmt % v), otypes=[np.float64])
        verts = q(self.vertices) if len(self.vertices) else self.vertices
        return Skeleton(verts, q(self.radii) if len(self.radii) else self.radii, self.edges, self.triangles)


def _canonical(arr, width: int) -> np.ndarray:
    a = np.asarray(arr, dtype=np.int64).reshape(-1, width)
    if len(a) == 0:
        return a
    a = np.sort(a, axis=1)
    degenerate = np.any(a[:, 1:] == a[:, :-1], axis=1)
    return np.unique(a[~degenerate], axis=0)


class SkeletonStats(NamedTuple):
    vertices: int
    edges: int
    faces: int
    components: int
    cycle_rank: int


def skeleton_stats(s: Skeleton) -> SkeletonStats:
    v, e, f = len(s.vertices), len(s.edges), len(s.triangles)
    if v == 0:
        return SkeletonStats(0, e, f, 0, 0)
    graph = coo_matrix((np.ones(e), (s.edges[:, 0], s.edges[:, 1])), shape=(v, v)) if e else coo_matrix((v, v))
    components, _ = connected_components(graph, directed=False)
    return SkeletonStats(v, e, f, int(components), int(e - v + components))
