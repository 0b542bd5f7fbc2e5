from __future__ import annotations

from typing import List, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .primitives import as_points


def point_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean distances; the single formula every exact comparison uses."""
    return np.linalg.norm(a - b, axis=-1)


class SpatialIndex:
    """k-d tree over a fixed point set.

    Nearest queries break ties by the lowest point index, and returned distances
    are recomputed with `point_distances` so they agree with a linear scan.
    """

    def __init__(self, points):
        self.points = as_points(points)
        if len(self.points) == 0:
            raise ValueError("SpatialIndex needs a nonempty point set")
        self._tree = cKDTree(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def nearest(self, q) -> Tuple[int, float]:
        idx, dist = self.nearest_many(as_points(q))
        return int(idx[0]), float(dist[0])

    def nearest_many(self, queries, workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        qs = as_points(queries)
        if len(qs) == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        k = min(4, len(self.points))
        dist, idx = self._tree.query(qs, k=k, workers=workers)
        if k == 1:
            dist = dist.reshape(-1, 1)
            idx = idx.reshape(-1, 1)
        best = idx[:, 0].copy()
        # Ties among the k returned neighbors: lowest index wins
        tied = dist == dist[:, :1]
        if k > 1 and np.any(tied[:, 1:]):
            masked = np.where(tied, idx, np.iinfo(np.int64).max)
            best = masked.min(axis=1)
            # All k tied: more equidistant points may lie outside the returned set
            overflow = np.nonzero(tied.all(axis=1))[0]
            for row in overflow:
                ball = self._tree.query_ball_point(qs[row], dist[row, 0])
                if ball:
                    d = point_distances(self.points[ball], qs[row])
                    ball = np.asarray(ball)[d == d.min()]
                    best[row] = int(ball.min())
        return best.astype(np.int64), point_distances(self.points[best], qs)

    def k_nearest(self, queries, k: int, workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        qs = as_points(queries)
        k = min(k, len(self.points))
        dist, idx = self._tree.query(qs, k=k, workers=workers)
        return idx.reshape(len(qs), k), dist.reshape(len(qs), k)

    def within(self, q, radius: float) -> List[int]:
        return sorted(self._tree.query_ball_point(as_points(q)[0], radius))

    @property
    def tree(self) -> cKDTree:
        return self._tree


def nearest(index: SpatialIndex, q) -> Tuple[int, float]:
    return index.nearest(q)
