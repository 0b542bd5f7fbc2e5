from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import DegenerateInput

# Points travel as (n, 3) float64 arrays; a single Point3 is a length-3 array.
Point3 = np.ndarray


def as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected (n, 3) coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DegenerateInput("non-finite coordinates")
    return arr


@dataclass(frozen=True)
class Aabb:
    min: Tuple[float, float, float]
    max: Tuple[float, float, float]

    @classmethod
    def of(cls, points) -> "Aabb":
        pts = as_points(points)
        if len(pts) == 0:
            raise DegenerateInput("bounding box of an empty point set")
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        return cls(tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.max) - np.asarray(self.min)

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))


@dataclass(frozen=True)
class NormalizeTransform:
    """Uniform scale followed by translation: p' = p * scale + translation."""

    scale: float
    translation: Tuple[float, float, float]

    def apply(self, points) -> np.ndarray:
        return as_points(points) * self.scale + np.asarray(self.translation)

    def invert(self, points) -> np.ndarray:
        return (as_points(points) - np.asarray(self.translation)) / self.scale

    def to_dict(self) -> dict:
        return {"scale": self.scale, "translation": list(self.translation)}


def normalize_to_unit_box(points) -> Tuple[np.ndarray, NormalizeTransform]:
    """Map points into [0,1]^3 with the longest bounding-box axis spanning [0,1].

    Scaling is uniform, so radii and distance ratios are preserved.
    """
    pts = as_points(points)
    if len(pts) < 2:
        raise DegenerateInput("normalization needs at least two points")
    lo = pts.min(axis=0)
    longest = float((pts.max(axis=0) - lo).max())
    if longest <= 0.0:
        raise DegenerateInput("all points coincide")
    scale = 1.0 / longest
    # "+ 0.0" folds negative zeros so an identity transform reads as such
    translation = tuple(float(v) + 0.0 for v in (-lo * scale))
    transform = NormalizeTransform(scale=scale, translation=translation)
    return transform.apply(pts), transform


def bbox_diagonal(points) -> float:
    return Aabb.of(points).diagonal
