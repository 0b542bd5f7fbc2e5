from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from ..config import rng_for
from ..errors import EmptyMesh
from ..fileio.mesh import NORMAL_TOLERANCE, OrientedPointCloud, TriangleMesh
from ..geometry.primitives import as_points

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SurfaceSampleSet:
    points: np.ndarray
    normals: Optional[np.ndarray]
    source: Literal["mesh", "cloud"]

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))
        if len(self.points) == 0:
            raise ValueError("empty surface sample set")
        if self.normals is not None:
            normals = as_points(self.normals)
            if len(normals) != len(self.points):
                raise ValueError("samples and normals differ in count")
            if np.any(np.abs(np.linalg.norm(normals, axis=1) - 1.0) > NORMAL_TOLERANCE):
                raise ValueError("sample normals must be unit length")
            object.__setattr__(self, "normals", normals)

    def __len__(self) -> int:
        return len(self.points)


def sample_mesh_surface(mesh: TriangleMesh, m: int, seed: int, stream: str = "cover") -> SurfaceSampleSet:
    """Area-uniform samples with face normals.

    Sample i consumes row i of a (m, 3) uniform draw from the seeded stream, so a
    chunked or parallel evaluation reproduces the serial result.
    """
    if m < 1:
        raise ValueError("sample count must be positive")
    areas = mesh.face_areas()
    total = float(areas.sum())
    if len(areas) == 0 or total <= 0.0:
        raise EmptyMesh("mesh has no non-degenerate triangles to sample")
    cdf = np.cumsum(areas) / total
    u = rng_for(seed, stream).random((m, 3))
    tri = np.minimum(np.searchsorted(cdf, u[:, 0], side="right"), len(areas) - 1)
    # Zero-area faces own empty CDF intervals and are never picked
    r1 = np.sqrt(u[:, 1])
    w0, w1, w2 = 1.0 - r1, r1 * (1.0 - u[:, 2]), r1 * u[:, 2]
    a, b, c = (mesh.vertices[mesh.triangles[tri, k]] for k in range(3))
    points = w0[:, None] * a + w1[:, None] * b + w2[:, None] * c
    normals = mesh.face_normals()[tri]
    log.debug(f"Sampled {m} surface points ({stream} stream, seed {seed})")
    return SurfaceSampleSet(points, normals, "mesh")


def as_samples(cloud: OrientedPointCloud) -> SurfaceSampleSet:
    return SurfaceSampleSet(cloud.points, cloud.normals, "cloud")
