from __future__ import annotations

from typing import Optional

import numpy as np
import pytest

from app.candidates.sampling import SurfaceSampleSet
from app.fileio.mesh import write_mesh
from app.geometry.shapes import make_shape
from app.selection.coverage import CoverageMatrix


@pytest.fixture
def mesh_file(tmp_path):
    """Factory writing a procedural shape to OBJ and returning its path."""

    def _write(name: str = "sphere", filename: Optional[str] = None, **params) -> str:
        path = tmp_path / (filename or f"{name}.obj")
        write_mesh(path, make_shape(name, **params))
        return str(path)

    return _write


@pytest.fixture
def two_spheres() -> SurfaceSampleSet:
    """Vertices of two unit icospheres centered at x = -5 and x = +5, with outward normals."""
    unit = make_shape("sphere", subdivisions=1).vertices
    points = np.vstack([unit + [-5.0, 0.0, 0.0], unit + [5.0, 0.0, 0.0]])
    normals = np.vstack([unit, unit])
    return SurfaceSampleSet(points, normals, "cloud")


def random_instance(seed: int, max_rows: int = 30, max_cols: int = 15, density: float = 0.25) -> CoverageMatrix:
    """Feasible random set-cover instance: every row has at least one coverer."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, max_rows + 1))
    n = int(rng.integers(1, max_cols + 1))
    dense = rng.random((m, n)) < density
    for j in np.nonzero(~dense.any(axis=1))[0]:
        dense[j, rng.integers(n)] = True
    columns = [np.nonzero(dense[:, i])[0] for i in range(n)]
    return CoverageMatrix.from_columns(m, columns, radii=rng.random(n))


def block_instance(blocks: int, seed: int, rows: int = 40, cols: int = 20, density: float = 0.2):
    """Block-diagonal cover instance: `blocks` independent random sub-instances.

    Returns the matrix plus the sample and candidate block labels.
    """
    rng = np.random.default_rng(seed)
    columns = []
    for b in range(blocks):
        dense = rng.random((rows, cols)) < density
        for j in np.nonzero(~dense.any(axis=1))[0]:
            dense[j, rng.integers(cols)] = True
        columns += [b * rows + np.nonzero(dense[:, i])[0] for i in range(cols)]
    matrix = CoverageMatrix.from_columns(blocks * rows, columns, radii=rng.random(blocks * cols))
    return matrix, np.repeat(np.arange(blocks), rows), np.repeat(np.arange(blocks), cols)
