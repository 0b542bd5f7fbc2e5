"""Ball dilation and the binary coverage matrix D with its constraint vector B.

d_ji = 1 iff ||p_i - s_j|| <= r'_i. Columns (candidates) are stored sorted in a
CSC matrix; the row view is built on first use. Every column costs 1, so the
Euclidean norm of a binary decision vector is the square root of the selection
size and minimizing either yields the same covers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.sparse import csc_matrix, csr_matrix

from ..candidates.generate import CandidateSet
from ..candidates.sampling import SurfaceSampleSet
from ..errors import IndexOutOfRange, InvalidParameter, ParseError
from ..fileio.mesh import read_lines, write_text
from ..geometry.spatial import SpatialIndex, point_distances

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Offset:
    delta_r: float

    def __post_init__(self):
        if not self.delta_r > 0.0:
            raise InvalidParameter(f"offset dilation needs delta_r > 0, got {self.delta_r}")

    def apply(self, radii: np.ndarray) -> np.ndarray:
        return radii + self.delta_r

    @property
    def name(self) -> str:
        return "offset"


@dataclass(frozen=True)
class Scaling:
    sigma_r: float

    def __post_init__(self):
        if not self.sigma_r > 1.0:
            raise InvalidParameter(f"scaling dilation needs sigma_r > 1, got {self.sigma_r}")

    def apply(self, radii: np.ndarray) -> np.ndarray:
        return radii * self.sigma_r

    @property
    def name(self) -> str:
        return "scale"


DilationMode = Union[Offset, Scaling]


def dilate(candidates: CandidateSet, mode: DilationMode) -> CandidateSet:
    if not isinstance(mode, (Offset, Scaling)):
        raise InvalidParameter(f"unknown dilation mode {mode!r}")
    if not candidates.has_radii:
        raise ValueError("estimate radii before dilating")
    return candidates.with_dilated(mode.apply(candidates.radii))


@dataclass(frozen=True)
class CoverageMatrix:
    matrix: csc_matrix  # (m, n) boolean, column indices sorted
    required: np.ndarray  # B, (m,) in {0, 1}
    radii: np.ndarray = field(default_factory=lambda: np.zeros(0))  # original r, tie-break key

    def __post_init__(self):
        m, n = self.matrix.shape
        req = np.asarray(self.required, dtype=np.int8).reshape(-1)
        if len(req) != m:
            raise ValueError("constraint vector length must equal the row count")
        radii = np.asarray(self.radii, dtype=np.float64).reshape(-1)
        if len(radii) == 0:
            radii = np.zeros(n)
        if len(radii) != n:
            raise ValueError("one radius per column required")
        mat = csc_matrix(self.matrix, dtype=bool)
        mat.sort_indices()
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "required", req)
        object.__setattr__(self, "radii", radii)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_columns(cls, m: int, columns: Sequence[Iterable[int]], radii=None, required=None) -> "CoverageMatrix":
        indptr = [0]
        indices: List[int] = []
        for col in columns:
            rows = sorted(set(int(r) for r in col))
            if rows and (rows[0] < 0 or rows[-1] >= m):
                raise IndexOutOfRange(f"row index outside [0, {m})")
            indices.extend(rows)
            indptr.append(len(indices))
        data = np.ones(len(indices), dtype=bool)
        mat = csc_matrix((data, np.asarray(indices, dtype=np.int64), np.asarray(indptr)), shape=(m, len(columns)))
        req = np.ones(m, dtype=np.int8) if required is None else required
        return cls(mat, req, np.zeros(0) if radii is None else radii)

    def column(self, i: int) -> np.ndarray:
        mat = self.matrix
        return mat.indices[mat.indptr[i]:mat.indptr[i + 1]]

    @cached_property
    def rows(self) -> csr_matrix:
        return csr_matrix(self.matrix)

    def row(self, j: int) -> np.ndarray:
        r = self.rows
        return r.indices[r.indptr[j]:r.indptr[j + 1]]

    def column_sizes(self) -> np.ndarray:
        return np.diff(self.matrix.indptr)

    def coverage_counts(self, chosen: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.n, dtype=np.int64)
        if len(chosen):
            v[np.asarray(chosen, dtype=np.int64)] = 1
        return np.asarray(self.matrix.astype(np.int64) @ v).reshape(-1)

    def uncovered_rows(self, chosen: Sequence[int]) -> np.ndarray:
        counts = self.coverage_counts(chosen)
        return np.nonzero((self.required == 1) & (counts == 0))[0]

    def is_feasible(self, chosen: Sequence[int]) -> bool:
        return len(self.uncovered_rows(chosen)) == 0

    def restrict(self, rows: Sequence[int], cols: Sequence[int]) -> "CoverageMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        sub = self.matrix[rows][:, cols] if len(rows) and len(cols) else csc_matrix((len(rows), len(cols)), dtype=bool)
        return CoverageMatrix(sub, self.required[rows], self.radii[cols] if len(cols) else np.zeros(0))

    def with_required(self, required) -> "CoverageMatrix":
        return replace(self, required=np.asarray(required, dtype=np.int8))


def build_coverage(samples: SurfaceSampleSet, candidates: CandidateSet, workers: int = -1) -> CoverageMatrix:
    """Assemble D by ball queries, then re-check each hit with the exact distance test."""
    if not candidates.has_dilation:
        raise ValueError("dilate candidates before building the coverage matrix")
    m, n = len(samples), len(candidates)
    if n == 0:
        return CoverageMatrix(csc_matrix((m, 0), dtype=bool), np.ones(m, dtype=np.int8), np.zeros(0))
    tree = SpatialIndex(samples.points).tree
    # Slightly widened query radius; the exact <= test below decides membership
    widened = candidates.dilated * (1.0 + 1e-9) + 1e-12
    hits = tree.query_ball_point(candidates.centers, widened, workers=workers, return_sorted=True)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices: List[np.ndarray] = []
    for i, rows in enumerate(hits):
        rows = np.asarray(rows, dtype=np.int64)
        if len(rows):
            d = point_distances(samples.points[rows], candidates.centers[i])
            rows = rows[d <= candidates.dilated[i]]
        indices.append(rows)
        indptr[i + 1] = indptr[i] + len(rows)
    flat = np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64)
    mat = csc_matrix((np.ones(len(flat), dtype=bool), flat, indptr), shape=(m, n))
    log.info(f"Coverage matrix {m}x{n} with {len(flat)} nonzeros")
    return CoverageMatrix(mat, np.ones(m, dtype=np.int8), candidates.radii)


def set_ignorable(matrix: CoverageMatrix, ignored: Iterable[int]) -> CoverageMatrix:
    ignored = np.asarray(sorted(set(int(j) for j in ignored)), dtype=np.int64)
    if len(ignored) and (ignored[0] < 0 or ignored[-1] >= matrix.m):
        raise IndexOutOfRange(f"ignored sample index outside [0, {matrix.m})")
    required = np.ones(matrix.m, dtype=np.int8)
    required[ignored] = 0
    return matrix.with_required(required)


def verify_coverage(samples: SurfaceSampleSet, centers, dilated, required: Optional[np.ndarray] = None) -> np.ndarray:
    """Required samples not within r' of any given center, by direct distance checks."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
    dilated = np.asarray(dilated, dtype=np.float64).reshape(-1)
    covered = np.zeros(len(samples), dtype=bool)
    for c, r in zip(centers, dilated):
        covered |= point_distances(samples.points, c) <= r
    req = np.ones(len(samples), dtype=bool) if required is None else np.asarray(required).astype(bool)
    return np.nonzero(req & ~covered)[0]


def write_instance(path, matrix: CoverageMatrix) -> None:
    """Debug dump: `m n` header, then one line of covered rows per candidate."""
    lines = [f"{matrix.m} {matrix.n}"]
    lines += [" ".join(str(int(r)) for r in matrix.column(i)) for i in range(matrix.n)]
    write_text(path, lines)


def read_instance(path) -> CoverageMatrix:
    lines = read_lines(path)
    if not lines:
        raise ParseError(str(path), 1, "empty instance file")
    try:
        m, n = (int(t) for t in lines[0].split())
    except ValueError:
        raise ParseError(str(path), 1, "header must be 'm n'")
    body = lines[1:]
    # Trailing lines may be missing for candidates that cover nothing
    body += [""] * max(0, n - len(body))
    if len(body) > n and any(line.strip() for line in body[n:]):
        raise ParseError(str(path), n + 2, f"more than {n} candidate lines")
    columns = []
    for k, line in enumerate(body[:n], start=2):
        try:
            columns.append([int(t) for t in line.split()])
        except ValueError:
            raise ParseError(str(path), k, "row indices must be integers")
    try:
        return CoverageMatrix.from_columns(m, columns)
    except IndexOutOfRange as e:
        raise ParseError(str(path), None, str(e)) from e

