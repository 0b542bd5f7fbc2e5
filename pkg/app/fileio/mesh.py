from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from ..errors import EmptyMesh, EmptyPointCloud, IoError, MissingNormals, ParseError
from ..geometry.primitives import as_points

log = logging.getLogger(__name__)

NORMAL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (n, 3)
    triangles: np.ndarray  # (k, 3) 0-based

    def __post_init__(self):
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", as_points(self.vertices))
        object.__setattr__(self, "triangles", tris)
        if len(tris) and (tris.min() < 0 or tris.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")

    @property
    def corners(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        v = self.vertices
        return v[self.triangles[:, 0]], v[self.triangles[:, 1]], v[self.triangles[:, 2]]

    def face_cross(self) -> np.ndarray:
        a, b, c = self.corners
        return np.cross(b - a, c - a)

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_cross(), axis=1)

    def face_normals(self) -> np.ndarray:
        cross = self.face_cross()
        length = np.linalg.norm(cross, axis=1, keepdims=True)
        return cross / np.where(length > 0, length, 1.0)

    def transformed(self, transform) -> "TriangleMesh":
        return TriangleMesh(transform.apply(self.vertices), self.triangles)


@dataclass(frozen=True)
class OrientedPointCloud:
    points: np.ndarray
    normals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))
        object.__setattr__(self, "normals", as_points(self.normals) if len(self.normals) else np.zeros((0, 3)))
        if len(self.points) != len(self.normals):
            raise ValueError("points and normals differ in count")

    def __len__(self) -> int:
        return len(self.points)

    def transformed(self, transform) -> "OrientedPointCloud":
        # Uniform scaling leaves unit normals unchanged
        return OrientedPointCloud(transform.apply(self.points), self.normals)


def read_lines(path) -> List[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e


def _floats(path, lineno: int, tokens: Sequence[str]) -> List[float]:
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise ParseError(str(path), lineno, f"expected numbers, got {' '.join(tokens)!r}")
    if not all(np.isfinite(values)):
        raise ParseError(str(path), lineno, "non-finite coordinate")
    return values


def _fan(polygon: Sequence[int]) -> Iterator[Tuple[int, int, int]]:
    for i in range(1, len(polygon) - 1):
        yield polygon[0], polygon[i], polygon[i + 1]


def _parse_obj(path) -> Tuple[np.ndarray, List[Tuple[int, int, int]]]:
    vertices: List[List[float]] = []
    faces: List[Tuple[int, int, int]] = []
    for lineno, raw in enumerate(read_lines(path), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        tag = tokens[0]
        if tag == "v":
            if len(tokens) < 4:
                raise ParseError(str(path), lineno, "vertex needs three coordinates")
            vertices.append(_floats(path, lineno, tokens[1:4]))
        elif tag == "f":
            if len(tokens) < 4:
                raise ParseError(str(path), lineno, "face needs at least three vertices")
            polygon = []
            for tok in tokens[1:]:
                try:
                    idx = int(tok.split("/")[0])
                except ValueError:
                    raise ParseError(str(path), lineno, f"bad face index {tok!r}")
                # OBJ is 1-based; negative indices count back from the latest vertex
                idx = idx - 1 if idx > 0 else len(vertices) + idx
                if idx < 0 or idx >= len(vertices):
                    raise ParseError(str(path), lineno, f"face index {tok} out of range")
                polygon.append(idx)
            faces.extend(_fan(polygon))
        # vt, vn, l, o, g, s, usemtl, mtllib: not needed
    return np.asarray(vertices, dtype=np.float64).reshape(-1, 3), faces


@dataclass
class _PlyElement:
    name: str
    count: int
    properties: List[str]


def _parse_ply(path) -> Dict[str, Tuple[List[str], List[List[float]]]]:
    """Element name -> (property names, rows of numbers)."""
    lines = read_lines(path)
    if not lines or lines[0].strip() != "ply":
        raise ParseError(str(path), 1, "missing 'ply' magic")
    elements: List[_PlyElement] = []
    body_start = None
    for lineno, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens:
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise ParseError(str(path), lineno, "only ASCII PLY is supported")
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError(str(path), lineno, "malformed element line")
            elements.append(_PlyElement(tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise ParseError(str(path), lineno, "property before element")
            elements[-1].properties.append(tokens[-1])
        elif tokens[0] == "end_header":
            body_start = lineno
            break
    if body_start is None:
        raise ParseError(str(path), None, "missing end_header")

    data: Dict[str, Tuple[List[str], List[List[float]]]] = {}
    cursor = body_start  # 0-based index of the first body line
    for element in elements:
        rows = []
        for _ in range(element.count):
            while cursor < len(lines) and not lines[cursor].strip():
                cursor += 1
            if cursor >= len(lines):
                raise ParseError(str(path), cursor, f"unexpected end of file in {element.name}")
            rows.append(_floats(path, cursor + 1, lines[cursor].split()))
            cursor += 1
        data[element.name] = (element.properties, rows)
    return data


def _ply_columns(data, element: str, names: Sequence[str]) -> List[int]:
    props = data.get(element, ([], []))[0]
    return [props.index(n) for n in names if n in props]


def _clean_triangles(path, vertices: np.ndarray, faces: List[Tuple[int, int, int]]) -> np.ndarray:
    tris = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if len(tris) == 0:
        return tris
    repeated = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])
    a, b, c = vertices[tris[:, 0]], vertices[tris[:, 1]], vertices[tris[:, 2]]
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    degenerate = repeated | (area <= 0.0)
    if np.any(degenerate):
        log.warning(f"{path}: dropped {int(degenerate.sum())} degenerate triangles")
    return tris[~degenerate]


def load_mesh(path) -> TriangleMesh:
    suffix = Path(path).suffix.lower()
    if suffix == ".ply":
        data = _parse_ply(path)
        vcols = _ply_columns(data, "vertex", ("x", "y", "z"))
        if len(vcols) != 3:
            raise ParseError(str(path), None, "vertex element lacks x/y/z")
        vertex_rows = data.get("vertex", ([], []))[1]
        vertices = np.asarray([[row[i] for i in vcols] for row in vertex_rows]).reshape(-1, 3)
        faces: List[Tuple[int, int, int]] = []
        for k, row in enumerate(data.get("face", ([], []))[1]):
            count = int(row[0])
            polygon = [int(v) for v in row[1:1 + count]]
            if count < 3 or len(polygon) != count:
                raise ParseError(str(path), None, f"face {k} is malformed")
            if min(polygon) < 0 or max(polygon) >= len(vertices):
                raise ParseError(str(path), None, f"face {k} index out of range")
            faces.extend(_fan(polygon))
    elif suffix == ".obj":
        vertices, faces = _parse_obj(path)
    else:
        raise ParseError(str(path), None, f"unsupported mesh format {suffix!r}")
    if len(vertices) == 0:
        raise EmptyMesh(f"{path}: no vertices")
    tris = _clean_triangles(path, vertices, faces)
    if len(tris) == 0:
        raise EmptyMesh(f"{path}: no non-degenerate triangles")
    mesh = TriangleMesh(vertices, tris)
    log.info(f"Loaded mesh {path}: {len(mesh.vertices)} vertices, {len(mesh.triangles)} triangles")
    return mesh


def _unit_normals(path, normals: np.ndarray, linenos: Sequence[int]) -> np.ndarray:
    length = np.linalg.norm(normals, axis=1)
    bad = np.nonzero(length == 0.0)[0]
    if len(bad):
        raise ParseError(str(path), linenos[bad[0]], "zero-length normal")
    return normals / length[:, None]


def load_point_cloud(path) -> OrientedPointCloud:
    suffix = Path(path).suffix.lower()
    if suffix == ".ply":
        data = _parse_ply(path)
        cols = _ply_columns(data, "vertex", ("x", "y", "z"))
        ncols = _ply_columns(data, "vertex", ("nx", "ny", "nz"))
        if len(cols) != 3:
            raise ParseError(str(path), None, "vertex element lacks x/y/z")
        if len(ncols) != 3:
            raise MissingNormals(str(path), None, "vertex element lacks nx/ny/nz")
        rows = data.get("vertex", ([], []))[1]
        points = np.asarray([[r[i] for i in cols] for r in rows]).reshape(-1, 3)
        normals = np.asarray([[r[i] for i in ncols] for r in rows]).reshape(-1, 3)
        linenos: List[int] = [0] * len(rows)
    else:
        pts: List[List[float]] = []
        linenos = []
        for lineno, raw in enumerate(read_lines(path), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.replace(",", " ").split()
            if len(tokens) == 3:
                raise MissingNormals(str(path), lineno, "expected 'x y z nx ny nz', got 3 fields")
            if len(tokens) != 6:
                raise ParseError(str(path), lineno, f"expected 6 fields, got {len(tokens)}")
            pts.append(_floats(path, lineno, tokens))
            linenos.append(lineno)
        arr = np.asarray(pts, dtype=np.float64).reshape(-1, 6)
        points, normals = arr[:, :3], arr[:, 3:]
    if len(points) == 0:
        raise EmptyPointCloud(f"{path}: no points")
    cloud = OrientedPointCloud(points, _unit_normals(path, normals, linenos))
    log.info(f"Loaded point cloud {path}: {len(cloud)} oriented points")
    return cloud


def write_text(path, lines: Sequence[str]) -> None:
    try:
        p = Path(path)
        if p.parent and not p.parent.exists():
            p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def write_mesh(path, mesh: TriangleMesh) -> None:
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles]
    write_text(path, lines)


def write_point_cloud(path, cloud: OrientedPointCloud) -> None:
    lines = [
        " ".join(f"{v:.17g}" for v in (*p, *n))
        for p, n in zip(cloud.points, cloud.normals)
    ]
    write_text(path, lines)
