from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence

import numpy as np

from ..errors import IoError, ParseError
from ..skeleton.model import Skeleton
from .mesh import read_lines, write_text

log = logging.getLogger(__name__)

RADIUS_FORMAT = "%.9g"


def radii_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".radii")


def write_skeleton(path, skeleton: Skeleton) -> None:
    """OBJ with `v`, `l` (edges) and `f` (triangles) records plus a `<path>.radii` sidecar."""
    lines: List[str] = [f"# medial skeleton: {len(skeleton)} vertices"]
    lines += [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in skeleton.vertices]
    lines += [f"l {a + 1} {b + 1}" for a, b in skeleton.edges]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in skeleton.triangles]
    write_text(path, lines)
    write_text(radii_path(path), [RADIUS_FORMAT % r for r in skeleton.radii])
    log.info(
        f"Wrote skeleton {path}: V={len(skeleton)} E={len(skeleton.edges)} F={len(skeleton.triangles)}"
    )


def read_skeleton(path) -> Skeleton:
    vertices: List[List[float]] = []
    edges: List[Sequence[int]] = []
    tris: List[Sequence[int]] = []
    for lineno, raw in enumerate(read_lines(path), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "v":
                vertices.append([float(t) for t in tokens[1:4]])
            elif tokens[0] == "l":
                ids = [int(t.split("/")[0]) - 1 for t in tokens[1:]]
                # Polylines become consecutive edges
                edges.extend(zip(ids[:-1], ids[1:]))
            elif tokens[0] == "f":
                ids = [int(t.split("/")[0]) - 1 for t in tokens[1:]]
                tris.extend((ids[0], ids[i], ids[i + 1]) for i in range(1, len(ids) - 1))
        except (ValueError, IndexError):
            raise ParseError(str(path), lineno, f"malformed record {line!r}")

    rpath = radii_path(path)
    if not rpath.exists():
        raise IoError(f"missing radii sidecar {rpath}")
    radii = []
    for lineno, raw in enumerate(read_lines(rpath), start=1):
        if raw.strip():
            try:
                radii.append(float(raw))
            except ValueError:
                raise ParseError(str(rpath), lineno, f"bad radius {raw.strip()!r}")
    if len(radii) != len(vertices):
        raise ParseError(str(rpath), None, f"{len(radii)} radii for {len(vertices)} vertices")
    try:
        return Skeleton(
            np.asarray(vertices).reshape(-1, 3),
            np.asarray(radii),
            np.asarray(edges, dtype=np.int64).reshape(-1, 2),
            np.asarray(tris, dtype=np.int64).reshape(-1, 3),
        )
    except ValueError as e:
        raise ParseError(str(path), None, str(e)) from e


def write_selection(path, indices: Sequence[int], centers, radii, dilated) -> None:
    """One line per selected candidate: index, center, original radius r and dilated radius r'."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
    lines = ["# index x y z r r_dilated"]
    for i, (x, y, z), r, rd in zip(indices, centers, radii, dilated):
        lines.append(f"{int(i)} {x:.9g} {y:.9g} {z:.9g} {r:.9g} {rd:.9g}")
    write_text(path, lines)
