"""Procedural watertight test meshes, outward oriented and centered at the origin."""
from __future__ import annotations

from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ..errors import InvalidParameter
from ..fileio.mesh import TriangleMesh

_T = (1.0 + 5.0 ** 0.5) / 2.0
_ICOSAHEDRON_VERTICES = np.array(
    [
        [-1, _T, 0], [1, _T, 0], [-1, -_T, 0], [1, -_T, 0],
        [0, -1, _T], [0, 1, _T], [0, -1, -_T], [0, 1, -_T],
        [_T, 0, -1], [_T, 0, 1], [-_T, 0, -1], [-_T, 0, 1],
    ],
    dtype=np.float64,
)
_ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


def _unit_icosphere(subdivisions: int) -> Tuple[np.ndarray, np.ndarray]:
    verts: List[np.ndarray] = [v / np.linalg.norm(v) for v in _ICOSAHEDRON_VERTICES]
    faces = _ICOSAHEDRON_FACES.tolist()
    for _ in range(subdivisions):
        midpoint: Dict[Tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            refined += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = refined
    return np.asarray(verts), np.asarray(faces, dtype=np.int64)


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    if subdivisions < 0 or radius <= 0:
        raise InvalidParameter("icosphere needs subdivisions >= 0 and a positive radius")
    verts, faces = _unit_icosphere(subdivisions)
    return TriangleMesh(verts * radius, faces)


def ellipsoid(axes: Sequence[float] = (1.0, 0.6, 0.4), subdivisions: int = 3) -> TriangleMesh:
    axes = np.asarray(axes, dtype=np.float64)
    if axes.shape != (3,) or np.any(axes <= 0):
        raise InvalidParameter("ellipsoid needs three positive semi-axes")
    verts, faces = _unit_icosphere(subdivisions)
    return TriangleMesh(verts * axes, faces)


def blob(subdivisions: int = 3, amplitude: float = 0.25, lobes: int = 4, seed: int = 0) -> TriangleMesh:
    """Sphere pushed out radially by a few gaussian lobes; star-shaped, so still closed."""
    if not 0 <= amplitude < 1:
        raise InvalidParameter("blob amplitude must lie in [0, 1)")
    verts, faces = _unit_icosphere(subdivisions)
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(lobes, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    bump = np.exp(-(1.0 - verts @ dirs.T) / 0.15).sum(axis=1)
    return TriangleMesh(verts * (1.0 + amplitude * bump)[:, None], faces)


def _lathe(profile: Sequence[Tuple[float, float]], segments: int) -> TriangleMesh:
    """Revolve (rho, z) rings around the z axis, closing both ends with pole vertices.

    `profile` runs from the bottom pole to the top pole; only its interior
    entries become rings.
    """
    rings = profile[1:-1]
    theta = 2.0 * np.pi * np.arange(segments) / segments
    verts = [[0.0, 0.0, profile[0][1]]]
    for rho, z in rings:
        verts += np.column_stack([rho * np.cos(theta), rho * np.sin(theta), np.full(segments, z)]).tolist()
    verts.append([0.0, 0.0, profile[-1][1]])
    top = len(verts) - 1

    def ring(k: int, j: int) -> int:
        return 1 + k * segments + (j % segments)

    faces = []
    for j in range(segments):
        faces.append([0, ring(0, j + 1), ring(0, j)])
        for k in range(len(rings) - 1):
            a, b, c, d = ring(k, j), ring(k, j + 1), ring(k + 1, j + 1), ring(k + 1, j)
            faces += [[a, b, c], [a, c, d]]
        last = len(rings) - 1
        faces.append([top, ring(last, j), ring(last, j + 1)])
    return TriangleMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))


def capsule(radius: float = 0.1, length: float = 0.8, segments: int = 48, rings: int = 12) -> TriangleMesh:
    """Cylinder of the given radius and axis length along z, capped by hemispheres."""
    if radius <= 0 or length < 0:
        raise InvalidParameter("capsule needs a positive radius and non-negative length")
    half = 0.5 * length
    phi = np.linspace(-0.5 * np.pi, 0.0, rings + 1)
    profile = [(radius * np.cos(p), -half + radius * np.sin(p)) for p in phi]
    if length > 0:
        steps = max(2, int(np.ceil(length / (radius * np.pi / (2 * rings)))))
        profile += [(radius, z) for z in np.linspace(-half, half, steps + 1)[1:-1]]
        upper = -phi[::-1]
    else:
        # Both hemispheres share the equator ring
        upper = -phi[::-1][1:]
    profile += [(radius * np.cos(p), half + radius * np.sin(p)) for p in upper]
    profile[0] = (0.0, profile[0][1])
    profile[-1] = (0.0, profile[-1][1])
    return _lathe(profile, segments)


def dumbbell(radius: float = 0.5, separation: float = 1.2, neck: float = 0.15, segments: int = 48, rings: int = 48) -> TriangleMesh:
    """Two spheres centered at z = +-separation/2 joined by a cylindrical neck."""
    if not 0 < neck < radius:
        raise InvalidParameter("dumbbell neck must be thinner than the spheres")
    d = 0.5 * separation
    reach = d + radius
    s = np.linspace(0.0, np.pi, 2 * rings + 1)
    zs = -reach * np.cos(s)
    profile = []
    for z in zs:
        rho = max(
            np.sqrt(max(0.0, radius * radius - (z - d) ** 2)),
            np.sqrt(max(0.0, radius * radius - (z + d) ** 2)),
            neck if abs(z) <= d else 0.0,
        )
        profile.append((rho, z))
    profile[0] = (0.0, -reach)
    profile[-1] = (0.0, reach)
    return _lathe(profile, segments)


def torus(major: float = 1.0, minor: float = 0.3, segments: int = 48, sides: int = 24) -> TriangleMesh:
    if not 0 < minor < major:
        raise InvalidParameter("torus needs 0 < minor < major")
    u = 2.0 * np.pi * np.arange(segments) / segments
    v = 2.0 * np.pi * np.arange(sides) / sides
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = major + minor * np.cos(vv)
    verts = np.stack([ring * np.cos(uu), ring * np.sin(uu), minor * np.sin(vv)], axis=-1).reshape(-1, 3)

    def at(i: int, j: int) -> int:
        return (i % segments) * sides + (j % sides)

    faces = []
    for i in range(segments):
        for j in range(sides):
            a, b, c, d = at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)
            faces += [[a, b, c], [a, c, d]]
    return TriangleMesh(verts, np.asarray(faces, dtype=np.int64))


def box(size: Sequence[float] = (1.0, 0.6, 0.4)) -> TriangleMesh:
    size = np.asarray(size, dtype=np.float64)
    if size.shape != (3,) or np.any(size <= 0):
        raise InvalidParameter("box needs three positive edge lengths")
    corners = np.array([[x, y, z] for z in (0, 1) for y in (0, 1) for x in (0, 1)], dtype=np.float64)
    verts = (corners - 0.5) * size
    quads = [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]]
    faces = [tri for a, b, c, d in quads for tri in ([a, b, c], [a, c, d])]
    return TriangleMesh(verts, np.asarray(faces, dtype=np.int64))


SHAPES: Dict[str, Callable[..., TriangleMesh]] = {
    "sphere": icosphere,
    "ellipsoid": ellipsoid,
    "blob": blob,
    "capsule": capsule,
    "dumbbell": dumbbell,
    "torus": torus,
    "box": box,
}


def make_shape(name: str, **params) -> TriangleMesh:
    try:
        builder = SHAPES[name]
    except KeyError:
        raise InvalidParameter(f"unknown shape {name!r}; choose from {', '.join(sorted(SHAPES))}")
    return builder(**params)
