from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..candidates.sampling import SurfaceSampleSet
from ..errors import InvalidParameter
from ..geometry.triangulation import regular_triangulation, simplices_among
from .model import Skeleton

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Connection:
    skeleton: Skeleton
    redundant_balls: int  # selected balls that own no power cell
    jitter: float


def connect_selected(
    centers,
    radii,
    dilated,
    samples: SurfaceSampleSet,
    delta_r: float,
    boost: float = 1.0,
) -> Connection:
    """Connect the selected balls through the power diagram they form with the surface samples.

    Selected centers carry weight (boost * r')^2 and every surface sample carries
    delta_r^2. Edges and triangles of the regular triangulation whose corners are
    all selected centers make up the skeleton; vertex radii stay the original r.
    """
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
    radii = np.asarray(radii, dtype=np.float64).reshape(-1)
    dilated = np.asarray(dilated, dtype=np.float64).reshape(-1)
    k = len(centers)
    if k == 0:
        raise InvalidParameter("cannot connect an empty selection")
    if not delta_r > 0 or not boost > 0:
        raise InvalidParameter("delta_r and the connection boost must be positive")
    if k == 1:
        return Connection(Skeleton(centers, radii, np.zeros((0, 2)), np.zeros((0, 3))), 0, 0.0)

    points = np.vstack([centers, samples.points])
    weights = np.concatenate([(boost * dilated) ** 2, np.full(len(samples), delta_r * delta_r)])
    t = regular_triangulation(points, weights)
    edges, tris = simplices_among(t, np.arange(k))
    redundant = int(np.count_nonzero(t.redundant < k))
    if redundant:
        log.warning(f"{redundant} selected balls vanished from the power diagram and stay isolated")
    skeleton = Skeleton(centers, radii, edges, tris)
    log.info(f"Connected {k} balls: {len(skeleton.edges)} edges, {len(skeleton.triangles)} triangles")
    return Connection(skeleton, redundant, t.jitter)
