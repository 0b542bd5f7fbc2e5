from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Literal, Tuple

import numpy as np

from ..errors import IndexOutOfRange, InvalidParameter

SolverName = Literal["greedy", "exact", "brute", "partitioned"]


@dataclass(frozen=True)
class Fixings:
    forced_in: FrozenSet[int] = frozenset()
    forced_out: FrozenSet[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "forced_in", frozenset(int(i) for i in self.forced_in))
        object.__setattr__(self, "forced_out", frozenset(int(i) for i in self.forced_out))
        both = self.forced_in & self.forced_out
        if both:
            raise InvalidParameter(f"candidates both forced in and out: {sorted(both)[:10]}")

    def check(self, n: int) -> None:
        for i in self.forced_in | self.forced_out:
            if i < 0 or i >= n:
                raise IndexOutOfRange(f"fixed candidate {i} outside [0, {n})")

    def restricted(self, cols: Iterable[int]) -> "Fixings":
        """Fixings re-indexed onto the sub-problem whose column k is cols[k]."""
        position = {int(c): k for k, c in enumerate(cols)}
        return Fixings(
            frozenset(position[i] for i in self.forced_in if i in position),
            frozenset(position[i] for i in self.forced_out if i in position),
        )


NO_FIXINGS = Fixings()


@dataclass(frozen=True)
class Selection:
    chosen: Tuple[int, ...]
    n: int
    solver: SolverName
    optimal: bool
    wall_time: float = 0.0
    nodes: int = 0
    reductions: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "chosen", tuple(sorted(int(i) for i in self.chosen)))

    @property
    def objective(self) -> int:
        return len(self.chosen)

    @property
    def v(self) -> np.ndarray:
        vec = np.zeros(self.n, dtype=np.int8)
        if self.chosen:
            vec[list(self.chosen)] = 1
        return vec
