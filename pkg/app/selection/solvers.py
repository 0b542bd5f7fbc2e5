"""Minimum set cover solvers: greedy, exact branch-and-bound, brute force.

All three share the same preparation: forced-out columns are unavailable,
forced-in columns are chosen up front and the rows they cover are settled.
Ties are broken by larger original radius, then lower candidate index.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterator, List, Tuple

import numpy as np

from ..errors import Infeasible, InvalidParameter, TooLarge
from .base import CoverSolver, check_feasible
from .coverage import CoverageMatrix
from .models import NO_FIXINGS, Fixings, Selection

log = logging.getLogger(__name__)

BRUTE_FORCE_MAX_COLUMNS = 22
# Clock checks happen every this many nodes
_CLOCK_EVERY = 256


@dataclass(frozen=True)
class _Prepared:
    allowed: np.ndarray  # bool (n,)
    uncovered: np.ndarray  # bool (m,), required rows not settled by forced_in
    forced: Tuple[int, ...]


def _prepare(matrix: CoverageMatrix, fix: Fixings) -> _Prepared:
    fix.check(matrix.n)
    allowed = np.ones(matrix.n, dtype=bool)
    allowed[list(fix.forced_out)] = False
    forced = tuple(sorted(fix.forced_in))
    uncovered = matrix.required == 1
    for c in forced:
        uncovered[matrix.column(c)] = False
    rows = np.nonzero(uncovered)[0]
    if len(rows):
        sub = matrix.rows[rows]
        reachable = np.asarray(sub[:, np.nonzero(allowed)[0]].sum(axis=1)).reshape(-1)
        stuck = rows[reachable == 0]
        if len(stuck):
            raise Infeasible(stuck)
    return _Prepared(allowed, uncovered, forced)


def _preference(matrix: CoverageMatrix, cols) -> List[int]:
    """Columns ordered by radius descending, then index ascending."""
    cols = np.asarray(cols, dtype=np.int64)
    if len(cols) == 0:
        return []
    order = np.lexsort((cols, -matrix.radii[cols]))
    return [int(c) for c in cols[order]]


def _bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _greedy_pick(matrix: CoverageMatrix, prep: _Prepared) -> List[int]:
    uncovered = prep.uncovered.copy()
    gains = np.asarray(matrix.matrix.T.astype(np.int64) @ uncovered.astype(np.int64)).reshape(-1)
    gains[~prep.allowed] = -1
    gains[list(prep.forced)] = -1
    rows = matrix.rows
    chosen: List[int] = []
    while uncovered.any():
        best = gains.max()
        tied = np.nonzero(gains == best)[0]
        pick = int(tied[np.lexsort((tied, -matrix.radii[tied]))[0]])
        col = matrix.column(pick)
        fresh = col[uncovered[col]]
        uncovered[fresh] = False
        touched = rows[fresh]
        np.subtract.at(gains, touched.indices, 1)
        gains[pick] = -1
        chosen.append(pick)
    return chosen


def solve_greedy(matrix: CoverageMatrix, fix: Fixings = NO_FIXINGS) -> Selection:
    start = time.perf_counter()
    prep = _prepare(matrix, fix)
    chosen = list(prep.forced) + _greedy_pick(matrix, prep)
    selection = Selection(
        tuple(chosen), matrix.n, "greedy", optimal=False, wall_time=time.perf_counter() - start
    )
    log.info(f"Greedy cover selected {selection.objective} of {matrix.n} candidates")
    return check_feasible(matrix, selection)


class _Kernel:
    """Set-cover instance on Python int bitmasks, reduced by dominance rules."""

    def __init__(self, matrix: CoverageMatrix, prep: _Prepared):
        self.matrix = matrix
        self.active = 0
        for r in np.nonzero(prep.uncovered)[0]:
            self.active |= 1 << int(r)
        self.cols: Dict[int, int] = {}
        for c in np.nonzero(prep.allowed)[0]:
            c = int(c)
            if c in prep.forced:
                continue
            mask = 0
            for r in matrix.column(c):
                mask |= 1 << int(r)
            self.cols[c] = mask & self.active
        self.rank = {c: k for k, c in enumerate(_preference(matrix, list(self.cols)))}
        self.forced: List[int] = []
        self.reductions = {"empty_columns": 0, "unit_rows": 0, "dominated_rows": 0, "dominated_columns": 0}

    def row_masks(self) -> Dict[int, int]:
        rows: Dict[int, int] = {r: 0 for r in _bits(self.active)}
        for c, mask in self.cols.items():
            bit = 1 << c
            for r in _bits(mask):
                rows[r] |= bit
        return rows

    def _settle(self, c: int) -> None:
        self.forced.append(c)
        self.active &= ~self.cols.pop(c)
        for d in self.cols:
            self.cols[d] &= self.active

    def reduce(self) -> None:
        changed = True
        while changed:
            changed = False
            empty = [c for c, mask in self.cols.items() if mask == 0]
            for c in empty:
                del self.cols[c]
            self.reductions["empty_columns"] += len(empty)
            if not self.active:
                break

            rows = self.row_masks()
            units = sorted({next(_bits(cm)) for cm in rows.values() if cm.bit_count() == 1})
            if units:
                for c in units:
                    if c in self.cols:
                        self._settle(c)
                self.reductions["unit_rows"] += len(units)
                changed = True
                continue

            # Row a is implied by row b when every coverer of b also covers a
            dropped_rows = 0
            for b, cb in rows.items():
                if not cb:
                    continue
                thin = min(_bits(cb), key=lambda c: self.cols[c].bit_count())
                for a in _bits(self.cols[thin]):
                    if a == b or not (self.active >> a) & 1:
                        continue
                    ca = rows[a]
                    if cb & ~ca == 0 and (cb != ca or b < a):
                        self.active &= ~(1 << a)
                        dropped_rows += 1
            if dropped_rows:
                for c in self.cols:
                    self.cols[c] &= self.active
                self.reductions["dominated_rows"] += dropped_rows
                changed = True
                continue

            # Column c is redundant when another column covers all of its rows
            doomed = []
            for c, rc in self.cols.items():
                thin = min(_bits(rc), key=lambda r: rows[r].bit_count())
                for d in _bits(rows[thin]):
                    if d == c:
                        continue
                    rd = self.cols[d]
                    if rc & ~rd == 0 and (rc != rd or self.rank[d] < self.rank[c]):
                        doomed.append(c)
                        break
            for c in doomed:
                del self.cols[c]
            if doomed:
                self.reductions["dominated_columns"] += len(doomed)
                changed = True


class _Timeout(Exception):
    pass


class _BranchAndBound:
    def __init__(self, kernel: _Kernel, time_limit: float, start: float):
        self.order = sorted(kernel.cols, key=lambda c: kernel.rank[c])
        self.masks = [kernel.cols[c] for c in self.order]
        self.full = kernel.active
        self.row_cols: Dict[int, int] = {r: 0 for r in _bits(self.full)}
        for k, mask in enumerate(self.masks):
            for r in _bits(mask):
                self.row_cols[r] |= 1 << k
        self.deadline = start + time_limit
        self.nodes = 0
        self.best: List[int] = self._greedy()

    def _greedy(self) -> List[int]:
        covered, picks = 0, []
        while covered != self.full:
            # Columns are already in preference order, so max() keeps the first tie
            k = max(range(len(self.masks)), key=lambda i: (self.masks[i] & ~covered).bit_count())
            picks.append(k)
            covered |= self.masks[k]
        return picks

    def run(self) -> bool:
        try:
            self._search(0, 0, [])
        except _Timeout:
            return False
        return True

    def _search(self, covered: int, excluded: int, chosen: List[int]) -> None:
        self.nodes += 1
        if self.nodes % _CLOCK_EVERY == 0 and time.perf_counter() > self.deadline:
            raise _Timeout()
        open_rows = self.full & ~covered
        if not open_rows:
            if len(chosen) < len(self.best):
                self.best = list(chosen)
            return
        if len(chosen) + 1 >= len(self.best):
            return

        maxcov = 0
        for k, mask in enumerate(self.masks):
            if not (excluded >> k) & 1:
                maxcov = max(maxcov, (mask & open_rows).bit_count())
        if maxcov == 0:
            return
        if len(chosen) + math.ceil(open_rows.bit_count() / maxcov) >= len(self.best):
            return

        row, fewest = -1, None
        for r in _bits(open_rows):
            avail = self.row_cols[r] & ~excluded
            count = avail.bit_count()
            if count == 0:
                return
            if fewest is None or count < fewest.bit_count():
                row, fewest = r, avail
                if count == 1:
                    break

        for k in _bits(fewest):
            if len(chosen) + 1 >= len(self.best):
                break
            chosen.append(k)
            self._search(covered | self.masks[k], excluded, chosen)
            chosen.pop()
            excluded |= 1 << k

    def selection(self) -> List[int]:
        return [self.order[k] for k in self.best]


def solve_exact(matrix: CoverageMatrix, fix: Fixings = NO_FIXINGS, time_limit: float = 120.0) -> Selection:
    if not time_limit > 0:
        raise InvalidParameter(f"time limit must be positive, got {time_limit}")
    start = time.perf_counter()
    prep = _prepare(matrix, fix)
    kernel = _Kernel(matrix, prep)
    kernel.reduce()
    log.debug(f"Cover preprocessing: {kernel.reductions}; kernel {kernel.active.bit_count()}x{len(kernel.cols)}")

    chosen = list(prep.forced) + kernel.forced
    optimal, nodes = True, 0
    if kernel.active:
        bnb = _BranchAndBound(kernel, time_limit, start)
        optimal = bnb.run()
        nodes = bnb.nodes
        chosen += bnb.selection()
        if not optimal:
            log.warning(f"Exact cover hit the {time_limit:g}s limit after {nodes} nodes; keeping incumbent")

    selection = Selection(
        tuple(chosen),
        matrix.n,
        "exact",
        optimal=optimal,
        wall_time=time.perf_counter() - start,
        nodes=nodes,
        reductions=dict(kernel.reductions),
    )
    log.info(f"Exact cover selected {selection.objective} candidates (optimal={optimal}, nodes={nodes})")
    return check_feasible(matrix, selection)


def brute_force(matrix: CoverageMatrix, fix: Fixings = NO_FIXINGS) -> Selection:
    """Lexicographically smallest minimum-cardinality cover by exhaustive enumeration."""
    if matrix.n > BRUTE_FORCE_MAX_COLUMNS:
        raise TooLarge(f"brute force handles at most {BRUTE_FORCE_MAX_COLUMNS} candidates, got {matrix.n}")
    start = time.perf_counter()
    prep = _prepare(matrix, fix)
    need = 0
    for r in np.nonzero(prep.uncovered)[0]:
        need |= 1 << int(r)
    free = [int(c) for c in np.nonzero(prep.allowed)[0] if int(c) not in prep.forced]
    masks = {}
    for c in free:
        mask = 0
        for r in matrix.column(c):
            mask |= 1 << int(r)
        masks[c] = mask & need

    found: Tuple[int, ...] = ()
    nodes = 0
    for size in range(len(free) + 1):
        hit = None
        for combo in combinations(free, size):
            nodes += 1
            covered = 0
            for c in combo:
                covered |= masks[c]
            if covered == need:
                hit = combo
                break
        if hit is not None:
            found = hit
            break

    selection = Selection(
        prep.forced + found, matrix.n, "brute", optimal=True, wall_time=time.perf_counter() - start, nodes=nodes
    )
    return check_feasible(matrix, selection)


class GreedySolver(CoverSolver):
    name = "greedy"

    def solve(self, matrix: CoverageMatrix, fix: Fixings = NO_FIXINGS) -> Selection:
        return solve_greedy(matrix, fix)


class ExactSolver(CoverSolver):
    name = "exact"

    def __init__(self, time_limit: float = 120.0):
        self.time_limit = time_limit

    def solve(self, matrix: CoverageMatrix, fix: Fixings = NO_FIXINGS) -> Selection:
        return solve_exact(matrix, fix, self.time_limit)


class BruteForceSolver(CoverSolver):
    name = "brute"

    def solve(self, matrix: CoverageMatrix, fix: Fixings = NO_FIXINGS) -> Selection:
        return brute_force(matrix, fix)


def get_solver(name: str, time_limit: float = 120.0) -> CoverSolver:
    if name == "greedy":
        return GreedySolver()
    if name == "exact":
        return ExactSolver(time_limit)
    if name == "brute":
        return BruteForceSolver()
    raise InvalidParameter(f"unknown solver {name!r}")
