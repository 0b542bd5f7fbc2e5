from __future__ import annotations

from abc import ABC, abstractmethod

from ..errors import SelectionError
from .coverage import CoverageMatrix
from .models import NO_FIXINGS, Fixings, Selection


class CoverSolver(ABC):
    """Minimum-cardinality set cover over a CoverageMatrix (Dv >= B)."""

    name: str = "solver"

    @abstractmethod
    def solve(self, matrix: CoverageMatrix, fix: Fixings = NO_FIXINGS) -> Selection:
        ...


def check_feasible(matrix: CoverageMatrix, selection: Selection) -> Selection:
    uncovered = matrix.uncovered_rows(selection.chosen)
    if len(uncovered):
        raise SelectionError(
            f"{selection.solver} selection leaves {len(uncovered)} required rows uncovered"
        )
    return selection
