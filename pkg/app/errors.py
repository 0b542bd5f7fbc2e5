from __future__ import annotations

from typing import Any, Dict, Iterable, Optional


class MedialCoverError(Exception):
    """Base error. `category` is the machine-readable name printed by the CLI."""

    category = "error"
    exit_code = 1

    def context(self) -> Dict[str, Any]:
        return {}


class DegenerateInput(MedialCoverError):
    category = "degenerate_input"
    exit_code = 3


class ParseError(MedialCoverError):
    category = "parse_error"
    exit_code = 2

    def __init__(self, path: str, line: Optional[int], message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line

    def context(self) -> Dict[str, Any]:
        return {"path": self.path, "line": self.line}


class MissingNormals(ParseError):
    category = "missing_normals"


class EmptyMesh(MedialCoverError):
    category = "empty_mesh"
    exit_code = 3


class EmptyPointCloud(MedialCoverError):
    category = "empty_point_cloud"
    exit_code = 3


class IoError(MedialCoverError):
    category = "io_error"
    exit_code = 2


class SamplingStalled(MedialCoverError):
    category = "sampling_stalled"
    exit_code = 4

    def __init__(self, trials: int, accepted: int):
        super().__init__(
            f"interior sampling stalled: {accepted} accepted out of {trials} trials"
        )
        self.trials = trials
        self.accepted = accepted

    def context(self) -> Dict[str, Any]:
        return {"trials": self.trials, "accepted": self.accepted}


class InvalidParameter(MedialCoverError):
    category = "invalid_parameter"
    exit_code = 2


class IndexOutOfRange(MedialCoverError):
    category = "index_out_of_range"
    exit_code = 2


class Infeasible(MedialCoverError):
    """Some required surface samples cannot be covered by any allowed candidate."""

    category = "infeasible"
    exit_code = 5

    def __init__(self, rows: Iterable[int], part: Optional[int] = None):
        self.rows = sorted(int(r) for r in rows)
        self.part = part
        shown = ", ".join(str(r) for r in self.rows[:10])
        more = "" if len(self.rows) <= 10 else f" (+{len(self.rows) - 10} more)"
        where = "" if part is None else f" in part {part}"
        super().__init__(f"{len(self.rows)} uncoverable required rows{where}: {shown}{more}")

    def context(self) -> Dict[str, Any]:
        return {"uncovered_rows": self.rows, "part": self.part}


class TooLarge(MedialCoverError):
    category = "too_large"
    exit_code = 2


class BadLabels(MedialCoverError):
    category = "bad_labels"
    exit_code = 2


class SelectionError(MedialCoverError):
    """A solver returned a selection that does not satisfy Dv >= B."""

    category = "internal_error"
    exit_code = 70
