from __future__ import annotations

from typing import Iterable, List

from ..errors import ParseError
from .mesh import read_lines, write_text


def read_index_file(path) -> List[int]:
    """One integer per line; blank lines and `#` comments are ignored."""
    values: List[int] = []
    for lineno, raw in enumerate(read_lines(path), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise ParseError(str(path), lineno, f"expected an integer, got {line!r}")
    return values


def write_index_file(path, values: Iterable[int]) -> None:
    write_text(path, [str(int(v)) for v in values])
