"""ASCII grid maps for the four-rooms domain.

Format: one row per line, ``#`` wall, ``.`` normal, ``F`` frozen, ``G`` goal.
All lines must have the same length.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import InvalidInputError

WALL = "#"
NORMAL = "."
FROZEN = "F"
GOAL = "G"
CELL_CHARS = frozenset(WALL + NORMAL + FROZEN + GOAL)

DEFAULT_MAP_VERSION = 1


@dataclass(frozen=True)
class GridMap:
    rows: tuple[str, ...]

    def __post_init__(self):
        if not self.rows:
            raise InvalidInputError("empty map")
        width = len(self.rows[0])
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise InvalidInputError(f"row {i} has length {len(row)}, expected {width}")
            bad = set(row) - CELL_CHARS
            if bad:
                raise InvalidInputError(f"row {i} contains unknown cells {sorted(bad)}")
        goals = [(r, c) for r, row in enumerate(self.rows) for c, ch in enumerate(row) if ch == GOAL]
        if len(goals) != 1:
            raise InvalidInputError(f"map needs exactly one goal, found {len(goals)}")
        h = len(self.rows)
        border = self.rows[0] + self.rows[-1] + "".join(row[0] + row[-1] for row in self.rows)
        if set(border) != {WALL}:
            raise InvalidInputError("outer border must be entirely wall")
        if h < 3 or width < 3:
            raise InvalidInputError("map must be at least 3x3")
        self._check_connected()

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def goal(self) -> tuple[int, int]:
        for r, row in enumerate(self.rows):
            c = row.find(GOAL)
            if c >= 0:
                return r, c
        raise AssertionError("unreachable: goal validated at construction")

    def cell(self, r: int, c: int) -> str:
        return self.rows[r][c]

    def open_cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r, row in enumerate(self.rows) for c, ch in enumerate(row) if ch != WALL]

    def _check_connected(self) -> None:
        cells = self.open_cells()
        seen = {cells[0]}
        queue = deque([cells[0]])
        while queue:
            r, c = queue.popleft()
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if (nr, nc) not in seen and self.rows[nr][nc] != WALL:
                    seen.add((nr, nc))
                    queue.append((nr, nc))
        if len(seen) != len(cells):
            raise InvalidInputError(
                f"open cells are not mutually reachable ({len(seen)} of {len(cells)} connected)"
            )

    def render(self) -> str:
        return "\n".join(self.rows) + "\n"


def parse_map(text: str) -> GridMap:
    lines = [line.rstrip("\r") for line in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    return GridMap(tuple(lines))


def load_map(path: str | Path) -> GridMap:
    return parse_map(Path(path).read_text(encoding="utf-8"))


def default_map() -> GridMap:
    """The bundled 13x13 four-rooms layout (version ``DEFAULT_MAP_VERSION``).

    Goal in the south-east room; a frozen patch straddles the south hallway,
    so the route through the north-east room stays frozen-free.
    """
    text = resources.files("safeoc.envs").joinpath("maps/fourrooms.txt").read_text(encoding="utf-8")
    return parse_map(text)
