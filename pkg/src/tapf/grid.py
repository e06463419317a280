"""MovingAI grid maps and the 4-connected graph built from them."""

from __future__ import annotations

import random
import threading
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

PASSABLE = frozenset(".G")
BLOCKED = frozenset("@OTSW")

UNREACHABLE = -1


class MapParseError(ValueError):
    """Raised for malformed MovingAI map text; carries the 1-based line/column."""

    def __init__(self, message: str, line: int, column: int | None = None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class GridMap:
    """A rectangular map. ``cells`` holds row-major passability flags.

    ``tiles`` keeps the original characters so that a parsed file serializes
    back byte-for-byte.
    """

    width: int
    height: int
    cells: tuple[bool, ...]
    tiles: str = ""
    map_type: str = "octile"

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"map dimensions must be positive, got {self.width}x{self.height}")
        if len(self.cells) != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} cells, got {len(self.cells)}"
            )
        if not self.tiles:
            object.__setattr__(self, "tiles", "".join("." if c else "@" for c in self.cells))
        elif len(self.tiles) != len(self.cells):
            raise ValueError("tiles and cells differ in length")

    @property
    def passable_count(self) -> int:
        return sum(self.cells)

    def is_passable(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width and self.cells[row * self.width + col]

    @classmethod
    def from_rows(cls, rows: list[str], map_type: str = "octile") -> GridMap:
        text = "\n".join(
            [f"type {map_type}", f"height {len(rows)}", f"width {len(rows[0])}", "map", *rows]
        )
        return parse_map(text)


def _header_value(line: str, key: str, lineno: int) -> str:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise MapParseError(f"expected '{key} <value>', got {line!r}", lineno)
    return parts[1]


def parse_map(text: str) -> GridMap:
    lines = [ln.rstrip() for ln in text.splitlines()]
    if len(lines) < 4:
        raise MapParseError("truncated header", len(lines) + 1)
    map_type = _header_value(lines[0], "type", 1)
    dims = []
    for lineno, key in ((2, "height"), (3, "width")):
        value = _header_value(lines[lineno - 1], key, lineno)
        if not value.isdigit():
            raise MapParseError(f"{key} {value!r} is not a non-negative integer", lineno)
        dims.append(int(value))
    height, width = dims
    if height < 1 or width < 1:
        raise MapParseError(f"non-positive dimensions {height}x{width}", 2)
    if lines[3] != "map":
        raise MapParseError(f"expected 'map', got {lines[3]!r}", 4)

    body = lines[4:]
    while body and body[-1] == "":
        body.pop()
    if len(body) != height:
        raise MapParseError(f"expected {height} grid rows, found {len(body)}", 5 + min(len(body), height))
    cells: list[bool] = []
    for r, row in enumerate(body):
        lineno = 5 + r
        if len(row) != width:
            raise MapParseError(f"expected {width} characters, found {len(row)}", lineno)
        for c, ch in enumerate(row):
            if ch in PASSABLE:
                cells.append(True)
            elif ch in BLOCKED:
                cells.append(False)
            else:
                raise MapParseError(f"unknown cell character {ch!r}", lineno, c + 1)
    return GridMap(width, height, tuple(cells), "".join(body), map_type)


def serialize_map(grid: GridMap) -> str:
    rows = [grid.tiles[r * grid.width:(r + 1) * grid.width] for r in range(grid.height)]
    header = [f"type {grid.map_type}", f"height {grid.height}", f"width {grid.width}", "map"]
    return "\n".join(header + rows) + "\n"


def load_map(path: str | Path) -> GridMap:
    return parse_map(Path(path).read_text())


@dataclass(eq=False)
class GridGraph:
    """4-connected graph over the passable cells of a GridMap.

    Vertex ids are ``row * width + col``. Waiting in place is always allowed
    and is not stored in ``adjacency``.
    """

    grid: GridMap
    adjacency: tuple[tuple[int, ...], ...]
    vertices: tuple[int, ...]
    _distances: dict[int, list[int]] = field(default_factory=dict, repr=False)
    _free_paths: dict[tuple[int, int], tuple[int, ...] | None] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def width(self) -> int:
        return self.grid.width

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def coord(self, v: int) -> tuple[int, int]:
        return divmod(v, self.grid.width)

    def vertex(self, row: int, col: int) -> int:
        if not self.grid.is_passable(row, col):
            raise ValueError(f"cell ({row}, {col}) is not passable")
        return row * self.grid.width + col

    def is_vertex(self, v: int) -> bool:
        return 0 <= v < len(self.grid.cells) and self.grid.cells[v]

    def distances_to(self, goal: int) -> list[int]:
        """True distances from every cell to ``goal`` (UNREACHABLE if none).

        Computed once per goal by reverse BFS and cached.
        """
        table = self._distances.get(goal)
        if table is not None:
            return table
        with self._lock:
            table = self._distances.get(goal)
            if table is None:
                table = self._bfs(goal)
                self._distances[goal] = table
        return table

    def distance(self, a: int, b: int) -> int:
        return self.distances_to(b)[a]

    def free_path(self, start: int, goal: int) -> tuple[int, ...] | None:
        """A shortest path ignoring other agents: step to the lowest-id closer neighbor."""
        key = (start, goal)
        if key in self._free_paths:
            return self._free_paths[key]
        h = self.distances_to(goal)
        path = None
        if h[start] != UNREACHABLE:
            steps = [start]
            v = start
            while v != goal:
                v = min(u for u in self.adjacency[v] if h[u] == h[v] - 1)
                steps.append(v)
            path = tuple(steps)
        self._free_paths[key] = path
        return path

    def _bfs(self, source: int) -> list[int]:
        dist = [UNREACHABLE] * len(self.grid.cells)
        dist[source] = 0
        queue = deque([source])
        adj = self.adjacency
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for v in adj[u]:
                if dist[v] == UNREACHABLE:
                    dist[v] = du
                    queue.append(v)
        return dist

    def diameter(self) -> int:
        """Largest finite shortest-path distance (exact; one BFS per vertex)."""
        best = 0
        for v in self.vertices:
            best = max(best, max(self._bfs(v)))
        return best


def build_graph(grid: GridMap) -> GridGraph:
    w, h, cells = grid.width, grid.height, grid.cells
    adjacency: list[tuple[int, ...]] = []
    for v in range(w * h):
        if not cells[v]:
            adjacency.append(())
            continue
        r, c = divmod(v, w)
        nbrs = []
        if r > 0 and cells[v - w]:
            nbrs.append(v - w)
        if c > 0 and cells[v - 1]:
            nbrs.append(v - 1)
        if c + 1 < w and cells[v + 1]:
            nbrs.append(v + 1)
        if r + 1 < h and cells[v + w]:
            nbrs.append(v + w)
        adjacency.append(tuple(nbrs))
    vertices = tuple(v for v in range(w * h) if cells[v])
    return GridGraph(grid, tuple(adjacency), vertices)


def random_map(width: int, height: int, obstacle_ratio: float, seed: int) -> GridMap:
    """Random obstacles, then every cell outside the largest component is blocked.

    Keeps every pair of passable cells mutually reachable.
    """
    rng = random.Random(seed)
    total = width * height
    blocked = set(rng.sample(range(total), int(total * obstacle_ratio)))
    cells = [i not in blocked for i in range(total)]
    graph = build_graph(GridMap(width, height, tuple(cells)))
    seen: set[int] = set()
    best: list[int] = []
    for v in graph.vertices:
        if v in seen:
            continue
        comp = [u for u, d in enumerate(graph._bfs(v)) if d != UNREACHABLE]
        seen.update(comp)
        if len(comp) > len(best):
            best = comp
    keep = set(best)
    return GridMap(width, height, tuple(i in keep for i in range(total)))
