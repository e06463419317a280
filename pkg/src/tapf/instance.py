"""TAPF instances: file format and the random benchmark generator."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from tapf.grid import GridGraph, GridMap, build_graph, load_map


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class TapfInstance:
    """Agents' starts, the target list and the binary eligibility matrix.

    ``starts`` and ``targets`` are vertex ids of ``graph``; ``eligibility[i][j]``
    is 1 when agent ``i`` may be assigned target ``j``.
    """

    graph: GridGraph
    starts: tuple[int, ...]
    targets: tuple[int, ...]
    eligibility: tuple[tuple[int, ...], ...]
    map_path: str = ""
    meta: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        n, m = len(self.starts), len(self.targets)
        if n == 0:
            raise InstanceError("instance has no agents")
        if m < n:
            raise InstanceError(f"need at least as many targets as agents, got {m} < {n}")
        if len(set(self.starts)) != n:
            raise InstanceError("duplicate start location")
        if len(set(self.targets)) != m:
            raise InstanceError("duplicate target location")
        for kind, cells in (("start", self.starts), ("target", self.targets)):
            for v in cells:
                if not self.graph.is_vertex(v):
                    raise InstanceError(f"{kind} {self.graph.coord(v)} is not a passable cell")
        if len(self.eligibility) != n or any(len(row) != m for row in self.eligibility):
            raise InstanceError(f"eligibility matrix must be {n}x{m}")
        for i, row in enumerate(self.eligibility):
            if any(x not in (0, 1) for x in row):
                raise InstanceError(f"eligibility row {i} has non-binary entries")
            if not any(row):
                raise InstanceError(f"agent {i} has an empty target set")

    @property
    def num_agents(self) -> int:
        return len(self.starts)

    @property
    def num_targets(self) -> int:
        return len(self.targets)

    def target_set(self, agent: int) -> list[int]:
        return [j for j, a in enumerate(self.eligibility[agent]) if a]


@dataclass(frozen=True)
class GeneratorConfig:
    agent_count: int
    target_set_size: int
    shared_percentage: int
    random_seed: int = 0

    def __post_init__(self) -> None:
        if self.agent_count < 1:
            raise InstanceError("agent_count must be positive")
        if self.target_set_size < 1:
            raise InstanceError("target_set_size must be positive")
        if not 0 <= self.shared_percentage <= 100:
            raise InstanceError("shared_percentage must be within 0..100")
        requested = self.target_set_size * self.shared_percentage // 100
        if requested > 0 and self.shared_count == 0:
            raise InstanceError(
                f"target set of size {self.target_set_size} leaves no room for a unique "
                f"target with {self.shared_percentage}% shared"
            )

    @property
    def shared_count(self) -> int:
        # Round down, but always leave one unique target per agent.
        return min(self.target_set_size * self.shared_percentage // 100, self.target_set_size - 1)

    @property
    def unique_count(self) -> int:
        return self.target_set_size - self.shared_count

    @property
    def target_count(self) -> int:
        return self.shared_count + self.agent_count * self.unique_count


def generate_instance(grid: GridMap, cfg: GeneratorConfig, map_path: str = "",
                      graph: GridGraph | None = None) -> TapfInstance:
    """Random starts, a shared target pool common to every agent, then unique targets.

    Targets occupy columns ``[shared pool | agent 0's unique | agent 1's unique | ...]``.
    """
    graph = graph or build_graph(grid)
    cells = list(graph.vertices)
    n, m = cfg.agent_count, cfg.target_count
    if n > len(cells) or m > len(cells):
        raise InstanceError(
            f"map has {len(cells)} passable cells; need {n} starts and {m} distinct targets"
        )
    rng = random.Random(cfg.random_seed)
    starts = rng.sample(cells, n)
    targets = rng.sample(cells, m)
    s, u = cfg.shared_count, cfg.unique_count
    rows = []
    for i in range(n):
        row = [0] * m
        for j in range(s):
            row[j] = 1
        for j in range(s + i * u, s + (i + 1) * u):
            row[j] = 1
        rows.append(tuple(row))
    meta = {
        "agents": str(n),
        "targets-per-agent": str(cfg.target_set_size),
        "shared-pct": str(cfg.shared_percentage),
        "seed": str(cfg.random_seed),
    }
    return TapfInstance(graph, tuple(starts), tuple(targets), tuple(rows), map_path, meta)


def save_instance(inst: TapfInstance) -> str:
    coord = inst.graph.coord
    lines = [f"# {k}={v}" for k, v in inst.meta.items()]
    # "-" marks an instance that was never tied to a map file.
    lines.append(f"map {inst.map_path or '-'}")
    lines.append(f"agents {inst.num_agents} targets {inst.num_targets}")
    lines += ["start {} {}".format(*coord(v)) for v in inst.starts]
    lines += ["target {} {}".format(*coord(v)) for v in inst.targets]
    lines += [" ".join(map(str, row)) for row in inst.eligibility]
    return "\n".join(lines) + "\n"


def peek_map_path(text: str) -> str:
    for line in text.splitlines():
        parts = line.split("#", 1)[0].split()
        if len(parts) == 2 and parts[0] == "map":
            return parts[1]
    raise InstanceError("instance file has no 'map' line")


def load_instance(text: str, graph: GridGraph) -> TapfInstance:
    meta: dict[str, str] = {}
    body: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if raw.lstrip().startswith("#"):
            key, sep, value = raw.lstrip()[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        line = raw.split("#", 1)[0].strip()
        if line:
            body.append((lineno, line.split()))

    def fail(lineno: int, msg: str) -> InstanceError:
        return InstanceError(f"line {lineno}: {msg}")

    it = iter(body)
    try:
        lineno, parts = next(it)
        if parts[0] != "map" or len(parts) != 2:
            raise fail(lineno, "expected 'map <path>'")
        map_path = "" if parts[1] == "-" else parts[1]
        lineno, parts = next(it)
        if len(parts) != 4 or parts[0] != "agents" or parts[2] != "targets":
            raise fail(lineno, "expected 'agents N targets M'")
        n, m = int(parts[1]), int(parts[3])

        def cells(keyword: str, count: int) -> list[int]:
            out = []
            for _ in range(count):
                lineno, parts = next(it)
                if len(parts) != 3 or parts[0] != keyword:
                    raise fail(lineno, f"expected '{keyword} r c'")
                r, c = int(parts[1]), int(parts[2])
                if not graph.grid.is_passable(r, c):
                    raise fail(lineno, f"{keyword} ({r}, {c}) is not a passable cell")
                out.append(r * graph.width + c)
            return out

        starts = cells("start", n)
        targets = cells("target", m)
        rows = []
        for _ in range(n):
            lineno, parts = next(it)
            if len(parts) != m:
                raise fail(lineno, f"expected {m} eligibility entries")
            rows.append(tuple(int(x) for x in parts))
    except StopIteration:
        raise InstanceError("instance file ends early") from None
    except ValueError as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed number: {exc}") from exc
    extra = next(it, None)
    if extra is not None:
        raise fail(extra[0], "unexpected trailing content")
    return TapfInstance(graph, tuple(starts), tuple(targets), tuple(rows), map_path, meta)


def read_instance(path: str | Path, map_override: str | Path | None = None) -> TapfInstance:
    """Load an instance file, resolving its map relative to the file."""
    path = Path(path)
    text = path.read_text()
    if map_override:
        map_file = Path(map_override)
    else:
        ref = peek_map_path(text)
        if ref == "-":
            raise InstanceError(f"{path} does not name a map; pass one explicitly")
        map_file = path.parent / ref
    return load_instance(text, build_graph(load_map(map_file)))
