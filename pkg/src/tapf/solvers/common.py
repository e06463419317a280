"""Pieces shared by the constraint-tree solvers."""

from __future__ import annotations

import heapq
import itertools
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from tapf.lowlevel import INF, Constraint, Path, as_fraction, cost_bound

SOLVED = "solved"
NO_SOLUTION = "no-solution"
TIMEOUT = "timeout"


def position(path: Sequence[int], t: int) -> int:
    """Where an agent is at ``t``; it rests at its last vertex afterwards."""
    return path[t] if t < len(path) else path[-1]


@dataclass(frozen=True)
class Collision:
    """Vertex collision at ``t``, or a swap between ``t`` and ``t + 1``."""

    a1: int
    a2: int
    t: int
    kind: str
    vertex: int
    # For swaps: a1 moves vertex -> other, a2 moves other -> vertex.
    other: int = -1

    def constraints(self) -> list[Constraint]:
        if self.kind == "vertex":
            return [Constraint(self.a1, self.vertex, self.t), Constraint(self.a2, self.vertex, self.t)]
        return [
            Constraint(self.a1, self.other, self.t + 1, prev=self.vertex),
            Constraint(self.a2, self.vertex, self.t + 1, prev=self.other),
        ]


def _positions(paths: Sequence[Sequence[int]], t: int) -> list[int]:
    return [p[t] if t < len(p) else p[-1] for p in paths]


def first_collision(paths: Sequence[Sequence[int]]) -> Collision | None:
    """Earliest collision; vertex before swap at equal ``t``, then lowest agent pair."""
    horizon = max(len(p) for p in paths) - 1
    here = _positions(paths, 0)
    for t in range(horizon + 1):
        if len(set(here)) != len(here):
            first_at: dict[int, int] = {}
            best = None
            for i, v in enumerate(here):
                j = first_at.get(v)
                if j is None:
                    first_at[v] = i
                elif best is None or (j, i) < best[:2]:
                    best = (j, i, v)
            return Collision(best[0], best[1], t, "vertex", best[2])
        if t == horizon:
            break
        there = _positions(paths, t + 1)
        moves: dict[tuple[int, int], int] = {}
        best = None
        for i, (a, b) in enumerate(zip(here, there)):
            if a == b:
                continue
            j = moves.get((b, a))
            if j is not None and (best is None or (j, i) < best[:2]):
                best = (j, i, b, a)
            moves[(a, b)] = i
        if best is not None:
            j, i, b, a = best
            return Collision(j, i, t, "edge", b, a)
        here = there
    return None


def count_collisions(paths: Sequence[Sequence[int]]) -> int:
    """Number of (agent pair, timestep) vertex and swap collisions."""
    horizon = max(len(p) for p in paths) - 1
    total = 0
    here = _positions(paths, 0)
    for t in range(horizon + 1):
        if len(set(here)) != len(here):
            for k in Counter(here).values():
                total += k * (k - 1) // 2
        if t == horizon:
            break
        there = _positions(paths, t + 1)
        moves = Counter((a, b) for a, b in zip(here, there) if a != b)
        for (a, b), k in moves.items():
            if a < b:
                total += k * moves.get((b, a), 0)
        here = there
    return total


@dataclass
class SolverStats:
    nodes_generated: int = 0
    nodes_expanded: int = 0
    lowlevel_calls: int = 0
    runtime: float = 0.0
    time_assignment: float = 0.0
    time_lowlevel: float = 0.0
    time_node_creation: float = 0.0
    time_heuristic: float = 0.0
    lb_trace: list[float] = field(default_factory=list)

    @contextmanager
    def timing(self, bucket: str) -> Iterator[None]:
        t0 = time.perf_counter()
        try:
            yield
        finally:
            setattr(self, bucket, getattr(self, bucket) + time.perf_counter() - t0)


@dataclass
class SolverOutcome:
    solver: str
    w: float
    status: str
    paths: tuple[Path, ...] | None = None
    assignment: tuple[int, ...] | None = None
    flowtime: float = INF
    lower_bound: float = INF
    stats: SolverStats = field(default_factory=SolverStats)

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


class FocalQueue:
    """High-level OPEN/FOCAL pair.

    OPEN orders nodes by ``(lb, cost, insertion)``. FOCAL holds the OPEN nodes
    with ``cost <= w * front.lb`` ordered by ``(d, cost, insertion)``. Nodes
    need ``lb``, ``cost``, ``d`` and ``closed`` attributes. FOCAL is topped up
    lazily when the front bound grows and rebuilt if it ever shrinks.
    """

    def __init__(self, w: float | Fraction):
        self.w = as_fraction(w)
        self._open: list = []
        self._pending: list = []
        self._focal: list = []
        self._seq = itertools.count()
        self.bound: float | None = None

    def __len__(self) -> int:
        return sum(1 for e in self._open if not e[-1].closed)

    def push(self, node) -> None:
        seq = next(self._seq)
        node.closed = False
        heapq.heappush(self._open, (node.lb, node.cost, seq, node))
        if self.bound is not None and node.cost <= self.bound:
            heapq.heappush(self._focal, (node.d, node.cost, seq, node))
        else:
            heapq.heappush(self._pending, (node.cost, seq, node))

    def front_lb(self) -> float | None:
        while self._open and self._open[0][-1].closed:
            heapq.heappop(self._open)
        return self._open[0][0] if self._open else None

    def refresh(self) -> float | None:
        """Bring FOCAL in line with the current front; returns the front lb."""
        front = self.front_lb()
        if front is None:
            return None
        bound = cost_bound(self.w, front)
        if self.bound is not None and bound < self.bound:
            live = [e for e in self._open if not e[-1].closed]
            self._focal = [(n.d, n.cost, s, n) for _, _, s, n in live if n.cost <= bound]
            self._pending = [(n.cost, s, n) for _, _, s, n in live if n.cost > bound]
            heapq.heapify(self._focal)
            heapq.heapify(self._pending)
        else:
            while self._pending and self._pending[0][0] <= bound:
                _, seq, node = heapq.heappop(self._pending)
                if not node.closed:
                    heapq.heappush(self._focal, (node.d, node.cost, seq, node))
        self.bound = bound
        return front

    def admitted(self) -> list:
        return [e[-1] for e in sorted(self._focal) if not e[-1].closed]

    def pop(self) -> tuple[object, float] | None:
        front = self.refresh()
        if front is None:
            return None
        while True:
            node = heapq.heappop(self._focal)[-1]
            if not node.closed:
                node.closed = True
                return node, front
