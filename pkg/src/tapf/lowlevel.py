"""Space-time single-agent search under CBS-style constraints.

Three searches share one state model: a state is ``(vertex, timestep)``, every
action (move or wait) costs 1, so ``g`` always equals the timestep. An agent
that stops rests at its goal forever, so a goal arrival at ``T`` is only
accepted when no vertex constraint on the goal exists at any ``t >= T``.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from tapf.grid import UNREACHABLE, GridGraph

INF = math.inf

Path = tuple[int, ...]


class SearchTimeout(Exception):
    pass


class Deadline:
    """Wall-clock budget shared by the high- and low-level searches."""

    def __init__(self, seconds: float | None):
        self.start = time.perf_counter()
        self.limit = None if seconds is None else self.start + seconds

    def expired(self) -> bool:
        return self.limit is not None and time.perf_counter() > self.limit

    def check(self) -> None:
        if self.expired():
            raise SearchTimeout


def as_fraction(w: float | Fraction | int) -> Fraction:
    """Exact value of a suboptimality factor; floats go through their repr so 1.1 is 11/10."""
    if isinstance(w, Fraction):
        return w
    if isinstance(w, int):
        return Fraction(w)
    return Fraction(repr(w))


def cost_bound(w: Fraction, lb: float) -> float:
    """Largest integer cost ``c`` with ``c <= w * lb``."""
    if lb == INF:
        return INF
    return math.floor(w * int(lb))


@dataclass(frozen=True)
class Constraint:
    """Vertex constraint when ``prev`` is None, else an edge constraint.

    The edge form forbids being at ``prev`` at ``time - 1`` and at ``vertex``
    at ``time``.
    """

    agent: int
    vertex: int
    time: int
    prev: int | None = None

    def __post_init__(self) -> None:
        if self.prev is None and self.time < 0:
            raise ValueError("vertex constraint needs time >= 0")
        if self.prev is not None and self.time < 1:
            raise ValueError("edge constraint needs time >= 1")

    @property
    def kind(self) -> str:
        return "vertex" if self.prev is None else "edge"


class _AgentTable:
    __slots__ = ("vertex", "edge", "latest", "goal_last")

    def __init__(self, constraints: Iterable[Constraint]):
        self.vertex: set[tuple[int, int]] = set()
        self.edge: set[tuple[int, int, int]] = set()
        self.goal_last: dict[int, int] = {}
        self.latest = 0
        for c in constraints:
            self.latest = max(self.latest, c.time)
            if c.prev is None:
                self.vertex.add((c.vertex, c.time))
                if c.time > self.goal_last.get(c.vertex, -1):
                    self.goal_last[c.vertex] = c.time
            else:
                self.edge.add((c.prev, c.vertex, c.time))


_EMPTY_TABLE = _AgentTable(())


class ConstraintSet:
    """Immutable collection of constraints, grouped by agent.

    ``add`` returns a new set; the per-agent lookup tables are built lazily.
    """

    __slots__ = ("_by_agent", "_tables")

    def __init__(self, constraints: Iterable[Constraint] = ()):
        by_agent: dict[int, tuple[Constraint, ...]] = {}
        for c in constraints:
            by_agent[c.agent] = by_agent.get(c.agent, ()) + (c,)
        self._by_agent = by_agent
        self._tables: dict[int, _AgentTable] = {}

    def add(self, c: Constraint) -> ConstraintSet:
        new = ConstraintSet()
        new._by_agent = dict(self._by_agent)
        new._by_agent[c.agent] = self._by_agent.get(c.agent, ()) + (c,)
        new._tables = {k: t for k, t in self._tables.items() if k != c.agent}
        return new

    def for_agent(self, agent: int) -> tuple[Constraint, ...]:
        return self._by_agent.get(agent, ())

    def table(self, agent: int) -> _AgentTable:
        tab = self._tables.get(agent)
        if tab is None:
            cs = self._by_agent.get(agent)
            tab = _AgentTable(cs) if cs else _EMPTY_TABLE
            self._tables[agent] = tab
        return tab

    def blocked_vertex(self, agent: int, v: int, t: int) -> bool:
        return (v, t) in self.table(agent).vertex

    def blocked_edge(self, agent: int, u: int, v: int, t: int) -> bool:
        return (u, v, t) in self.table(agent).edge

    def latest_time(self, agent: int) -> int:
        return self.table(agent).latest

    def __contains__(self, c: object) -> bool:
        return isinstance(c, Constraint) and c in self._by_agent.get(c.agent, ())

    def __iter__(self) -> Iterator[Constraint]:
        for cs in self._by_agent.values():
            yield from cs

    def __len__(self) -> int:
        return sum(len(cs) for cs in self._by_agent.values())


def path_violations(path: Sequence[int], constraints: ConstraintSet, agent: int) -> list[Constraint]:
    """Constraints of ``agent`` broken by ``path`` (resting at its end included)."""
    bad = []
    end = len(path) - 1
    for c in constraints.for_agent(agent):
        if c.prev is None:
            at = path[min(c.time, end)]
            if at == c.vertex:
                bad.append(c)
        elif c.time <= end and path[c.time - 1] == c.prev and path[c.time] == c.vertex:
            bad.append(c)
    return bad


class ConflictTable:
    """Counts conflicts of a candidate move against a fixed set of other paths.

    Other agents rest at their last vertex forever. ``table(v, prev, t)``
    gives the number of vertex and swap conflicts of moving ``prev -> v``
    arriving at ``t``; ``table.rest(v, t)`` the conflicts incurred by stopping
    at ``v`` from ``t`` on.
    """

    def __init__(self, paths: Iterable[Sequence[int] | None] = ()):
        self.occ: dict[tuple[int, int], int] = {}
        self.moves: dict[tuple[int, int, int], int] = {}
        self.rest_from: dict[int, list[int]] = {}
        self.visits: dict[int, list[int]] = {}
        for path in paths:
            if path:
                self.add(path)

    def add(self, path: Sequence[int]) -> None:
        end = len(path) - 1
        for t in range(end):
            v = path[t]
            self.occ[(v, t)] = self.occ.get((v, t), 0) + 1
            self.visits.setdefault(v, []).append(t)
            u = path[t + 1]
            if u != v:
                key = (v, u, t + 1)
                self.moves[key] = self.moves.get(key, 0) + 1
        self.rest_from.setdefault(path[end], []).append(end)

    def __call__(self, v: int, prev: int, t: int) -> int:
        n = self.occ.get((v, t), 0)
        rs = self.rest_from.get(v)
        if rs:
            n += sum(1 for s in rs if s <= t)
        if prev != v and self.moves:
            n += self.moves.get((v, prev, t), 0)
        return n

    def __bool__(self) -> bool:
        # Every added path registers where it rests.
        return bool(self.rest_from)

    def rest(self, v: int, t: int) -> int:
        n = len(self.rest_from.get(v, ()))
        for s in self.visits.get(v, ()):
            if s > t:
                n += 1
        return n


CollisionCounter = Callable[[int, int, int], int]


def path_conflicts(path: Sequence[int], counter: CollisionCounter | None) -> int:
    """The conflict count a low-level search would assign to ``path``."""
    if counter is None:
        return 0
    total = sum(counter(path[t], path[t - 1], t) for t in range(1, len(path)))
    rest = _rest_counter(counter)
    if rest is not None:
        total += rest(path[-1], len(path) - 1)
    return total


@dataclass(frozen=True)
class SearchResult:
    lb: float
    cost: float
    path: Path | None

    @property
    def found(self) -> bool:
        return self.path is not None


NO_PATH = SearchResult(INF, INF, None)

_CHECK_EVERY = 512


class _Node:
    __slots__ = ("v", "t", "d", "parent", "terminal", "closed", "dead", "in_focal")

    def __init__(self, v: int, t: int, d: int, parent: _Node | None, terminal: bool = False):
        self.v = v
        self.t = t
        self.d = d
        self.parent = parent
        self.terminal = terminal
        self.closed = False
        self.dead = False
        self.in_focal = False

    def path(self) -> Path:
        out = []
        node: _Node | None = self
        if self.terminal:
            node = self.parent
        while node is not None:
            out.append(node.v)
            node = node.parent
        return tuple(reversed(out))


def _unconstrained(graph: GridGraph, start: int, goal: int, constraints: ConstraintSet, agent: int,
                   counter: CollisionCounter | None = None) -> SearchResult | None:
    """Shortcut for an agent with no constraints and nobody to conflict with.

    The cached distance table then gives the exact cost, and walking down it
    yields a shortest path with zero conflicts. Returns None when the
    shortcut does not apply.
    """
    if constraints.for_agent(agent) or counter:
        return None
    path = graph.free_path(start, goal)
    if path is None:
        return NO_PATH
    return SearchResult(len(path) - 1, len(path) - 1, path)


def _horizon(graph: GridGraph, constraints: ConstraintSet, agent: int) -> int:
    return constraints.latest_time(agent) + graph.vertex_count


def shortest_path_search(graph: GridGraph, start: int, goal: int, constraints: ConstraintSet,
                         agent: int, deadline: Deadline | None = None) -> SearchResult:
    """Space-time A* returning a minimum-cost path that satisfies ``agent``'s constraints."""
    quick = _unconstrained(graph, start, goal, constraints, agent)
    if quick is not None:
        return quick
    h = graph.distances_to(goal)
    tab = constraints.table(agent)
    if h[start] == UNREACHABLE or (start, 0) in tab.vertex:
        return NO_PATH
    horizon = _horizon(graph, constraints, agent)
    goal_last = tab.goal_last.get(goal, -1)
    vblock, eblock, adj = tab.vertex, tab.edge, graph.adjacency

    parent: dict[tuple[int, int], int] = {(start, 0): -1}
    heap = [(h[start], 0, start)]
    pops = 0
    while heap:
        f, neg_t, v = heapq.heappop(heap)
        t = -neg_t
        if v == goal and t > goal_last:
            return SearchResult(t, t, _unwind(parent, v, t))
        pops += 1
        if deadline is not None and pops % _CHECK_EVERY == 0:
            deadline.check()
        t1 = t + 1
        if t1 > horizon:
            continue
        for u in (*adj[v], v):
            if (u, t1) in parent or (u, t1) in vblock or (v, u, t1) in eblock:
                continue
            hu = h[u]
            if hu == UNREACHABLE:
                continue
            parent[(u, t1)] = v
            heapq.heappush(heap, (t1 + hu, -t1, u))
    return NO_PATH


def _unwind(parent: dict[tuple[int, int], int], v: int, t: int) -> Path:
    out = [v]
    while t > 0:
        v = parent[(v, t)]
        t -= 1
        out.append(v)
    return tuple(reversed(out))


def _rest_counter(counter: CollisionCounter | None) -> Callable[[int, int], int] | None:
    return getattr(counter, "rest", None)


def focal_search(graph: GridGraph, start: int, goal: int, constraints: ConstraintSet, agent: int,
                 w: float | Fraction, collision_counter: CollisionCounter | None = None,
                 deadline: Deadline | None = None) -> SearchResult:
    """Bounded-suboptimal focal search.

    OPEN is ordered by ``f = g + h``; FOCAL holds the OPEN states with
    ``f <= w * f_min`` ordered by the accumulated conflict count. Returns the
    ``f_min`` at the moment the goal is extracted as the lower bound, so
    ``lb <= optimal cost <= cost <= w * lb``.
    """
    w = as_fraction(w)
    if w < 1:
        raise ValueError("suboptimality factor must be >= 1")
    quick = _unconstrained(graph, start, goal, constraints, agent, collision_counter)
    if quick is not None:
        return quick
    h = graph.distances_to(goal)
    tab = constraints.table(agent)
    if h[start] == UNREACHABLE or (start, 0) in tab.vertex:
        return NO_PATH
    horizon = _horizon(graph, constraints, agent)
    goal_last = tab.goal_last.get(goal, -1)
    vblock, eblock, adj = tab.vertex, tab.edge, graph.adjacency
    count = collision_counter
    rest = _rest_counter(count)

    buckets: dict[int, list[_Node]] = {}
    live: dict[int, int] = {}
    f_heap: list[int] = []
    focal: list[tuple[int, int, int, int, _Node]] = []
    best: dict[tuple[int, int, bool], _Node] = {}
    seq = 0
    bound = -1

    def push(node: _Node) -> None:
        nonlocal seq
        key = (node.v, node.t, node.terminal)
        old = best.get(key)
        f = node.t + h[node.v]
        if old is not None:
            if old.closed or old.d <= node.d:
                return
            old.dead = True
            live[f] -= 1
        best[key] = node
        bucket = buckets.get(f)
        if bucket is None:
            buckets[f] = bucket = []
            live[f] = 0
            heapq.heappush(f_heap, f)
        bucket.append(node)
        live[f] += 1
        if f <= bound:
            node.in_focal = True
            seq += 1
            heapq.heappush(focal, (node.d, f, -node.t, seq, node))

    def push_goal(parent: _Node, t: int) -> None:
        if t > goal_last:
            extra = rest(goal, t) if rest is not None else 0
            push(_Node(goal, t, parent.d + extra, parent, terminal=True))

    root = _Node(start, 0, 0, None)
    push(root)
    if start == goal:
        push_goal(root, 0)

    pops = 0
    while True:
        while f_heap and live[f_heap[0]] == 0:
            heapq.heappop(f_heap)
        if not f_heap:
            return NO_PATH
        f_min = f_heap[0]
        new_bound = math.floor(w * f_min)
        if new_bound > bound:
            for f in range(bound + 1, new_bound + 1):
                for node in buckets.get(f, ()):
                    if not node.in_focal and not node.dead and not node.closed:
                        node.in_focal = True
                        seq += 1
                        heapq.heappush(focal, (node.d, f, -node.t, seq, node))
            bound = new_bound
        node = heapq.heappop(focal)[-1]
        while node.dead or node.closed:
            node = heapq.heappop(focal)[-1]
        node.closed = True
        live[node.t + h[node.v]] -= 1
        if node.terminal:
            return SearchResult(f_min, node.t, node.path())
        pops += 1
        if deadline is not None and pops % _CHECK_EVERY == 0:
            deadline.check()
        v, t1 = node.v, node.t + 1
        if t1 > horizon:
            continue
        for u in (*adj[v], v):
            if h[u] == UNREACHABLE or (u, t1) in vblock or (v, u, t1) in eblock:
                continue
            old = best.get((u, t1, False))
            if old is not None and old.closed:
                continue
            d1 = node.d + (count(u, v, t1) if count is not None else 0)
            if old is not None and old.d <= d1:
                continue
            child = _Node(u, t1, d1, node)
            push(child)
            if u == goal:
                push_goal(child, t1)


def search_with_lb(graph: GridGraph, start: int, goal: int, constraints: ConstraintSet, agent: int,
                   w: float | Fraction, c_v: float, collision_counter: CollisionCounter | None = None,
                   deadline: Deadline | None = None) -> SearchResult:
    """Minimum-conflict path among those with cost ``<= w * c_v``.

    ``c_v`` must be the exact constrained shortest-path cost. There is no
    OPEN list: every candidate within the bound is in FOCAL, and candidates
    whose ``f`` exceeds the bound are discarded.
    """
    if c_v == INF:
        return NO_PATH
    w = as_fraction(w)
    quick = _unconstrained(graph, start, goal, constraints, agent, collision_counter)
    if quick is not None and quick.cost == c_v:
        return SearchResult(c_v, quick.cost, quick.path)
    bound = cost_bound(w, c_v)
    h = graph.distances_to(goal)
    tab = constraints.table(agent)
    if h[start] == UNREACHABLE or h[start] > bound or (start, 0) in tab.vertex:
        return NO_PATH
    goal_last = tab.goal_last.get(goal, -1)
    vblock, eblock, adj = tab.vertex, tab.edge, graph.adjacency
    count = collision_counter
    rest = _rest_counter(count)

    focal: list[tuple[int, int, int, int, _Node]] = []
    best: dict[tuple[int, int, bool], _Node] = {}
    seq = 0

    def push(node: _Node) -> None:
        nonlocal seq
        f = node.t + h[node.v]
        if f > bound:
            return
        key = (node.v, node.t, node.terminal)
        old = best.get(key)
        if old is not None:
            if old.closed or old.d <= node.d:
                return
            old.dead = True
        best[key] = node
        seq += 1
        heapq.heappush(focal, (node.d, f, -node.t, seq, node))

    def push_goal(parent: _Node, t: int) -> None:
        if t > goal_last:
            extra = rest(goal, t) if rest is not None else 0
            push(_Node(goal, t, parent.d + extra, parent, terminal=True))

    root = _Node(start, 0, 0, None)
    push(root)
    if start == goal:
        push_goal(root, 0)

    pops = 0
    while focal:
        node = heapq.heappop(focal)[-1]
        if node.dead or node.closed:
            continue
        node.closed = True
        if node.terminal:
            return SearchResult(c_v, node.t, node.path())
        pops += 1
        if deadline is not None and pops % _CHECK_EVERY == 0:
            deadline.check()
        v, t1 = node.v, node.t + 1
        for u in (*adj[v], v):
            hu = h[u]
            if hu == UNREACHABLE or t1 + hu > bound or (u, t1) in vblock or (v, u, t1) in eblock:
                continue
            old = best.get((u, t1, False))
            if old is not None and old.closed:
                continue
            d1 = node.d + (count(u, v, t1) if count is not None else 0)
            if old is not None and old.d <= d1:
                continue
            child = _Node(u, t1, d1, node)
            push(child)
            if u == goal:
                push_goal(child, t1)
    return NO_PATH
