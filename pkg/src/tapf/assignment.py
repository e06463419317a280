"""Rectangular min-cost assignment (rows = agents, columns = targets).

The Hungarian solver is a successive-shortest-path implementation with
explicit dual potentials, which is what lets a single changed row be
re-optimized in O(NM) without starting over.

Dual model. Rows carry ``u``, columns ``v``. Every unmatched column shares one
potential ``z`` (think of the M - N surplus columns as matched to identical
zero-cost dummy rows). The state always satisfies

* ``cost[i][k] - u[i] - pot(k) >= 0`` for every entry,
* equality on matched pairs,
* ``pot(k) <= z`` for every column,

which certifies optimality of the current matching.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

INF = math.inf

_HUB = -1
_BIG_FLOOR = 10**9


@dataclass(frozen=True)
class Assignment:
    """``cols[i]`` is the column of row ``i``; ``total_cost`` is inf when infeasible."""

    cols: tuple[int, ...]
    total_cost: float

    @property
    def feasible(self) -> bool:
        return self.total_cost != INF

    def pairs(self) -> list[tuple[int, int]]:
        return list(enumerate(self.cols))


def _finite_max(rows: Sequence[Sequence[float]]) -> int:
    best = 0
    for row in rows:
        for x in row:
            if x != INF and x > best:
                best = x
    return int(best)


class HungarianState:
    """Matching plus dual potentials for one cost matrix.

    Infinite entries are stored as a finite sentinel ``big`` chosen so that
    any assignment using one costs more than every all-finite assignment.
    Single-owner and mutable; use ``copy()`` before branching.
    """

    __slots__ = ("n", "m", "big", "raw", "cost", "u", "v", "z", "col_of", "row_of")

    def __init__(self, costs: Sequence[Sequence[float]]):
        n = len(costs)
        m = len(costs[0]) if n else 0
        if n > m:
            raise ValueError(f"assignment needs rows <= columns, got {n}x{m}")
        if any(len(row) != m for row in costs):
            raise ValueError("cost matrix rows differ in length")
        self.n, self.m = n, m
        self.raw = [tuple(row) for row in costs]
        self.big = max(_BIG_FLOOR, (n + 1) * (_finite_max(costs) + 1))
        self.cost = [self._encode(row) for row in self.raw]
        self.u = [0] * n
        self.v = [0] * m
        self.z = 0
        self.col_of = [-1] * n
        self.row_of = [-1] * m
        for r in range(n):
            self._augment(r)

    def _encode(self, row: Sequence[float]) -> list[int]:
        if any(x != INF and x < 0 for x in row):
            raise ValueError("costs must be non-negative")
        big = self.big
        return [big if x == INF else int(x) for x in row]

    def copy(self) -> HungarianState:
        new = object.__new__(HungarianState)
        new.n, new.m, new.big, new.z = self.n, self.m, self.big, self.z
        # Rows are replaced, never mutated, so sharing them is safe.
        new.raw = list(self.raw)
        new.cost = list(self.cost)
        new.u = list(self.u)
        new.v = list(self.v)
        new.col_of = list(self.col_of)
        new.row_of = list(self.row_of)
        return new

    @property
    def assignment(self) -> Assignment:
        total = 0
        for i, k in enumerate(self.col_of):
            x = self.raw[i][k]
            if x == INF:
                return Assignment(tuple(self.col_of), INF)
            total += x
        return Assignment(tuple(self.col_of), total)

    def pot(self, k: int) -> int:
        return self.v[k] if self.row_of[k] >= 0 else self.z

    def reduced_cost(self, i: int, k: int) -> int:
        return self.cost[i][k] - self.u[i] - self.pot(k)

    def check(self) -> None:
        """Assert dual feasibility and complementary slackness."""
        for i in range(self.n):
            k = self.col_of[i]
            assert k >= 0 and self.row_of[k] == i, f"row {i} is not matched"
            assert self.reduced_cost(i, k) == 0, f"matched pair ({i}, {k}) is not tight"
            for kk in range(self.m):
                assert self.reduced_cost(i, kk) >= 0, f"negative reduced cost at ({i}, {kk})"
        for k in range(self.m):
            assert self.pot(k) <= self.z, f"column {k} potential exceeds the free level"

    def update_row(self, row: int, new_costs: Sequence[float]) -> Assignment:
        if not 0 <= row < self.n:
            raise IndexError(f"row {row} out of range for {self.n} rows")
        if len(new_costs) != self.m:
            raise ValueError(f"expected {self.m} costs, got {len(new_costs)}")
        new_max = _finite_max([new_costs])
        self.raw[row] = tuple(new_costs)
        if (self.n + 1) * (new_max + 1) > self.big:
            # The sentinel no longer dominates; rebuild with a larger one.
            fresh = HungarianState(self.raw)
            for name in HungarianState.__slots__:
                setattr(self, name, getattr(fresh, name))
            return self.assignment
        self.cost[row] = self._encode(new_costs)
        k = self.col_of[row]
        self.col_of[row] = -1
        self.row_of[k] = -1
        self._augment(row, hole=k)
        return self.assignment

    def _augment(self, r: int, hole: int = -1) -> None:
        """Shortest augmenting path from free row ``r``.

        Without a hole the path ends at the first free column reached. With a
        hole (the column just vacated by ``r``, whose potential may sit below
        ``z``) the path must end at the hole; free columns are then entered
        through a dummy "hub" that can hand any column back to the surplus.
        """
        m, cost, u, v, row_of, col_of, z = self.m, self.cost, self.u, self.v, self.row_of, self.col_of, self.z
        pot = [v[k] if (row_of[k] >= 0 or k == hole) else z for k in range(m)]
        crow = cost[r]
        ur = min(crow[k] - pot[k] for k in range(m))
        u[r] = ur

        dist = [crow[k] - ur - pot[k] for k in range(m)]
        pred = [r] * m
        final = [False] * m
        heap = [(d, k) for k, d in enumerate(dist)]
        heapq.heapify(heap)
        finalized: list[int] = []
        hub_dist = None
        hub_entry = -1
        sink = -1
        while heap:
            d, k = heapq.heappop(heap)
            if final[k] or d > dist[k]:
                continue
            if row_of[k] < 0:
                if hole < 0 or k == hole:
                    sink = k
                    break
                if hub_dist is not None:
                    continue
                final[k] = True
                finalized.append(k)
                hub_dist, hub_entry = d, k
                for k2 in range(m):
                    if final[k2] or (row_of[k2] < 0 and k2 != hole):
                        continue
                    nd = d + z - pot[k2]
                    if nd < dist[k2]:
                        dist[k2] = nd
                        pred[k2] = _HUB
                        heapq.heappush(heap, (nd, k2))
                continue
            final[k] = True
            finalized.append(k)
            i = row_of[k]
            ci, ui = cost[i], u[i]
            for k2 in range(m):
                if final[k2]:
                    continue
                nd = d + ci[k2] - ui - pot[k2]
                if nd < dist[k2]:
                    dist[k2] = nd
                    pred[k2] = i
                    heapq.heappush(heap, (nd, k2))
        assert sink >= 0, "cost matrix is always feasible internally"

        big_d = dist[sink]
        for k in finalized:
            v[k] = pot[k] + dist[k] - big_d
        v[sink] = pot[sink]
        if hub_dist is not None:
            self.z = z + hub_dist - big_d

        k = sink
        while True:
            p = pred[k]
            if p == _HUB:
                row_of[k] = -1
                k = hub_entry
                continue
            prev = col_of[p]
            row_of[k] = p
            col_of[p] = k
            if p == r:
                break
            k = prev
        for i, k in enumerate(col_of):
            if k >= 0:
                u[i] = cost[i][k] - v[k]


def hungarian_solve(costs: Sequence[Sequence[float]]) -> tuple[Assignment, HungarianState]:
    state = HungarianState(costs)
    return state.assignment, state


def dynamic_hungarian_update(state: HungarianState, row: int,
                             new_costs: Sequence[float]) -> tuple[Assignment, HungarianState]:
    """Replace one row and re-optimize in place."""
    return state.update_row(row, new_costs), state


def brute_force_assignments(costs: Sequence[Sequence[float]]) -> list[Assignment]:
    """Every finite-cost injective assignment, sorted by cost (test oracle)."""
    n = len(costs)
    m = len(costs[0]) if n else 0
    out = []
    for cols in itertools.permutations(range(m), n):
        total = sum(costs[i][k] for i, k in enumerate(cols))
        if total != INF:
            out.append(Assignment(cols, total))
    out.sort(key=lambda a: a.total_cost)
    return out


class KBestEnumerator:
    """Murty's partitioning over assignments, each subproblem solved by SSP.

    Yields every finite-cost assignment exactly once in non-decreasing cost.
    """

    def __init__(self, costs: Sequence[Sequence[float]], deadline=None):
        self._costs = [tuple(row) for row in costs]
        # Anything with a ``check()`` that raises once time is up.
        self._deadline = deadline
        self._n = len(costs)
        self._heap: list = []
        self._seq = itertools.count()
        self._push({}, frozenset())

    def _push(self, forced: dict[int, int], forbidden: frozenset[tuple[int, int]]) -> None:
        if self._deadline is not None:
            self._deadline.check()
        # Only the unfixed rows and untaken columns form the subproblem.
        taken = set(forced.values())
        free_rows = [i for i in range(self._n) if i not in forced]
        free_cols = [k for k in range(len(self._costs[0])) if k not in taken] if self._n else []
        fixed_cost = sum(self._costs[i][k] for i, k in forced.items())
        cols = [0] * self._n
        for i, k in forced.items():
            cols[i] = k
        if free_rows:
            sub = [[INF if (i, k) in forbidden else self._costs[i][k] for k in free_cols] for i in free_rows]
            best, _ = hungarian_solve(sub)
            if not best.feasible:
                return
            for i, kk in zip(free_rows, best.cols):
                cols[i] = free_cols[kk]
            fixed_cost += best.total_cost
        if fixed_cost == INF:
            return
        heapq.heappush(self._heap, (fixed_cost, next(self._seq), Assignment(tuple(cols), fixed_cost),
                                    forced, forbidden))

    def next(self) -> Assignment | None:
        if not self._heap:
            return None
        _, _, best, forced, forbidden = heapq.heappop(self._heap)
        fixed = dict(forced)
        for i in range(self._n):
            if i in forced:
                continue
            self._push(dict(fixed), forbidden | {(i, best.cols[i])})
            fixed[i] = best.cols[i]
        return best

    def __iter__(self) -> Iterator[Assignment]:
        while (a := self.next()) is not None:
            yield a


def kbest_first(costs: Sequence[Sequence[float]]) -> tuple[Assignment | None, KBestEnumerator]:
    enumerator = KBestEnumerator(costs)
    return enumerator.next(), enumerator


def kbest_next(enumerator: KBestEnumerator) -> Assignment | None:
    return enumerator.next()
