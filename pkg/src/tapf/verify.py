"""Solution checking and an exact, exhaustive TAPF solver for small instances."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Sequence

from tapf.grid import UNREACHABLE
from tapf.instance import TapfInstance
from tapf.lowlevel import ConstraintSet, path_violations

# Oracle statuses.
ORACLE_SOLVED = "solved"
ORACLE_UNSOLVABLE = "unsolvable"
ORACLE_CAPPED = "capped"


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    agents: tuple[int, ...] = ()
    t: int | None = None


@dataclass
class Verdict:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def _at(path: Sequence[int], t: int) -> int:
    return path[t] if t < len(path) else path[-1]


def verify_solution(instance: TapfInstance, paths: Sequence[Sequence[int]], assignment: Sequence[int],
                    constraints: ConstraintSet | None = None) -> Verdict:
    """Check a joint plan against the instance; every problem found is reported."""
    verdict = Verdict()
    bad = verdict.violations.append
    n = instance.num_agents
    graph = instance.graph
    if len(paths) != n or len(assignment) != n:
        bad(Violation("shape", f"expected {n} paths and targets, got {len(paths)} and {len(assignment)}"))
        return verdict
    for i, p in enumerate(paths):
        if not p:
            bad(Violation("empty-path", f"agent {i} has an empty path", (i,)))
    if not verdict.ok:
        return verdict

    seen: dict[int, int] = {}
    for i, (p, j) in enumerate(zip(paths, assignment)):
        if p[0] != instance.starts[i]:
            bad(Violation("wrong-start", f"agent {i} starts at {p[0]}, not {instance.starts[i]}", (i,), 0))
        if not 0 <= j < instance.num_targets:
            bad(Violation("bad-target", f"agent {i} claims target index {j}", (i,)))
            continue
        if not instance.eligibility[i][j]:
            bad(Violation("ineligible-target", f"agent {i} is not eligible for target {j}", (i,)))
        if p[-1] != instance.targets[j]:
            bad(Violation("wrong-end", f"agent {i} ends at {p[-1]}, not target {j}", (i,), len(p) - 1))
        if j in seen:
            bad(Violation("duplicate-target", f"agents {seen[j]} and {i} share target {j}", (seen[j], i)))
        else:
            seen[j] = i
        for t, v in enumerate(p):
            if not graph.is_vertex(v):
                bad(Violation("blocked-cell", f"agent {i} is on a non-vertex {v}", (i,), t))
            elif t > 0 and v != p[t - 1] and v not in graph.adjacency[p[t - 1]]:
                bad(Violation("discontinuous", f"agent {i} jumps {p[t - 1]} -> {v}", (i,), t))
        if constraints is not None:
            for c in path_violations(p, constraints, i):
                bad(Violation("constraint", f"agent {i} breaks {c}", (i,), c.time))

    horizon = max(len(p) for p in paths) - 1
    for t in range(horizon + 1):
        where: dict[int, int] = {}
        for i, p in enumerate(paths):
            v = _at(p, t)
            if v in where:
                bad(Violation("vertex-collision", f"agents {where[v]} and {i} at {v}", (where[v], i), t))
            else:
                where[v] = i
        if t == horizon:
            break
        moves: dict[tuple[int, int], int] = {}
        for i, p in enumerate(paths):
            a, b = _at(p, t), _at(p, t + 1)
            if a == b:
                continue
            j = moves.get((b, a))
            if j is not None:
                bad(Violation("edge-collision", f"agents {j} and {i} swap {b} <-> {a}", (j, i), t))
            moves[(a, b)] = i
    return verdict


def flowtime(paths: Sequence[Sequence[int]]) -> int:
    return sum(len(p) - 1 for p in paths)


# ---------------------------------------------------------------------------
# Exact oracle


@dataclass
class OracleResult:
    status: str
    flowtime: int | None = None
    paths: tuple[tuple[int, ...], ...] | None = None
    assignment: tuple[int, ...] | None = None
    expansions: int = 0

    @property
    def solved(self) -> bool:
        return self.status == ORACLE_SOLVED


def default_horizon_cap(instance: TapfInstance) -> int:
    return 4 * (instance.num_agents + instance.graph.diameter())


def _joint_search(instance: TapfInstance, goals: tuple[int, ...], dist: list[list[int]],
                  cost_cap: int, budget: int | None) -> tuple[int | None, tuple | None, bool, int]:
    """Uniform-cost (A*) search for one fixed assignment.

    Joint moves are decomposed agent by agent. A state is the stage (next agent
    to move), the positions at the start of the step, the already-chosen
    positions for agents before the stage, and done flags. An agent standing
    on its goal may "finish": it stays there for good and stops paying.
    Returns (cost, paths, pruned, expansions); ``pruned`` tells whether the
    cap cut anything, which is what separates "capped" from "unsolvable".
    """
    graph = instance.graph
    n = len(goals)
    starts = tuple(instance.starts)

    def h(pos: tuple[int, ...], done: int) -> int:
        return sum(dist[i][pos[i]] for i in range(n) if not done >> i & 1)

    start_key = (0, starts, (), 0)
    h0 = h(starts, 0)
    if h0 >= cost_cap:
        return None, None, True, 0
    best_g = {start_key: 0}
    parent: dict = {start_key: None}
    counter = itertools.count()
    heap = [(h0, 0, next(counter), start_key)]
    all_done = (1 << n) - 1
    pruned = False
    expansions = 0
    while heap:
        f, neg_g, _, key = heapq.heappop(heap)
        g = -neg_g
        if best_g.get(key, -1) != g:
            continue
        stage, old, new, done = key
        if done == all_done:
            return g, _rebuild(parent, key, n), pruned, expansions
        expansions += 1
        if budget is not None and expansions > budget:
            return None, None, True, expansions
        k = stage
        here = old[k]
        options: list[tuple[int, int, int]] = []  # (next vertex, added cost, new done mask)
        if done >> k & 1:
            options.append((here, 0, done))
        else:
            if here == goals[k]:
                options.append((here, 0, done | 1 << k))
            for q in (here, *graph.adjacency[here]):
                if dist[k][q] != UNREACHABLE:
                    options.append((q, 1, done))
        for q, step, nd in options:
            ok = True
            for j in range(k):
                if new[j] == q or (new[j] == here and old[j] == q and q != here):
                    ok = False
                    break
            if ok:
                for j in range(k + 1, n):
                    if done >> j & 1 and old[j] == q:
                        ok = False
                        break
            if not ok:
                continue
            new2 = new + (q,)
            if k + 1 == n:
                nkey = (0, new2, (), nd)
                pos = new2
            else:
                nkey = (k + 1, old, new2, nd)
                pos = new2 + old[k + 1:]
            ng = g + step
            nf = ng + h(pos, nd)
            if nf >= cost_cap:
                pruned = True
                continue
            if ng < best_g.get(nkey, cost_cap):
                best_g[nkey] = ng
                parent[nkey] = key
                heapq.heappush(heap, (nf, -ng, next(counter), nkey))
    return None, None, pruned, expansions


def _rebuild(parent: dict, key, n: int) -> tuple[tuple[int, ...], ...]:
    chain = []
    while key is not None:
        if key[0] == 0:
            chain.append(key)
        key = parent[key]
    chain.reverse()
    paths: list[list[int]] = [[p] for p in chain[0][1]]
    for _, pos, _, done in chain[1:]:
        for i in range(n):
            # The finishing step is a free wait; nothing after it is part of the path.
            if not done >> i & 1:
                paths[i].append(pos[i])
    return tuple(tuple(p) for p in paths)


def _eligible_assignments(instance: TapfInstance, dist_rows: list[list[int]]):
    """All eligible injective assignments with their distance-sum lower bound, cheapest first."""
    n = instance.num_agents
    options = []
    for i in range(n):
        row = []
        for j in instance.target_set(i):
            d = dist_rows[j][instance.starts[i]]
            if d != UNREACHABLE:
                row.append((d, j))
        row.sort()
        options.append(row)
    out = []

    def rec(i: int, used: set[int], acc: int, cols: list[int]) -> None:
        if i == n:
            out.append((acc, tuple(cols)))
            return
        for d, j in options[i]:
            if j not in used:
                used.add(j)
                cols.append(j)
                rec(i + 1, used, acc + d, cols)
                cols.pop()
                used.discard(j)

    rec(0, set(), 0, [])
    out.sort()
    return out


def oracle_optimal_flowtime(instance: TapfInstance, horizon_cap: int | None = None,
                            expansion_budget: int | None = None) -> OracleResult:
    """Exact minimum flowtime by trying every eligible assignment with a joint search.

    Plans are searched with flowtime below ``N * horizon_cap``; this admits
    every plan whose makespan is within the cap. Assignments are visited in
    order of their distance-sum lower bound, which lets the search stop once
    no remaining assignment can beat the incumbent.
    """
    cap = default_horizon_cap(instance) if horizon_cap is None else horizon_cap
    n = instance.num_agents
    graph = instance.graph
    dist_rows = [graph.distances_to(g) for g in instance.targets]
    cost_cap = n * cap + 1
    best: int | None = None
    best_paths = best_cols = None
    any_pruned = False
    expansions = 0
    for lb, cols in _eligible_assignments(instance, dist_rows):
        limit = cost_cap if best is None else best
        if lb >= limit:
            if best is None:
                any_pruned = True
            break
        dist = [dist_rows[j] for j in cols]
        goals = tuple(instance.targets[j] for j in cols)
        cost, paths, pruned, used = _joint_search(instance, goals, dist, limit, expansion_budget)
        expansions += used
        if cost is not None:
            best, best_paths, best_cols = cost, paths, cols
        elif pruned and best is None:
            any_pruned = True
    if best is not None:
        return OracleResult(ORACLE_SOLVED, best, best_paths, best_cols, expansions)
    return OracleResult(ORACLE_CAPPED if any_pruned else ORACLE_UNSOLVABLE, expansions=expansions)
