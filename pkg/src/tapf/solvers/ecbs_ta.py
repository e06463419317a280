"""ECBS-TA: ECBS over a lazily grown forest, one constraint tree per target assignment."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from tapf.assignment import INF as ASSIGN_INF
from tapf.assignment import KBestEnumerator
from tapf.grid import UNREACHABLE
from tapf.instance import TapfInstance
from tapf.lowlevel import (
    ConflictTable,
    Constraint,
    ConstraintSet,
    Deadline,
    Path,
    SearchTimeout,
    as_fraction,
    focal_search,
)
from tapf.solvers.common import (
    NO_SOLUTION,
    SOLVED,
    TIMEOUT,
    FocalQueue,
    SolverOutcome,
    SolverStats,
    count_collisions,
    first_collision,
)
from tapf.solvers.ita import Heuristic

ECBS_TA = "ecbs-ta"


@dataclass(eq=False)
class ForestNode:
    constraints: ConstraintSet
    targets: tuple[int, ...]
    paths: tuple[Path, ...]
    lbs: tuple[float, ...]
    cost: float
    lb: float
    root: bool
    d: int = 0
    closed: bool = False


class _EcbsTaSearch:
    def __init__(self, instance: TapfInstance, w: float | Fraction, heuristic: Heuristic | None,
                 deadline: Deadline):
        self.inst = instance
        self.graph = instance.graph
        self.w = as_fraction(w)
        if self.w < 1:
            raise ValueError("suboptimality factor must be >= 1")
        self.heuristic = heuristic or count_collisions
        self.deadline = deadline
        self.stats = SolverStats()

    def distance_matrix(self) -> list[list[float]]:
        """Unconstrained shortest-path costs; inf where ineligible or unreachable."""
        inst, g = self.inst, self.graph
        rows = []
        for i, s in enumerate(inst.starts):
            row = []
            for j, goal in enumerate(inst.targets):
                dist = g.distance(s, goal) if inst.eligibility[i][j] else UNREACHABLE
                row.append(ASSIGN_INF if dist == UNREACHABLE else dist)
            rows.append(row)
        return rows

    def plan(self, agent: int, target: int, constraints: ConstraintSet, context: ConflictTable):
        self.stats.lowlevel_calls += 1
        with self.stats.timing("time_lowlevel"):
            return focal_search(self.graph, self.inst.starts[agent], self.inst.targets[target],
                                constraints, agent, self.w, context, self.deadline)

    def make_root(self, targets: tuple[int, ...]) -> ForestNode | None:
        empty = ConstraintSet()
        context = ConflictTable()
        paths, lbs = [], []
        for i, j in enumerate(targets):
            res = self.plan(i, j, empty, context)
            if not res.found:
                return None
            context.add(res.path)
            paths.append(res.path)
            lbs.append(res.lb)
        node = ForestNode(empty, targets, tuple(paths), tuple(lbs), sum(len(p) - 1 for p in paths),
                          sum(lbs), root=True)
        self._finish(node)
        return node

    def _finish(self, node: ForestNode) -> None:
        self.stats.nodes_generated += 1
        with self.stats.timing("time_heuristic"):
            node.d = self.heuristic(node.paths)

    def child(self, parent: ForestNode, constraint: Constraint) -> ForestNode | None:
        k = constraint.agent
        t0 = time.perf_counter()
        low0 = self.stats.time_lowlevel
        constraints = parent.constraints.add(constraint)
        context = ConflictTable(p for i, p in enumerate(parent.paths) if i != k)
        res = self.plan(k, parent.targets[k], constraints, context)
        node = None
        if res.found:
            paths = list(parent.paths)
            lbs = list(parent.lbs)
            paths[k] = res.path
            # The parent's bound held under fewer constraints, so it still does.
            lbs[k] = max(res.lb, parent.lbs[k])
            node = ForestNode(constraints, parent.targets, tuple(paths), tuple(lbs),
                              parent.cost - (len(parent.paths[k]) - 1) + res.cost, sum(lbs), root=False)
        self.stats.time_node_creation += (time.perf_counter() - t0) - (self.stats.time_lowlevel - low0)
        if node is not None:
            self._finish(node)
        return node

    def run(self, trace: bool) -> SolverOutcome:
        st = self.stats
        out = SolverOutcome(ECBS_TA, float(self.w), NO_SOLUTION, stats=st)
        queue = FocalQueue(self.w)
        try:
            with st.timing("time_assignment"):
                enumerator = KBestEnumerator(self.distance_matrix(), self.deadline)
                first = enumerator.next()
            if first is None:
                return out
            root = self.make_root(first.cols)
            if root is not None:
                queue.push(root)
            while True:
                self.deadline.check()
                item = queue.pop()
                if item is None:
                    return out
                node, front = item
                st.nodes_expanded += 1
                if trace:
                    st.lb_trace.append(front)
                collision = first_collision(node.paths)
                if collision is None:
                    out.status = SOLVED
                    out.paths = node.paths
                    out.assignment = node.targets
                    out.flowtime = node.cost
                    out.lower_bound = front
                    return out
                if node.root:
                    with st.timing("time_assignment"):
                        nxt = enumerator.next()
                    if nxt is not None:
                        new_root = self.make_root(nxt.cols)
                        if new_root is not None:
                            queue.push(new_root)
                for constraint in collision.constraints():
                    child = self.child(node, constraint)
                    if child is not None:
                        queue.push(child)
        except SearchTimeout:
            out.status = TIMEOUT
            return out
        finally:
            st.runtime = time.perf_counter() - self.deadline.start


def solve_ecbs_ta(instance: TapfInstance, w: float | Fraction, heuristic: Heuristic | None = None,
                  time_limit: float | None = None, trace: bool = False) -> SolverOutcome:
    return _EcbsTaSearch(instance, w, heuristic, Deadline(time_limit)).run(trace)
