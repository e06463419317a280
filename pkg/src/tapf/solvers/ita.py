"""Single constraint-tree TAPF solvers: ITA-ECBS, ITA-ECBS-v0 and ITA-CBS.

Every CT node keeps two N x M matrices over (agent, target) pairs: ``ml``
holds lower bounds on the constrained path cost and ``mc`` the cost of the
path actually stored for that pair. The target assignment is the optimal
assignment of ``ml`` (of ``mc`` for ITA-CBS, where the two coincide), kept
warm in a HungarianState so a child only re-optimizes its one changed row.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from tapf.assignment import Assignment, HungarianState
from tapf.instance import TapfInstance
from tapf.lowlevel import (
    INF,
    ConflictTable,
    Constraint,
    ConstraintSet,
    Deadline,
    Path,
    SearchResult,
    SearchTimeout,
    as_fraction,
    focal_search,
    cost_bound,
    path_conflicts,
    path_violations,
    search_with_lb,
    shortest_path_search,
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

ITA_ECBS = "ita-ecbs"
ITA_ECBS_V0 = "ita-ecbs-v0"
ITA_CBS = "ita-cbs"

Heuristic = Callable[[Sequence[Path]], int]
NodeHook = Callable[["ItaNode", "ItaNode | None"], None]


@dataclass(eq=False)
class ItaNode:
    constraints: ConstraintSet
    ml: list[list[float]]
    mc: list[list[float]]
    mpaths: list[list[Path | None]]
    hungarian: HungarianState
    ta: Assignment
    paths: tuple[Path, ...] | None
    cost: float
    lb: float
    d: int = 0
    depth: int = 0
    closed: bool = False


def plan_from(ta: Assignment, ml: Sequence[Sequence[float]], mc: Sequence[Sequence[float]],
              mpaths: Sequence[Sequence[Path | None]]) -> tuple[tuple[Path, ...] | None, float, float]:
    """Paths, flowtime and selected-lower-bound sum for a target assignment."""
    if not ta.feasible:
        return None, INF, INF
    cost = lb = 0
    paths = []
    for i, j in enumerate(ta.cols):
        if mc[i][j] == INF:
            return None, INF, INF
        cost += mc[i][j]
        lb += ml[i][j]
        paths.append(mpaths[i][j])
    return tuple(paths), cost, lb


def make_node(constraints: ConstraintSet, ml: list[list[float]], mc: list[list[float]],
              mpaths: list[list[Path | None]], assign_from: str = "lb") -> ItaNode:
    """Build a node from scratch, assigning targets on ``ml`` ("lb") or ``mc`` ("cost")."""
    state = HungarianState(ml if assign_from == "lb" else mc)
    ta = state.assignment
    paths, cost, lb = plan_from(ta, ml, mc, mpaths)
    return ItaNode(constraints, ml, mc, mpaths, state, ta, paths, cost, lb)


class _ItaSearch:
    def __init__(self, instance: TapfInstance, w: float | Fraction, mode: str,
                 heuristic: Heuristic | None, deadline: Deadline, on_node: NodeHook | None):
        if mode not in (ITA_ECBS, ITA_ECBS_V0, ITA_CBS):
            raise ValueError(f"unknown solver {mode!r}")
        self.inst = instance
        self.graph = instance.graph
        self.mode = mode
        self.w = Fraction(1) if mode == ITA_CBS else as_fraction(w)
        if self.w < 1:
            raise ValueError("suboptimality factor must be >= 1")
        self.heuristic = heuristic or count_collisions
        self.deadline = deadline
        self.on_node = on_node
        self.stats = SolverStats()
        self.assign_from = "cost" if mode == ITA_CBS else "lb"

    def _shortest(self, agent: int, target: int, constraints: ConstraintSet) -> SearchResult:
        self.stats.lowlevel_calls += 1
        with self.stats.timing("time_lowlevel"):
            return shortest_path_search(self.graph, self.inst.starts[agent], self.inst.targets[target],
                                        constraints, agent, self.deadline)

    def _bounded(self, agent: int, target: int, constraints: ConstraintSet, context: ConflictTable | None,
                 c_opt: float) -> SearchResult:
        self.stats.lowlevel_calls += 1
        with self.stats.timing("time_lowlevel"):
            return search_with_lb(self.graph, self.inst.starts[agent], self.inst.targets[target],
                                  constraints, agent, self.w, c_opt, context, self.deadline)

    def low_level(self, agent: int, target: int, constraints: ConstraintSet,
                  context: ConflictTable | None, known_opt: float | None = None,
                  reusable: Path | None = None) -> SearchResult:
        """One (agent, target) entry: returns the M_L value, the M_c cost and the path.

        ``known_opt`` is the constrained optimum when the caller already knows
        it. ``reusable`` is a stored path that still satisfies the constraints.
        """
        if self.mode == ITA_ECBS_V0:
            self.stats.lowlevel_calls += 1
            with self.stats.timing("time_lowlevel"):
                return focal_search(self.graph, self.inst.starts[agent], self.inst.targets[target],
                                    constraints, agent, self.w, context, self.deadline)
        if known_opt is None:
            opt = self._shortest(agent, target, constraints)
            if self.mode == ITA_CBS or not opt.found:
                return opt
            if context is None and not constraints.for_agent(agent):
                # Nothing to avoid: the shortest path is already the min-conflict one.
                return opt
            known_opt = opt.cost
        if reusable is not None and len(reusable) - 1 <= cost_bound(self.w, known_opt):
            if path_conflicts(reusable, context) == 0:
                # No path has fewer than zero conflicts, so this one is already a best answer.
                return SearchResult(known_opt, len(reusable) - 1, reusable)
        return self._bounded(agent, target, constraints, context, known_opt)

    def root(self) -> ItaNode:
        n, m = self.inst.num_agents, self.inst.num_targets
        empty = ConstraintSet()
        ml = [[INF] * m for _ in range(n)]
        mc = [[INF] * m for _ in range(n)]
        mpaths: list[list[Path | None]] = [[None] * m for _ in range(n)]
        for i in range(n):
            for j in self.inst.target_set(i):
                res = self.low_level(i, j, empty, None)
                ml[i][j], mc[i][j], mpaths[i][j] = res.lb, res.cost, res.path
        with self.stats.timing("time_assignment"):
            node = make_node(empty, ml, mc, mpaths, self.assign_from)
        self._finish(node)
        if self.on_node is not None:
            self.on_node(node, None)
        return node

    def _finish(self, node: ItaNode) -> None:
        self.stats.nodes_generated += 1
        if node.paths is not None:
            with self.stats.timing("time_heuristic"):
                node.d = self.heuristic(node.paths)

    def child(self, parent: ItaNode, constraint: Constraint) -> ItaNode:
        k = constraint.agent
        st = self.stats
        t0 = time.perf_counter()
        low0, asg0 = st.time_lowlevel, st.time_assignment
        constraints = parent.constraints.add(constraint)
        context = ConflictTable(p for i, p in enumerate(parent.paths) if i != k)
        ml_row, mc_row, p_row = list(parent.ml[k]), list(parent.mc[k]), list(parent.mpaths[k])
        for x in self.inst.target_set(k):
            if p_row[x] is None:
                # Unreachable under fewer constraints stays unreachable.
                continue
            if self.mode == ITA_CBS and not path_violations(p_row[x], constraints, k):
                # A still-valid shortest path stays shortest under more constraints.
                continue
            known_opt = None
            still_valid = self.mode == ITA_ECBS and not path_violations(p_row[x], constraints, k)
            if still_valid and mc_row[x] == ml_row[x]:
                # The stored path is optimal and still allowed, so the optimum is unchanged.
                known_opt = ml_row[x]
            res = self.low_level(k, x, constraints, context, known_opt, p_row[x] if still_valid else None)
            lb = res.lb
            if self.mode == ITA_ECBS_V0 and res.found:
                # The parent's bound was valid under fewer constraints, so it still is.
                lb = max(lb, parent.ml[k][x])
            ml_row[x], mc_row[x], p_row[x] = lb, res.cost, res.path
        ml, mc, mpaths = list(parent.ml), list(parent.mc), list(parent.mpaths)
        ml[k], mc[k], mpaths[k] = ml_row, mc_row, p_row
        with st.timing("time_assignment"):
            state = parent.hungarian.copy()
            ta = state.update_row(k, ml_row if self.assign_from == "lb" else mc_row)
        paths, cost, lb = plan_from(ta, ml, mc, mpaths)
        node = ItaNode(constraints, ml, mc, mpaths, state, ta, paths, cost, lb, depth=parent.depth + 1)
        st.time_node_creation += (time.perf_counter() - t0) - (st.time_lowlevel - low0) - (
            st.time_assignment - asg0)
        self._finish(node)
        if self.on_node is not None:
            self.on_node(node, parent)
        return node

    def run(self, trace: bool) -> SolverOutcome:
        st = self.stats
        out = SolverOutcome(self.mode, float(self.w), NO_SOLUTION, stats=st)
        queue = FocalQueue(self.w)
        try:
            root = self.root()
            if root.cost < INF:
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
                    out.assignment = node.ta.cols
                    out.flowtime = node.cost
                    out.lower_bound = front
                    return out
                for constraint in collision.constraints():
                    child = self.child(node, constraint)
                    if child.cost < INF:
                        queue.push(child)
        except SearchTimeout:
            out.status = TIMEOUT
            return out
        finally:
            st.runtime = time.perf_counter() - self.deadline.start


def _solve(instance: TapfInstance, w: float | Fraction, mode: str, heuristic: Heuristic | None,
           time_limit: float | None, on_node: NodeHook | None, trace: bool) -> SolverOutcome:
    search = _ItaSearch(instance, w, mode, heuristic, Deadline(time_limit), on_node)
    return search.run(trace)


def solve_ita_ecbs(instance: TapfInstance, w: float | Fraction, heuristic: Heuristic | None = None,
                   time_limit: float | None = None, on_node: NodeHook | None = None,
                   trace: bool = False) -> SolverOutcome:
    """ITA-ECBS: exact shortest-path costs as lower bounds, then a bounded min-conflict path."""
    return _solve(instance, w, ITA_ECBS, heuristic, time_limit, on_node, trace)


def solve_ita_ecbs_v0(instance: TapfInstance, w: float | Fraction, heuristic: Heuristic | None = None,
                      time_limit: float | None = None, on_node: NodeHook | None = None,
                      trace: bool = False) -> SolverOutcome:
    """ITA-ECBS-v0: one focal search per (agent, target) gives both bound and path."""
    return _solve(instance, w, ITA_ECBS_V0, heuristic, time_limit, on_node, trace)


def solve_ita_cbs(instance: TapfInstance, time_limit: float | None = None,
                  heuristic: Heuristic | None = None, on_node: NodeHook | None = None,
                  trace: bool = False) -> SolverOutcome:
    """Optimal ITA-CBS; OPEN is ordered by flowtime, ties broken by collision count."""
    return _solve(instance, 1, ITA_CBS, heuristic, time_limit, on_node, trace)
