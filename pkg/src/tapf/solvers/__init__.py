"""Constraint-tree TAPF solvers."""

from tapf.solvers.common import (
    NO_SOLUTION,
    SOLVED,
    TIMEOUT,
    Collision,
    FocalQueue,
    SolverOutcome,
    SolverStats,
    count_collisions,
    first_collision,
)
from tapf.solvers.ecbs_ta import ECBS_TA, solve_ecbs_ta
from tapf.solvers.ita import (
    ITA_CBS,
    ITA_ECBS,
    ITA_ECBS_V0,
    ItaNode,
    make_node,
    solve_ita_cbs,
    solve_ita_ecbs,
    solve_ita_ecbs_v0,
)

SOLVER_NAMES = (ITA_ECBS, ITA_ECBS_V0, ITA_CBS, ECBS_TA)


def node_heuristic_d(node) -> int:
    """Collision count of a node's joint plan (pairs x timesteps)."""
    paths = node if isinstance(node, (list, tuple)) else node.paths
    return count_collisions(paths)


def run_solver(name: str, instance, w=1, time_limit=None, trace=False) -> SolverOutcome:
    """Dispatch by solver name; ITA-CBS ignores ``w``."""
    if name == ITA_ECBS:
        return solve_ita_ecbs(instance, w, time_limit=time_limit, trace=trace)
    if name == ITA_ECBS_V0:
        return solve_ita_ecbs_v0(instance, w, time_limit=time_limit, trace=trace)
    if name == ITA_CBS:
        return solve_ita_cbs(instance, time_limit=time_limit, trace=trace)
    if name == ECBS_TA:
        return solve_ecbs_ta(instance, w, time_limit=time_limit, trace=trace)
    raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVER_NAMES)}")


__all__ = [
    "NO_SOLUTION", "SOLVED", "TIMEOUT", "Collision", "FocalQueue", "SolverOutcome", "SolverStats",
    "count_collisions", "first_collision", "ECBS_TA", "ITA_CBS", "ITA_ECBS", "ITA_ECBS_V0",
    "ItaNode", "make_node", "solve_ecbs_ta", "solve_ita_cbs", "solve_ita_ecbs", "solve_ita_ecbs_v0",
    "SOLVER_NAMES", "node_heuristic_d", "run_solver",
]
