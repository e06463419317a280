"""Solution file I/O.

Layout::

    flowtime F
    lowerbound L
    agent i target j cost T
    r c            (T + 1 lines, one per timestep)
    ...
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from tapf.grid import GridGraph


class SolutionFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Solution:
    flowtime: int
    lower_bound: int
    assignment: tuple[int, ...]
    paths: tuple[tuple[int, ...], ...]


def format_solution(graph: GridGraph, paths: Sequence[Sequence[int]], assignment: Sequence[int],
                    flowtime: int, lower_bound: int) -> str:
    lines = [f"flowtime {flowtime}", f"lowerbound {lower_bound}"]
    for i, (p, j) in enumerate(zip(paths, assignment)):
        lines.append(f"agent {i} target {j} cost {len(p) - 1}")
        lines += ["{} {}".format(*graph.coord(v)) for v in p]
    return "\n".join(lines) + "\n"


def write_solution(path: str | Path, graph: GridGraph, paths, assignment, flowtime, lower_bound) -> None:
    Path(path).write_text(format_solution(graph, paths, assignment, flowtime, lower_bound))


def parse_solution(text: str, graph: GridGraph) -> Solution:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    pos = 0

    def take(keyword: str, arity: int) -> list[int]:
        nonlocal pos
        if pos >= len(lines):
            raise SolutionFormatError(f"expected '{keyword}' but the file ended")
        parts = lines[pos]
        if len(parts) != arity or parts[0] != keyword or (keyword == "agent" and parts[2:5:2] != ["target", "cost"]):
            raise SolutionFormatError(f"line {pos + 1}: expected '{keyword}'")
        pos += 1
        try:
            return [int(x) for x in parts[1::2]] if keyword == "agent" else [int(parts[1])]
        except ValueError as exc:
            raise SolutionFormatError(f"line {pos}: {exc}") from exc

    (flowtime,) = take("flowtime", 2)
    (lower,) = take("lowerbound", 2)
    assignment, paths = [], []
    while pos < len(lines):
        agent, target, cost = take("agent", 6)
        if agent != len(paths):
            raise SolutionFormatError(f"line {pos}: agents out of order")
        steps = []
        for _ in range(cost + 1):
            if pos >= len(lines) or len(lines[pos]) != 2:
                raise SolutionFormatError(f"line {pos + 1}: expected 'r c'")
            try:
                steps.append(graph.vertex(*(int(x) for x in lines[pos])))
            except ValueError as exc:
                raise SolutionFormatError(f"line {pos + 1}: {exc}") from exc
            pos += 1
        assignment.append(target)
        paths.append(tuple(steps))
    return Solution(flowtime, lower, tuple(assignment), tuple(paths))


def read_solution(path: str | Path, graph: GridGraph) -> Solution:
    return parse_solution(Path(path).read_text(), graph)
