"""Shared fixtures for the test modules: tiny maps, the 8x8 desk suite, oracle caching."""

from __future__ import annotations

import functools
import itertools
from pathlib import Path

from tapf.grid import GridGraph, build_graph, parse_map, random_map
from tapf.instance import GeneratorConfig, TapfInstance, generate_instance
from tapf.verify import oracle_optimal_flowtime

DATA = Path(__file__).resolve().parents[1] / "src" / "tapf" / "data"


def grid_text(rows: list[str]) -> str:
    return f"type octile\nheight {len(rows)}\nwidth {len(rows[0])}\nmap\n" + "\n".join(rows) + "\n"


def graph_of(rows: list[str]) -> GridGraph:
    return build_graph(parse_map(grid_text(rows)))


def make_instance(rows: list[str], starts, targets, eligibility) -> TapfInstance:
    g = graph_of(rows)
    return TapfInstance(
        g,
        tuple(g.vertex(r, c) for r, c in starts),
        tuple(g.vertex(r, c) for r, c in targets),
        tuple(tuple(row) for row in eligibility),
    )


# The desk suite: 8x8 maps, N in {2,3,4}, K in {2,3}, p in {0,50,100}, 12 seeds per cell.
SUITE_AGENTS = (2, 3, 4)
SUITE_K = (2, 3)
SUITE_P = (0, 50, 100)
SUITE_SEEDS = 12
SUITE_W = (1.0, 1.1, 1.5, 2.0)


@functools.lru_cache(maxsize=None)
def _suite_map(seed: int):
    grid = random_map(8, 8, 0.15, seed)
    return grid, build_graph(grid)


@functools.lru_cache(maxsize=None)
def desk_suite() -> tuple[TapfInstance, ...]:
    out = []
    for idx, (n, k, p, s) in enumerate(itertools.product(SUITE_AGENTS, SUITE_K, SUITE_P, range(SUITE_SEEDS))):
        grid, graph = _suite_map(idx % 24)
        out.append(generate_instance(grid, GeneratorConfig(n, k, p, 1000 + idx), f"desk-{idx % 24}.map", graph))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def desk_oracle(index: int):
    return oracle_optimal_flowtime(desk_suite()[index])
