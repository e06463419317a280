"""``tapf`` command line: solve, generate and benchmark."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from tapf.grid import MapParseError, build_graph, load_map
from tapf.instance import GeneratorConfig, InstanceError, TapfInstance, generate_instance, read_instance, save_instance
from tapf.solution import format_solution
from tapf.solvers import ITA_CBS, SOLVER_NAMES, SolverOutcome, run_solver

EXIT_OK = 0
EXIT_NO_SOLUTION = 2
EXIT_TIMEOUT = 3
EXIT_USAGE = 64

DEFAULT_W_LIST = (1.00, 1.01, 1.02, 1.03, 1.04, 1.05, 1.10, 1.20)
DEFAULT_SEED_COUNT = 20

TIMING_FIELDS = ("runtime", "time_assignment", "time_lowlevel", "time_node_creation", "time_heuristic")


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    map: str
    agents: int
    targets_per_agent: str
    shared_pct: str
    seed: str
    solver: str
    w: float
    status: str
    runtime: float
    flowtime: str
    lower_bound: str
    nodes_generated: int
    nodes_expanded: int
    lowlevel_calls: int
    time_assignment: float
    time_lowlevel: float
    time_node_creation: float
    time_heuristic: float

    def row(self) -> list[str]:
        out = []
        for f in fields(self):
            x = getattr(self, f.name)
            out.append(f"{x:.6f}" if isinstance(x, float) and f.name != "w" else str(x))
        return out


RECORD_COLUMNS = [f.name for f in fields(RunRecord)]


def make_record(instance: TapfInstance, outcome: SolverOutcome, seed: str | int | None = None) -> RunRecord:
    meta = instance.meta
    st = outcome.stats
    k_sizes = {sum(row) for row in instance.eligibility}
    solved = outcome.solved
    return RunRecord(
        map=Path(instance.map_path).stem,
        agents=instance.num_agents,
        targets_per_agent=meta.get("targets-per-agent", str(k_sizes.pop()) if len(k_sizes) == 1 else ""),
        shared_pct=meta.get("shared-pct", ""),
        seed=str(seed) if seed is not None else meta.get("seed", ""),
        solver=outcome.solver,
        w=outcome.w,
        status=outcome.status,
        runtime=st.runtime,
        flowtime=str(outcome.flowtime) if solved else "",
        lower_bound=str(outcome.lower_bound) if solved else "",
        nodes_generated=st.nodes_generated,
        nodes_expanded=st.nodes_expanded,
        lowlevel_calls=st.lowlevel_calls,
        time_assignment=st.time_assignment,
        time_lowlevel=st.time_lowlevel,
        time_node_creation=st.time_node_creation,
        time_heuristic=st.time_heuristic,
    )


def records_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def success_rates(records: Sequence[RunRecord]) -> str:
    """Success rate and median runtime per (map, agents, shared_pct, w, solver).

    Unsolved runs count with their measured runtime, which is the timeout
    when the run was cut off.
    """
    groups: OrderedDict[tuple, list[RunRecord]] = OrderedDict()
    for rec in records:
        groups.setdefault((rec.map, rec.agents, rec.shared_pct, rec.w, rec.solver), []).append(rec)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["map", "agents", "shared_pct", "w", "solver", "runs", "solved", "success_rate",
                     "median_runtime"])
    for (m, n, p, w, solver), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2],
                                                                              kv[0][3], kv[0][4])):
        solved = sum(r.status == "solved" for r in recs)
        runtimes = sorted(r.runtime for r in recs)
        mid = len(runtimes) // 2
        median = runtimes[mid] if len(runtimes) % 2 else (runtimes[mid - 1] + runtimes[mid]) / 2
        writer.writerow([m, n, p, w, solver, len(recs), solved, f"{solved / len(recs):.4f}", f"{median:.6f}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x) or x <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _weight(text: str) -> float:
    x = _positive_float(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"w must be >= 1, got {text}")
    return x


def _w_list(text: str) -> list[float]:
    return [_weight(t) for t in text.split(",") if t.strip()]


def _solver_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    for name in names:
        if name not in SOLVER_NAMES:
            raise argparse.ArgumentTypeError(f"unknown solver {name!r}; choose from {', '.join(SOLVER_NAMES)}")
    return names


def _seed_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return range(a, b + 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tapf", description="Target assignment and path finding on grid maps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--map", help="map file (default: the one named in the instance)")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    p.add_argument("--w", type=_weight, default=1.0)
    p.add_argument("--timeout", type=_positive_float, default=30.0)
    p.add_argument("--output", help="solution file written when solved")
    p.add_argument("--seed", type=int, default=None, help="recorded in the run record")
    p.add_argument("--record", help="append the run record to this CSV instead of printing it")

    p = sub.add_parser("generate", help="generate a batch of random instances")
    p.add_argument("--map", required=True)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--targets-per-agent", type=int, required=True)
    p.add_argument("--shared-pct", type=int, required=True)
    p.add_argument("--seeds", type=_seed_range, default=range(DEFAULT_SEED_COUNT))
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("benchmark", help="run solvers over a batch of instances")
    p.add_argument("--batch", required=True, help="directory of .inst files")
    p.add_argument("--solvers", type=_solver_list, default=list(SOLVER_NAMES))
    p.add_argument("--w-list", type=_w_list, default=list(DEFAULT_W_LIST))
    p.add_argument("--timeout", type=_positive_float, default=30.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", required=True)
    p.add_argument("--summary", help="success-rate CSV (default: <csv stem>-summary.csv)")
    p.add_argument("--solutions", help="directory for solution files of solved runs")
    return parser


# ---------------------------------------------------------------------------
# commands


def _load(instance_path: str, map_path: str | None) -> TapfInstance:
    try:
        return read_instance(instance_path, map_path)
    except (OSError, MapParseError, InstanceError) as exc:
        raise UsageError(f"cannot load {instance_path}: {exc}") from exc


def _solution_text(inst: TapfInstance, out: SolverOutcome) -> str:
    return format_solution(inst.graph, out.paths, out.assignment, out.flowtime, out.lower_bound)


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load(args.instance, args.map)
    outcome = run_solver(args.solver, inst, args.w, time_limit=args.timeout)
    if outcome.solved and args.output:
        Path(args.output).write_text(_solution_text(inst, outcome))
    record = make_record(inst, outcome, args.seed)
    text = records_csv([record])
    if args.record:
        path = Path(args.record)
        exists = path.exists() and path.stat().st_size > 0
        with path.open("a") as fh:
            fh.write(text.split("\n", 1)[1] if exists else text)
    else:
        sys.stdout.write(text)
    if outcome.solved:
        return EXIT_OK
    return EXIT_TIMEOUT if outcome.status == "timeout" else EXIT_NO_SOLUTION


def instance_filename(map_path: str | Path, n: int, k: int, p: int, seed: int) -> str:
    return f"{Path(map_path).stem}-n{n}-k{k}-p{p}-s{seed}.inst"


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        grid = load_map(args.map)
    except (OSError, MapParseError) as exc:
        raise UsageError(f"cannot load map {args.map}: {exc}") from exc
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    # Instance files name their map relative to themselves.
    map_ref = Path(os.path.relpath(Path(args.map).resolve(), outdir.resolve()))
    graph = build_graph(grid)
    try:
        for seed in args.seeds:
            cfg = GeneratorConfig(args.agents, args.targets_per_agent, args.shared_pct, seed)
            inst = generate_instance(grid, cfg, map_ref.as_posix(), graph)
            name = instance_filename(args.map, args.agents, args.targets_per_agent, args.shared_pct, seed)
            (outdir / name).write_text(save_instance(inst))
    except InstanceError as exc:
        raise UsageError(str(exc)) from exc
    print(f"wrote {len(args.seeds)} instances to {outdir}")
    return EXIT_OK


def _error_record(path: str, solver: str, w: float) -> RunRecord:
    """Row for an instance file that could not be loaded."""
    return RunRecord(Path(path).stem, 0, "", "", "", solver, w, "error", 0.0, "", "", 0, 0, 0,
                     0.0, 0.0, 0.0, 0.0)


def _bench_instance(task: tuple[str, list[tuple[str, float]], float, str | None]) -> list[RunRecord]:
    path, runs, timeout, solution_dir = task
    try:
        inst = read_instance(path)
    except (OSError, MapParseError, InstanceError) as exc:
        print(f"tapf benchmark: skipping {path}: {exc}", file=sys.stderr)
        return [_error_record(path, solver, w) for solver, w in runs]
    out = []
    for solver, w in runs:
        outcome = run_solver(solver, inst, w, time_limit=timeout)
        if outcome.solved and solution_dir:
            name = f"{Path(path).stem}-{solver}-w{w:.2f}.sol"
            (Path(solution_dir) / name).write_text(_solution_text(inst, outcome))
        out.append(make_record(inst, outcome))
    return out


def cmd_benchmark(args: argparse.Namespace) -> int:
    batch = sorted(Path(args.batch).glob("*.inst"))
    if not batch:
        raise UsageError(f"no .inst files in {args.batch}")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    runs: list[tuple[str, float]] = []
    for solver in args.solvers:
        if solver == ITA_CBS:
            runs.append((solver, 1.0))
        else:
            runs += [(solver, w) for w in args.w_list]
    if args.solutions:
        Path(args.solutions).mkdir(parents=True, exist_ok=True)
    tasks = [(str(p), runs, args.timeout, args.solutions) for p in batch]
    records: list[RunRecord] = []
    if args.workers == 1:
        for task in tasks:
            records += _bench_instance(task)
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            # map() yields in submission order, so the CSV does not depend on scheduling.
            for recs in pool.map(_bench_instance, tasks):
                records += recs
    Path(args.csv).write_text(records_csv(records))
    summary = Path(args.summary) if args.summary else Path(args.csv).with_name(Path(args.csv).stem + "-summary.csv")
    summary.write_text(success_rates(records))
    solved = sum(r.status == "solved" for r in records)
    print(f"{len(records)} runs, {solved} solved; wrote {args.csv} and {summary}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "generate": cmd_generate, "benchmark": cmd_benchmark}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"tapf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
