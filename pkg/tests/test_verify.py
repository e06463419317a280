import heapq
import itertools
import random

from helpers import make_instance
from tapf.grid import random_map
from tapf.instance import GeneratorConfig, generate_instance
from tapf.lowlevel import Constraint, ConstraintSet
from tapf.verify import (
    ORACLE_CAPPED,
    ORACLE_SOLVED,
    ORACLE_UNSOLVABLE,
    flowtime,
    oracle_optimal_flowtime,
    verify_solution,
)


def joint_step_oracle(inst, cols):
    """Uniform-cost search over full joint moves for a fixed assignment.

    A state is (positions, finished flags). Each step every unfinished agent
    moves or waits and pays 1; an agent standing on its goal may finish for
    free and never moves again.
    """
    g = inst.graph
    goals = [inst.targets[j] for j in cols]
    n = inst.num_agents
    start = (tuple(inst.starts), (False,) * n)
    frontier = [(0, start)]
    seen = {}
    while frontier:
        cost, (pos, done) = heapq.heappop(frontier)
        if seen.get((pos, done), 1 << 60) < cost:
            continue
        if all(done):
            return cost
        # Free finishing of any subset of agents on their goals.
        can_finish = [i for i in range(n) if not done[i] and pos[i] == goals[i]]
        for r in range(1, len(can_finish) + 1):
            for group in itertools.combinations(can_finish, r):
                nd = tuple(d or i in group for i, d in enumerate(done))
                if cost < seen.get((pos, nd), 1 << 60):
                    seen[(pos, nd)] = cost
                    heapq.heappush(frontier, (cost, (pos, nd)))
        options = [(p,) if d else (p, *g.adjacency[p]) for p, d in zip(pos, done)]
        pay = sum(1 for d in done if not d)
        for nxt in itertools.product(*options):
            if len(set(nxt)) < n:
                continue
            if any(nxt[a] == pos[b] and nxt[b] == pos[a] and pos[a] != pos[b]
                   for a in range(n) for b in range(a + 1, n)):
                continue
            key = (nxt, done)
            if cost + pay < seen.get(key, 1 << 60) and cost + pay <= 40:
                seen[key] = cost + pay
                heapq.heappush(frontier, (cost + pay, key))
    return None


def brute_optimum(inst):
    best = None
    for cols in itertools.permutations(range(inst.num_targets), inst.num_agents):
        if not all(inst.eligibility[i][j] for i, j in enumerate(cols)):
            continue
        c = joint_step_oracle(inst, cols)
        if c is not None and (best is None or c < best):
            best = c
    return best


CORRIDOR5 = ["....."]


def test_single_agent_is_bfs_distance_to_nearest_target():
    inst = make_instance(["...", ".@.", "..."], [(0, 0)], [(2, 2), (0, 2), (2, 0)], [[1, 1, 0]])
    res = oracle_optimal_flowtime(inst)
    assert res.status == ORACLE_SOLVED and res.flowtime == 2
    assert res.assignment == (1,)


def test_disjoint_corridors_sum_distances():
    inst = make_instance(["....", "@@@@", "...."], [(0, 0), (2, 3)], [(0, 3), (2, 0)], [[1, 0], [0, 1]])
    assert oracle_optimal_flowtime(inst).flowtime == 6


def test_corridor_wait_gadget():
    # A 1x5 corridor with a side cell under its middle. Both agents want the
    # junction at t=1; agent 1 would rest in front of agent 0 if it went
    # first, so agent 1 waits one step and follows.
    inst = make_instance([".....", "@@.@@"], [(0, 1), (1, 2)], [(0, 4), (0, 3)], [[1, 0], [0, 1]])
    res = oracle_optimal_flowtime(inst)
    assert res.flowtime == 3 + 2 + 1
    assert brute_optimum(inst) == 6
    assert res.paths[1][:2] == (inst.starts[1], inst.starts[1])


def test_oracle_solution_verifies():
    inst = make_instance(["...", "...", "..."], [(0, 0), (0, 2), (2, 1)], [(2, 2), (2, 0), (0, 1)],
                         [[1, 1, 0], [1, 1, 1], [0, 1, 1]])
    res = oracle_optimal_flowtime(inst)
    assert res.solved
    assert verify_solution(inst, res.paths, res.assignment).ok
    assert flowtime(res.paths) == res.flowtime


def test_duplicate_target_detected():
    inst = make_instance(["...."], [(0, 0), (0, 3)], [(0, 1), (0, 2)], [[1, 1], [1, 1]])
    verdict = verify_solution(inst, [(0, 1), (3, 2)], [0, 0])
    assert "duplicate-target" in verdict.kinds()


def test_parking_on_another_target_collides_at_arrival():
    inst = make_instance(CORRIDOR5, [(0, 0), (0, 3)], [(0, 2), (0, 1)], [[1, 0], [0, 1]])
    # Agent 0 arrives at vertex 2 at t=2 and stays. Agent 1 walks through it at t=1 and t=2.
    paths = [(0, 1, 2), (3, 3, 2, 1)]
    verdict = verify_solution(inst, paths, [0, 1])
    hits = [v for v in verdict.violations if v.kind == "vertex-collision"]
    assert hits and hits[0].t == 2


def test_rest_collision_after_arrival():
    inst = make_instance(CORRIDOR5, [(0, 0), (0, 4)], [(0, 2), (0, 1)], [[1, 0], [0, 1]])
    # Agent 0 parks at vertex 2 from t=2; agent 1 crosses it at t=3.
    paths = [(0, 1, 2), (4, 4, 3, 2, 1)]
    verdict = verify_solution(inst, paths, [0, 1])
    assert any(v.kind == "vertex-collision" and v.t == 3 for v in verdict.violations)


def test_swap_detected():
    inst = make_instance(["..."], [(0, 0), (0, 1)], [(0, 1), (0, 0)], [[1, 0], [0, 1]])
    assert "edge-collision" in verify_solution(inst, [(0, 1), (1, 0)], [0, 1]).kinds()


def test_structural_violations():
    inst = make_instance(["..@", "..."], [(0, 0), (1, 2)], [(0, 1), (1, 0)], [[1, 0], [1, 1]])
    assert verify_solution(inst, [(0, 1)], [0]).kinds() == {"shape"}
    kinds = verify_solution(inst, [(1, 1), (5, 3)], [1, 0]).kinds()
    assert {"wrong-start", "ineligible-target", "wrong-end", "discontinuous"} <= kinds
    assert "blocked-cell" in verify_solution(inst, [(0, 2, 1), (5, 4, 3)], [0, 1]).kinds()
    assert "bad-target" in verify_solution(inst, [(0, 1), (5, 4, 3)], [0, 7]).kinds()
    cs = ConstraintSet([Constraint(0, 1, 1)])
    assert "constraint" in verify_solution(inst, [(0, 1), (5, 4, 3)], [0, 1], cs).kinds()
    assert verify_solution(inst, [(0, 1), (5, 4, 3)], [0, 1]).ok


def test_unsolvable_and_capped_are_distinct():
    walled = make_instance([".@."], [(0, 0)], [(0, 2)], [[1]])
    assert oracle_optimal_flowtime(walled).status == ORACLE_UNSOLVABLE
    far = make_instance(["......"], [(0, 0)], [(0, 5)], [[1]])
    assert oracle_optimal_flowtime(far, horizon_cap=2).status == ORACLE_CAPPED
    assert oracle_optimal_flowtime(far, horizon_cap=5).flowtime == 5


def test_deadlocked_corridor_is_unsolvable():
    # Two agents must pass each other in a dead-end corridor with no room to step aside.
    inst = make_instance(["..."], [(0, 0), (0, 2)], [(0, 2), (0, 0)], [[1, 0], [0, 1]])
    assert oracle_optimal_flowtime(inst).status in (ORACLE_UNSOLVABLE, ORACLE_CAPPED)
    assert brute_optimum(inst) is None


def test_oracle_matches_joint_step_search_on_tiny_instances():
    rng = random.Random(21)
    checked = 0
    for seed in range(40):
        grid = random_map(3, 3, 0.2, seed)
        n = rng.randint(2, 3)
        if grid.passable_count < n + 2:
            continue
        inst = generate_instance(grid, GeneratorConfig(n, 2, rng.choice([0, 50]), seed))
        res = oracle_optimal_flowtime(inst)
        expected = brute_optimum(inst)
        if expected is None:
            assert not res.solved
        else:
            assert res.flowtime == expected, seed
            assert verify_solution(inst, res.paths, res.assignment).ok
        checked += 1
    assert checked >= 20
