import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DATA, graph_of, make_instance
from tapf.grid import build_graph, load_map
from tapf.instance import (
    GeneratorConfig,
    InstanceError,
    TapfInstance,
    generate_instance,
    load_instance,
    read_instance,
    save_instance,
)

EMPTY = load_map(DATA / "empty-32-32.map")
EMPTY_GRAPH = build_graph(EMPTY)


def _shared_and_unique(inst: TapfInstance):
    rows = [set(inst.target_set(i)) for i in range(inst.num_agents)]
    shared = set.intersection(*rows)
    return shared, [r - shared for r in rows]


def test_k5_p60_split():
    cfg = GeneratorConfig(4, 5, 60, random_seed=3)
    assert (cfg.shared_count, cfg.unique_count) == (3, 2)
    inst = generate_instance(EMPTY, cfg, graph=EMPTY_GRAPH)
    shared, unique = _shared_and_unique(inst)
    assert len(shared) == 3
    assert all(len(u) == 2 for u in unique)


def test_k5_p0_disjoint_sets():
    inst = generate_instance(EMPTY, GeneratorConfig(6, 5, 0, 1), graph=EMPTY_GRAPH)
    sets = [set(inst.target_set(i)) for i in range(inst.num_agents)]
    assert all(len(s) == 5 for s in sets)
    for a, b in itertools.combinations(sets, 2):
        assert not a & b


def _has_perfect_matching(inst: TapfInstance) -> bool:
    # Hall's condition, checked over every subset of agents.
    n = inst.num_agents
    for size in range(1, n + 1):
        for group in itertools.combinations(range(n), size):
            if len(set().union(*(inst.target_set(i) for i in group))) < size:
                return False
    return True


def test_k4_p100_clamps_to_three_shared():
    cfg = GeneratorConfig(5, 4, 100, 7)
    assert (cfg.shared_count, cfg.unique_count) == (3, 1)
    inst = generate_instance(EMPTY, cfg, graph=EMPTY_GRAPH)
    shared, unique = _shared_and_unique(inst)
    assert len(shared) == 3 and all(len(u) == 1 for u in unique)
    assert _has_perfect_matching(inst)


def test_full_share_of_singleton_set_is_rejected():
    with pytest.raises(InstanceError):
        GeneratorConfig(3, 1, 100)


@pytest.mark.parametrize("bad", [dict(agent_count=0), dict(target_set_size=0), dict(shared_percentage=101)])
def test_config_validation(bad):
    args = dict(agent_count=2, target_set_size=3, shared_percentage=30)
    args.update(bad)
    with pytest.raises(InstanceError):
        GeneratorConfig(**args)


def test_not_enough_cells():
    small = load_map(DATA / "empty-32-32.map")
    with pytest.raises(InstanceError, match="passable cells"):
        generate_instance(small, GeneratorConfig(300, 5, 0))


def test_large_benchmark_configuration_fits():
    inst = generate_instance(EMPTY, GeneratorConfig(150, 5, 0, 0), graph=EMPTY_GRAPH)
    assert inst.num_agents == 150 and inst.num_targets == 750


def test_same_seed_same_file():
    a = save_instance(generate_instance(EMPTY, GeneratorConfig(8, 3, 30, 11), "m.map", EMPTY_GRAPH))
    b = save_instance(generate_instance(EMPTY, GeneratorConfig(8, 3, 30, 11), "m.map", EMPTY_GRAPH))
    c = save_instance(generate_instance(EMPTY, GeneratorConfig(8, 3, 30, 12), "m.map", EMPTY_GRAPH))
    assert a == b
    assert a != c


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 12),
    k=st.integers(1, 6),
    p=st.integers(0, 100),
    seed=st.integers(0, 10_000),
)
def test_generated_instances_are_well_formed(n, k, p, seed):
    requested = k * p // 100
    if requested > 0 and min(requested, k - 1) == 0:
        with pytest.raises(InstanceError):
            GeneratorConfig(n, k, p, seed)
        return
    cfg = GeneratorConfig(n, k, p, seed)
    inst = generate_instance(EMPTY, cfg, graph=EMPTY_GRAPH)
    assert len(set(inst.starts)) == n
    assert len(set(inst.targets)) == inst.num_targets
    shared = set(range(cfg.shared_count))
    for i in range(n):
        row = set(inst.target_set(i))
        assert len(row) == k
        assert shared <= row
        assert len(row - shared) >= 1
    assert _has_perfect_matching(inst) if n <= 6 else True
    again = load_instance(save_instance(inst), EMPTY_GRAPH)
    assert again == inst


def test_two_agent_three_target_instance_loads():
    g = graph_of(["...", "..."])
    text = """# agents X and Y; targets A, B, C
map tiny.map
agents 2 targets 3
start 0 0
start 1 0
target 0 2
target 1 2
target 1 1
1 1 0
1 1 1
"""
    inst = load_instance(text, g)
    assert inst.eligibility == ((1, 1, 0), (1, 1, 1))
    assert inst.target_set(0) == [0, 1]
    assert inst.target_set(1) == [0, 1, 2]
    assert load_instance(save_instance(inst), g) == inst


HEADER = "map m.map\nagents 2 targets 2\n"


@pytest.mark.parametrize(
    "body, message",
    [
        ("start 0 0\nstart 0 1\ntarget 1 0\ntarget 1 1\n1 0\n0 1\n", "not a passable"),
        ("start 0 0\nstart 0 0\ntarget 0 2\ntarget 0 3\n1 0\n0 1\n", "duplicate start"),
        ("start 0 0\nstart 0 2\ntarget 0 3\ntarget 1 3\n1 0\n0 0\n", "empty target set"),
        ("start 0 0\nstart 0 2\ntarget 0 3\ntarget 1 3\n1 0\n", "ends early"),
        ("start 0 0\nstart 0 2\ntarget 0 3\ntarget 1 3\n1 2\n0 1\n", "non-binary"),
        ("start 0 0\nstart 0 2\ntarget 0 3\ntarget 0 3\n1 0\n0 1\n", "duplicate target"),
        ("start 0 0\nstart 0 2\ntarget 0 3\ntarget 1 3\n1 0 1\n0 1\n", "2 eligibility entries"),
        ("start 0 0\nstart 0 2\ntarget 0 3\ntarget 1 3\n1 0\n0 1\n0 1\n", "trailing"),
    ],
)
def test_load_errors(body, message):
    g = graph_of([".@..", "..@."])
    with pytest.raises(InstanceError, match=message):
        load_instance(HEADER + body, g)


def test_fewer_targets_than_agents_rejected():
    with pytest.raises(InstanceError):
        make_instance(["...."], [(0, 0), (0, 1)], [(0, 3)], [[1], [1]])


def test_read_instance_resolves_map_relative_to_file(tmp_path):
    (tmp_path / "maps").mkdir()
    (tmp_path / "maps" / "m.map").write_text((DATA / "empty-32-32.map").read_text())
    inst = generate_instance(EMPTY, GeneratorConfig(3, 2, 50, 0), "maps/m.map", EMPTY_GRAPH)
    path = tmp_path / "a.inst"
    path.write_text(save_instance(inst))
    loaded = read_instance(path)
    assert loaded.starts == inst.starts and loaded.eligibility == inst.eligibility
