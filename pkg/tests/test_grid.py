import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DATA, grid_text
from tapf.grid import (
    UNREACHABLE,
    GridMap,
    MapParseError,
    build_graph,
    load_map,
    parse_map,
    random_map,
    serialize_map,
)


def test_uniform_3x3():
    grid = parse_map(grid_text(["...", "...", "..."]))
    assert (grid.width, grid.height) == (3, 3)
    assert grid.passable_count == 9


def test_center_obstacle():
    grid = parse_map(grid_text(["...", ".@.", "..."]))
    assert grid.passable_count == 8
    assert not grid.is_passable(1, 1)


def test_cell_alphabet():
    grid = parse_map(grid_text([".G@OTSW"]))
    assert grid.cells == (True, True, False, False, False, False, False)


def test_benchmark_empty_map_has_1024_cells():
    grid = load_map(DATA / "empty-32-32.map")
    assert grid.passable_count == 1024


def test_crlf_and_trailing_whitespace():
    text = "type octile  \r\nheight 2\r\nwidth 2 \r\nmap\r\n.@  \r\n..\r\n"
    grid = parse_map(text)
    assert grid.cells == (True, False, True, True)


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("type octile\nheight 2\nwidth 2\nmap\n..\n.x\n", 6, 2),
        ("type octile\nheight 2\nwidth 2\nmap\n..\n...\n", 6, None),
        ("type octile\nheight 3\nwidth 2\nmap\n..\n..\n", 7, None),
        ("type octile\nheight two\nwidth 2\nmap\n..\n..\n", 2, None),
        ("type octile\nwidth 2\nheight 2\nmap\n..\n..\n", 2, None),
        ("type octile\nheight 2\nwidth 2\ngrid\n..\n..\n", 4, None),
        ("type octile\nheight 2\n", 3, None),
    ],
)
def test_parse_errors_name_the_location(text, line, column):
    with pytest.raises(MapParseError) as err:
        parse_map(text)
    assert err.value.line == line
    assert err.value.column == column
    assert f"line {line}" in str(err.value)


def test_singleton_graph():
    g = build_graph(parse_map(grid_text(["."])))
    assert (g.vertex_count, g.edge_count) == (1, 0)


def test_two_by_two_graph():
    g = build_graph(parse_map(grid_text(["..", ".."])))
    assert (g.vertex_count, g.edge_count) == (4, 4)


def test_ring_graph():
    g = build_graph(parse_map(grid_text(["...", ".@.", "..."])))
    assert (g.vertex_count, g.edge_count) == (8, 8)
    assert all(len(g.adjacency[v]) == 2 for v in g.vertices)


def test_no_passable_cells_gives_empty_graph():
    g = build_graph(parse_map(grid_text(["@@", "@@"])))
    assert (g.vertex_count, g.edge_count) == (0, 0)


def test_coordinates_round_trip():
    g = build_graph(parse_map(grid_text(["....", "..@."])))
    for v in g.vertices:
        assert g.vertex(*g.coord(v)) == v
    with pytest.raises(ValueError):
        g.vertex(1, 2)


def test_distances_and_diameter():
    g = build_graph(parse_map(grid_text(["...", "@@.", "..."])))
    assert g.distance(g.vertex(0, 0), g.vertex(2, 0)) == 6
    assert g.diameter() == 6
    walled = build_graph(parse_map(grid_text([".@."])))
    assert walled.distance(0, 2) == UNREACHABLE


def test_free_path_is_shortest():
    g = build_graph(parse_map(grid_text(["....", ".@@.", "...."])))
    p = g.free_path(g.vertex(0, 0), g.vertex(2, 3))
    assert len(p) - 1 == 5
    assert all(b in g.adjacency[a] for a, b in zip(p, p[1:]))


def test_random_map_is_connected():
    grid = random_map(16, 16, 0.3, seed=4)
    g = build_graph(grid)
    assert all(d != UNREACHABLE for v, d in enumerate(g.distances_to(g.vertices[0])) if grid.cells[v])


def test_bundled_random_map_matches_generator():
    assert load_map(DATA / "random-32-32-10-s0.map").cells == random_map(32, 32, 0.10, seed=0).cells


def test_file_round_trip_is_byte_stable():
    for name in ("empty-32-32.map", "random-32-32-10-s0.map"):
        text = (DATA / name).read_text()
        assert serialize_map(parse_map(text)) == text.replace("\r\n", "\n")


tiles = st.sampled_from(".G@OTSW")


@st.composite
def maps(draw):
    w = draw(st.integers(1, 7))
    h = draw(st.integers(1, 7))
    rows = ["".join(draw(st.lists(tiles, min_size=w, max_size=w))) for _ in range(h)]
    return parse_map(grid_text(rows))


@settings(max_examples=150, deadline=None)
@given(maps())
def test_round_trip_property(grid: GridMap):
    again = parse_map(serialize_map(grid))
    assert again == grid
    assert serialize_map(again) == serialize_map(grid)


@settings(max_examples=150, deadline=None)
@given(maps())
def test_graph_invariants(grid: GridMap):
    g = build_graph(grid)
    assert g.vertex_count == grid.passable_count
    halves = 0
    for v in range(len(grid.cells)):
        nbrs = g.adjacency[v]
        halves += len(nbrs)
        assert v not in nbrs
        for u in nbrs:
            assert v in g.adjacency[u]
            (r1, c1), (r2, c2) = g.coord(u), g.coord(v)
            assert abs(r1 - r2) + abs(c1 - c2) == 1
            assert grid.cells[u] and grid.cells[v]
    assert g.edge_count * 2 == halves
