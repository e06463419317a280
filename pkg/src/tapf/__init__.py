"""Combined target assignment and path finding (TAPF) on 4-connected grids."""

from tapf.grid import GridGraph, GridMap, MapParseError, build_graph, load_map, parse_map, serialize_map
from tapf.instance import GeneratorConfig, InstanceError, TapfInstance, generate_instance

__version__ = "0.1.0"

__all__ = [
    "GridGraph", "GridMap", "MapParseError", "build_graph", "load_map", "parse_map", "serialize_map",
    "GeneratorConfig", "InstanceError", "TapfInstance", "generate_instance",
]
