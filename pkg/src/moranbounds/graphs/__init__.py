from .core import Graph, build_graph, is_connected, require_connected
from .enumerate import connected_corpus, connected_graphs, labeled_connected_graphs
from .families import (
    Family,
    GraphFamilySpec,
    check_phi_urchin,
    complete_graph,
    cycle_graph,
    make_benchmark,
    make_phi_urchin,
    make_urchin,
    path_graph,
    star_graph,
)
from .io import parse_edge_list, read_edge_list, serialize_edge_list, write_edge_list

__all__ = [
    "Family",
    "Graph",
    "GraphFamilySpec",
    "build_graph",
    "check_phi_urchin",
    "complete_graph",
    "connected_corpus",
    "connected_graphs",
    "cycle_graph",
    "is_connected",
    "labeled_connected_graphs",
    "make_benchmark",
    "make_phi_urchin",
    "make_urchin",
    "parse_edge_list",
    "path_graph",
    "read_edge_list",
    "require_connected",
    "serialize_edge_list",
    "star_graph",
    "write_edge_list",
]
