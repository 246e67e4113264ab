from superposition_networks.network.network import (
    Cut,
    Edge,
    Node,
    Topology,
    cut_sides,
    cut_transfer_matrix,
    enumerate_cuts,
    is_leveled,
    levels,
    load_topology,
    load_topology_file,
    mimo_expand,
    random_topology,
    scale_gains,
)

__all__ = [
    "Cut",
    "Edge",
    "Node",
    "Topology",
    "cut_sides",
    "cut_transfer_matrix",
    "enumerate_cuts",
    "is_leveled",
    "levels",
    "load_topology",
    "load_topology_file",
    "mimo_expand",
    "random_topology",
    "scale_gains",
]
