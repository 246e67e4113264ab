# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Network description: topology, gains, node roles, cuts and MIMO expansion.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from superposition_networks import logger, throw
from superposition_networks.exceptions import (
    DuplicateEntryError,
    InvariantError,
    LimitExceededError,
    ModeError,
    SchemaError,
)

MODES = ("relay", "interference", "multicast")
ROLES = {
    "relay": ("source", "relay", "destination"),
    "multicast": ("source", "relay", "destination"),
    "interference": ("transmitter", "receiver"),
}
DEFAULT_CUT_LIMIT = 20


@dataclass(frozen=True)
class Node:
    id: int
    role: str
    antennas: int = 1
    user: int | None = None
    group: int | None = None
    antenna: int = 0

    @property
    def group_id(self):
        return self.id if self.group is None else self.group


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    gain: complex
    antenna_gains: tuple | None = None


@dataclass(frozen=True)
class Topology:
    mode: str
    nodes: tuple
    edges: tuple
    parameters: tuple = ()

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            throw(f"Unknown network mode {self.mode!r}, expected one of {', '.join(MODES)}", SchemaError)
        if not self.nodes:
            throw("Network has no nodes", SchemaError)

        seen = set()
        for node in self.nodes:
            if node.id in seen:
                throw(f"Duplicate node id {node.id}", DuplicateEntryError)
            seen.add(node.id)
            if node.role not in ROLES[self.mode]:
                throw(f"Node {node.id}: role {node.role!r} not allowed in {self.mode} mode", SchemaError)
            if node.antennas < 1:
                throw(f"Node {node.id}: antenna count must be at least 1", SchemaError)

        pairs = set()
        for edge in self.edges:
            for end in (edge.src, edge.dst):
                if end not in seen:
                    throw(f"Edge {edge.src}->{edge.dst} references unknown node {end}", SchemaError)
            if edge.src == edge.dst:
                throw(f"Self loop on node {edge.src}", SchemaError)
            if (edge.src, edge.dst) in pairs:
                throw(f"Duplicate edge {edge.src}->{edge.dst}", DuplicateEntryError)
            pairs.add((edge.src, edge.dst))
            self._validate_gains(edge)

        if self.mode == "interference":
            self._validate_interference()
        else:
            self._validate_relay()

    def _validate_gains(self, edge):
        gains = [edge.gain]
        if edge.antenna_gains is not None:
            rows = self.node(edge.src).antennas
            cols = self.node(edge.dst).antennas
            if len(edge.antenna_gains) != rows or any(len(row) != cols for row in edge.antenna_gains):
                throw(f"Edge {edge.src}->{edge.dst}: antenna gains must be {rows}x{cols}", SchemaError)
            gains = [gain for row in edge.antenna_gains for gain in row]
        for gain in gains:
            if not (math.isfinite(gain.real) and math.isfinite(gain.imag)):
                throw(f"Edge {edge.src}->{edge.dst}: non-finite gain {gain}", InvariantError)
            if gain == 0:
                throw(f"Edge {edge.src}->{edge.dst}: gain has no nonzero component", InvariantError)

    def _validate_relay(self):
        ids = sorted(node.id for node in self.nodes)
        if ids != list(range(len(ids))):
            throw(f"Node ids must be 0..{len(ids) - 1}, got {ids}", SchemaError)
        source_groups = {node.group_id for node in self.nodes if node.role == "source"}
        if len(source_groups) != 1 or self.node(0).role != "source":
            throw("Relay networks need exactly one source with id 0", InvariantError)
        destinations = self.destinations
        if not destinations:
            throw("Network has no destination", InvariantError)
        if self.mode == "relay":
            if len({self.node(d).group_id for d in destinations}) != 1:
                throw("Relay networks need exactly one destination", InvariantError)
            if self.node(self.M).role != "destination":
                throw(f"Destination must carry the largest id {self.M}", InvariantError)
        for group in {self.node(d).group_id for d in destinations}:
            members = [node.id for node in self.nodes if node.group_id == group]
            if not any(self.in_edges(member) for member in members):
                throw(f"Destination {group} has no incoming edge", InvariantError)
        first = min((node.id for node in self.nodes if node.group_id != self.node(0).group_id), default=None)
        if first is not None and first not in self.reachable_from(self.source_ids):
            throw(f"Node {first} cannot be reached from the source", InvariantError)

    def _validate_interference(self):
        sides = {"transmitter": {}, "receiver": {}}
        for node in self.nodes:
            if node.user is None:
                throw(f"Node {node.id}: interference nodes need a user label", SchemaError)
            sides[node.role].setdefault(node.user, set()).add(node.group_id)
        users = sorted(sides["transmitter"])
        if not users:
            throw("Interference networks need at least one user", SchemaError)
        for role, table in sides.items():
            if sorted(table) != list(range(len(users))):
                throw(f"{role} user labels must be 0..{len(users) - 1}, got {sorted(table)}", SchemaError)
            for user, groups in table.items():
                if len(groups) != 1:
                    throw(f"User {user} has {len(groups)} {role} nodes", DuplicateEntryError)
        for edge in self.edges:
            if self.node(edge.src).role != "transmitter" or self.node(edge.dst).role != "receiver":
                throw(f"Edge {edge.src}->{edge.dst} must go from a transmitter to a receiver", InvariantError)

    @cached_property
    def _by_id(self):
        return {node.id: node for node in self.nodes}

    @cached_property
    def _in_edges(self):
        table = {node.id: [] for node in self.nodes}
        for edge in self.edges:
            table[edge.dst].append(edge)
        return {key: tuple(sorted(value, key=lambda e: e.src)) for key, value in table.items()}

    @cached_property
    def _out_edges(self):
        table = {node.id: [] for node in self.nodes}
        for edge in self.edges:
            table[edge.src].append(edge)
        return {key: tuple(sorted(value, key=lambda e: e.dst)) for key, value in table.items()}

    def node(self, node_id):
        try:
            return self._by_id[node_id]
        except KeyError:
            throw(f"Unknown node {node_id}", SchemaError)

    def in_edges(self, node_id):
        return self._in_edges[node_id]

    def out_edges(self, node_id):
        return self._out_edges[node_id]

    def gain(self, src, dst):
        for edge in self._out_edges.get(src, ()):
            if edge.dst == dst:
                return edge.gain
        return 0j

    def gains(self):
        return [edge.gain for edge in self.edges]

    @property
    def node_ids(self):
        return sorted(self._by_id)

    @property
    def M(self):
        return max(self._by_id)

    @property
    def source_ids(self):
        return sorted(node.id for node in self.nodes if node.role == "source")

    @property
    def destinations(self):
        return sorted(node.id for node in self.nodes if node.role == "destination")

    @property
    def is_mimo(self):
        return any(node.antennas > 1 for node in self.nodes)

    @property
    def K(self):
        return len({node.user for node in self.nodes if node.role == "transmitter"})

    def transmitter(self, user):
        return next(node.id for node in self.nodes if node.role == "transmitter" and node.user == user)

    def receiver(self, user):
        return next(node.id for node in self.nodes if node.role == "receiver" and node.user == user)

    def reachable_from(self, starts):
        seen = set(starts)
        queue = deque(starts)
        while queue:
            current = queue.popleft()
            for edge in self._out_edges[current]:
                if edge.dst not in seen:
                    seen.add(edge.dst)
                    queue.append(edge.dst)
        return seen

    def parameter(self, name):
        return dict(self.parameters).get(name)

    def to_document(self):
        nodes = []
        for node in self.nodes:
            entry = {"id": node.id, "role": node.role, "antennas": node.antennas}
            if node.user is not None:
                entry["user"] = node.user
            if node.group is not None:
                entry["group"] = node.group
                entry["antenna"] = node.antenna
            nodes.append(entry)
        edges = []
        for edge in self.edges:
            entry = {"from": edge.src, "to": edge.dst}
            if edge.antenna_gains is not None:
                entry["antenna_gains"] = [[[g.real, g.imag] for g in row] for row in edge.antenna_gains]
            else:
                entry["gain_re"] = edge.gain.real
                entry["gain_im"] = edge.gain.imag
            edges.append(entry)
        return {"mode": self.mode, "nodes": nodes, "edges": edges, "parameters": dict(self.parameters)}


@dataclass(frozen=True)
class Cut:
    omega: frozenset = field(default_factory=frozenset)

    @property
    def label(self):
        return "{" + ",".join(str(i) for i in sorted(self.omega)) + "}"

    def complement(self, topology):
        return frozenset(topology.node_ids) - self.omega


def _parse_gain(entry, parameters, where):
    scale = 1.0
    if entry.get("scale") is not None:
        name = entry["scale"]
        if name not in parameters:
            throw(f"{where}: unknown gain parameter {name!r}", SchemaError)
        scale = float(parameters[name])
    if "antenna_gains" in entry:
        try:
            return None, tuple(
                tuple(complex(float(pair[0]), float(pair[1])) * scale for pair in row) for row in entry["antenna_gains"]
            )
        except (TypeError, ValueError, IndexError):
            throw(f"{where}: antenna_gains must be a [k][l][re, im] array", SchemaError)
    if "gain_re" not in entry and "gain_im" not in entry:
        throw(f"{where}: missing gain_re/gain_im or antenna_gains", SchemaError)
    try:
        return complex(float(entry.get("gain_re", 0.0)), float(entry.get("gain_im", 0.0))) * scale, None
    except (TypeError, ValueError):
        throw(f"{where}: gain components must be numbers", SchemaError)


def load_topology(document, parameters=None):
    """
    Build and validate a Topology from a network document.

    Args:
        document: dict (or JSON text) with ``mode``, ``nodes``, ``edges`` and
            optional ``parameters`` used by edges that name a ``scale``
        parameters: overrides for the document's parameters

    Returns:
        Topology
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            throw(f"Network document is not valid JSON: {e}", SchemaError)
    if not isinstance(document, dict):
        throw("Network document must be a JSON object", SchemaError)

    mode = document.get("mode", "relay")
    raw_nodes = document.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        throw("Network document needs a non-empty 'nodes' list", SchemaError)
    raw_edges = document.get("edges", [])
    if not isinstance(raw_edges, list):
        throw("'edges' must be a list", SchemaError)

    resolved = dict(document.get("parameters") or {})
    resolved.update(parameters or {})

    nodes = []
    for index, entry in enumerate(raw_nodes):
        if not isinstance(entry, dict) or "id" not in entry or "role" not in entry:
            throw(f"Node entry {index} needs 'id' and 'role': {entry!r}", SchemaError)
        nodes.append(
            Node(
                id=int(entry["id"]),
                role=str(entry["role"]),
                antennas=int(entry.get("antennas", 1)),
                user=None if entry.get("user") is None else int(entry["user"]),
            )
        )

    edges = []
    for index, entry in enumerate(raw_edges):
        if not isinstance(entry, dict) or "from" not in entry or "to" not in entry:
            throw(f"Edge entry {index} needs 'from' and 'to': {entry!r}", SchemaError)
        where = f"Edge {entry['from']}->{entry['to']}"
        gain, antenna_gains = _parse_gain(entry, resolved, where)
        if gain is None:
            gain = antenna_gains[0][0]
        edges.append(Edge(int(entry["from"]), int(entry["to"]), gain, antenna_gains))

    topology = Topology(mode, tuple(sorted(nodes, key=lambda n: n.id)), tuple(edges), tuple(sorted(resolved.items())))
    logger("network").debug(f"Loaded {mode} network with {len(nodes)} nodes and {len(edges)} edges")
    return topology


def load_topology_file(path, parameters=None):
    with open(path) as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as e:
            throw(f"{path}: not valid JSON: {e}", SchemaError)
    return load_topology(document, parameters)


def scale_gains(topology, gamma):
    """Multiply every gain by ``gamma``."""
    edges = []
    for edge in topology.edges:
        antenna_gains = None
        if edge.antenna_gains is not None:
            antenna_gains = tuple(tuple(g * gamma for g in row) for row in edge.antenna_gains)
        edges.append(replace(edge, gain=edge.gain * gamma, antenna_gains=antenna_gains))
    return replace(topology, edges=tuple(edges))


def random_topology(num_relays, seed, gain_range=(1.0, 16.0)):
    """
    Layered relay network with every forward edge i -> j (i < j) present.

    Magnitudes are uniform in ``gain_range`` and phases uniform on the circle.
    """
    rng = np.random.default_rng(seed)
    count = num_relays + 2
    nodes = [Node(0, "source")]
    nodes += [Node(i, "relay") for i in range(1, count - 1)]
    nodes.append(Node(count - 1, "destination"))
    edges = []
    for src in range(count - 1):
        for dst in range(src + 1, count):
            magnitude = rng.uniform(*gain_range)
            phase = rng.uniform(0, 2 * math.pi)
            edges.append(Edge(src, dst, complex(magnitude * math.cos(phase), magnitude * math.sin(phase))))
    return Topology("relay", tuple(nodes), tuple(edges), (("seed", seed),))


def enumerate_cuts(topology, destination=None, limit=DEFAULT_CUT_LIMIT):
    """
    All source-side sets containing the source and excluding the destination.

    Nodes that came from the same MIMO node stay together. Order follows the
    bitmask over the free groups in ascending id order.
    """
    if topology.mode == "interference":
        throw("Cut enumeration needs a relay or multicast network", ModeError)
    if destination is None:
        destination = topology.destinations[-1]
    elif topology.node(destination).role != "destination":
        throw(f"Node {destination} is not a destination", InvariantError)

    source_group = topology.node(topology.source_ids[0]).group_id
    destination_group = topology.node(destination).group_id
    groups = {}
    for node in topology.nodes:
        groups.setdefault(node.group_id, []).append(node.id)
    free = sorted(g for g in groups if g not in (source_group, destination_group))
    if len(free) > limit:
        throw(
            f"{2 ** len(free)} cuts requested ({len(free)} free nodes) exceeds the limit of {limit} free nodes",
            LimitExceededError,
        )
    base = frozenset(groups[source_group])
    cuts = []
    for mask in range(1 << len(free)):
        omega = set(base)
        for bit, group in enumerate(free):
            if mask >> bit & 1:
                omega.update(groups[group])
        cuts.append(Cut(frozenset(omega)))
    return cuts


def cut_sides(topology, cut):
    """(rows, cols): sorted receiving-side ids and sorted source-side ids."""
    omega = cut.omega
    if topology.source_ids[0] not in omega:
        throw(f"Cut {cut.label} does not contain the source", InvariantError)
    unknown = omega - set(topology.node_ids)
    if unknown:
        throw(f"Cut {cut.label} names unknown nodes {sorted(unknown)}", InvariantError)
    if topology.mode == "relay" and topology.M in omega:
        throw(f"Cut {cut.label} contains the destination {topology.M}", InvariantError)
    return sorted(cut.complement(topology)), sorted(omega)


def cut_transfer_matrix(topology, cut, compact=False):
    """
    Gain matrix across the cut, entry (j, i) = h_ij for crossing edges.

    Edges inside either side are left out. ``compact`` drops all-zero rows
    and columns.
    """
    if topology.is_mimo:
        throw("Expand MIMO nodes with mimo_expand before taking cut matrices", ModeError)
    rows, cols = cut_sides(topology, cut)
    row_index = {node_id: r for r, node_id in enumerate(rows)}
    col_index = {node_id: c for c, node_id in enumerate(cols)}
    matrix = np.zeros((len(rows), len(cols)), dtype=np.complex128)
    for edge in topology.edges:
        if edge.src in col_index and edge.dst in row_index:
            matrix[row_index[edge.dst], col_index[edge.src]] = edge.gain
    if compact:
        matrix = matrix[np.any(matrix != 0, axis=1)][:, np.any(matrix != 0, axis=0)]
    return matrix


def mimo_expand(topology):
    """
    Replace every L-antenna node by L single-antenna virtual nodes.

    Virtual ids are assigned in original id order; each virtual node keeps
    the original id in ``group`` and its antenna index in ``antenna``.
    """
    if not topology.is_mimo:
        return topology

    mapping = {}
    nodes = []
    for node in sorted(topology.nodes, key=lambda n: n.id):
        for antenna in range(node.antennas):
            mapping[(node.id, antenna)] = len(nodes)
            nodes.append(Node(len(nodes), node.role, 1, node.user, node.id, antenna))

    edges = []
    for edge in topology.edges:
        tx = topology.node(edge.src).antennas
        rx = topology.node(edge.dst).antennas
        if edge.antenna_gains is None:
            if tx == 1 and rx == 1:
                edges.append(Edge(mapping[(edge.src, 0)], mapping[(edge.dst, 0)], edge.gain))
                continue
            throw(f"Edge {edge.src}->{edge.dst}: per-antenna gains missing for a {tx}x{rx} link", SchemaError)
        for k in range(tx):
            for l in range(rx):
                edges.append(Edge(mapping[(edge.src, k)], mapping[(edge.dst, l)], edge.antenna_gains[k][l]))

    logger("network").info(f"Expanded {len(topology.nodes)} nodes into {len(nodes)} virtual nodes")
    return Topology(topology.mode, tuple(nodes), tuple(edges), topology.parameters)


def levels(topology):
    """Breadth-first distance of every node from the source side."""
    starts = topology.source_ids if topology.mode != "interference" else [
        node.id for node in topology.nodes if node.role == "transmitter"
    ]
    depth = {node_id: 0 for node_id in starts}
    queue = deque(starts)
    while queue:
        current = queue.popleft()
        for edge in topology.out_edges(current):
            if edge.dst not in depth:
                depth[edge.dst] = depth[current] + 1
                queue.append(edge.dst)
    return depth


def is_leveled(topology):
    """Every node reachable and every edge going exactly one level forward."""
    depth = levels(topology)
    if len(depth) != len(topology.nodes):
        return False
    return all(depth[edge.dst] == depth[edge.src] + 1 for edge in topology.edges)
