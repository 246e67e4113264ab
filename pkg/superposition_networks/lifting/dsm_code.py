# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Codes for discrete superposition networks and their noiseless simulation.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from superposition_networks import log_error, logger, throw
from superposition_networks.exceptions import DecodingError, InvariantError, ModeError, SchemaError
from superposition_networks.network import is_leveled, levels
from superposition_networks.qarith import FixedInput, GInt, dsm_link

CODE_MODES = ("blockwise", "per-time")


def reception_key(receptions):
    """Table key of a reception sequence: comma-joined Gaussian integers."""
    return ",".join(str(g) for g in receptions)


def parse_reception_key(key):
    if key == "":
        return ()
    return tuple(GInt.parse(part) for part in key.split(","))


def symbol_width(n):
    return max(1, math.ceil(n / 2))


def parse_symbols(text, n, where):
    width = symbol_width(n)
    if len(text) % width:
        throw(f"{where}: {text!r} is not a whole number of {width}-digit symbols", SchemaError)
    try:
        symbols = tuple(int(text[i : i + width], 16) for i in range(0, len(text), width))
    except ValueError:
        throw(f"{where}: {text!r} is not hexadecimal", SchemaError)
    limit = 1 << (2 * n)
    for symbol in symbols:
        if symbol >= limit:
            throw(f"{where}: symbol {symbol:x} outside the alphabet of size {limit}", SchemaError)
    return symbols


def format_symbols(symbols, n):
    width = symbol_width(n)
    return "".join(f"{symbol:0{width}x}" for symbol in symbols)


@dataclass(frozen=True, eq=False)
class DsmCode:
    N: int
    n: int
    codebook: np.ndarray
    messages: tuple
    relay_maps: dict
    decoder: dict
    mode: str = "blockwise"
    claimed_error: float | None = None
    description: str = ""

    @property
    def size(self):
        return len(self.messages)

    @property
    def rate(self):
        return math.log2(self.size) / self.N if self.size else 0.0

    def values(self, symbols):
        scale = 2.0 ** -self.n / math.sqrt(2)
        symbols = np.asarray(symbols, dtype=np.int64)
        mask = (1 << self.n) - 1
        return ((symbols >> self.n) & mask) * scale + 1j * (symbols & mask) * scale

    def relay_block(self, node, receptions):
        """Blockwise relay map; unknown receptions transmit zeros."""
        table = self.relay_maps.get(node, {})
        return table.get(reception_key(receptions), (0,) * self.N)

    def relay_symbol(self, node, t, history):
        """Per-time relay map g_{node,t} applied to the receptions before t."""
        maps = self.relay_maps.get(node, ())
        if t >= len(maps):
            return 0
        return maps[t].get(reception_key(history), 0)

    def decode(self, receptions):
        return self.decoder.get(reception_key(receptions))

    def subcode(self, rows):
        rows = list(rows)
        return DsmCode(
            self.N,
            self.n,
            self.codebook[rows],
            tuple(self.messages[r] for r in rows),
            self.relay_maps,
            self.decoder,
            self.mode,
            self.claimed_error,
            self.description,
        )

    def to_document(self):
        if self.mode == "blockwise":
            relay_maps = {
                str(node): {key: format_symbols(value, self.n) for key, value in table.items()}
                for node, table in self.relay_maps.items()
            }
        else:
            relay_maps = {
                str(node): {
                    "mode": "per-time",
                    "maps": [{key: format_symbols((value,), self.n) for key, value in m.items()} for m in maps],
                }
                for node, maps in self.relay_maps.items()
            }
        return {
            "N": self.N,
            "n": self.n,
            "mode": self.mode,
            "claimed_error": self.claimed_error,
            "codebook": [format_symbols(row, self.n) for row in self.codebook.tolist()],
            "messages": list(self.messages),
            "relay_maps": relay_maps,
            "decoder": dict(self.decoder),
        }


def load_code(document):
    """
    Build a DsmCode from a code document.

    Codewords and relay outputs are hexadecimal strings with one fixed-width
    group per symbol (symbol = re_bits << n | im_bits). Relay and decoder
    tables are keyed by comma-joined Gaussian integer receptions.
    """
    if isinstance(document, str):
        document = json.loads(document)
    for key in ("N", "n", "codebook", "decoder"):
        if key not in document:
            throw(f"Code document is missing {key!r}", SchemaError)
    N, n = int(document["N"]), int(document["n"])
    if N < 1 or n < 0:
        throw(f"Invalid code dimensions N={N}, n={n}", SchemaError)
    mode = document.get("mode", "blockwise")
    if mode not in CODE_MODES:
        throw(f"Unknown code mode {mode!r}", SchemaError)

    rows = []
    for index, text in enumerate(document["codebook"]):
        symbols = parse_symbols(text, n, f"codeword {index}")
        if len(symbols) != N:
            throw(f"Codeword {index} has {len(symbols)} symbols, expected {N}", SchemaError)
        rows.append(symbols)
    if not rows:
        throw("Codebook is empty", SchemaError)
    messages = tuple(document.get("messages", range(len(rows))))
    if len(messages) != len(rows) or len(set(messages)) != len(messages):
        throw("Message labels must be unique, one per codeword", SchemaError)

    relay_maps = {}
    for node, table in (document.get("relay_maps") or {}).items():
        where = f"relay {node}"
        if mode == "blockwise":
            parsed = {}
            for key, value in table.items():
                if len(parse_reception_key(key)) != N:
                    throw(f"{where}: key {key!r} must hold {N} receptions", SchemaError)
                out = parse_symbols(value, n, where)
                if len(out) != N:
                    throw(f"{where}: output {value!r} must hold {N} symbols", SchemaError)
                parsed[reception_key(parse_reception_key(key))] = out
            relay_maps[int(node)] = parsed
        else:
            maps = table.get("maps") if isinstance(table, dict) else None
            if not isinstance(maps, list) or len(maps) != N:
                throw(f"{where}: per-time relay maps need a list of {N} tables", SchemaError)
            parsed_maps = []
            for t, step in enumerate(maps):
                parsed = {}
                for key, value in step.items():
                    if len(parse_reception_key(key)) != t:
                        throw(f"{where}: time {t} key {key!r} must hold {t} receptions", SchemaError)
                    (symbol,) = parse_symbols(value, n, where)
                    parsed[reception_key(parse_reception_key(key))] = symbol
                parsed_maps.append(parsed)
            relay_maps[int(node)] = parsed_maps

    decoder = {}
    for key, message in document["decoder"].items():
        if len(parse_reception_key(key)) != N:
            throw(f"decoder: key {key!r} must hold {N} receptions", SchemaError)
        decoder[reception_key(parse_reception_key(key))] = int(message)

    claimed = document.get("claimed_error")
    return DsmCode(
        N,
        n,
        np.array(rows, dtype=np.int64),
        messages,
        relay_maps,
        decoder,
        mode,
        None if claimed is None else float(claimed),
        document.get("description", ""),
    )


def load_code_file(path):
    with open(path) as handle:
        return load_code(json.load(handle))


@dataclass
class Simulation:
    receptions: dict = field(default_factory=dict)
    transmissions: dict = field(default_factory=dict)
    decoded: dict = field(default_factory=dict)

    def correct(self, message):
        return bool(self.decoded) and all(value == message for value in self.decoded.values())


def processing_order(topology):
    """Non-source nodes in level order, ties by id."""
    depth = levels(topology)
    sources = set(topology.source_ids)
    return sorted((node for node in depth if node not in sources), key=lambda node: (depth[node], node))


def receive_symbol(model, node, transmissions, t, n):
    total = GInt(0, 0)
    for src, qh in model.in_edges(node):
        symbol = transmissions[src][t]
        total = total + dsm_link(complex(qh), FixedInput.from_symbol(int(symbol), n))
    return total


def check_compatible(code, model):
    if code.n != model.n:
        throw(f"Code uses n={code.n} but the network's bit depth is {model.n}", InvariantError)


def simulate_dsm(code, model, row):
    """
    Noiseless run of codeword ``row`` through the discrete superposition network.

    Blockwise codes need a leveled network and run level by level.
    Per-time codes run time step by time step.
    """
    topology = model.topology
    source = topology.source_ids[0]
    codeword = tuple(int(s) for s in code.codebook[row])
    result = Simulation(transmissions={source: codeword})
    destinations = set(topology.destinations)

    if code.mode == "blockwise":
        if not is_leveled(topology):
            throw("Blockwise codes need a leveled network; supply per-time relay maps instead", ModeError)
        for node in processing_order(topology):
            received = tuple(receive_symbol(model, node, result.transmissions, t, code.n) for t in range(code.N))
            result.receptions[node] = received
            if node in destinations:
                result.decoded[node] = code.decode(received)
            else:
                result.transmissions[node] = code.relay_block(node, received)
        return result

    relays = [node.id for node in topology.nodes if node.role == "relay"]
    history = {node: [] for node in topology.node_ids if node != source}
    sent = {node: [] for node in relays}
    for t in range(code.N):
        for node in relays:
            sent[node].append(code.relay_symbol(node, t, tuple(history[node])))
        current = {source: codeword[: t + 1], **{node: tuple(sent[node]) for node in relays}}
        for node in history:
            history[node].append(receive_symbol(model, node, current, t, code.n))
    result.transmissions.update({node: tuple(sent[node]) for node in relays})
    result.receptions = {node: tuple(values) for node, values in history.items()}
    for node in destinations:
        result.decoded[node] = code.decode(result.receptions[node])
    return result


def purge_report(code, model):
    """Simulate every codeword and split the codebook into always-correct and failing rows."""
    check_compatible(code, model)
    retained, failed = [], []
    for row in range(code.size):
        outcome = simulate_dsm(code, model, row)
        (retained if outcome.correct(code.messages[row]) else failed).append(row)
    empirical = len(failed) / code.size
    mismatch = code.claimed_error is not None and abs(empirical - code.claimed_error) > 1e-12
    return {
        "retained": retained,
        "failed": failed,
        "empirical_error": empirical,
        "claimed_error": code.claimed_error,
        "mismatch": mismatch,
    }


def purge_zero_error(code, model):
    """
    Keep exactly the codewords that the deterministic network always decodes correctly.

    A claimed error probability that disagrees with the simulation is logged.
    """
    report = purge_report(code, model)
    if not report["retained"]:
        throw("Every codeword is decoded incorrectly; nothing to keep", DecodingError)
    if report["mismatch"]:
        log_error(
            f"Claimed error {report['claimed_error']} but {len(report['failed'])} of {code.size} codewords fail",
            "Claimed Error Mismatch",
        )
    if report["failed"]:
        logger("lifting").info(f"Purged {len(report['failed'])} of {code.size} codewords")
    purged = code.subcode(report["retained"])
    return DsmCode(
        purged.N,
        purged.n,
        purged.codebook,
        purged.messages,
        purged.relay_maps,
        purged.decoder,
        purged.mode,
        0.0,
        purged.description,
    )
