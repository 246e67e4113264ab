# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Gaussian, discrete superposition and linear deterministic channel models.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from superposition_networks import logger, throw
from superposition_networks.exceptions import DomainError, InvariantError
from superposition_networks.network import mimo_expand
from superposition_networks.qarith import GInt, bit_depth, dsm_link, dsm_link_array, quantize


@dataclass(frozen=True)
class DsmModel:
    topology: object
    n: int
    gains: dict

    def in_edges(self, node_id):
        return [(edge.src, self.gains[(edge.src, edge.dst)]) for edge in self.topology.in_edges(node_id)]


@dataclass(frozen=True)
class LdmModel:
    topology: object
    q: int
    shifts: dict

    def passed_bits(self, src, dst):
        return self.q - self.shifts[(src, dst)]


@dataclass(frozen=True)
class BitVec:
    """Binary vector, most significant bit first."""

    bits: tuple

    def __post_init__(self):
        if any(bit not in (0, 1) for bit in self.bits):
            throw(f"BitVec entries must be 0 or 1, got {self.bits}", DomainError)

    def __len__(self):
        return len(self.bits)

    def __xor__(self, other):
        if len(other) != len(self):
            throw(f"Length mismatch: {len(self)} vs {len(other)}", DomainError)
        return BitVec(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def to_int(self):
        value = 0
        for bit in self.bits:
            value = value << 1 | bit
        return value

    @classmethod
    def from_int(cls, value, q):
        return cls(tuple((value >> (q - 1 - r)) & 1 for r in range(q)))

    @classmethod
    def from_string(cls, text):
        return cls(tuple(int(c) for c in text))

    def __str__(self):
        return "".join(str(bit) for bit in self.bits)


def _single_antenna(topology):
    if topology.is_mimo:
        logger("models").info("Deriving models on the virtual-node expansion of a MIMO network")
        return mimo_expand(topology)
    return topology


def derive_dsm(topology):
    """Quantize every gain and fix the bit depth over all gains."""
    topology = _single_antenna(topology)
    n = bit_depth(topology.gains())
    gains = {(edge.src, edge.dst): quantize(edge.gain) for edge in topology.edges}
    logger("models").debug(f"Derived DSM with n={n} over {len(gains)} links")
    return DsmModel(topology, n, gains)


def _floor_log2_power(gain):
    """Exact floor(log2(re^2 + im^2)) for a nonzero gain."""
    gain = complex(gain)
    power = Fraction(gain.real) ** 2 + Fraction(gain.imag) ** 2
    exponent = power.numerator.bit_length() - power.denominator.bit_length()
    if Fraction(2) ** exponent > power:
        exponent -= 1
    return exponent


def derive_ldm(topology):
    """
    Linear deterministic counterpart: q = max floor(log2 |h|^2), shift q - floor(log2 |h|^2).

    Only magnitudes are kept. Gains below unit magnitude are rejected.
    """
    topology = _single_antenna(topology)
    passed = {}
    for edge in topology.edges:
        if abs(edge.gain) < 1.0:
            throw(
                f"Edge {edge.src}->{edge.dst}: |h| = {abs(edge.gain):.4g} < 1 has no linear deterministic shift",
                DomainError,
            )
        passed[(edge.src, edge.dst)] = _floor_log2_power(edge.gain)
    q = max(passed.values(), default=0)
    if q == 0:
        logger("models").warning("Linear deterministic model has q=0, all signals are empty")
    return LdmModel(topology, q, {key: q - bits for key, bits in passed.items()})


def _require_inputs(topology, node_id, tx):
    missing = [edge.src for edge in topology.in_edges(node_id) if edge.src not in tx]
    if missing:
        throw(f"Node {node_id}: no transmission supplied for in-neighbours {missing}", InvariantError)


def gaussian_receive(topology, node_id, tx, noise=0j):
    """y_j = sum of h_ij x_i plus the supplied noise sample."""
    _require_inputs(topology, node_id, tx)
    total = complex(noise)
    for edge in topology.in_edges(node_id):
        total += edge.gain * complex(tx[edge.src])
    return total


def gaussian_receive_array(topology, node_id, tx, noise=None):
    """Vectorized gaussian_receive; ``tx`` maps node -> complex array."""
    _require_inputs(topology, node_id, tx)
    total = None
    for edge in topology.in_edges(node_id):
        term = edge.gain * np.asarray(tx[edge.src], dtype=np.complex128)
        total = term if total is None else total + term
    if total is None:
        total = np.zeros_like(np.asarray(noise if noise is not None else 0j, dtype=np.complex128))
    return total if noise is None else total + noise


def dsm_receive(model, node_id, tx):
    """Exact Gaussian-integer sum of the incoming discrete superposition links."""
    _require_inputs(model.topology, node_id, tx)
    total = GInt(0, 0)
    for src, qh in model.in_edges(node_id):
        total = total + dsm_link(complex(qh), tx[src])
    return total


def dsm_receive_array(model, node_id, values):
    """Vectorized dsm_receive; ``values`` maps node -> complex array of FixedInput values."""
    _require_inputs(model.topology, node_id, values)
    total = None
    for src, qh in model.in_edges(node_id):
        term = dsm_link_array(qh, values[src])
        total = term if total is None else total + term
    if total is None:
        shape = np.shape(next(iter(values.values()))) if values else ()
        total = np.zeros(shape, dtype=np.complex128)
    return total


def ldm_receive(model, node_id, tx):
    """XOR of the incoming vectors, each shifted down by its edge's shift."""
    _require_inputs(model.topology, node_id, tx)
    for src, vector in tx.items():
        if len(vector) != model.q:
            throw(f"Node {src}: vector length {len(vector)} does not match q={model.q}", DomainError)
    values = {src: vector.to_int() for src, vector in tx.items()}
    return BitVec.from_int(ldm_receive_int(model, node_id, values), model.q)


def ldm_receive_int(model, node_id, values):
    """ldm_receive on integer-coded vectors (MSB first); works on numpy integer arrays too."""
    total = 0
    for edge in model.topology.in_edges(node_id):
        total = total ^ (values[edge.src] >> model.shifts[(edge.src, edge.dst)])
    return total
