# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Gap constants, the genie decomposition and entropy bounds for integer
valued random variables.
"""

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp
from scipy.stats import norm

from superposition_networks import logger, throw
from superposition_networks.capacity import entropy_bits, plugin_entropy
from superposition_networks.exceptions import BoundViolationError, DomainError, InvariantError
from superposition_networks.models import derive_dsm, dsm_receive_array, gaussian_receive_array
from superposition_networks.qarith import GInt, input_values, quantize, quantize_array

RECONSTRUCTION_TOLERANCE = 1e-9
TAIL_MASS = 1e-12
MIN_SIDE_INFO_SAMPLES = 10**4


@dataclass(frozen=True)
class GapConstants:
    kappa_node: float
    kappa_relay: float
    kappa_ic: float
    kappa_ic_lift: float
    kappa_mimo_relay: float
    kappa_mimo_ic: float
    kappa_mimo_ic_lift: float
    kappa_multicast: float
    M: int
    K: int
    L: int

    def as_dict(self):
        return asdict(self)


def _node_constant(count):
    return math.log2(6 * count - 1) + 10


def gap_constants(M, K=1, L=1):
    """
    Every SNR-independent gap constant for M nodes, K users and L antennas.

    Args:
        M: node count of the relay network (largest node id)
        K: number of users of the interference network
        L: antennas per node

    Returns:
        GapConstants
    """
    for name, value in (("M", M), ("K", K), ("L", L)):
        if not isinstance(value, int) or value < 1:
            throw(f"{name} must be a positive integer, got {value!r}", DomainError)
    return GapConstants(
        kappa_node=_node_constant(M),
        kappa_relay=M * _node_constant(M),
        kappa_ic=6 * K + math.log2(144 * K + 1),
        kappa_ic_lift=_node_constant(K),
        kappa_mimo_relay=L * M * _node_constant(L * M),
        kappa_mimo_ic=6 * L * K + L * math.log2(144 * L * K + 1),
        kappa_mimo_ic_lift=L * _node_constant(L * K),
        kappa_multicast=M * _node_constant(M),
        M=M,
        K=K,
        L=L,
    )


@dataclass(frozen=True)
class GenieSplit:
    qv: GInt
    qz: GInt
    carry: GInt


def _check_split(y_gauss, y_dsm, v, z):
    residual = y_gauss - (y_dsm + v + z)
    scale = np.maximum(1.0, np.maximum(np.abs(np.real(y_gauss)), np.abs(np.imag(y_gauss))))
    if np.any(np.abs(np.real(residual)) > RECONSTRUCTION_TOLERANCE * scale) or np.any(
        np.abs(np.imag(residual)) > RECONSTRUCTION_TOLERANCE * scale
    ):
        throw("Gaussian reception does not equal DSM reception + v + z", InvariantError)


def genie_decompose(y_gauss, y_dsm, v, z):
    """
    Split y = y' + v + z into [v], [z] and the integer carry.

    The carry is the residual [y] - y' - [v] - [z], so
    y' = [y] - [v] - [z] - carry holds exactly.
    """
    y_gauss, v, z = complex(y_gauss), complex(v), complex(z)
    _check_split(y_gauss, complex(y_dsm), v, z)
    qv, qz = quantize(v), quantize(z)
    carry = quantize(y_gauss) - y_dsm - qv - qz
    if abs(carry.re) > 2 or abs(carry.im) > 2:
        throw(f"Carry {carry} outside [-2, 2]", InvariantError)
    return GenieSplit(qv, qz, carry)


def genie_decompose_array(y_gauss, y_dsm, v, z):
    """Vectorized genie_decompose; returns (qv, qz, carry) as integer-valued complex arrays."""
    y_gauss = np.asarray(y_gauss, dtype=np.complex128)
    y_dsm = np.asarray(y_dsm, dtype=np.complex128)
    _check_split(y_gauss, y_dsm, v, z)
    qv = quantize_array(v)
    qz = quantize_array(z)
    carry = quantize_array(y_gauss) - y_dsm - qv - qz
    if np.any(np.abs(carry.real) > 2) or np.any(np.abs(carry.imag) > 2):
        throw("Carry outside [-2, 2]", InvariantError)
    return qv, qz, carry


@dataclass(frozen=True)
class SideInformation:
    node: int
    h_qv: float
    h_qz: float
    h_carry: float
    total: float
    bound: float
    samples: int
    carry_values: tuple

    def as_dict(self):
        return asdict(self)


def genie_side_info_report(topology, node, samples, seed, noiseless=False, check=True):
    """
    Plug-in entropies of [v], [z] and the carry at ``node``.

    Every in-neighbour sends uniform FixedInputs at the model's bit depth and
    the node sees CN(0, 1) noise (or none). The sum is checked against
    log2(6M - 1) + 10. Plug-in estimates need at least
    MIN_SIDE_INFO_SAMPLES draws.
    """
    if samples < MIN_SIDE_INFO_SAMPLES:
        throw(f"Side information needs at least {MIN_SIDE_INFO_SAMPLES} samples, got {samples}", DomainError)
    model = derive_dsm(topology)
    topology = model.topology
    M = max(1, len(topology.nodes) - 1)
    bound = math.log2(6 * M - 1) + 10
    edges = topology.in_edges(node)
    if not edges:
        return SideInformation(node, 0.0, 0.0, 0.0, 0.0, bound, samples, ())

    rng = np.random.default_rng(seed)
    values = input_values(model.n)
    tx = {edge.src: values[rng.integers(0, len(values), size=samples)] for edge in edges}
    if noiseless:
        z = np.zeros(samples, dtype=np.complex128)
    else:
        z = (rng.standard_normal(samples) + 1j * rng.standard_normal(samples)) / math.sqrt(2)
    noiseless_gauss = gaussian_receive_array(topology, node, tx)
    y_dsm = dsm_receive_array(model, node, tx)
    v = noiseless_gauss - y_dsm
    qv, qz, carry = genie_decompose_array(noiseless_gauss + z, y_dsm, v, z)

    h_qv, h_qz, h_carry = plugin_entropy(qv), plugin_entropy(qz), plugin_entropy(carry)
    total = h_qv + h_qz + h_carry
    parts = np.concatenate([carry.real, carry.imag]).astype(int)
    report = SideInformation(node, h_qv, h_qz, h_carry, total, bound, samples, tuple(sorted(set(parts.tolist()))))
    logger("bounds").info(
        f"Node {node}: H([v])={h_qv:.4f} H([z])={h_qz:.4f} H(c)={h_carry:.4f} total={total:.4f} bound={bound:.4f}"
    )
    if check and total > bound:
        throw(f"Node {node}: side information {total:.4f} bits exceeds {bound:.4f}", BoundViolationError)
    return report


def genie_side_info_entropy(topology, node, samples, seed, noiseless=False):
    """H([v]) + H([z]) + H(c) at ``node`` in bits."""
    return genie_side_info_report(topology, node, samples, seed, noiseless).total


class IntegerPowerEntropy(NamedTuple):
    h_z: float
    bound: float
    theta: float


def geometric_entropy(mean):
    """Entropy in bits of the geometric law on {0, 1, ...} with the given mean."""
    if mean < 0:
        throw(f"Mean must be non-negative, got {mean}", DomainError)
    if mean == 0:
        return 0.0
    return (1 + mean) * math.log2(1 + mean) - mean * math.log2(mean)


def _truncated_geometric(log_theta, support):
    log_weights = log_theta * support
    log_norm = logsumexp(log_weights)
    probs = np.exp(log_weights - log_norm)
    return probs, log_norm


def max_entropy_integer_power(power_bound, support_cap):
    """
    Largest entropy of an integer variable on {0..support_cap} with mean <= power_bound.

    The maximizer is a truncated geometric law; its parameter comes from a
    line search on the mean. The assembled bound on a complex integer
    variable is 2 * (1 + H(z)).

    Returns:
        IntegerPowerEntropy(h_z, bound, theta)
    """
    if not power_bound > 0:
        throw(f"power_bound must be positive, got {power_bound}", DomainError)
    if support_cap < 16:
        throw(f"support_cap must be at least 16, got {support_cap}", DomainError)
    support = np.arange(support_cap + 1, dtype=float)

    if power_bound >= support_cap / 2:
        h_z = math.log2(support_cap + 1)
        return IntegerPowerEntropy(h_z, 2 * (1 + h_z), 1.0)

    def excess(log_theta):
        probs, _ = _truncated_geometric(log_theta, support)
        return float(probs @ support) - power_bound

    log_theta = brentq(excess, -745.0, 0.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    probs, log_norm = _truncated_geometric(log_theta, support)
    mean = float(probs @ support)
    h_z = max(0.0, (log_norm - log_theta * mean) / math.log(2))
    return IntegerPowerEntropy(h_z, 2 * (1 + h_z), math.exp(log_theta))


def _half_line_bins(sigma):
    """Probabilities of [k, k+1) for k = 1, 2, ... until the tail is negligible."""
    probs = []
    k = 1
    while norm.sf(k / sigma) >= TAIL_MASS:
        probs.append(norm.sf(k / sigma) - norm.sf((k + 1) / sigma))
        k += 1
    return np.array(probs)


def quantized_gaussian_entropy(variance_per_component):
    """
    Entropy in bits of [z] for complex Gaussian z with the given per-component variance.

    Cells follow truncation toward zero: 0 collects (-1, 1), k >= 1 collects
    [k, k+1) and -k collects (-k-1, -k].
    """
    if not variance_per_component > 0:
        throw(f"Variance must be positive, got {variance_per_component}", DomainError)
    sigma = math.sqrt(variance_per_component)
    zero = 1.0 - 2.0 * norm.sf(1.0 / sigma)
    side = _half_line_bins(sigma)
    per_component = np.concatenate([[zero], side, side])
    return 2.0 * entropy_bits(per_component)
