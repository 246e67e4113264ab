# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Capacity proxies for the three models.

Gaussian cut values are closed-form log-determinants, linear deterministic
cut values are F2 ranks, and discrete superposition values are mutual
informations computed by exact enumeration or plug-in Monte Carlo.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from superposition_networks import logger, throw
from superposition_networks.exceptions import DomainError, LimitExceededError, ValidationError
from superposition_networks.models import DsmModel, LdmModel, derive_dsm, derive_ldm
from superposition_networks.network import Topology, cut_sides, cut_transfer_matrix, enumerate_cuts, mimo_expand
from superposition_networks.qarith import bit_depth, dsm_link_array, input_values

DEFAULT_ENUMERATION_CAP = 2**24
BOOTSTRAP_ROUNDS = 200
_ROW_CHUNK = 2**21


@dataclass(frozen=True)
class MiEstimate:
    value: float
    half_width: float = 0.0
    method: str = "closed-form"
    samples: int | None = None

    def __post_init__(self):
        if self.half_width < 0:
            throw(f"Negative half width {self.half_width}", DomainError)
        if self.value < 0:
            object.__setattr__(self, "value", 0.0)

    def as_dict(self):
        return {"value": self.value, "half_width": self.half_width, "method": self.method, "samples": self.samples}


class DiscreteInput:
    """A distribution over the 4**n FixedInput symbols of one node."""

    def __init__(self, n, probs):
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (1 << (2 * n),):
            throw(f"Input law for n={n} needs {1 << (2 * n)} probabilities, got {probs.shape}", DomainError)
        if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, rel_tol=1e-9):
            throw("Input law must be a probability vector", DomainError)
        self.n = n
        self.probs = probs / probs.sum()

    @classmethod
    def uniform(cls, n):
        size = 1 << (2 * n)
        return cls(n, np.full(size, 1.0 / size))

    @classmethod
    def constant(cls, x):
        probs = np.zeros(1 << (2 * x.n))
        probs[x.symbol] = 1.0
        return cls(x.n, probs)

    @classmethod
    def from_components(cls, n, re_probs, im_probs):
        """Independent real and imaginary bit laws."""
        return cls(n, np.outer(re_probs, im_probs).reshape(-1))

    @classmethod
    def empirical(cls, n, symbols):
        counts = np.bincount(np.asarray(symbols, dtype=np.int64), minlength=1 << (2 * n))
        return cls(n, counts / counts.sum())

    def support(self):
        symbols = np.flatnonzero(self.probs > 0)
        return symbols, self.probs[symbols]

    @property
    def entropy(self):
        return entropy_bits(self.probs)


class InputSampler:
    """Seeded input source for Monte Carlo estimates."""

    kind = "discrete"
    n = 0

    def draw(self, rng, size):
        raise NotImplementedError


class UniformSampler(InputSampler):
    def __init__(self, n):
        self.n = n

    def draw(self, rng, size):
        return rng.integers(0, 1 << (2 * self.n), size=size)


class ConstantSampler(InputSampler):
    def __init__(self, x):
        self.n = x.n
        self.symbol = x.symbol

    def draw(self, rng, size):
        return np.full(size, self.symbol, dtype=np.int64)


class LawSampler(InputSampler):
    def __init__(self, law):
        self.n = law.n
        self.law = law

    def draw(self, rng, size):
        return rng.choice(len(self.law.probs), size=size, p=self.law.probs)


class UniformBitsSampler(InputSampler):
    """Uniform q-bit vectors for the linear deterministic model, as integers."""

    def __init__(self, q):
        self.q = q

    def draw(self, rng, size):
        return rng.integers(0, 1 << self.q, size=size) if self.q else np.zeros(size, dtype=np.int64)


class GaussianSampler(InputSampler):
    """i.i.d. CN(0, 1) inputs."""

    kind = "gaussian"

    def draw(self, rng, size):
        return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)


def entropy_bits(probs):
    probs = np.asarray(probs, dtype=float)
    probs = probs[probs > 0]
    return float(-np.sum(probs * np.log2(probs))) if probs.size else 0.0


def _group_rows(matrix):
    """Unique rows of an integer matrix and the inverse index of every row."""
    matrix = np.asarray(matrix, dtype=np.int64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.shape[0] == 0:
        return matrix, np.zeros(0, dtype=np.int64)
    if matrix.shape[1] == 0:
        return matrix[:1], np.zeros(matrix.shape[0], dtype=np.int64)
    mins = matrix.min(axis=0)
    radix = matrix.max(axis=0) - mins + 1
    if float(np.prod(radix.astype(float))) < 2.0**62:
        strides = np.ones(len(radix), dtype=np.int64)
        for column in range(len(radix) - 2, -1, -1):
            strides[column] = strides[column + 1] * radix[column + 1]
        keys = (matrix - mins) @ strides
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        return matrix[first], inverse.reshape(-1)
    unique, inverse = np.unique(matrix, axis=0, return_inverse=True)
    return unique, inverse.reshape(-1)


def plugin_entropy(values):
    """Plug-in entropy in bits of the rows (or entries) of ``values``."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        values = np.stack([values.real, values.imag], axis=-1).astype(np.int64)
    _, inverse = _group_rows(values)
    if inverse.size == 0:
        return 0.0
    counts = np.bincount(inverse)
    return entropy_bits(counts / counts.sum())


def _collapse(rows, probs):
    unique, inverse = _group_rows(rows)
    return unique, np.bincount(inverse, weights=probs, minlength=len(unique))


def _convolve(left, right):
    """Distribution of the sum of two independent integer vectors."""
    rows_a, probs_a = left
    rows_b, probs_b = right
    width = rows_a.shape[1]
    step = max(1, _ROW_CHUNK // max(1, len(rows_b)))
    result = None
    for start in range(0, len(rows_a), step):
        block_rows = (rows_a[start : start + step, None, :] + rows_b[None, :, :]).reshape(-1, width)
        block_probs = np.outer(probs_a[start : start + step], probs_b).reshape(-1)
        part = _collapse(block_rows, block_probs)
        if result is None:
            result = part
        else:
            result = _collapse(np.concatenate([result[0], part[0]]), np.concatenate([result[1], part[1]]))
    return result


def _point_mass(width):
    return np.zeros((1, width), dtype=np.int64), np.ones(1)


def _link_outputs(model, node_id, sinks, values):
    """Integer matrix of [[h_ij] x] over sinks, real and imaginary columns interleaved."""
    columns = []
    for sink in sinks:
        qh = model.gains.get((node_id, sink))
        out = np.zeros(len(values), dtype=np.complex128) if qh is None else dsm_link_array(qh, values)
        columns += [out.real, out.imag]
    return np.stack(columns, axis=1).astype(np.int64)


def _relevant(model, node_id, sinks):
    return any((node_id, sink) in model.gains for sink in sinks)


def dsm_mi_exact(model, inputs, sources, sinks, cap=DEFAULT_ENUMERATION_CAP):
    """
    Exact I(x_sources; y'_sinks) for independent discrete inputs.

    Nodes in ``inputs`` but not in ``sources`` act as independent
    interference. Nodes without a law in ``inputs`` stay silent.

    Args:
        model: DsmModel
        inputs: dict node -> DiscreteInput
        sources: nodes whose inputs carry the information
        sinks: receiving nodes
        cap: largest product of input support sizes to enumerate

    Returns:
        MiEstimate with method "exact-enumeration"
    """
    sources = sorted(sources)
    sinks = sorted(sinks)
    missing = [node for node in sources if node not in inputs]
    if missing:
        throw(f"No input law for source nodes {missing}", ValidationError)

    active = [node for node in sorted(inputs) if _relevant(model, node, sinks)]
    alphabet = 1
    for node in active:
        alphabet *= len(inputs[node].support()[0])
    if alphabet > cap:
        throw(
            f"Joint input alphabet {alphabet} exceeds the enumeration cap {cap}; use mi_monte_carlo instead",
            LimitExceededError,
        )

    width = 2 * len(sinks)
    signal = _point_mass(width)
    interference = _point_mass(width)
    for node in active:
        symbols, probs = inputs[node].support()
        rows = _link_outputs(model, node, sinks, input_values(inputs[node].n)[symbols])
        contribution = _collapse(rows, probs)
        if node in sources:
            signal = _convolve(signal, contribution)
        else:
            interference = _convolve(interference, contribution)

    received = _convolve(signal, interference)
    value = entropy_bits(received[1]) - entropy_bits(interference[1])
    logger("capacity").debug(f"Exact MI {value:.6f} bits over a joint alphabet of {alphabet}")
    return MiEstimate(max(0.0, value), 0.0, "exact-enumeration")


def _closed_form(topology, transmitters, sources, sinks):
    transmitters = sorted(transmitters)
    others = [node for node in transmitters if node not in sources]
    full = np.array([[topology.gain(i, j) for i in transmitters] for j in sinks], dtype=np.complex128)
    rest = np.array([[topology.gain(i, j) for i in others] for j in sinks], dtype=np.complex128)
    return _log_det_bits(full.reshape(len(sinks), -1)) - _log_det_bits(rest.reshape(len(sinks), -1))


def _log_det_bits(matrix):
    """log2 det(I + H H^*) through the singular values of H."""
    if matrix.size == 0:
        return 0.0
    singular = np.linalg.svd(matrix, compute_uv=False)
    value = float(np.sum(np.log2(1.0 + singular**2)))
    if not math.isfinite(value):
        throw("log-det is not finite in double precision; rescale the gains", DomainError)
    return value


def _discrete_outputs(model, sinks, draws, samplers):
    columns = []
    for sink in sinks:
        if isinstance(model, DsmModel):
            total = np.zeros(len(next(iter(draws.values()))), dtype=np.complex128)
            for edge in model.topology.in_edges(sink):
                if edge.src in draws:
                    values = input_values(samplers[edge.src].n)[draws[edge.src]]
                    total = total + dsm_link_array(model.gains[(edge.src, sink)], values)
            columns += [total.real.astype(np.int64), total.imag.astype(np.int64)]
        else:
            total = np.zeros(len(next(iter(draws.values()))), dtype=np.int64)
            for edge in model.topology.in_edges(sink):
                if edge.src in draws:
                    total = total ^ (draws[edge.src] >> model.shifts[(edge.src, sink)])
            columns.append(total)
    return np.stack(columns, axis=1)


def _mi_from_cells(counts, x_of_cell, y_of_cell):
    total = counts.sum()
    h_xy = entropy_bits(counts / total)
    h_x = entropy_bits(np.bincount(x_of_cell, weights=counts) / total)
    h_y = entropy_bits(np.bincount(y_of_cell, weights=counts) / total)
    return h_x + h_y - h_xy


def mi_monte_carlo(model, sampler, sources, sinks, samples, seed, bootstrap=BOOTSTRAP_ROUNDS):
    """
    Plug-in estimate of I(x_sources; y_sinks) from seeded draws.

    ``sampler`` is one InputSampler used for every source or a dict
    node -> InputSampler, where nodes outside ``sources`` are interference.
    Gaussian receivers with Gaussian inputs use the closed form; any other
    continuous-output request is refused. The half width is 1.96 bootstrap
    standard deviations of the joint count table.
    """
    if samples < 1000:
        throw(f"Monte Carlo needs at least 1000 samples, got {samples}", ValidationError)
    sources = sorted(sources)
    sinks = sorted(sinks)
    samplers = dict(sampler) if isinstance(sampler, dict) else {node: sampler for node in sources}
    missing = [node for node in sources if node not in samplers]
    if missing:
        throw(f"No sampler for source nodes {missing}", ValidationError)

    gaussian = [node for node, s in samplers.items() if s.kind == "gaussian"]
    if isinstance(model, Topology) or gaussian:
        if not isinstance(model, Topology) or len(gaussian) != len(samplers):
            throw(
                "Nonparametric mutual information for continuous outputs is not supported; "
                "use Gaussian inputs on a Gaussian model or discrete inputs on a deterministic model",
                DomainError,
            )
        return MiEstimate(_closed_form(model, samplers, sources, sinks), 0.0, "closed-form", samples)
    if not isinstance(model, (DsmModel, LdmModel)):
        throw(f"Unsupported model {type(model).__name__}", ValidationError)

    rng = np.random.default_rng(seed)
    draws = {node: np.asarray(samplers[node].draw(rng, samples), dtype=np.int64) for node in sorted(samplers)}
    x = np.stack([draws[node] for node in sources], axis=1)
    y = _discrete_outputs(model, sinks, draws, samplers)

    _, x_index = _group_rows(x)
    _, y_index = _group_rows(y)
    cells, cell_index = _group_rows(np.stack([x_index, y_index], axis=1))
    counts = np.bincount(cell_index, minlength=len(cells)).astype(float)
    x_of_cell, y_of_cell = cells[:, 0], cells[:, 1]
    value = _mi_from_cells(counts, x_of_cell, y_of_cell)

    replicates = rng.multinomial(samples, counts / counts.sum(), size=bootstrap).astype(float)
    spread = np.array([_mi_from_cells(row, x_of_cell, y_of_cell) for row in replicates])
    half_width = 1.96 * float(np.std(spread, ddof=1)) if bootstrap > 1 else 0.0
    logger("capacity").debug(
        f"Monte Carlo MI {value:.6f} +/- {half_width:.6f} bits, {len(cells)} joint cells from {samples} samples"
    )
    return MiEstimate(max(0.0, value), half_width, "monte-carlo", samples)


def gaussian_cut_value(topology, cut):
    """log2 det(I + H H^*) across the cut for i.i.d. CN(0, 1) inputs."""
    return MiEstimate(_log_det_bits(cut_transfer_matrix(topology, cut)), 0.0, "closed-form")


def gf2_rank(rows):
    """Rank over F2 of rows given as Python integers (bit i = column i)."""
    pivots = {}
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            if lead not in pivots:
                pivots[lead] = row
                break
            row ^= pivots[lead]
    return len(pivots)


def ldm_cut_rank(model, cut):
    """
    F2 rank of the cut's block matrix of shift matrices.

    Block (j, i) shifts q-bit vectors down by s_ij; row r of the block has
    a one in column r - s_ij.
    """
    rows, cols = cut_sides(model.topology, cut)
    q = model.q
    bitrows = []
    for j in rows:
        for r in range(q):
            value = 0
            for block, i in enumerate(cols):
                shift = model.shifts.get((i, j))
                if shift is not None and r - shift >= 0:
                    value |= 1 << (block * q + r - shift)
            bitrows.append(value)
    return gf2_rank(bitrows)


@dataclass
class GapReport:
    rows: list
    minima: dict
    gaps: dict
    partial: bool = False
    parameters: dict = field(default_factory=dict)

    CSV_HEADER = ("cut", "gaussian_bits", "ldm_bits", "dsm_bits")

    def csv_rows(self):
        return [[row["cut"], row["gaussian_bits"], row["ldm_bits"], row["dsm_bits"]] for row in self.rows]

    def as_dict(self):
        return {
            "rows": self.rows,
            "minima": self.minima,
            "gaps": self.gaps,
            "dsm_min_partial": self.partial,
            "parameters": self.parameters,
        }


def _crossing_gains(topology, cut):
    omega = cut.omega
    return [edge.gain for edge in topology.edges if edge.src in omega and edge.dst not in omega]


def _dsm_cut_value(topology, dsm, cut, resolution, cap):
    rows, cols = cut_sides(topology, cut)
    gains = _crossing_gains(topology, cut)
    if not gains:
        return MiEstimate(0.0, 0.0, "exact-enumeration")
    n = bit_depth(gains) if resolution == "cut" else dsm.n
    alphabet = 1 << (2 * n * len(cols))
    if alphabet > cap:
        throw(
            f"Cut {cut.label}: joint input alphabet 4^{n * len(cols)} exceeds the enumeration cap {cap}",
            LimitExceededError,
        )
    inputs = {node: DiscreteInput.uniform(n) for node in cols}
    return dsm_mi_exact(dsm, inputs, cols, rows, cap=cap)


def _difference(a, b):
    return None if a is None or b is None else a - b


def gap_report(topology, resolution="cut", cap=DEFAULT_ENUMERATION_CAP, limit=20):
    """
    Per-cut Gaussian, linear deterministic and discrete superposition values.

    DSM cut values use independent uniform inputs at the bit depth of the
    crossing gains (``resolution="cut"``) or of the whole network
    (``resolution="global"``). Cuts too large to enumerate get no DSM value
    and mark the DSM minimum as partial.
    """
    if resolution not in ("cut", "global"):
        throw(f"Unknown resolution {resolution!r}", ValidationError)
    if topology.mode != "relay":
        throw("Gap reports need a relay network", ValidationError)
    topology = mimo_expand(topology)
    dsm = derive_dsm(topology)
    try:
        ldm = derive_ldm(topology)
    except DomainError as e:
        logger("capacity").warning(f"No linear deterministic counterpart: {e}")
        ldm = None

    rows = []
    partial = False
    for cut in enumerate_cuts(topology, limit=limit):
        gaussian = gaussian_cut_value(topology, cut).value
        ldm_bits = ldm_cut_rank(ldm, cut) if ldm is not None else None
        try:
            dsm_bits = _dsm_cut_value(topology, dsm, cut, resolution, cap).value
        except LimitExceededError as e:
            logger("capacity").warning(f"Cut {cut.label}: DSM value not enumerated ({e})")
            dsm_bits = None
            partial = True
        rows.append({"cut": cut.label, "gaussian_bits": gaussian, "ldm_bits": ldm_bits, "dsm_bits": dsm_bits})

    def minimum(key):
        values = [row[key] for row in rows if row[key] is not None]
        return min(values) if values else None

    minima = {"gaussian": minimum("gaussian_bits"), "ldm": minimum("ldm_bits"), "dsm": minimum("dsm_bits")}
    gaps = {
        "gaussian_minus_ldm": _difference(minima["gaussian"], minima["ldm"]),
        "gaussian_minus_dsm": _difference(minima["gaussian"], minima["dsm"]),
        "ldm_minus_dsm": _difference(minima["ldm"], minima["dsm"]),
    }
    parameters = {"resolution": resolution, "cap": cap, "n": dsm.n, "q": None if ldm is None else ldm.q}
    parameters.update(dict(topology.parameters))
    return GapReport(rows, minima, gaps, partial, parameters)


def multicast_cut_values(topology, limit=20):
    """Gaussian min-cut per destination and the multicast cut-set value (their minimum)."""
    topology = mimo_expand(topology)
    destinations = sorted({topology.node(d).group_id for d in topology.destinations})
    per_destination = {}
    for group in destinations:
        destination = max(node.id for node in topology.nodes if node.group_id == group)
        cuts = enumerate_cuts(topology, destination=destination, limit=limit)
        per_destination[group] = min(gaussian_cut_value(topology, cut).value for cut in cuts)
    return {"per_destination": per_destination, "multicast": min(per_destination.values())}
