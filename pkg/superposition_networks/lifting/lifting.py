# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Lifting a zero-error code of the discrete superposition network to the
Gaussian network: block extension, typical receptions, random pruning and
nearest-candidate decoding at every receiving node.
"""

import hashlib
import heapq
import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logsumexp

from superposition_networks import logger, throw
from superposition_networks.exceptions import (
    DecodingBudgetError,
    DecodingError,
    DomainError,
    LimitExceededError,
    ModeError,
)
from superposition_networks.lifting.dsm_code import (
    check_compatible,
    processing_order,
    receive_symbol,
    simulate_dsm,
)
from superposition_networks.models import gaussian_receive_array
from superposition_networks.network import is_leveled

EXPLICIT_TYPICAL_CAP = 1 << 18
EXPLICIT_SELECTION_CAP = 1 << 16
EXPLICIT_CODEBOOK_CAP = 1 << 16
SIZE_ESTIMATE_DRAWS = 1 << 14
SEARCH_BUDGET = 1 << 16
SAMPLE_ATTEMPTS = 1 << 20


@dataclass(frozen=True, eq=False)
class BaseTables:
    """Noiseless behaviour of every base codeword, indexed by reception symbol."""

    receivers: tuple
    destinations: frozenset
    alphabet: dict
    index: dict
    probs: dict
    means: dict
    relay_out: dict
    decoded: dict


def _noiseless(topology, node, values, length):
    return np.broadcast_to(gaussian_receive_array(topology, node, values), (length,))


def tabulate(code, model):
    check_compatible(code, model)
    topology = model.topology
    source = topology.source_ids[0]
    receivers = tuple(node for node in topology.node_ids if node != source)
    runs = [simulate_dsm(code, model, row) for row in range(code.size)]
    tables = BaseTables(receivers, frozenset(topology.destinations), {}, {}, {}, {}, {}, {})

    noiseless = []
    for run in runs:
        values = {node: code.values(symbols) for node, symbols in run.transmissions.items()}
        noiseless.append({node: _noiseless(topology, node, values, code.N) for node in receivers})

    for node in receivers:
        received = [run.receptions[node] for run in runs]
        symbols = sorted(set(received))
        lookup = {value: a for a, value in enumerate(symbols)}
        index = np.array([lookup[value] for value in received], dtype=np.int64)
        gauss = np.array([row[node] for row in noiseless]).reshape(code.size, code.N)
        tables.alphabet[node] = symbols
        tables.index[node] = index
        tables.probs[node] = np.bincount(index, minlength=len(symbols)) / code.size
        tables.means[node] = np.array([gauss[index == a].mean(axis=0) for a in range(len(symbols))])
        if node in tables.destinations:
            tables.decoded[node] = [code.decode(value) for value in symbols]
        elif code.mode == "blockwise":
            tables.relay_out[node] = [code.relay_block(node, value) for value in symbols]
    return tables


@dataclass(frozen=True, eq=False)
class ExtendedCode:
    """m base codewords adjoined; kept implicit, messages are tuples of base rows."""

    code: object
    model: object
    tables: BaseTables
    m: int

    @property
    def size(self):
        return self.code.size**self.m

    @property
    def length(self):
        return self.m * self.code.N

    @property
    def rate(self):
        return self.code.rate

    def codeword(self, rows):
        return np.concatenate([self.code.codebook[row] for row in rows])

    def receptions(self, node, rows):
        """Alphabet indices of the noiseless per-block receptions at ``node``."""
        return tuple(int(a) for a in self.tables.index[node][np.asarray(rows, dtype=np.int64)])


def block_extend(code, model, m, cap=1 << 40):
    """
    Adjoin m codewords of ``code``; relays act block by block with the base maps.
    """
    if not isinstance(m, int) or m < 1:
        throw(f"Extension factor must be a positive integer, got {m!r}", DomainError)
    if code.size**m > cap:
        throw(f"Extended codebook {code.size}^{m} exceeds the cap {cap}", LimitExceededError)
    return ExtendedCode(code, model, tabulate(code, model), m)


@dataclass(frozen=True, eq=False)
class TypicalSet:
    node: int
    m: int
    epsilon: float
    probs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    size: int
    members: np.ndarray | None = None

    @property
    def entropy(self):
        probs = self.probs[self.probs > 0]
        return float(-np.sum(probs * np.log2(probs)))

    @property
    def log2_size(self):
        return math.log2(self.size) if self.size else float("-inf")

    @property
    def tolerance(self):
        probs = self.probs[self.probs > 0]
        return float(self.epsilon * np.sum(-np.log2(probs)))

    def contains(self, sequence):
        counts = np.bincount(np.asarray(sequence, dtype=np.int64), minlength=len(self.probs))
        return bool(np.all(counts >= self.lower) and np.all(counts <= self.upper))

    def report(self):
        per_block = self.log2_size / self.m if self.size else None
        return {
            "node": self.node,
            "m": self.m,
            "epsilon": self.epsilon,
            "size": self.size,
            "log2_size": self.log2_size if self.size else None,
            "log2_size_per_block": per_block,
            "entropy": self.entropy,
            "tolerance": self.tolerance,
            "within_bounds": per_block is not None and per_block <= self.entropy + self.tolerance + 1e-9,
        }


def _count_sequences(lower, upper, m):
    """Number of length-m sequences whose symbol counts lie in the boxes."""
    ways = [1] + [0] * m
    for lo, hi in zip(lower.tolist(), upper.tolist()):
        step = [0] * (m + 1)
        for total, count in enumerate(ways):
            if not count:
                continue
            for c in range(lo, min(hi, m - total) + 1):
                step[total + c] += count * math.comb(total + c, c)
        ways = step
    return ways[m]


def typical_outputs(extended, node, epsilon):
    """
    Strongly typical reception sequences of ``node``.

    A length-m sequence of base receptions is typical when every symbol's
    empirical frequency is within ``epsilon`` of its base-code probability.
    At m = 1 every realized reception is typical. Small sets are listed
    explicitly in lexicographic order.
    """
    if not epsilon > 0:
        throw(f"epsilon must be positive, got {epsilon}", DomainError)
    if node not in extended.tables.probs:
        throw(f"Node {node} receives nothing in this network", DomainError)
    m = extended.m
    probs = extended.tables.probs[node]
    if m == 1:
        lower = np.zeros(len(probs), dtype=np.int64)
        upper = np.ones(len(probs), dtype=np.int64)
    else:
        lower = np.maximum(0, np.ceil(m * (probs - epsilon) - 1e-9)).astype(np.int64)
        upper = np.minimum(m, np.floor(m * (probs + epsilon) + 1e-9)).astype(np.int64)
    size = _count_sequences(lower, upper, m)
    typical = TypicalSet(node, m, float(epsilon), probs, lower, upper, size)

    members = None
    if len(probs) ** m <= EXPLICIT_TYPICAL_CAP:
        listed = [seq for seq in itertools.product(range(len(probs)), repeat=m) if typical.contains(seq)]
        members = np.array(listed, dtype=np.int64).reshape(len(listed), m)
    typical = TypicalSet(node, m, float(epsilon), probs, lower, upper, size, members)
    logger("lifting").info(
        f"Node {node}: {size} typical sequences, {typical.log2_size / m:.4f} bits/block vs H={typical.entropy:.4f}"
    )
    return typical


def _unit_hash(seed, node, sequence):
    key = f"{seed}:{node}".encode()
    digest = hashlib.blake2b(np.asarray(sequence, dtype=np.int64).tobytes(), key=key, digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2**64


@dataclass(frozen=True, eq=False)
class SelectedSet:
    """S_j: a random fraction of node j's typical set."""

    typical: TypicalSet
    fraction: float
    seed: int
    members: frozenset | None = None
    ordered: np.ndarray | None = None

    @property
    def node(self):
        return self.typical.node

    @property
    def size(self):
        if self.members is not None:
            return len(self.members)
        return self.typical.size * self.fraction

    def contains(self, sequence):
        sequence = tuple(int(a) for a in sequence)
        if self.members is not None:
            return sequence in self.members
        return self.typical.contains(sequence) and _unit_hash(self.seed, self.node, sequence) < self.fraction


@dataclass(frozen=True, eq=False)
class LiftedCode:
    extended: ExtendedCode
    typical_sets: dict
    selected: dict
    epsilon: float
    prune_exponent: float
    eta: float
    seed: int
    fraction: float
    codebook: np.ndarray | None
    log2_size: float | None
    predicted_log2_size: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self):
        return self.extended.m

    @property
    def empty(self):
        return self.log2_size is None

    @property
    def rate(self):
        return 0.0 if self.empty else self.log2_size / self.extended.length

    def contains(self, rows):
        return all(sel.contains(self.extended.receptions(node, rows)) for node, sel in self.selected.items())

    def sample(self, rng):
        """A uniform message of C_G as a tuple of base rows."""
        if self.empty:
            throw("The pruned codebook is empty", DecodingError)
        if self.codebook is not None:
            return tuple(int(r) for r in self.codebook[rng.integers(len(self.codebook))])
        for _ in range(SAMPLE_ATTEMPTS):
            rows = tuple(int(r) for r in rng.integers(0, self.extended.code.size, size=self.m))
            if self.contains(rows):
                return rows
        throw(f"No codeword of C_G found in {SAMPLE_ATTEMPTS} draws", DecodingError)

    def summary(self):
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "prune_exponent": self.prune_exponent,
            "eta": self.eta,
            "seed": self.seed,
            "fraction": self.fraction,
            "log2_size": self.log2_size,
            "predicted_log2_size": self.predicted_log2_size,
            "rate": self.rate,
            "empty": self.empty,
            "typical_sets": [self.typical_sets[node].report() for node in sorted(self.typical_sets)],
            "diagnostics": dict(self.diagnostics),
        }


def _select(typical, fraction, seed, rng):
    if typical.members is not None and typical.size <= EXPLICIT_SELECTION_CAP:
        keep = math.ceil(typical.size * fraction - 1e-9)
        order = rng.permutation(typical.size)
        chosen = typical.members[np.sort(order[:keep])]
        return SelectedSet(typical, fraction, seed, frozenset(map(tuple, chosen.tolist())), chosen)
    return SelectedSet(typical, fraction, seed)


def prune(extended, typical_sets, exponent, seed, eta=0.0):
    """
    Keep a 2^(-m(N exponent + 2 eta)) fraction of every typical set and the
    codewords whose receptions land in all of them.

    Returns a LiftedCode; an empty C_G is reported, not raised.
    """
    if exponent < 0 or eta < 0:
        throw(f"Prune exponent and eta must be non-negative, got {exponent}, {eta}", DomainError)
    m, N = extended.m, extended.code.N
    fraction = 2.0 ** (-m * (N * exponent + 2 * eta))
    rng = np.random.default_rng(seed)
    selected = {node: _select(typical_sets[node], fraction, seed, rng) for node in sorted(typical_sets)}
    lifted = LiftedCode(
        extended,
        dict(typical_sets),
        selected,
        next(iter(typical_sets.values())).epsilon if typical_sets else 0.0,
        float(exponent),
        float(eta),
        seed,
        fraction,
        None,
        None,
        m * math.log2(extended.code.size) - m * len(typical_sets) * N * exponent,
    )

    diagnostics = {"selected_sizes": {str(node): sel.size for node, sel in selected.items()}}
    if extended.size <= EXPLICIT_CODEBOOK_CAP:
        everything = np.array(list(itertools.product(range(extended.code.size), repeat=m)), dtype=np.int64)
        kept = np.array([lifted.contains(rows) for rows in everything], dtype=bool)
        codebook = everything[kept].reshape(-1, m)
        log2_size = math.log2(len(codebook)) if len(codebook) else None
        diagnostics["method"] = "enumeration"
    else:
        draws = rng.integers(0, extended.code.size, size=(SIZE_ESTIMATE_DRAWS, m))
        accepted = sum(lifted.contains(rows) for rows in draws)
        codebook = None
        log2_size = math.log2(extended.size) + math.log2(accepted / SIZE_ESTIMATE_DRAWS) if accepted else None
        diagnostics["method"] = "sampled"
        diagnostics["accepted_draws"] = int(accepted)
        diagnostics["draws"] = SIZE_ESTIMATE_DRAWS
    if log2_size is None:
        diagnostics["reason"] = "no codeword has every reception in the selected sets"
        logger("lifting").warning(f"Pruning with exponent {exponent} emptied C_G (seed {seed})")

    return LiftedCode(
        extended,
        dict(typical_sets),
        selected,
        lifted.epsilon,
        lifted.prune_exponent,
        lifted.eta,
        seed,
        fraction,
        codebook,
        log2_size,
        lifted.predicted_log2_size,
        diagnostics,
    )


def lift(code, model, m, epsilon, exponent, seed, eta=0.0):
    """Block extension, typical sets at every receiving node and pruning in one call."""
    extended = block_extend(code, model, m)
    typical = {node: typical_outputs(extended, node, epsilon) for node in extended.tables.receivers}
    return prune(extended, typical, exponent, seed, eta)


def measure_side_information(code, model, node, samples, seed):
    """
    H(y'_node | y_node) in bits per block for uniform base codewords and CN(0, 1) noise.

    The posterior over the node's DSM reception is exact given the noisy
    Gaussian reception; its entropy is averaged over seeded draws.
    """
    tables = tabulate(code, model)
    if node not in tables.index:
        throw(f"Node {node} receives nothing in this network", DomainError)
    rng = np.random.default_rng(seed)
    index = tables.index[node]
    topology = model.topology
    runs = [simulate_dsm(code, model, row) for row in range(code.size)]
    means = np.array(
        [
            _noiseless(topology, node, {k: code.values(v) for k, v in run.transmissions.items()}, code.N)
            for run in runs
        ]
    )
    rows = rng.integers(0, code.size, size=samples)
    noise = (rng.standard_normal((samples, code.N)) + 1j * rng.standard_normal((samples, code.N))) / math.sqrt(2)
    received = means[rows] + noise
    loglik = -np.sum(np.abs(received[:, None, :] - means[None, :, :]) ** 2, axis=2)
    total = logsumexp(loglik, axis=1)
    posterior = np.stack(
        [np.exp(logsumexp(loglik[:, index == a], axis=1) - total) for a in range(len(tables.alphabet[node]))],
        axis=1,
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(posterior > 0, -posterior * np.log2(posterior), 0.0)
    return float(terms.sum(axis=1).mean())


def measured_prune_exponent(code, model, samples, seed):
    """Largest H(y'_j | y_j) over receiving nodes, per channel use."""
    tables = tabulate(code, model)
    per_node = {
        node: measure_side_information(code, model, node, samples, seed + offset)
        for offset, node in enumerate(tables.receivers)
    }
    logger("lifting").info(f"Measured side information per block: {per_node}")
    return max(per_node.values(), default=0.0) / code.N


def _decode_indices(lifted, node, y_gauss, budget):
    tables = lifted.extended.tables
    m, N = lifted.m, lifted.extended.code.N
    means = tables.means[node]
    y = np.asarray(y_gauss, dtype=np.complex128).reshape(m, N)
    cost = np.sum(np.abs(y[:, None, :] - means[None, :, :]) ** 2, axis=2)
    selected = lifted.selected[node]

    if selected.ordered is not None:
        if not len(selected.ordered):
            throw(f"Node {node}: selected set is empty", DecodingError)
        totals = cost[np.arange(m), selected.ordered].sum(axis=1)
        return tuple(int(a) for a in selected.ordered[int(np.argmin(totals))])

    order = np.argsort(cost, axis=1, kind="stable")
    ranked = np.take_along_axis(cost, order, axis=1)
    width = order.shape[1]
    start = (0,) * m
    heap = [(float(ranked[:, 0].sum()), tuple(int(a) for a in order[:, 0]), start)]
    seen = {start}
    for _ in range(budget):
        if not heap:
            break
        total, sequence, ranks = heapq.heappop(heap)
        if selected.contains(sequence):
            return sequence
        for b in range(m):
            if ranks[b] + 1 < width:
                step = ranks[:b] + (ranks[b] + 1,) + ranks[b + 1 :]
                if step in seen:
                    continue
                seen.add(step)
                candidate = sequence[:b] + (int(order[b, step[b]]),) + sequence[b + 1 :]
                heapq.heappush(heap, (total + float(ranked[b, step[b]] - ranked[b, ranks[b]]), candidate, step))
    throw(f"Node {node}: no member of the selected set within {budget} candidates", DecodingBudgetError)


def lift_decode_step(lifted, node, y_gauss, budget=SEARCH_BUDGET):
    """
    Nearest member of S_node to the noisy Gaussian reception.

    Candidates are compared through their nominal noiseless Gaussian
    receptions. Ties go to the lexicographically smallest sequence.
    """
    alphabet = lifted.extended.tables.alphabet[node]
    sequence = _decode_indices(lifted, node, y_gauss, budget)
    return tuple(g for a in sequence for g in alphabet[a])


@dataclass(frozen=True)
class TrialReport:
    trials: int
    block_errors: int
    empirical_rate: float
    seed: int
    slack: float = 0.0
    ledger: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.block_errors <= self.trials:
            throw(f"block_errors={self.block_errors} outside [0, {self.trials}]", DomainError)

    @property
    def error_rate(self):
        return self.block_errors / self.trials if self.trials else 0.0

    def as_dict(self):
        data = asdict(self)
        data["error_rate"] = self.error_rate
        return data


def run_lifted(topology, lifted, trials, seed, noise_scale=1.0, budget=SEARCH_BUDGET):
    """
    Monte Carlo block error of the lifted code over the Gaussian network.

    Every trial draws a uniform message of C_G and fresh CN(0, 1) noise
    (times ``noise_scale``) with its own generator. Relays decode their
    block, re-encode it with the base maps and forward; the destination
    decodes every block with the base decoder.
    """
    extended = lifted.extended
    code, tables = extended.code, extended.tables
    if code.mode != "blockwise":
        throw("run_lifted follows the blockwise path; use interleave_schedule for per-time codes", ModeError)
    if not is_leveled(topology):
        throw("run_lifted needs a leveled network", ModeError)
    if lifted.empty:
        throw("The pruned codebook is empty; nothing to transmit", DecodingError)

    source = topology.source_ids[0]
    order = processing_order(topology)
    errors = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        rows = lifted.sample(rng)
        tx = {source: code.values(extended.codeword(rows))}
        correct = True
        for node in order:
            noise = noise_scale * (
                rng.standard_normal(extended.length) + 1j * rng.standard_normal(extended.length)
            ) / math.sqrt(2)
            received = gaussian_receive_array(topology, node, tx, noise)
            try:
                sequence = _decode_indices(lifted, node, received, budget)
            except DecodingBudgetError:
                correct = False
                break
            if node in tables.destinations:
                decoded = [tables.decoded[node][a] for a in sequence]
                correct = correct and decoded == [code.messages[row] for row in rows]
            else:
                tx[node] = code.values(np.concatenate([tables.relay_out[node][a] for a in sequence]))
        errors += not correct

    receivers = len(lifted.typical_sets)
    predicted = code.rate - receivers * lifted.prune_exponent
    ledger = {
        "base_rate": code.rate,
        "prune_exponent": lifted.prune_exponent,
        "receiving_nodes": receivers,
        "predicted_rate": predicted,
        "log2_pruned_size": lifted.log2_size,
        "predicted_log2_size": lifted.predicted_log2_size,
        "fraction": lifted.fraction,
        "noise_scale": noise_scale,
    }
    report = TrialReport(trials, errors, lifted.rate, seed, predicted - lifted.rate, ledger)
    logger("lifting").info(
        f"Seed {seed}: {errors}/{trials} block errors at {lifted.rate:.4f} bits/use (ledger {predicted:.4f})"
    )
    return report


@dataclass(frozen=True)
class Schedule:
    rounds: tuple
    causality: dict
    deinterleaved: dict
    decoded: tuple

    @property
    def shape(self):
        return (len(self.rounds), len(self.rounds[0]["source"]) if self.rounds else 0)


def interleave_schedule(code, model, m, rows=None):
    """
    Run m uses of a per-time code in lockstep.

    Round t carries the t-th symbol of every codeword. A relay's round-t
    symbols are computed before any round-t reception exists.
    """
    if code.mode != "per-time":
        throw("Interleaving needs per-time relay maps; blockwise codes go through run_lifted", ModeError)
    if not isinstance(m, int) or m < 1:
        throw(f"m must be a positive integer, got {m!r}", DomainError)
    check_compatible(code, model)
    topology = model.topology
    rows = list(rows) if rows is not None else [b % code.size for b in range(m)]
    if len(rows) != m:
        throw(f"Expected {m} codeword rows, got {len(rows)}", DomainError)

    source = topology.source_ids[0]
    relays = [node.id for node in topology.nodes if node.role == "relay"]
    listeners = [node for node in topology.node_ids if node != source]
    history = {node: [[] for _ in range(m)] for node in listeners}
    sent = {node: [[] for _ in range(m)] for node in relays}
    rounds, causality = [], {node: [] for node in relays}
    for t in range(code.N):
        available = {node: len(history[node][0]) for node in relays}
        for node in relays:
            causality[node].append(list(range(available[node])))
            for b in range(m):
                sent[node][b].append(code.relay_symbol(node, t, tuple(history[node][b])))
        record = {
            "round": t,
            "source": [int(code.codebook[row][t]) for row in rows],
            "relays": {node: [sent[node][b][t] for b in range(m)] for node in relays},
            "receptions": {},
        }
        for node in listeners:
            column = []
            for b, row in enumerate(rows):
                current = {source: code.codebook[row], **{r: sent[r][b] for r in relays}}
                value = receive_symbol(model, node, current, t, code.n)
                history[node][b].append(value)
                column.append(value)
            record["receptions"][node] = column
        rounds.append(record)

    deinterleaved = {node: [tuple(history[node][b]) for b in range(m)] for node in listeners}
    decoded = tuple(
        tuple(code.decode(deinterleaved[node][b]) for b in range(m)) for node in topology.destinations
    )
    return Schedule(tuple(rounds), causality, deinterleaved, decoded)
