# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Interference networks: mapping Gaussian inputs onto discrete superposition
inputs and bracketing per-user rates between the two models.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from superposition_networks import log_error, logger, throw
from superposition_networks.bounds import (
    MIN_SIDE_INFO_SAMPLES,
    gap_constants,
    genie_side_info_report,
    quantized_gaussian_entropy,
)
from superposition_networks.capacity import (
    DiscreteInput,
    GaussianSampler,
    InputSampler,
    UniformSampler,
    dsm_mi_exact,
    mi_monte_carlo,
    plugin_entropy,
)
from superposition_networks.exceptions import BoundViolationError, DomainError, LimitExceededError, ModeError
from superposition_networks.models import derive_dsm, dsm_receive_array, gaussian_receive_array
from superposition_networks.network import scale_gains
from superposition_networks.qarith import dsm_link_array, input_values, quantize, quantize_array, truncate_input
from superposition_networks.qarith.qarith import INV_SQRT2, truncate_input_array

NOISE_VARIANCE_PER_COMPONENT = 0.5
_TAIL_TERMS = 12
_UPPER = math.nextafter(INV_SQRT2, 0.0)
POSTERIOR_CAP = 1 << 12
_POSTERIOR_CHUNK = 1 << 22


def _shift(fractional):
    return (fractional + 1.0 + 1.0j) / (2.0 * math.sqrt(2.0))


def ic_input_transform(x, n):
    """
    Gaussian sample to DSM input: fractional part, shift into the positive
    quadrant, scale by 1/(2 sqrt 2), keep n bits per component.
    """
    x = complex(x)
    fractional = x - complex(quantize(x))
    shifted = _shift(fractional)
    shifted = complex(min(max(shifted.real, 0.0), _UPPER), min(max(shifted.imag, 0.0), _UPPER))
    return truncate_input(shifted, n)


def ic_input_transform_array(values, n):
    """Vectorized ic_input_transform; returns FixedInput symbols."""
    values = np.asarray(values, dtype=np.complex128)
    shifted = _shift(values - quantize_array(values))
    shifted = np.clip(shifted.real, 0.0, _UPPER) + 1j * np.clip(shifted.imag, 0.0, _UPPER)
    re_bits, im_bits = truncate_input_array(shifted, n)
    return (re_bits << n) | im_bits


def scaled_inputs(values):
    """(x - [x] + 1 + 1i) / (2 sqrt 2): the real-valued input before truncation."""
    values = np.asarray(values, dtype=np.complex128)
    return _shift(values - quantize_array(values))


def _fraction_mass(lo, hi, sigma):
    """P(x - trunc(x) in [lo, hi)) for x ~ N(0, sigma^2) and -1 <= lo < hi <= 1."""
    mass = 0.0
    a, b = max(lo, 0.0), max(hi, 0.0)
    if b > a:
        for k in range(_TAIL_TERMS):
            mass += norm.cdf((k + b) / sigma) - norm.cdf((k + a) / sigma)
    a, b = min(lo, 0.0), min(hi, 0.0)
    if b > a:
        for k in range(_TAIL_TERMS):
            mass += norm.cdf((b - k) / sigma) - norm.cdf((a - k) / sigma)
    return mass


def transformed_gaussian_law(n):
    """Exact law of ic_input_transform(x, n) for x ~ CN(0, 1)."""
    if n < 0:
        throw(f"Bit depth must be non-negative, got {n}", DomainError)
    sigma = math.sqrt(NOISE_VARIANCE_PER_COMPONENT)
    levels = 1 << n
    edges = np.linspace(-1.0, 1.0, levels + 1)
    component = np.array([_fraction_mass(edges[b], edges[b + 1], sigma) for b in range(levels)])
    component = component / component.sum()
    return DiscreteInput.from_components(n, component, component)


class TransformedGaussianSampler(InputSampler):
    """CN(0, 1) draws pushed through ic_input_transform."""

    def __init__(self, n):
        self.n = n

    def draw(self, rng, size):
        gaussian = GaussianSampler().draw(rng, size)
        return ic_input_transform_array(gaussian, self.n)


@dataclass
class SandwichReport:
    points: list
    ledger: list
    constants: dict
    seed: int
    samples: int
    violations: list = field(default_factory=list)

    CSV_HEADER = (
        "gain_scale",
        "user",
        "rate_gaussian",
        "rate_dsm",
        "rate_dsm_uniform",
        "genie_bits",
        "side_information_bits",
        "side_information_method",
        "rate_lifted",
        "gap_gaussian_minus_dsm",
        "gap_dsm_minus_lifted",
    )

    def csv_rows(self):
        return [[point[key] for key in self.CSV_HEADER] for point in self.points]

    def as_dict(self):
        return {
            "points": self.points,
            "ledger": self.ledger,
            "constants": self.constants,
            "seed": self.seed,
            "samples": self.samples,
            "violations": self.violations,
        }


def _dsm_rate(model, laws, sender, receiver, samples, seed, sampler):
    try:
        return dsm_mi_exact(model, laws, [sender], [receiver]).value
    except LimitExceededError:
        logger("lifting").warning(f"Falling back to Monte Carlo for user at transmitter {sender}")
        return mi_monte_carlo(model, sampler, [sender], [receiver], samples, seed, bootstrap=0).value


def _residual_ledger(topology, model, transmitters, receivers, samples, rng):
    """Per receiver log2(1 + 8 sum_k E|w_kj|^2) with w_kj = h_kj x_k - [[h_kj] x'_k]."""
    drawn = {}
    for node in transmitters:
        gaussian = GaussianSampler().draw(rng, samples)
        scaled = scaled_inputs(gaussian)
        symbols = ic_input_transform_array(gaussian, model.n)
        mask = (1 << model.n) - 1
        scale = 2.0 ** -model.n * INV_SQRT2
        truncated = ((symbols >> model.n) & mask) * scale + 1j * (symbols & mask) * scale
        drawn[node] = (scaled, truncated)
    rows = []
    for receiver in receivers:
        power = 0.0
        for edge in topology.in_edges(receiver):
            scaled, truncated = drawn[edge.src]
            residual = edge.gain * scaled - dsm_link_array(model.gains[(edge.src, receiver)], truncated)
            power += float(np.mean(np.abs(residual) ** 2))
        rows.append({"receiver": receiver, "residual_power": power, "residual_bits": math.log2(1 + 8 * power)})
    return rows


def _uniform_receptions(model, receiver):
    """Noiseless Gaussian and DSM receptions at ``receiver`` for every joint input of its in-neighbours."""
    values = input_values(model.n)
    mean = np.zeros(1, dtype=np.complex128)
    dsm = np.zeros(1, dtype=np.complex128)
    for edge in model.topology.in_edges(receiver):
        link_mean = edge.gain * values
        link_dsm = dsm_link_array(model.gains[(edge.src, receiver)], values)
        mean = (mean[:, None] + link_mean[None, :]).reshape(-1)
        dsm = (dsm[:, None] + link_dsm[None, :]).reshape(-1)
    return mean, dsm


def posterior_side_information(model, receiver, samples, seed, cap=POSTERIOR_CAP):
    """
    H(y'_receiver | y_receiver) in bits for uniform inputs at every
    in-neighbour and CN(0, 1) noise.

    The posterior over the DSM reception is exact given the noisy Gaussian
    reception; its entropy is averaged over seeded draws. Joint input
    alphabets above ``cap`` raise LimitExceededError.
    """
    edges = model.topology.in_edges(receiver)
    if not edges:
        return 0.0
    alphabet = 1 << (2 * model.n * len(edges))
    if alphabet > cap:
        throw(
            f"Receiver {receiver}: joint input alphabet {alphabet} exceeds the posterior cap {cap}",
            LimitExceededError,
        )
    mean, dsm = _uniform_receptions(model, receiver)
    _, index = np.unique(dsm, return_inverse=True)
    index = index.reshape(-1)
    outputs = int(index.max()) + 1

    rng = np.random.default_rng(seed)
    rows = rng.integers(0, len(mean), size=samples)
    noise = (rng.standard_normal(samples) + 1j * rng.standard_normal(samples)) / math.sqrt(2)
    received = mean[rows] + noise
    step = max(1, _POSTERIOR_CHUNK // len(mean))
    total = 0.0
    for start in range(0, samples, step):
        y = received[start : start + step]
        loglik = -np.abs(y[:, None] - mean[None, :]) ** 2
        weights = np.exp(loglik - logsumexp(loglik, axis=1, keepdims=True))
        cells = (np.arange(len(y))[:, None] * outputs + index[None, :]).reshape(-1)
        posterior = np.bincount(cells, weights=weights.reshape(-1), minlength=len(y) * outputs)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(posterior > 0, -posterior * np.log2(posterior), 0.0)
        total += float(terms.sum())
    return total / samples


def difference_side_information(model, receiver, samples, seed):
    """Plug-in H(y' - [y]) at ``receiver``, an upper bound on H(y' | y) for uniform inputs."""
    edges = model.topology.in_edges(receiver)
    if not edges:
        return 0.0
    rng = np.random.default_rng(seed)
    values = input_values(model.n)
    tx = {edge.src: values[rng.integers(0, len(values), size=samples)] for edge in edges}
    noise = (rng.standard_normal(samples) + 1j * rng.standard_normal(samples)) / math.sqrt(2)
    y = gaussian_receive_array(model.topology, receiver, tx) + noise
    return plugin_entropy(dsm_receive_array(model, receiver, tx) - quantize_array(y))


def side_information(model, receiver, samples, seed):
    """(bits, method): the posterior estimate when enumerable, else the difference bound."""
    try:
        return posterior_side_information(model, receiver, samples, seed), "posterior"
    except LimitExceededError as e:
        logger("lifting").info(f"{e}; using the difference bound")
        return difference_side_information(model, receiver, samples, seed), "difference-bound"


def sandwich_violations(points, ledger, constants):
    """Messages for every sandwich gap and ledger entry over its bound."""
    violations = []
    for point in points:
        if point["gap_gaussian_minus_dsm"] > constants.kappa_ic:
            violations.append(f"user {point['user']} at scale {point['gain_scale']}: Gaussian minus DSM")
        if point["gap_dsm_minus_lifted"] > constants.kappa_ic_lift:
            violations.append(f"user {point['user']} at scale {point['gain_scale']}: DSM minus lifted")
    for entry in ledger:
        if entry["fractional_split_bits"] > entry["fractional_split_bound"]:
            violations.append(f"fractional split at scale {entry['gain_scale']}")
        for row in entry["residual"]:
            if row["residual_bits"] > entry["residual_bound"]:
                violations.append(f"residual at receiver {row['receiver']}, scale {entry['gain_scale']}")
    return violations


def ic_sandwich(topology, snr_grid, samples, seed, check=True):
    """
    Per-user rates of the Gaussian and discrete superposition interference
    networks over a grid of gain scales.

    rate_gaussian is the closed-form rate with CN(0, 1) inputs and
    interference treated as noise. rate_dsm uses transformed Gaussian inputs.
    rate_lifted subtracts the side information H(y' | y) at the receiver from
    the uniform-input DSM rate. Both gaps are checked against the constants
    for K users. genie_bits carries the three-term genie bound alongside.
    """
    if topology.mode != "interference":
        throw("ic_sandwich needs an interference network", ModeError)
    if samples < MIN_SIDE_INFO_SAMPLES:
        throw(f"ic_sandwich needs at least {MIN_SIDE_INFO_SAMPLES} samples, got {samples}", DomainError)
    K = topology.K
    constants = gap_constants(max(1, 2 * K - 1), K)
    users = sorted({node.user for node in topology.nodes if node.role == "transmitter"})
    transmitters = [topology.transmitter(user) for user in users]
    receivers = [topology.receiver(user) for user in users]
    report = SandwichReport([], [], constants.as_dict(), seed, samples)
    rng = np.random.default_rng(seed)

    for scale in snr_grid:
        scaled = scale_gains(topology, scale)
        if not scaled.edges:
            for user in users:
                report.points.append(_point(scale, user, 0.0, 0.0, 0.0, 0.0, (0.0, "posterior")))
            continue
        model = derive_dsm(scaled)
        law = transformed_gaussian_law(model.n)
        uniform = DiscreteInput.uniform(model.n)
        gaussian = {node: GaussianSampler() for node in transmitters}
        for user, sender, receiver in zip(users, transmitters, receivers):
            rate_gaussian = mi_monte_carlo(scaled, gaussian, [sender], [receiver], samples, seed).value
            rate_dsm = _dsm_rate(
                model,
                {node: law for node in transmitters},
                sender,
                receiver,
                samples,
                seed,
                {node: TransformedGaussianSampler(model.n) for node in transmitters},
            )
            rate_uniform = _dsm_rate(
                model,
                {node: uniform for node in transmitters},
                sender,
                receiver,
                samples,
                seed,
                {node: UniformSampler(model.n) for node in transmitters},
            )
            genie = genie_side_info_report(scaled, receiver, samples, seed, check=False).total
            side = side_information(model, receiver, samples, seed)
            report.points.append(_point(scale, user, rate_gaussian, rate_dsm, rate_uniform, genie, side))

        split = {str(node): plugin_entropy(quantize_array(GaussianSampler().draw(rng, samples))) for node in transmitters}
        report.ledger.append(
            {
                "gain_scale": scale,
                "n": model.n,
                "fractional_split_bits": sum(split.values()),
                "fractional_split_per_transmitter": split,
                "fractional_split_closed_form": K * quantized_gaussian_entropy(NOISE_VARIANCE_PER_COMPONENT),
                "fractional_split_bound": 6 * K,
                "residual": _residual_ledger(scaled, model, transmitters, receivers, samples, rng),
                "residual_bound": math.log2(1 + 144 * K),
            }
        )

    report.violations = sandwich_violations(report.points, report.ledger, constants)
    if report.violations:
        log_error("; ".join(report.violations), "Interference Sandwich Violation")
        if check:
            throw(f"Sandwich bounds violated: {report.violations}", BoundViolationError)
    return report


def _point(scale, user, rate_gaussian, rate_dsm, rate_uniform, genie, side):
    side_bits, method = side
    rate_lifted = max(0.0, rate_uniform - side_bits)
    return {
        "gain_scale": scale,
        "user": user,
        "rate_gaussian": rate_gaussian,
        "rate_dsm": rate_dsm,
        "rate_dsm_uniform": rate_uniform,
        "genie_bits": genie,
        "side_information_bits": side_bits,
        "side_information_method": method,
        "rate_lifted": rate_lifted,
        "gap_gaussian_minus_dsm": rate_gaussian - rate_dsm,
        "gap_dsm_minus_lifted": rate_uniform - rate_lifted,
    }
