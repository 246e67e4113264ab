# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

import csv
import json
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from superposition_networks import clear_error_log, error_log, hooks, log_error, logger, set_log_level, throw
from superposition_networks.bounds import (
    gap_constants,
    genie_side_info_report,
    geometric_entropy,
    max_entropy_integer_power,
    quantized_gaussian_entropy,
)
from superposition_networks.capacity import (
    DiscreteInput,
    UniformSampler,
    dsm_mi_exact,
    gap_report,
    mi_monte_carlo,
    multicast_cut_values,
)
from superposition_networks.exceptions import BoundViolationError, DomainError, ModeError, ValidationError
from superposition_networks.experiment_config import ExperimentConfig
from superposition_networks.lifting import (
    difference_side_information,
    ic_input_transform,
    ic_sandwich,
    lift,
    load_code,
    measured_prune_exponent,
    posterior_side_information,
    purge_zero_error,
    run_lifted,
)
from superposition_networks.models import derive_dsm, derive_ldm, ldm_receive_int
from superposition_networks.network import load_topology, random_topology
from superposition_networks.qarith import FixedInput, GInt, quantize_array

_GENIE_NETWORKS = 5
_LIFT_EXPONENT_SAMPLES = 20000


def _jsonable(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, GInt):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def render_report(config, result):
    payload = {
        "config": config.as_dict(),
        "seed": config.seed,
        "success": result["success"],
        "message": result["message"],
        "result": result.get("data"),
        "error_log": error_log(),
    }
    return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"


def write_report(config, name, result):
    """
    Write ``<name>.json`` (and ``<name>.csv`` when the runner produced rows)
    to the output directory, or print the JSON when no directory is set.
    """
    text = render_report(config, result)
    if not config.output:
        click.echo(text, nl=False)
        return
    directory = Path(config.output)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{name}.json").write_text(text)
    if result.get("csv"):
        header, rows = result["csv"]
        with open(directory / f"{name}.csv", "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(["" if value is None else value for value in row])
    logger("commands").info(f"Wrote {name} report to {directory}")


def _load_network(config, default=None, parameters=None):
    with open(config.network_path(default)) as handle:
        document = json.load(handle)
    return document, load_topology(document, parameters)


def run_derive(config):
    _, topology = _load_network(config)
    dsm = derive_dsm(topology)
    ldm, note = None, None
    if config.model in ("all", "ldm"):
        try:
            ldm = derive_ldm(topology)
        except DomainError as e:
            note = str(e)
    links, rows = [], []
    for edge in dsm.topology.edges:
        link = {"from": edge.src, "to": edge.dst, "gain": edge.gain}
        if config.model in ("all", "dsm"):
            link["dsm_gain"] = dsm.gains[(edge.src, edge.dst)]
        if ldm is not None:
            link["ldm_shift"] = ldm.shifts.get((edge.src, edge.dst))
        links.append(link)
        rows.append([edge.src, edge.dst, edge.gain.real, edge.gain.imag, link.get("dsm_gain"), link.get("ldm_shift")])
    data = {"mode": topology.mode, "n": dsm.n, "q": None if ldm is None else ldm.q, "links": links, "ldm_note": note}
    header = ("from", "to", "gain_re", "gain_im", "dsm_gain", "ldm_shift")
    return {"success": True, "message": f"Derived models for {len(links)} links", "data": data, "csv": (header, rows)}


def run_capacity(config):
    _, topology = _load_network(config)
    if topology.mode == "interference":
        throw("Interference networks have per-user rates; use ic-sandwich", ModeError)
    if topology.mode == "multicast":
        values = multicast_cut_values(topology, limit=config.cut_limit)
        rows = [[destination, value] for destination, value in sorted(values["per_destination"].items())]
        return {
            "success": True,
            "message": f"Multicast cut-set value {values['multicast']:.6f} bits",
            "data": values,
            "csv": (("destination", "gaussian_bits"), rows),
        }
    report = gap_report(topology, config.resolution, limit=config.cut_limit)
    data = report.as_dict()
    if config.model != "all":
        data["cut_set_bound"] = report.minima[config.model]
    return {
        "success": True,
        "message": f"{len(report.rows)} cuts evaluated",
        "data": data,
        "csv": (report.CSV_HEADER, report.csv_rows()),
    }


def run_gap(config):
    document = None
    points, rows = [], []
    for k in config.h_exponents:
        if document is None:
            document, topology = _load_network(config, "phase_pair", {config.sweep_parameter: 2.0**k})
        else:
            topology = load_topology(document, {config.sweep_parameter: 2.0**k})
        report = gap_report(topology, config.resolution, limit=config.cut_limit)
        point = {"h_exponent": k, **report.minima, **report.gaps, "dsm_min_partial": report.partial}
        points.append(point)
        rows.append([k, *report.minima.values(), *report.gaps.values(), report.partial])
    header = (
        "h_exponent",
        "gaussian_bits",
        "ldm_bits",
        "dsm_bits",
        "gaussian_minus_ldm",
        "gaussian_minus_dsm",
        "ldm_minus_dsm",
        "dsm_min_partial",
    )
    return {"success": True, "message": f"{len(points)} gain exponents", "data": points, "csv": (header, rows)}


def run_bounds(config):
    constants = gap_constants(config.M, config.K, config.L).as_dict()
    rows = [[name, value] for name, value in sorted(constants.items())]
    return {"success": True, "message": "Gap constants", "data": constants, "csv": (("name", "value"), rows)}


def _listening_nodes(topology):
    if topology.mode == "interference":
        return [node.id for node in topology.nodes if node.role == "receiver"]
    sources = set(topology.source_ids)
    return [node for node in topology.node_ids if node not in sources and topology.in_edges(node)]


def run_genie(config):
    _, topology = _load_network(config)
    nodes = [config.node] if config.node is not None else _listening_nodes(topology)
    reports = [
        genie_side_info_report(topology, node, config.samples, config.seed, config.noiseless).as_dict()
        for node in nodes
    ]
    header = ("node", "h_qv", "h_qz", "h_carry", "total", "bound")
    rows = [[report[key] for key in header] for report in reports]
    return {"success": True, "message": f"Side information within bounds at {len(nodes)} nodes", "data": reports, "csv": (header, rows)}


def _lift_seed(job):
    """One seed of the lifting experiment; runs in a worker process."""
    network, code_document, m, epsilon, exponent, eta, trials, seed = job
    topology = load_topology(network)
    model = derive_dsm(topology)
    code = purge_zero_error(load_code(code_document), model)
    lifted = lift(code, model, m, epsilon, exponent, seed, eta)
    result = {"seed": seed, "lifted": lifted.summary(), "empty": lifted.empty}
    if not lifted.empty:
        result["trials"] = run_lifted(topology, lifted, trials, seed).as_dict()
    return result


def run_lift(config):
    network, topology = _load_network(config, "diamond")
    with open(config.code_path()) as handle:
        code_document = json.load(handle)
    model = derive_dsm(topology)
    code = purge_zero_error(load_code(code_document), model)
    exponent = config.prune_exponent
    if exponent is None:
        exponent = measured_prune_exponent(code, model, min(config.samples, _LIFT_EXPONENT_SAMPLES), config.seed)

    seeds = [config.seed + offset for offset in range(config.seeds)]
    jobs = [(network, code_document, config.m, config.epsilon, exponent, config.eta, config.trials, s) for s in seeds]
    workers = min(hooks.get_max_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_lift_seed, jobs))
    else:
        results = [_lift_seed(job) for job in jobs]

    receivers = len([node for node in topology.node_ids if node not in topology.source_ids])
    floor = code.rate - receivers * exponent - 0.5
    filled = [r for r in results if not r["empty"]]
    error_rates = [r["trials"]["error_rate"] for r in filled]
    rates = [r["trials"]["empirical_rate"] for r in filled]
    summary = {
        "base_rate": code.rate,
        "prune_exponent": exponent,
        "rate_floor": floor,
        "non_empty_seeds": len(filled),
        "median_error_rate": statistics.median(error_rates) if error_rates else None,
        "rate_mean": statistics.fmean(rates) if rates else None,
        "rate_variance": statistics.pvariance(rates) if len(rates) > 1 else 0.0,
    }
    failures = []
    if len(filled) < math.ceil(0.9 * len(seeds)):
        failures.append(f"C_G empty in {len(seeds) - len(filled)} of {len(seeds)} seeds")
    if error_rates and summary["median_error_rate"] > 0.05:
        failures.append(f"median block error {summary['median_error_rate']:.4f} above 0.05")
    if any(rate < floor for rate in rates):
        failures.append(f"empirical rate below {floor:.4f} bits/use")

    header = ("seed", "empty", "log2_size", "empirical_rate", "block_errors", "trials", "error_rate")
    rows = []
    for r in results:
        trials = r.get("trials") or {}
        rows.append(
            [
                r["seed"],
                r["empty"],
                r["lifted"]["log2_size"],
                trials.get("empirical_rate"),
                trials.get("block_errors"),
                trials.get("trials"),
                trials.get("error_rate"),
            ]
        )
    data = {"summary": summary, "seeds": results}
    if failures:
        message = "; ".join(failures)
        log_error(message, "Lifting Acceptance")
        return {"success": False, "message": message, "data": data, "csv": (header, rows), "exit_code": 2}
    return {"success": True, "message": f"Lifted code works in {len(filled)} of {len(seeds)} seeds", "data": data, "csv": (header, rows)}


def run_ic_sandwich(config):
    _, topology = _load_network(config, "ic2x2")
    report = ic_sandwich(topology, config.snr_grid, config.samples, config.seed, check=False)
    result = {"data": report.as_dict(), "csv": (report.CSV_HEADER, report.csv_rows())}
    if report.violations:
        return {**result, "success": False, "message": "; ".join(report.violations), "exit_code": 2}
    return {**result, "success": True, "message": f"Both directions hold at {len(report.points)} points"}


def _check_quantizer(seed):
    rng = np.random.default_rng(seed)
    values = rng.uniform(-50, 50, 100000) + 1j * rng.uniform(-50, 50, 100000)
    q = quantize_array(values)
    ok = np.array_equal(quantize_array(-values), -q) and np.array_equal(quantize_array(q), q)
    ok = ok and np.all(np.abs(values.real - q.real) < 1) and np.all(np.abs(values.imag - q.imag) < 1)
    return bool(ok), "sign symmetry, idempotence and unit error on 1e5 draws"


def _check_ldm_linearity(seed):
    rng = np.random.default_rng(seed)
    model = derive_ldm(random_topology(2, seed))
    destination = model.topology.destinations[0]
    senders = [edge.src for edge in model.topology.in_edges(destination)]
    for _ in range(1000):
        x = {node: int(rng.integers(0, 1 << model.q)) for node in senders}
        y = {node: int(rng.integers(0, 1 << model.q)) for node in senders}
        both = {node: x[node] ^ y[node] for node in senders}
        separate = ldm_receive_int(model, destination, x) ^ ldm_receive_int(model, destination, y)
        if ldm_receive_int(model, destination, both) != separate:
            return False, "ldm_receive is not F2-linear"
    return True, "F2 linearity on 1000 random input pairs"


def _check_phase_pair(seed):
    with open(Path(__file__).resolve().parent / hooks.fixtures["phase_pair"]) as handle:
        document = json.load(handle)
    gaussian_ldm = []
    gaussian_dsm = []
    for k in (2, 3, 4, 5):
        report = gap_report(load_topology(document, {"h": 2.0**k}))
        row = next(r for r in report.rows if r["cut"] == "{0,1,2}")
        expected = 2 * math.log2(1 + 2 * 4**k)
        if abs(row["gaussian_bits"] - expected) > 1e-9 or row["ldm_bits"] != 2 * k:
            return False, f"cut values off at k={k}"
        if row["dsm_bits"] is None:
            return False, f"no DSM cut value at k={k}"
        gaussian_ldm.append(row["gaussian_bits"] - row["ldm_bits"])
        gaussian_dsm.append(row["gaussian_bits"] - row["dsm_bits"])
    if gaussian_ldm[-1] - gaussian_ldm[0] < 5:
        return False, f"Gaussian-LDM gap does not grow: {gaussian_ldm}"
    if max(gaussian_dsm) - min(gaussian_dsm) > 5:
        return False, f"Gaussian-DSM gap varies by more than 5 bits: {gaussian_dsm}"
    return True, "Gaussian-LDM gap grows and Gaussian-DSM gap stays flat for h = 4..32"


def _check_genie(seed):
    for offset in range(_GENIE_NETWORKS):
        topology = random_topology(3, seed + offset)
        for node in topology.node_ids[1:]:
            report = genie_side_info_report(topology, node, 20000, seed + offset)
            if any(abs(c) > 2 for c in report.carry_values):
                return False, f"carry {report.carry_values} outside [-2, 2]"
    return True, f"reconstruction and side-information bound on {_GENIE_NETWORKS} random networks"


def _check_constants(seed):
    for M in (1, 2, 3, 7):
        for K in (1, 2, 3):
            c = gap_constants(M, K, 1)
            if (c.kappa_mimo_relay, c.kappa_mimo_ic, c.kappa_mimo_ic_lift) != (c.kappa_relay, c.kappa_ic, c.kappa_ic_lift):
                return False, f"single-antenna reduction fails at M={M}, K={K}"
    return True, "single-antenna constants reduce to the scalar ones"


def _check_entropy_bounds(seed):
    ok = abs(geometric_entropy(1.0) - 2.0) <= 1e-9
    ok = ok and max_entropy_integer_power(1.0, 4096).bound <= 6 + 1e-9
    ok = ok and quantized_gaussian_entropy(0.5) <= 6
    return ok, "geometric entropy 2 bits, integer-power and quantized-Gaussian bounds below 6 bits"


def _check_mi_agreement(seed):
    topology = load_topology(
        {
            "mode": "relay",
            "nodes": [{"id": 0, "role": "source"}, {"id": 1, "role": "destination"}],
            "edges": [{"from": 0, "to": 1, "gain_re": 4.0, "gain_im": 0.0}],
        }
    )
    model = derive_dsm(topology)
    exact = dsm_mi_exact(model, {0: DiscreteInput.uniform(model.n)}, [0], [1]).value
    estimate = mi_monte_carlo(model, UniformSampler(model.n), [0], [1], 20000, seed)
    again = mi_monte_carlo(model, UniformSampler(model.n), [0], [1], 20000, seed)
    ok = abs(estimate.value - exact) <= estimate.half_width + 0.05 and estimate == again
    return ok, f"exact {exact:.4f} vs Monte Carlo {estimate.value:.4f} +/- {estimate.half_width:.4f}"


def _check_lifting(seed):
    root = Path(__file__).resolve().parent
    topology = load_topology(json.loads((root / hooks.fixtures["diamond"]).read_text()))
    model = derive_dsm(topology)
    code = load_code(json.loads((root / hooks.fixtures["diamond_code"]).read_text()))
    lifted = lift(code, model, 2, 1.0, 0.0, seed)
    report = run_lifted(topology, lifted, 20, seed, noise_scale=0.0)
    return report.block_errors == 0, f"{report.block_errors} block errors in noiseless lifted runs"


def _check_input_transform(seed):
    ok = ic_input_transform(1.7 - 0.3j, 2) == FixedInput(2, 3, 1)
    return ok, "1.7-0.3i maps to bits (3, 1) at n = 2"


def _check_side_information(seed):
    with open(Path(__file__).resolve().parent / hooks.fixtures["ic2x2"]) as handle:
        topology = load_topology(json.load(handle), {"g": 4})
    model = derive_dsm(topology)
    for receiver in (2, 3):
        posterior = posterior_side_information(model, receiver, 10000, seed)
        difference = difference_side_information(model, receiver, 10000, seed)
        genie = genie_side_info_report(topology, receiver, 10000, seed).total
        if posterior > difference + 0.1 or difference > genie + 1e-9:
            return False, f"receiver {receiver}: posterior {posterior:.4f}, difference {difference:.4f}, genie {genie:.4f}"
    return True, "posterior H(y'|y) below the difference bound, which is below the genie bound"


def _check_determinism(seed):
    config = ExperimentConfig.from_sources("genie", overrides={"network": "diamond", "samples": 10000, "seed": seed})
    texts = {render_report(config, run_genie(config)) for _ in range(3)}
    return len(texts) == 1, "three genie runs with one seed give byte-identical reports"


VERIFY_CHECKS = (
    ("quantizer", _check_quantizer),
    ("ldm_linearity", _check_ldm_linearity),
    ("phase_pair_cut", _check_phase_pair),
    ("genie", _check_genie),
    ("constants", _check_constants),
    ("entropy_bounds", _check_entropy_bounds),
    ("mi_agreement", _check_mi_agreement),
    ("lifting_noiseless", _check_lifting),
    ("input_transform", _check_input_transform),
    ("side_information", _check_side_information),
    ("determinism", _check_determinism),
)


def run_verify(config):
    results = []
    for name, check in VERIFY_CHECKS:
        try:
            success, message = check(config.seed)
        except (ValidationError, BoundViolationError) as e:
            success, message = False, str(e)
        if not success:
            log_error(message, f"Verify {name}")
        results.append({"name": name, "success": bool(success), "message": message})
        logger("commands").info(f"verify {name}: {'ok' if success else 'FAILED'} ({message})")
    failed = [r["name"] for r in results if not r["success"]]
    rows = [[r["name"], r["success"], r["message"]] for r in results]
    result = {"data": results, "csv": (("name", "success", "message"), rows)}
    if failed:
        return {**result, "success": False, "message": f"Failed checks: {', '.join(failed)}", "exit_code": 2}
    return {**result, "success": True, "message": f"All {len(results)} checks passed"}


RUNNERS = {
    "derive": run_derive,
    "capacity": run_capacity,
    "gap": run_gap,
    "bounds": run_bounds,
    "genie": run_genie,
    "lift": run_lift,
    "ic-sandwich": run_ic_sandwich,
    "verify": run_verify,
}


def execute(name, options):
    """Resolve the config, run the subcommand and write its report; returns the exit code."""
    config_file = options.pop("config_file", None)
    if options.pop("verbose", False):
        set_log_level("INFO")
    clear_error_log()
    try:
        config = ExperimentConfig.from_sources(name, config_file, options)
    except (ValidationError, OSError, json.JSONDecodeError) as e:
        click.echo(f"Error: {e}", err=True)
        return 1
    try:
        result = RUNNERS[name](config)
    except BoundViolationError as e:
        log_error(str(e), "Bound Violation")
        result = {"success": False, "message": str(e), "exit_code": BoundViolationError.exit_code}
    except (ValidationError, OSError) as e:
        log_error(str(e), f"{name} failed")
        click.echo(f"Error: {e}", err=True)
        return ValidationError.exit_code
    write_report(config, name, result)
    if not result["success"]:
        click.echo(f"Error: {result['message']}", err=True)
        return result.get("exit_code", 2)
    return 0


_OPTIONS = {
    "network": click.option("--network", help="Network JSON file or shipped fixture name."),
    "model": click.option("--model", type=click.Choice(["all", "gaussian", "ldm", "dsm"])),
    "resolution": click.option("--resolution", type=click.Choice(["cut", "global"])),
    "cut_limit": click.option("--cut-limit", type=int),
    "sweep_parameter": click.option("--sweep-parameter", help="Network parameter set to 2^k."),
    "h_exponents": click.option("--h-exponents", help="Comma-separated gain exponents."),
    "snr_grid": click.option("--snr-grid", help="Comma-separated gain scales."),
    "M": click.option("--M", "M", type=int),
    "K": click.option("--K", "K", type=int),
    "L": click.option("--L", "L", type=int),
    "code": click.option("--code", help="DSM code JSON file or shipped fixture name."),
    "m": click.option("--m", "m", type=int, help="Block extension factor."),
    "epsilon": click.option("--epsilon", type=float),
    "prune_exponent": click.option("--prune-exponent", type=float),
    "eta": click.option("--eta", type=float),
    "trials": click.option("--trials", type=int),
    "seeds": click.option("--seeds", type=int),
    "samples": click.option("--samples", type=int),
    "node": click.option("--node", type=int),
    "noiseless": click.option("--noiseless", is_flag=True, default=None),
    "seed": click.option("--seed", type=int),
}


def experiment_options(*names):
    def decorate(command):
        for name in reversed(names):
            command = _OPTIONS[name](command)
        command = click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False))(command)
        command = click.option("--output", type=click.Path(file_okay=False))(command)
        command = click.option("--verbose", "-v", is_flag=True)(command)
        return command

    return decorate


@click.group(help="Deterministic counterparts of Gaussian networks, their gaps and code lifting.")
def cli():
    pass


@cli.command("derive")
@experiment_options("network", "model")
def derive(**options):
    """Quantized DSM gains and LDM shifts of a network."""
    return execute("derive", options)


@cli.command("capacity")
@experiment_options("network", "model", "resolution", "cut_limit")
def capacity(**options):
    """Per-cut values and cut-set bounds of the three models."""
    return execute("capacity", options)


@cli.command("gap")
@experiment_options("network", "sweep_parameter", "h_exponents", "resolution", "cut_limit")
def gap(**options):
    """Cut-set gaps between the models over a sweep of gain exponents."""
    return execute("gap", options)


@cli.command("bounds")
@experiment_options("M", "K", "L")
def bounds(**options):
    """Gap constants for M nodes, K users and L antennas."""
    return execute("bounds", options)


@cli.command("genie")
@experiment_options("network", "node", "samples", "noiseless", "seed")
def genie(**options):
    """Measured genie side information against its bound."""
    return execute("genie", options)


@cli.command("lift")
@experiment_options("network", "code", "m", "epsilon", "prune_exponent", "eta", "trials", "seeds", "samples", "seed")
def lift_command(**options):
    """Lift a DSM code to the Gaussian network and measure block errors."""
    return execute("lift", options)


@cli.command("ic-sandwich")
@experiment_options("network", "snr_grid", "samples", "seed")
def ic_sandwich_command(**options):
    """Gaussian and DSM rates of an interference network, both directions."""
    return execute("ic-sandwich", options)


@cli.command("verify")
@experiment_options("seed")
def verify(**options):
    """Run the property checks."""
    return execute("verify", options)


def main(argv=None):
    """Entry point; returns the process exit code."""
    try:
        code = cli.main(args=argv, prog_name="superposition-networks", standalone_mode=False)
    except click.ClickException as e:
        e.show(file=sys.stderr)
        return 1
    except click.Abort:
        click.echo("Aborted", err=True)
        return 1
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
