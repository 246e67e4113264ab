app_name = "superposition_networks"
app_title = "Superposition Networks"
app_publisher = "superposition_networks contributors"
app_description = "Deterministic counterparts of Gaussian relay and interference networks, their cut-set gaps, and code lifting."
app_email = "maintainers@superposition-networks.invalid"
app_license = "mit"

# Commands
# ------------------
# Subcommands mounted by superposition_networks.commands, in help order.

commands = [
    "derive",
    "capacity",
    "gap",
    "bounds",
    "genie",
    "lift",
    "ic-sandwich",
    "verify",
]

# Subcommands that draw random numbers and therefore require a seed.
stochastic_commands = ["genie", "lift", "ic-sandwich"]

# Seed used by `verify` when none is given.
verify_seed = 20240601

# Shipped fixtures, relative to the package directory.
fixtures = {
    "layered": "network/fixtures/layered.json",
    "phase_pair": "network/fixtures/phase_pair.json",
    "diamond": "network/fixtures/diamond.json",
    "ic2x2": "network/fixtures/ic2x2.json",
    "diamond_code": "lifting/fixtures/diamond_code.json",
    "fig1": "network/fixtures/layered.json",
    "fig2": "network/fixtures/phase_pair.json",
}


def get_max_workers():
    """
    Worker process cap, read from SUPERPOSITION_MAX_WORKERS.
    """
    import os

    try:
        workers = int(os.environ.get("SUPERPOSITION_MAX_WORKERS", "1"))
    except ValueError:
        from superposition_networks import log_error

        log_error("SUPERPOSITION_MAX_WORKERS is not an integer, using 1", "Worker Cap")
        return 1
    return max(1, workers)
