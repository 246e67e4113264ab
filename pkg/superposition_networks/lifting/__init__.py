from superposition_networks.lifting.dsm_code import (
    DsmCode,
    Simulation,
    load_code,
    load_code_file,
    purge_report,
    purge_zero_error,
    reception_key,
    simulate_dsm,
)
from superposition_networks.lifting.interference import (
    SandwichReport,
    TransformedGaussianSampler,
    difference_side_information,
    ic_input_transform,
    ic_input_transform_array,
    ic_sandwich,
    posterior_side_information,
    sandwich_violations,
    side_information,
    transformed_gaussian_law,
)
from superposition_networks.lifting.lifting import (
    ExtendedCode,
    LiftedCode,
    Schedule,
    TrialReport,
    TypicalSet,
    block_extend,
    interleave_schedule,
    lift,
    lift_decode_step,
    measure_side_information,
    measured_prune_exponent,
    prune,
    run_lifted,
    typical_outputs,
)

__all__ = [
    "DsmCode",
    "ExtendedCode",
    "LiftedCode",
    "SandwichReport",
    "Schedule",
    "Simulation",
    "TransformedGaussianSampler",
    "TrialReport",
    "TypicalSet",
    "block_extend",
    "difference_side_information",
    "ic_input_transform",
    "ic_input_transform_array",
    "ic_sandwich",
    "interleave_schedule",
    "lift",
    "lift_decode_step",
    "load_code",
    "load_code_file",
    "measure_side_information",
    "measured_prune_exponent",
    "posterior_side_information",
    "prune",
    "purge_report",
    "purge_zero_error",
    "reception_key",
    "run_lifted",
    "sandwich_violations",
    "side_information",
    "simulate_dsm",
    "transformed_gaussian_law",
    "typical_outputs",
]
