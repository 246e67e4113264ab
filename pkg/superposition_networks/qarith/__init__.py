from superposition_networks.qarith.qarith import (
    FixedInput,
    GInt,
    bit_depth,
    dsm_link,
    dsm_link_array,
    fixed_inputs,
    input_values,
    quantize,
    quantize_array,
    truncate_input,
    truncate_input_array,
)

__all__ = [
    "FixedInput",
    "GInt",
    "bit_depth",
    "dsm_link",
    "dsm_link_array",
    "fixed_inputs",
    "input_values",
    "quantize",
    "quantize_array",
    "truncate_input",
    "truncate_input_array",
]
