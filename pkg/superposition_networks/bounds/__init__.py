from superposition_networks.bounds.bounds import (
    MIN_SIDE_INFO_SAMPLES,
    GapConstants,
    GenieSplit,
    IntegerPowerEntropy,
    SideInformation,
    gap_constants,
    genie_decompose,
    genie_decompose_array,
    genie_side_info_entropy,
    genie_side_info_report,
    geometric_entropy,
    max_entropy_integer_power,
    quantized_gaussian_entropy,
)

__all__ = [
    "MIN_SIDE_INFO_SAMPLES",
    "GapConstants",
    "GenieSplit",
    "IntegerPowerEntropy",
    "SideInformation",
    "gap_constants",
    "genie_decompose",
    "genie_decompose_array",
    "genie_side_info_entropy",
    "genie_side_info_report",
    "geometric_entropy",
    "max_entropy_integer_power",
    "quantized_gaussian_entropy",
]
