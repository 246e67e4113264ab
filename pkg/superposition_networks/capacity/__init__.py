from superposition_networks.capacity.capacity import (
    ConstantSampler,
    DiscreteInput,
    GapReport,
    GaussianSampler,
    InputSampler,
    LawSampler,
    MiEstimate,
    UniformBitsSampler,
    UniformSampler,
    dsm_mi_exact,
    entropy_bits,
    gap_report,
    gaussian_cut_value,
    gf2_rank,
    ldm_cut_rank,
    mi_monte_carlo,
    multicast_cut_values,
    plugin_entropy,
)

__all__ = [
    "ConstantSampler",
    "DiscreteInput",
    "GapReport",
    "GaussianSampler",
    "InputSampler",
    "LawSampler",
    "MiEstimate",
    "UniformBitsSampler",
    "UniformSampler",
    "dsm_mi_exact",
    "entropy_bits",
    "gap_report",
    "gaussian_cut_value",
    "gf2_rank",
    "ldm_cut_rank",
    "mi_monte_carlo",
    "multicast_cut_values",
    "plugin_entropy",
]
