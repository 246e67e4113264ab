from superposition_networks.models.models import (
    BitVec,
    DsmModel,
    LdmModel,
    derive_dsm,
    derive_ldm,
    dsm_receive,
    dsm_receive_array,
    gaussian_receive,
    gaussian_receive_array,
    ldm_receive,
    ldm_receive_int,
)

__all__ = [
    "BitVec",
    "DsmModel",
    "LdmModel",
    "derive_dsm",
    "derive_ldm",
    "dsm_receive",
    "dsm_receive_array",
    "gaussian_receive",
    "gaussian_receive_array",
    "ldm_receive",
    "ldm_receive_int",
]
