from .matio import matrix_from_bytes, matrix_to_bytes, read_matrix, read_matrix_csv, write_matrix, write_matrix_csv
from .projectors import (
    ChainReport,
    GammaTilde,
    PhiReport,
    ProjectorFamily,
    build_gamma_tilde,
    lower_bound_chain,
    phi_J,
    phi_norm_closed_form,
)
from .ratio import (
    AdversaryInstance,
    LiftedFunction,
    RatioReport,
    adversary_ratio,
    block_bijection_query,
    check_fact1,
    delta_mask,
    or_adversary_instance,
    spectral_norm,
)

__all__ = [
    "AdversaryInstance",
    "ChainReport",
    "GammaTilde",
    "LiftedFunction",
    "PhiReport",
    "ProjectorFamily",
    "RatioReport",
    "adversary_ratio",
    "block_bijection_query",
    "build_gamma_tilde",
    "check_fact1",
    "delta_mask",
    "lower_bound_chain",
    "matrix_from_bytes",
    "matrix_to_bytes",
    "or_adversary_instance",
    "phi_J",
    "phi_norm_closed_form",
    "read_matrix",
    "read_matrix_csv",
    "spectral_norm",
    "write_matrix",
    "write_matrix_csv",
]
