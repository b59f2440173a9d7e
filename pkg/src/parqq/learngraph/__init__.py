"""p-parallel learning graphs: edge sets, dual certificates, primal solver, witnesses."""

from .dual import (
    DualSolution,
    FeasibilityReport,
    ed_dual_certificate,
    ed_objective_closed_form,
    ksum_dual_certificate,
    ksum_stage_alpha,
    ed_stage_alpha,
    stage_objective,
    verify_dual_feasibility,
    verify_stage_dual,
)
from .edges import EdgeSetP, build_edge_set, edge_count
from .primal import PrimalSolution, check_primal_feasibility, solve_primal
from .witness import WitnessReport, random_input_pair, witness_from_primal

__all__ = [
    "DualSolution",
    "FeasibilityReport",
    "EdgeSetP",
    "PrimalSolution",
    "build_edge_set",
    "check_primal_feasibility",
    "ed_dual_certificate",
    "ed_objective_closed_form",
    "edge_count",
    "ksum_dual_certificate",
    "ksum_stage_alpha",
    "ed_stage_alpha",
    "stage_objective",
    "verify_stage_dual",
    "solve_primal",
    "verify_dual_feasibility",
    "WitnessReport",
    "random_input_pair",
    "witness_from_primal",
]
