"""Vertex finding for the zero-sum polytope and fractional core extraction."""

from colorful_balancing.reduction.reduction import (
    FEASIBILITY_TOL,
    ZERO_SUM_TOL,
    ReductionCore,
    extract_core,
    find_zero_vertex,
    standard_form,
)

__all__ = [
    "FEASIBILITY_TOL",
    "ZERO_SUM_TOL",
    "ReductionCore",
    "extract_core",
    "find_zero_vertex",
    "standard_form",
]
