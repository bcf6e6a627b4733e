"""Instances, coefficient vectors, selections and their validation."""

from colorful_balancing.model.model import (
    FRACTIONAL_TOL,
    Coefficients,
    IndexPartition,
    Instance,
    NormKind,
    Selection,
    ValidationReport,
    concatenate,
    restrict,
    selection_norm,
    validate_instance,
)

__all__ = [
    "FRACTIONAL_TOL",
    "Coefficients",
    "IndexPartition",
    "Instance",
    "NormKind",
    "Selection",
    "ValidationReport",
    "concatenate",
    "restrict",
    "selection_norm",
    "validate_instance",
]
