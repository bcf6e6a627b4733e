"""Exhaustive enumeration of selections and of zero-sum vertices."""

from colorful_balancing.oracle.oracle import (
    OracleResult,
    brute_force_min,
    enumerate_zero_vertices,
    selection_count,
)

__all__ = ["OracleResult", "brute_force_min", "enumerate_zero_vertices", "selection_count"]
