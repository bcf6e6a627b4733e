"""Euclidean rounding by sampling and by conditional expectations."""

from colorful_balancing.euclid.euclid import (
    RoundingTrace,
    conditional_expectation,
    derandomized_select,
    sample_selection,
)

__all__ = [
    "RoundingTrace",
    "conditional_expectation",
    "derandomized_select",
    "sample_selection",
]
