"""Orthonormal bases, projections and seeded Gaussian sampling on subspaces."""

from colorful_balancing.linalg.linalg import (
    RANK_TOL,
    Rng,
    Subspace,
    gaussian_batch,
    gaussian_on,
    gram_schmidt,
    null_space_basis,
    project,
)

__all__ = [
    "RANK_TOL",
    "Rng",
    "Subspace",
    "gaussian_batch",
    "gaussian_on",
    "gram_schmidt",
    "null_space_basis",
    "project",
]
