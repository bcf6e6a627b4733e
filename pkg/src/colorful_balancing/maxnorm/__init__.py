"""Max-norm rounding by Gaussian walks in slab regions."""

from colorful_balancing.maxnorm.config import (
    FidelityMode,
    WalkConfig,
    default_delta,
    horizon,
    omega,
    practical_epsilon,
    solve_epsilon,
)
from colorful_balancing.maxnorm.maxnorm import (
    WalkStats,
    iterate_skeleton,
    maxnorm_bound,
    maxnorm_select,
    snap_to_vertex,
)
from colorful_balancing.maxnorm.walk import (
    GaussianWalk,
    RoundResult,
    SlabSystem,
    WalkOutcome,
    WalkState,
    WalkStatus,
    run_skeleton_round,
    skeleton_round,
)

__all__ = [
    "FidelityMode",
    "GaussianWalk",
    "RoundResult",
    "SlabSystem",
    "WalkConfig",
    "WalkOutcome",
    "WalkState",
    "WalkStats",
    "WalkStatus",
    "default_delta",
    "horizon",
    "iterate_skeleton",
    "maxnorm_bound",
    "maxnorm_select",
    "omega",
    "practical_epsilon",
    "run_skeleton_round",
    "skeleton_round",
    "snap_to_vertex",
    "solve_epsilon",
]
