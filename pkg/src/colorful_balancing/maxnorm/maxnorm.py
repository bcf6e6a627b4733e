"""Max-norm rounding: repeated skeleton rounds followed by delta-snapping.

Each round restricts to the coordinates above ``delta`` in families that still
have two or more of them, walks there, and writes the result back. Every round
at least halves the active set, so the slab widths telescope to ``O(sqrt(d))``.
Once every family has a single coordinate above ``delta``, snapping that one to
1 and the others to 0 costs at most ``8 d^2 delta`` in every coordinate.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from colorful_balancing.exceptions import (
    AmbiguousFamilyError,
    InvariantViolationError,
    PreconditionViolatedError,
)
from colorful_balancing.linalg import Rng
from colorful_balancing.maxnorm.config import WalkConfig
from colorful_balancing.maxnorm.walk import run_skeleton_round
from colorful_balancing.model import (
    Coefficients,
    Instance,
    NormKind,
    Selection,
    concatenate,
    restrict,
)
from colorful_balancing.model.model import IntArray

logger = logging.getLogger(__name__)
telemetry = logging.getLogger("colorful_balancing.telemetry")

MOVEMENT_CONSTANT = 40.0
SNAP_CONSTANT = 8.0
BOUND_SLACK = 1e-9


def maxnorm_bound(d: int) -> float:
    """End-to-end guarantee ``48 sqrt(d)`` of :func:`maxnorm_select`."""
    return (MOVEMENT_CONSTANT + SNAP_CONSTANT) * math.sqrt(d)


@dataclass
class WalkStats:
    """Counters of one :func:`iterate_skeleton` call.

    Attributes:
        rounds: Skeleton rounds executed.
        restarts: Failed walk runs over all rounds.
        steps: Walk steps over all runs.
        movement: Sum of the slab widths ``omega(m(s))`` of the rounds.
        movement_budget: ``40 sqrt(d)``.
        local_budget: ``40 sqrt(m) sqrt(ln(4d / m))`` for ``m = |U|``.
        round_sizes: Active coordinate count ``m(s)`` of every round.
        snap_error: ``max_j |<chi, W^j>|`` of the final snapping, once known.
    """

    rounds: int = 0
    restarts: int = 0
    steps: int = 0
    movement: float = 0.0
    movement_budget: float = 0.0
    local_budget: float = 0.0
    round_sizes: list[int] = field(default_factory=list)
    snap_error: float = 0.0

    def to_dict(self) -> dict[str, object]:
        return asdict(self)


def _active_index(inst: Instance, entries: np.ndarray, delta: float) -> IntArray:
    """Coordinates above ``delta`` in families holding at least two of them."""
    above = entries > delta
    counts = np.bincount(inst.family_index[above], minlength=inst.n)
    return np.flatnonzero(above & (counts[inst.family_index] >= 2)).astype(np.int64)


def _check_budgets(stats: WalkStats) -> None:
    for name, budget in (
        ("40 sqrt(d)", stats.movement_budget),
        ("40 sqrt(m) sqrt(ln(4d/m))", stats.local_budget),
    ):
        if stats.movement > budget + BOUND_SLACK:
            msg = f"Total slab width {stats.movement:.6g} exceeds {name} = {budget:.6g}"
            raise InvariantViolationError(msg)


def iterate_skeleton(
    inst: Instance,
    lam: Coefficients,
    cfg: WalkConfig,
    rng: Rng | None = None,
) -> tuple[Coefficients, WalkStats]:
    """Reduce ``lambda`` to ``mu_hat`` with one coordinate above delta per family.

    Round ``s`` draws from ``rng.derive(s)``; ``rng`` defaults to the stream of
    ``cfg.seed``.

    Args:
        inst: The families ``U`` with ``m <= 2d``, members in the unit cube.
        lam: A point of ``Delta_U``.
        cfg: Walk parameters; ``delta`` defaults from ``d`` and the largest family.
        rng: Random stream.

    Returns:
        ``mu_hat`` and the round statistics.

    Raises:
        PreconditionViolatedError: If ``m > 2d`` or ``delta >= 1 / max_i |U_i|``.
        RestartsExhaustedError: If a round runs out of restarts.
        InvariantViolationError: If the active set fails to halve or the slab
            widths exceed their budgets.
    """
    if inst.m > 2 * inst.d:
        msg = f"Max-norm rounding needs m <= 2d, got m={inst.m}, d={inst.d}"
        raise PreconditionViolatedError(msg)
    problems = lam.violations()
    if problems:
        msg = "Coefficients are not a point of Delta_U: " + "; ".join(problems)
        raise ValueError(msg)
    largest = max(inst.family_sizes)
    cfg = cfg.with_delta(inst.d, largest)
    assert cfg.delta is not None
    delta = cfg.delta
    if delta * largest >= 1.0:
        msg = f"delta={delta} must be below 1 / max_i |U_i| = {1.0 / largest:.6g}"
        raise PreconditionViolatedError(msg)
    rng = Rng(cfg.seed) if rng is None else rng

    stats = WalkStats(
        movement_budget=MOVEMENT_CONSTANT * math.sqrt(inst.d),
        local_budget=MOVEMENT_CONSTANT * math.sqrt(inst.m * math.log(4.0 * inst.d / inst.m)),
    )
    current = Coefficients(lam.entries, inst)
    previous = inst.m
    while True:
        active = _active_index(inst, current.entries, delta)
        if active.size == 0:
            break
        # Rounds enforce halving themselves; failing here is a bookkeeping error.
        if stats.rounds and 2 * active.size > previous:
            msg = f"Active set shrank from {previous} only to {active.size}"
            raise InvariantViolationError(msg)
        stats.rounds += 1
        previous = active.size

        gamma = restrict(current, active)
        result = run_skeleton_round(gamma.owner, gamma, cfg, rng.derive(stats.rounds))
        rest = np.setdiff1d(np.arange(inst.m), active)
        current = concatenate(restrict(current, rest), result.coefficients)

        stats.restarts += result.restarts
        stats.steps += result.total_steps
        stats.movement += result.omega
        stats.round_sizes.append(int(active.size))
        telemetry.info(
            json.dumps(
                {
                    "round": stats.rounds,
                    "m": int(active.size),
                    "omega": result.omega,
                    "steps_taken": result.steps,
                    "restarts": result.restarts,
                    "frozen_count": result.frozen_count,
                }
            )
        )
        logger.debug(
            f"Round {stats.rounds}: m={active.size}, omega={result.omega:.4g}, "
            f"{result.restarts} restarts, {result.steps} steps"
        )

    _check_budgets(stats)
    logger.info(
        f"Skeleton iteration done: {stats.rounds} rounds, {stats.restarts} restarts, "
        f"movement {stats.movement:.4g} <= {min(stats.movement_budget, stats.local_budget):.4g}"
    )
    return current, stats


def snap_to_vertex(inst: Instance, mu_hat: Coefficients, delta: float) -> Selection:
    """Round every coordinate above ``delta`` to 1 and the others to 0.

    Args:
        inst: The families ``U``.
        mu_hat: Coefficients with exactly one coordinate above ``delta`` per family.
        delta: The threshold.

    Returns:
        The selection of the coordinates above ``delta``.

    Raises:
        AmbiguousFamilyError: If a family has no or several coordinates above ``delta``.
        InvariantViolationError: If the correction exceeds ``8 d^2 delta`` on a row.

    Examples:
        >>> inst = Instance.from_families([[[1.0], [0.0], [-1.0]]], "linf")
        >>> snap_to_vertex(inst, Coefficients([0.98, 0.01, 0.01], inst), 0.05).choices
        (0,)
    """
    choices = []
    for i in range(inst.n):
        above = np.flatnonzero(mu_hat.family_entries(i) > delta)
        if above.size != 1:
            msg = f"Family {i} has {above.size} coordinates above delta={delta}"
            raise AmbiguousFamilyError(msg)
        choices.append(int(above[0]))
    selection = Selection(tuple(choices))

    chi = selection.to_coefficients(inst).entries - mu_hat.entries
    error = float(np.max(np.abs(inst.rows @ chi), initial=0.0))
    budget = SNAP_CONSTANT * inst.d**2 * delta
    if error > budget + BOUND_SLACK:
        msg = f"Snapping moved a row by {error:.6g} > 8 d^2 delta = {budget:.6g}"
        raise InvariantViolationError(msg)
    logger.debug(f"Snapped with row error {error:.3g} (budget {budget:.3g})")
    return selection


def maxnorm_select(
    inst: Instance,
    lam: Coefficients,
    cfg: WalkConfig,
    rng: Rng | None = None,
) -> tuple[Selection, WalkStats]:
    """Round ``lambda`` to a selection ``mu`` with ``||U lambda - U mu||_inf <= 48 sqrt(d)``.

    Args:
        inst: The families ``U`` with ``m <= 2d``, members in the unit cube.
        lam: A point of ``Delta_U``.
        cfg: Walk parameters.
        rng: Random stream; defaults to the stream of ``cfg.seed``.

    Returns:
        The selection and the walk statistics.

    Raises:
        InvariantViolationError: If the final error exceeds ``48 sqrt(d)``.
    """
    cfg = cfg.with_delta(inst.d, max(inst.family_sizes))
    assert cfg.delta is not None
    mu_hat, stats = iterate_skeleton(inst, lam, cfg, rng)
    selection = snap_to_vertex(inst, mu_hat, cfg.delta)
    chi = selection.to_coefficients(inst).entries - mu_hat.entries
    stats.snap_error = float(np.max(np.abs(inst.rows @ chi), initial=0.0))

    error = NormKind.MAXIMUM.of(lam.image() - selection.vector_sum(inst))
    bound = maxnorm_bound(inst.d)
    if error > bound + BOUND_SLACK:
        msg = f"Max-norm rounding error {error:.6g} exceeds 48 sqrt(d) = {bound:.6g}"
        raise InvariantViolationError(msg)
    logger.info(f"Max-norm rounding error {error:.6g} (bound {bound:.6g})")
    return selection, stats
