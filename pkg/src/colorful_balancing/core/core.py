"""End-to-end balancing: vertex reduction, core rounding and verification."""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any

from colorful_balancing.euclid import derandomized_select
from colorful_balancing.exceptions import InvariantViolationError
from colorful_balancing.linalg import Rng
from colorful_balancing.maxnorm import WalkConfig, maxnorm_bound, maxnorm_select
from colorful_balancing.model import (
    Coefficients,
    Instance,
    NormKind,
    Selection,
    concatenate,
    selection_norm,
    validate_instance,
)
from colorful_balancing.oracle import brute_force_min, selection_count
from colorful_balancing.reduction import extract_core, find_zero_vertex

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-9
ORACLE_BUDGET = 10**5

SUCCESS = "success"
BOUND_VIOLATED = "bound_violated"


def theorem_bound(d: int, norm: NormKind | str) -> float:
    """``sqrt(d)`` in the Euclidean norm, ``48 sqrt(d)`` in the maximum norm."""
    if NormKind(norm) is NormKind.EUCLIDEAN:
        return math.sqrt(d)
    return maxnorm_bound(d)


@dataclass
class BalanceReport:
    """Outcome of :meth:`Balancer.balance` or :meth:`Balancer.verify`.

    Only the fields listed in :meth:`to_dict` enter the JSON form, so that
    repeated runs serialize identically.
    """

    selection: list[int]
    achieved: float
    bound: float
    norm: str
    k: int = 0
    fractional: int = 0
    rounds: int = 0
    restarts: int = 0
    steps: int = 0
    seed: int = 0
    mode: str = "practical"
    status: str = SUCCESS
    wall_time: float = 0.0
    oracle_min: float | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == SUCCESS and self.achieved <= self.bound + BOUND_SLACK

    def to_dict(self) -> dict[str, Any]:
        return {
            "achieved": self.achieved,
            "bound": self.bound,
            "selection": list(self.selection),
            "k": self.k,
            "fractional": self.fractional,
            "rounds": self.rounds,
            "restarts": self.restarts,
            "steps": self.steps,
            "seed": self.seed,
            "mode": self.mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class Balancer:
    """Colorful vector balancing with certified bounds.

    A vertex ``alpha`` of ``P = {lambda in Delta_V : V lambda = 0}`` locks all
    but ``k <= d`` families. The free part ``V|_F`` is rounded to a selection,
    by conditional expectations in the Euclidean norm and by Gaussian walks in
    the maximum norm, and glued back to the locked part. The achieved norm is
    always recomputed from the raw vectors of the selection.

    Args:
        cfg: Walk parameters of the maximum-norm rounding; the seed and mode
            are recorded in every report.

    Examples:
        >>> inst = Instance.from_families([[[1.0], [-1.0]], [[0.5], [-0.5]]], "l2")
        >>> report = Balancer().balance(inst)
        >>> report.ok, report.achieved <= 1.0
        (True, True)
    """

    def __init__(self, cfg: WalkConfig | None = None) -> None:
        self.cfg = WalkConfig() if cfg is None else cfg

    def balance(
        self,
        inst: Instance,
        witness: Coefficients | None = None,
        norm: NormKind | str | None = None,
        verbose: bool = False,
    ) -> BalanceReport:
        """Find a selection whose sum meets the theorem bound of its norm.

        Args:
            inst: The instance.
            witness: Optional point of ``Delta_V`` with ``V lambda = 0``.
            norm: Norm overriding the instance's declared one.
            verbose: If True, prints a summary to stdout.

        Returns:
            The report; ``status`` is ``"bound_violated"`` if the recomputed
            norm exceeds the bound.

        Raises:
            InvalidInstanceError: If the instance is malformed under the norm used.
            InfeasibleError: If 0 is not in the sum of the family convex hulls.
            RestartsExhaustedError: If a walk round runs out of restarts.
        """
        started = time.perf_counter()
        if norm is not None and NormKind(norm) is not inst.norm_kind:
            inst = inst.with_norm(norm)
            if witness is not None:
                witness = Coefficients(witness.entries, inst)
        validate_instance(inst).raise_if_invalid()
        logger.info(
            f"Balancing d={inst.d}, n={inst.n}, m={inst.m} in {inst.norm_kind.value}"
        )

        alpha = find_zero_vertex(inst, witness)
        core = extract_core(inst, alpha)
        report = BalanceReport(
            selection=[],
            achieved=0.0,
            bound=theorem_bound(inst.d, inst.norm_kind),
            norm=inst.norm_kind.value,
            k=core.k,
            fractional=len(core.fractional.fractional),
            seed=self.cfg.seed,
            mode=self.cfg.mode.value,
        )

        if core.k == 0:
            logger.info("Vertex is already a selection vector")
            full = alpha
        else:
            core_coeff = core.core_coefficients()
            core_inst = core_coeff.owner
            if inst.norm_kind is NormKind.EUCLIDEAN:
                picked, _ = derandomized_select(core_inst, core_coeff)
            else:
                picked, stats = maxnorm_select(
                    core_inst, core_coeff, self.cfg, Rng(self.cfg.seed)
                )
                report.rounds = stats.rounds
                report.restarts = stats.restarts
                report.steps = stats.steps
                report.extra["movement"] = stats.movement
                report.extra["snap_error"] = stats.snap_error
            full = concatenate(core.locked_coefficients(), picked.to_coefficients(core_inst))

        selection = full.to_selection()
        report.selection = list(selection.choices)
        report.achieved = selection_norm(inst, selection)
        report.wall_time = time.perf_counter() - started
        if report.achieved > report.bound + BOUND_SLACK:
            report.status = BOUND_VIOLATED
            logger.error(f"Achieved {report.achieved:.6g} exceeds the bound {report.bound:.6g}")

        if verbose:
            print(f"\n{'=' * 60}")
            print(f"Instance: d={inst.d}, n={inst.n}, m={inst.m}, norm={report.norm}")
            print(f"Core: k={report.k}, |F|={report.fractional}")
            if inst.norm_kind is NormKind.MAXIMUM:
                print(
                    f"Walk: {report.rounds} rounds, {report.restarts} restarts, "
                    f"{report.steps} steps"
                )
            print(f"Achieved: {report.achieved:.6g} (bound {report.bound:.6g})")
            print("=" * 60)

        logger.info(
            f"Balanced to {report.achieved:.6g} (bound {report.bound:.6g}) "
            f"in {report.wall_time:.3f}s"
        )
        return report

    def verify(
        self,
        inst: Instance,
        selection: Selection,
        oracle_budget: int = ORACLE_BUDGET,
    ) -> BalanceReport:
        """Recompute the norm of a selection and compare it with the bound.

        When the instance has at most ``oracle_budget`` selections the exact
        minimum is added as ``oracle_min``.

        Raises:
            ValueError: If the selection does not fit the instance.
            IndexError: If a choice is out of range.
            InvariantViolationError: If the exact minimum exceeds the selection's norm.
        """
        selection.check(inst)
        report = BalanceReport(
            selection=list(selection.choices),
            achieved=selection_norm(inst, selection),
            bound=theorem_bound(inst.d, inst.norm_kind),
            norm=inst.norm_kind.value,
            seed=self.cfg.seed,
            mode=self.cfg.mode.value,
        )
        if report.achieved > report.bound + BOUND_SLACK:
            report.status = BOUND_VIOLATED
        if selection_count(inst) <= oracle_budget:
            report.oracle_min = brute_force_min(inst).best_value
            if report.oracle_min > report.achieved + BOUND_SLACK:
                msg = (
                    f"Oracle minimum {report.oracle_min:.6g} exceeds the achieved "
                    f"norm {report.achieved:.6g} of a valid selection"
                )
                logger.error(msg)
                raise InvariantViolationError(msg)
        logger.info(
            f"Verified selection: {report.achieved:.6g} (bound {report.bound:.6g}, "
            f"oracle {report.oracle_min})"
        )
        return report

