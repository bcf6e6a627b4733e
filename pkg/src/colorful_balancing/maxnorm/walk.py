"""Gaussian random walk behind a single skeleton round.

A round starts from a point ``gamma`` of ``Delta_W`` and walks inside

    R = {alpha in Delta_W : |<alpha - gamma, W^j>| <= omega(m) for every row j}

with steps ``epsilon * Lambda_t``, ``Lambda_t ~ N(S_t)``. A coordinate that
drops to ``delta`` or below is frozen for the rest of the walk, and a slab
that comes within ``delta`` of its wall becomes an equality. ``S_t`` is the
space of directions orthogonal to the family indicators, to the frozen
coordinates and to the tight rows.

Between two such events the step space does not change, so steps are drawn in
blocks, accumulated in order and the block is cut at its first event.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt

from colorful_balancing.exceptions import (
    InvariantViolationError,
    PreconditionViolatedError,
    RestartsExhaustedError,
)
from colorful_balancing.linalg import Rng, Subspace, null_space_basis
from colorful_balancing.maxnorm.config import WalkConfig, omega
from colorful_balancing.model import Coefficients, Instance
from colorful_balancing.model.model import (
    BALL_SLACK,
    NEGATIVITY_TOL,
    SIMPLEX_TOL,
    FloatArray,
)

logger = logging.getLogger(__name__)

BoolArray = npt.NDArray[np.bool_]

# Allowed drift of the per-family sums along a walk.
SUM_DRIFT_TOL = 1e-8
# Additive slack on the slab walls.
SLAB_SLACK = 1e-9
MIN_BLOCK = 64
# Soft limit on the number of floats held by one block of steps.
BLOCK_FLOATS = 4_000_000


def check_round_family(inst: Instance) -> None:
    """Raise unless ``inst`` is a family matrix a skeleton round can walk on.

    Raises:
        PreconditionViolatedError: If a family has fewer than two members,
            ``m > 2d``, or a member leaves the unit cube.
    """
    small = [i for i, size in enumerate(inst.family_sizes) if size < 2]
    if small:
        msg = f"Skeleton round needs families of size >= 2; families {small} are smaller"
        raise PreconditionViolatedError(msg)
    if inst.m > 2 * inst.d:
        msg = f"Skeleton round needs m <= 2d, got m={inst.m}, d={inst.d}"
        raise PreconditionViolatedError(msg)
    if inst.m and float(np.max(np.abs(inst.matrix))) > 1.0 + BALL_SLACK:
        msg = "Skeleton round needs every row W^j with ||W^j||_inf <= 1"
        raise PreconditionViolatedError(msg)


@dataclass(frozen=True, eq=False)
class SlabSystem:
    """The region ``R`` of one round: slabs of half-width ``width`` around ``anchor``.

    Attributes:
        family: The family matrix ``W``; its rows ``W^j`` are the slab normals.
        anchor: The starting point ``Gamma_0 = gamma``.
        width: The slab half-width ``omega(m)``.
    """

    family: Instance
    anchor: FloatArray
    width: float

    def __post_init__(self) -> None:
        anchor = np.array(self.anchor, dtype=np.float64, copy=True).reshape(-1)
        if anchor.shape[0] != self.family.m:
            msg = f"Anchor has {anchor.shape[0]} entries for {self.family.m} columns"
            raise ValueError(msg)
        anchor.setflags(write=False)
        object.__setattr__(self, "anchor", anchor)

    @classmethod
    def around(cls, family: Instance, anchor: FloatArray) -> "SlabSystem":
        """The slab system of width ``omega(m)`` around ``anchor``."""
        check_round_family(family)
        return cls(family, anchor, omega(family.m, family.d))

    @property
    def rows(self) -> FloatArray:
        return self.family.rows

    @property
    def normals(self) -> FloatArray:
        """The normal set ``Z = {e_1, ..., e_m, W^1, ..., W^d}``, one per row."""
        return np.vstack([np.eye(self.family.m), self.rows])

    def family_sums(self, gamma: FloatArray) -> FloatArray:
        return np.bincount(self.family.family_index, weights=gamma, minlength=self.family.n)

    def displacement(self, gamma: FloatArray) -> FloatArray:
        """``<gamma - Gamma_0, W^j>`` for every row ``j``."""
        return self.rows @ (gamma - self.anchor)

    def contains(self, gamma: FloatArray) -> bool:
        """Membership in ``R`` up to the slab and sign tolerances."""
        if np.any(gamma < -NEGATIVITY_TOL):
            return False
        drift = np.abs(self.family_sums(gamma) - self.family_sums(self.anchor))
        if np.any(drift > SUM_DRIFT_TOL):
            return False
        return bool(np.all(np.abs(self.displacement(gamma)) <= self.width + SLAB_SLACK))


@dataclass
class WalkState:
    """Position of a walk after ``t`` steps.

    Attributes:
        t: Steps taken.
        gamma: The current point ``Gamma_t``.
        frozen: Mask of the frozen coordinates ``C_t^conv``.
        tight: Mask of the tight rows ``C_t^max``.
        subspace: The step space for the next step.
    """

    t: int
    gamma: FloatArray
    frozen: BoolArray
    tight: BoolArray
    subspace: Subspace

    @property
    def frozen_count(self) -> int:
        return int(np.count_nonzero(self.frozen))

    @property
    def tight_count(self) -> int:
        return int(np.count_nonzero(self.tight))


class WalkStatus(str, Enum):
    """Why a walk stopped."""

    HALF_FROZEN = "half_frozen"
    STALLED = "stalled"
    HORIZON = "horizon"
    LEFT_REGION = "left_region"


@dataclass
class WalkOutcome:
    status: WalkStatus
    state: WalkState
    events: int = 0

    @property
    def steps(self) -> int:
        return self.state.t


class GaussianWalk:
    """One run of the walk inside a :class:`SlabSystem`.

    Args:
        system: The region to walk in.
        epsilon: Step scale.
        delta: Freeze threshold.
        rng: Random stream of this run.
        max_block: Largest number of steps drawn at once.

    Examples:
        >>> inst = Instance.from_families([[[1.0], [-1.0]]], "linf")
        >>> system = SlabSystem.around(inst, np.array([0.5, 0.5]))
        >>> walk = GaussianWalk(system, 0.01, 0.05, Rng(3))
        >>> walk.run(10**6).status.value
        'half_frozen'
    """

    def __init__(
        self,
        system: SlabSystem,
        epsilon: float,
        delta: float,
        rng: Rng,
        max_block: int = 1 << 16,
    ) -> None:
        if epsilon <= 0.0 or delta <= 0.0:
            msg = f"epsilon and delta must be positive, got {epsilon} and {delta}"
            raise ValueError(msg)
        if max_block < 1:
            msg = f"max_block must be at least 1, got {max_block}"
            raise ValueError(msg)
        self.system = system
        self.epsilon = float(epsilon)
        self.delta = float(delta)
        self.rng = rng

        inst = system.family
        self.target = math.ceil(inst.m / 2)
        self._block_cap = min(max_block, max(1024, BLOCK_FLOATS // max(1, inst.m + inst.d)))
        self._sums = system.family_sums(system.anchor)

        gamma = system.anchor.copy()
        frozen = gamma <= self.delta
        tight = np.zeros(inst.d, dtype=bool)
        self._frozen_at = np.where(frozen, gamma, np.nan)
        self.state = WalkState(0, gamma, frozen, tight, self._step_space(frozen, tight))

    def _step_space(self, frozen: BoolArray, tight: BoolArray) -> Subspace:
        """``S`` in the coordinates of the free entries, embedded with exact zeros."""
        inst = self.system.family
        free = np.flatnonzero(~frozen)
        if free.size == 0:
            return Subspace.zero(inst.m)
        indicators = inst.family_indicators()[:, free]
        indicators = indicators[np.any(indicators != 0.0, axis=1)]
        normals = np.vstack([indicators, inst.rows[tight][:, free]])
        reduced = null_space_basis(normals, Subspace.full(free.size))
        return reduced.embed(free, inst.m)

    def _first_event(self, path: FloatArray) -> int | None:
        state, system = self.state, self.system
        width = system.width
        hits = np.any(path[:, ~state.frozen] <= self.delta, axis=1)
        displacement = (path - system.anchor) @ system.rows.T
        hits |= np.any(np.abs(displacement[:, ~state.tight]) >= width - self.delta, axis=1)
        hits |= np.any(np.abs(displacement) > width + SLAB_SLACK, axis=1)
        hits |= np.any(path < -NEGATIVITY_TOL, axis=1)
        found = np.flatnonzero(hits)
        return int(found[0]) if found.size else None

    def _check_escape(self, step: FloatArray) -> None:
        """A step leaving ``R`` must be long in some direction of ``Z``."""
        lam = step / self.epsilon
        longest = max(
            float(np.max(np.abs(lam), initial=0.0)),
            float(np.max(np.abs(self.system.rows @ lam), initial=0.0)),
        )
        threshold = self.delta / self.epsilon
        if longest < threshold * (1.0 - 1e-9):
            msg = (
                f"Walk left the slab region with a short step: "
                f"max |<Lambda, z>| = {longest:.6g} < delta/epsilon = {threshold:.6g}"
            )
            raise InvariantViolationError(msg)
        logger.debug(f"Walk left the slab region at t={self.state.t} (step {longest:.3g})")

    def _absorb(self, step: FloatArray) -> None:
        """Freeze coordinates, tighten slabs and rebuild the step space after an event."""
        state = self.state
        newly_frozen = ~state.frozen & (state.gamma <= self.delta)
        for i in np.flatnonzero(newly_frozen):
            floor = self.delta - abs(float(step[i]))
            if state.gamma[i] < floor - NEGATIVITY_TOL:
                msg = (
                    f"Coordinate {i} froze at {state.gamma[i]:.6g}, "
                    f"below delta - epsilon |Lambda_i| = {floor:.6g}"
                )
                raise InvariantViolationError(msg)
        displacement = self.system.displacement(state.gamma)
        newly_tight = ~state.tight & (np.abs(displacement) >= self.system.width - self.delta)

        state.frozen = state.frozen | newly_frozen
        state.tight = state.tight | newly_tight
        self._frozen_at[newly_frozen] = state.gamma[newly_frozen]
        previous_dim = state.subspace.dim
        state.subspace = self._step_space(state.frozen, state.tight)
        if state.subspace.dim > previous_dim:
            msg = f"Step space grew from {previous_dim} to {state.subspace.dim}"
            raise InvariantViolationError(msg)
        logger.debug(
            f"t={state.t}: froze {np.flatnonzero(newly_frozen).tolist()}, "
            f"tight {np.flatnonzero(newly_tight).tolist()}, dim S={state.subspace.dim}"
        )

        drift = float(np.max(np.abs(self.system.family_sums(state.gamma) - self._sums)))
        if drift > SUM_DRIFT_TOL:
            msg = f"Family sums drifted by {drift:.3e} along the walk"
            raise InvariantViolationError(msg)

    def _check_frozen(self) -> None:
        frozen = self.state.frozen
        if not np.array_equal(self.state.gamma[frozen], self._frozen_at[frozen]):
            msg = "A frozen coordinate moved after it was frozen"
            raise InvariantViolationError(msg)

    def run(self, horizon: int, early_exit: bool = True) -> WalkOutcome:
        """Walk until an exit condition or until ``horizon`` steps were taken.

        Args:
            horizon: The step budget ``T``.
            early_exit: Stop as soon as half the coordinates are frozen.

        Returns:
            The outcome; its state holds ``Gamma`` at the stopping time.

        Raises:
            InvariantViolationError: If one of the walk's structural guarantees
                fails numerically.
        """
        state = self.state
        outcome = WalkOutcome(WalkStatus.HORIZON, state)
        if early_exit and state.frozen_count >= self.target:
            outcome.status = WalkStatus.HALF_FROZEN
            return outcome

        block = min(MIN_BLOCK, self._block_cap)
        while state.t < horizon:
            basis = state.subspace.basis
            if basis.shape[0] == 0:
                outcome.status = WalkStatus.STALLED
                break
            size = min(block, horizon - state.t)
            steps = self.epsilon * (self.rng.standard_normal((size, basis.shape[0])) @ basis)
            path = np.cumsum(np.vstack([state.gamma, steps]), axis=0)[1:]

            event = self._first_event(path)
            if event is None:
                state.gamma = path[-1].copy()
                state.t += size
                block = min(2 * block, self._block_cap)
                continue

            state.gamma = path[event].copy()
            state.t += event + 1
            outcome.events += 1
            if not self.system.contains(state.gamma):
                self._check_escape(steps[event])
                outcome.status = WalkStatus.LEFT_REGION
                break
            self._absorb(steps[event])
            block = min(MIN_BLOCK, self._block_cap)
            if early_exit and state.frozen_count >= self.target:
                outcome.status = WalkStatus.HALF_FROZEN
                break

        self._check_frozen()
        logger.debug(
            f"Walk stopped ({outcome.status.value}) after {state.t} steps: "
            f"{state.frozen_count} frozen, {state.tight_count} tight"
        )
        return outcome


@dataclass
class RoundResult:
    """A verified skeleton round.

    Attributes:
        coefficients: The output ``gamma_hat``.
        omega: Slab half-width of the round.
        epsilon: Step scale used.
        steps: Steps of the successful run.
        total_steps: Steps over all runs, failed ones included.
        restarts: Failed runs before the successful one.
        frozen_count: Coordinates at or below delta in the output.
    """

    coefficients: Coefficients
    omega: float
    epsilon: float
    steps: int
    total_steps: int
    restarts: int
    frozen_count: int
    statuses: list[str] = field(default_factory=list)


def _check_start(inst: Instance, gamma: Coefficients) -> None:
    if gamma.owner.m != inst.m:
        msg = f"Expected {inst.m} coefficients, got {gamma.owner.m}"
        raise ValueError(msg)
    if np.any(gamma.entries < -NEGATIVITY_TOL):
        msg = "Skeleton round needs non-negative coefficients"
        raise ValueError(msg)
    sums = np.bincount(inst.family_index, weights=gamma.entries, minlength=inst.n)
    if np.any(sums <= 0.0) or np.any(sums > 1.0 + SIMPLEX_TOL):
        msg = f"Skeleton round needs family sums in (0, 1], got {sums.tolist()}"
        raise ValueError(msg)


def round_failures(
    system: SlabSystem, outcome: WalkOutcome, delta: float, target: int
) -> list[str]:
    """The post-conditions a finished run misses, empty if it succeeded."""
    gamma = outcome.state.gamma
    problems = []
    if outcome.status is WalkStatus.LEFT_REGION:
        problems.append("left the slab region")
    moved = float(np.max(np.abs(system.displacement(gamma)), initial=0.0))
    if moved > system.width + SLAB_SLACK:
        problems.append(f"moved {moved:.6g} > omega = {system.width:.6g}")
    small = int(np.count_nonzero(gamma <= delta))
    if small < target:
        problems.append(f"only {small} of the required {target} coordinates <= delta")
    if np.any(gamma < -NEGATIVITY_TOL):
        problems.append(f"negative coordinate {gamma.min():.3e}")
    drift = np.abs(system.family_sums(gamma) - system.family_sums(system.anchor))
    if np.any(drift > SUM_DRIFT_TOL):
        problems.append(f"family sums drifted by {drift.max():.3e}")
    return problems


def run_skeleton_round(
    inst: Instance, gamma: Coefficients, cfg: WalkConfig, rng: Rng
) -> RoundResult:
    """Run walks from ``gamma`` until one meets both round post-conditions.

    Run ``r`` draws from ``rng.derive(r)``.

    Raises:
        PreconditionViolatedError: If ``inst`` is not a valid round family.
        RestartsExhaustedError: If no run succeeded within ``cfg.max_restarts``.
    """
    check_round_family(inst)
    _check_start(inst, gamma)
    resolved = cfg.for_round(inst.m, inst.d, max(inst.family_sizes))
    assert resolved.epsilon is not None and resolved.delta is not None
    system = SlabSystem.around(inst, gamma.entries)
    target = math.ceil(inst.m / 2)
    horizon = resolved.horizon
    logger.debug(
        f"Skeleton round: m={inst.m}, d={inst.d}, omega={system.width:.4g}, "
        f"epsilon={resolved.epsilon:.3g}, delta={resolved.delta:.3g}, T={horizon}"
    )

    total_steps = 0
    statuses = []
    for restart in range(resolved.max_restarts):
        walk = GaussianWalk(
            system, resolved.epsilon, resolved.delta, rng.derive(restart), resolved.max_block
        )
        outcome = walk.run(horizon)
        total_steps += outcome.steps
        statuses.append(outcome.status.value)
        problems = round_failures(system, outcome, resolved.delta, target)
        if not problems:
            return RoundResult(
                coefficients=Coefficients(outcome.state.gamma, inst),
                omega=system.width,
                epsilon=resolved.epsilon,
                steps=outcome.steps,
                total_steps=total_steps,
                restarts=restart,
                frozen_count=int(np.count_nonzero(outcome.state.gamma <= resolved.delta)),
                statuses=statuses,
            )
        logger.warning(f"Walk run {restart} failed ({'; '.join(problems)}); restarting")

    msg = f"No walk run met the round post-conditions in {resolved.max_restarts} attempts"
    logger.error(msg)
    raise RestartsExhaustedError(msg)


def skeleton_round(
    inst: Instance, gamma: Coefficients, cfg: WalkConfig, rng: Rng
) -> Coefficients:
    """Move ``gamma`` to ``gamma_hat`` with half its coordinates at most delta.

    The output satisfies ``||W gamma - W gamma_hat||_inf <= omega(m)``, has at
    least ``ceil(m / 2)`` coordinates at most ``delta``, is non-negative and
    keeps every family sum; all four are checked before returning.

    Args:
        inst: The family matrix ``W``: families of size at least two,
            ``m <= 2d``, members in the unit cube.
        gamma: Non-negative coefficients with family sums in ``(0, 1]``.
        cfg: Walk parameters; unresolved ones are derived for this round.
        rng: Random stream of the round.

    Returns:
        The coefficients ``gamma_hat`` over ``inst``.

    Raises:
        PreconditionViolatedError: If ``inst`` is not a valid round family.
        RestartsExhaustedError: If no run succeeded within the restart budget.
    """
    return run_skeleton_round(inst, gamma, cfg, rng).coefficients
