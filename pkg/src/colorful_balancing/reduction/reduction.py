"""Reduction to a small fractional core via a vertex of the zero-sum polytope.

For ``P = {lambda in Delta_V : V lambda = 0}`` any extreme point ``alpha`` locks
all but ``k <= d`` families and has at most ``k + d`` fractional coordinates.
Vertices are found as basic feasible solutions of the standard-form system

    V lambda = 0,   sum_{w in V_i} lambda(w) = 1  (i in [n]),   lambda >= 0

with ``n + d`` rows and ``m`` columns, either by a phase-1 simplex or, when the
caller already holds a witness, by walking the witness to a vertex along
kernel directions of its support.
"""

import logging
from dataclasses import dataclass

import numpy as np

from colorful_balancing.exceptions import (
    InfeasibleError,
    InvariantViolationError,
    NotAVertexError,
    NumericallyDegenerateError,
)
from colorful_balancing.linalg import Subspace, null_space_basis
from colorful_balancing.model import (
    FRACTIONAL_TOL,
    Coefficients,
    IndexPartition,
    Instance,
    restrict,
)
from colorful_balancing.model.model import FloatArray

logger = logging.getLogger(__name__)

# ||V lambda||_inf above this means the instance is infeasible.
FEASIBILITY_TOL = 1e-7
# Phase-1 objective below this declares success.
PHASE1_TOL = 1e-9
# ||V alpha||_inf of a point of P; residuals up to FEASIBILITY_TOL are kept with a warning.
ZERO_SUM_TOL = 1e-8
PIVOT_TOL = 1e-11
COST_TOL = 1e-11


def standard_form(inst: Instance) -> tuple[FloatArray, FloatArray]:
    """The equality system ``[V; E] lambda = [0; 1]`` defining ``aff P``.

    Returns:
        The ``(d + n) x m`` constraint matrix and its right-hand side.
    """
    a_eq = np.vstack([inst.matrix, inst.family_indicators()])
    b_eq = np.concatenate([np.zeros(inst.d), np.ones(inst.n)])
    return a_eq, b_eq


class _Phase1Tableau:
    """Dense phase-1 simplex tableau with Bland's anti-cycling rule."""

    def __init__(self, a_eq: FloatArray, b_eq: FloatArray) -> None:
        p, m = a_eq.shape
        self.p, self.m = p, m
        tableau = np.zeros((p + 1, m + p + 1))
        tableau[:p, :m] = a_eq
        tableau[:p, m : m + p] = np.eye(p)
        tableau[:p, -1] = b_eq
        # Reduced costs of sum(artificials) with the artificial basis.
        tableau[p, :m] = -a_eq.sum(axis=0)
        tableau[p, -1] = -b_eq.sum()
        self.tableau = tableau
        self.basis = list(range(m, m + p))

    @property
    def objective(self) -> float:
        return float(-self.tableau[self.p, -1])

    def pivot(self, row: int, col: int) -> None:
        t = self.tableau
        t[row] /= t[row, col]
        for r in range(t.shape[0]):
            if r != row and t[r, col] != 0.0:
                t[r] -= t[r, col] * t[row]
        self.basis[row] = col

    def entering(self) -> int | None:
        costs = self.tableau[self.p, : self.m]
        candidates = np.flatnonzero(costs < -COST_TOL)
        return int(candidates[0]) if candidates.size else None

    def leaving(self, col: int) -> tuple[int | None, float]:
        column = self.tableau[: self.p, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return None, 0.0
        ratios = self.tableau[rows, -1] / column[rows]
        best = float(ratios.min())
        tied = rows[ratios <= best + 1e-12]
        # Bland: among tied rows, the one whose basic variable has the lowest index.
        row = int(min(tied, key=lambda r: self.basis[r]))
        return row, best

    def solution(self) -> FloatArray:
        x = np.zeros(self.m + self.p)
        x[self.basis] = self.tableau[: self.p, -1]
        return x[: self.m]


def _run_phase1(inst: Instance) -> FloatArray:
    a_eq, b_eq = standard_form(inst)
    tab = _Phase1Tableau(a_eq, b_eq)
    size = inst.m + inst.n + inst.d
    degenerate_budget = 10 * size
    iteration_budget = 50 * size + 1000
    degenerate_run = 0

    for iteration in range(iteration_budget):
        col = tab.entering()
        if col is None:
            logger.debug(f"Phase 1 finished after {iteration} pivots")
            break
        row, step = tab.leaving(col)
        if row is None:
            # The phase-1 objective is bounded below by zero.
            msg = f"Phase 1 found an unbounded direction at column {col}"
            raise NumericallyDegenerateError(msg)
        degenerate_run = degenerate_run + 1 if step <= PIVOT_TOL else 0
        if degenerate_run > degenerate_budget:
            msg = f"Phase 1 stalled after {degenerate_run} consecutive degenerate pivots"
            raise NumericallyDegenerateError(msg)
        tab.pivot(row, col)
    else:
        msg = f"Phase 1 did not terminate within {iteration_budget} pivots"
        raise NumericallyDegenerateError(msg)

    if tab.objective > PHASE1_TOL:
        msg = (
            f"No lambda in Delta_V with V lambda = 0 (phase-1 residual {tab.objective:.3e}); "
            "0 is not in the sum of the family convex hulls"
        )
        raise InfeasibleError(msg)

    # Drive zero-level artificials out of the basis where an original column allows it.
    for row in range(tab.p):
        if tab.basis[row] >= tab.m:
            candidates = np.flatnonzero(np.abs(tab.tableau[row, : tab.m]) > 1e-9)
            if candidates.size:
                tab.pivot(row, int(candidates[0]))

    support = [b for b in tab.basis if b < tab.m]
    lam = np.clip(tab.solution(), 0.0, None)
    return _polish(a_eq, b_eq, lam, support)


def _polish(
    a_eq: FloatArray, b_eq: FloatArray, lam: FloatArray, support: list[int]
) -> FloatArray:
    """Re-solve the equality system on the support to clean up pivoting error."""
    if support:
        refined, *_ = np.linalg.lstsq(a_eq[:, support], b_eq, rcond=None)
        if np.all(refined >= -FRACTIONAL_TOL):
            candidate = np.zeros_like(lam)
            candidate[support] = np.clip(refined, 0.0, None)
            if np.max(np.abs(a_eq @ candidate - b_eq)) <= np.max(
                np.abs(a_eq @ lam - b_eq)
            ):
                lam = candidate
    lam[lam < 1e-15] = 0.0
    return lam


def _push_to_vertex(inst: Instance, witness: Coefficients) -> FloatArray:
    """Move a feasible point to a vertex of ``P`` along kernel directions of its support."""
    a_eq, b_eq = standard_form(inst)
    lam = np.array(witness.entries, dtype=np.float64)
    lam[lam < 1e-12] = 0.0

    for _ in range(inst.m + 1):
        support = np.flatnonzero(lam > 0.0)
        kernel = null_space_basis(a_eq[:, support], Subspace.full(support.size))
        if kernel.dim == 0:
            break
        direction = kernel.basis[0]
        if not np.any(direction < -1e-14):
            direction = -direction
        shrinking = np.flatnonzero(direction < -1e-14)
        ratios = lam[support[shrinking]] / -direction[shrinking]
        theta = float(ratios.min())
        # Lowest constraint index among the coordinates that become tight.
        leaving = int(support[shrinking[np.flatnonzero(ratios <= theta * (1 + 1e-12))[0]]])
        lam[support] = lam[support] + theta * direction
        lam[leaving] = 0.0
        lam[lam < 1e-15] = 0.0
        logger.debug(f"Witness move: theta={theta:.3e}, coordinate {leaving} became tight")
    else:
        msg = "Witness did not reach a vertex within m moves"
        raise NumericallyDegenerateError(msg)

    return _polish(a_eq, b_eq, lam, np.flatnonzero(lam > 0.0).tolist())


def _normalized(inst: Instance, lam: FloatArray) -> FloatArray:
    sums = np.bincount(inst.family_index, weights=lam, minlength=inst.n)
    return lam / sums[inst.family_index]


def find_zero_vertex(inst: Instance, witness: Coefficients | None = None) -> Coefficients:
    """Find an extreme point ``alpha`` of ``P = {lambda in Delta_V : V lambda = 0}``.

    Args:
        inst: The instance.
        witness: Optional point of ``P``; when it checks out, it is pushed to a
            vertex and phase 1 is skipped.

    Returns:
        A vertex of ``P``. At least ``m - (n + d)`` of its coordinates vanish.

    Raises:
        InfeasibleError: If ``P`` is empty.
        NumericallyDegenerateError: If pivoting stalls.
    """
    lam: FloatArray | None = None
    if witness is not None:
        residual = float(np.max(np.abs(witness.image()), initial=0.0))
        if witness.owner.m != inst.m or not witness.in_simplex():
            logger.warning("Witness is not a point of Delta_V; running phase 1 instead")
        elif residual > FEASIBILITY_TOL:
            logger.warning(f"Witness has ||V lambda|| = {residual:.3e}; running phase 1 instead")
        else:
            lam = _push_to_vertex(inst, witness)
            logger.info("Witness pushed to a vertex of P")
    if lam is None:
        lam = _run_phase1(inst)
        logger.info("Phase 1 found a vertex of P")

    lam = _normalized(inst, lam)
    residual = float(np.max(np.abs(inst.matrix @ lam), initial=0.0))
    if residual > FEASIBILITY_TOL:
        msg = f"Vertex misses V lambda = 0 by {residual:.3e}"
        raise InfeasibleError(msg)

    active = int(np.count_nonzero(lam <= FRACTIONAL_TOL))
    if active < inst.m - (inst.n + inst.d):
        msg = (
            f"Only {active} active non-negativity constraints at a vertex; "
            f"expected at least {inst.m - (inst.n + inst.d)}"
        )
        raise InvariantViolationError(msg)
    return Coefficients(lam, inst)


@dataclass(frozen=True, eq=False)
class ReductionCore:
    """A vertex of ``P`` with its fractional coordinates and free families."""

    alpha: Coefficients
    fractional: IndexPartition
    free_families: tuple[int, ...]

    @property
    def k(self) -> int:
        """Number of free families."""
        return len(self.free_families)

    @property
    def instance(self) -> Instance:
        """The instance ``alpha`` lives on."""
        return self.alpha.owner

    def core_coefficients(self) -> Coefficients:
        """``alpha|_F``, a point of ``Delta_{V|_F}``."""
        return restrict(self.alpha, self.fractional.fractional)

    def locked_coefficients(self) -> Coefficients:
        """``alpha|_L``."""
        return restrict(self.alpha, self.fractional.locked)


def extract_core(inst: Instance, alpha: Coefficients) -> ReductionCore:
    """Classify the coordinates and families of a vertex of ``P``.

    Args:
        inst: The instance.
        alpha: A vertex of ``P``, as returned by :func:`find_zero_vertex`.

    Returns:
        The reduction core.

    Raises:
        NotAVertexError: If ``alpha`` misses ``P`` or the bounds ``k <= d`` and
            ``|F| <= k + d`` fail.
    """
    residual = float(np.max(np.abs(inst.matrix @ alpha.entries), initial=0.0))
    if residual > FEASIBILITY_TOL:
        msg = f"alpha is not in P: ||V alpha||_inf = {residual:.3e}"
        raise NotAVertexError(msg)
    if residual > ZERO_SUM_TOL:
        logger.warning(f"alpha is only feasible up to ||V alpha||_inf = {residual:.3e}")

    partition = alpha.partition()
    free = alpha.free_families()
    k, f = len(free), len(partition.fractional)
    if k > inst.d:
        msg = f"{k} free families exceed the dimension {inst.d}"
        raise NotAVertexError(msg)
    if f > k + inst.d:
        msg = f"{f} fractional coordinates exceed k + d = {k + inst.d}"
        raise NotAVertexError(msg)

    owners = inst.family_index[list(partition.fractional)]
    for i in free:
        if np.count_nonzero(owners == i) < 2:
            msg = f"Free family {i} has fewer than two fractional entries"
            raise InvariantViolationError(msg)

    logger.info(f"Reduction core: k={k} free families, |F|={f} fractional coordinates")
    return ReductionCore(alpha=alpha, fractional=partition, free_families=free)
