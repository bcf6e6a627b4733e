"""Euclidean rounding of a point of Delta_U to a selection within sqrt(k).

Drawing ``w_i`` from family ``U_i`` with probabilities ``lambda|_{U_i}``
independently gives ``E||w_1 + ... + w_k - x||^2 <= k`` for ``x = U lambda``.
The rounding here fixes the families one at a time, each time choosing the
member that minimizes the exact conditional expectation of the squared error,
so the final squared error never exceeds the initial expectation.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from colorful_balancing.exceptions import InvariantViolationError
from colorful_balancing.linalg import Rng
from colorful_balancing.model import Coefficients, Instance, NormKind, Selection
from colorful_balancing.model.model import BALL_SLACK, FloatArray

logger = logging.getLogger(__name__)

# Slack on the monotonicity of conditional expectations.
EXPECTATION_TOL = 1e-9


@dataclass
class RoundingTrace:
    """Record of one derandomized rounding.

    Attributes:
        choices: Chosen member index per family, in processing order.
        expectations: Conditional expectation after fixing ``j`` families, ``j = 0..k``.
        squared_error: ``||U lambda - U mu||_2^2`` of the final selection.
    """

    choices: list[int] = field(default_factory=list)
    expectations: list[float] = field(default_factory=list)
    squared_error: float = 0.0

    def check(self, k: int) -> None:
        """Assert monotonicity and the ``k`` bound.

        Raises:
            InvariantViolationError: If an expectation increased or the final
                squared error exceeds ``k``.
        """
        for j, (before, after) in enumerate(zip(self.expectations, self.expectations[1:])):
            if after > before + EXPECTATION_TOL:
                msg = f"Conditional expectation rose at family {j}: {before:.12g} -> {after:.12g}"
                raise InvariantViolationError(msg)
        if self.squared_error > k + EXPECTATION_TOL:
            msg = f"Squared error {self.squared_error:.12g} exceeds k = {k}"
            raise InvariantViolationError(msg)


def _check_ball(inst: Instance) -> None:
    norms = NormKind.EUCLIDEAN.of_columns(inst.matrix)
    if np.any(norms > 1.0 + BALL_SLACK):
        msg = f"Euclidean rounding needs members in the unit ball, max norm {norms.max():.6g}"
        raise ValueError(msg)


def _family_terms(inst: Instance, lam: Coefficients) -> tuple[FloatArray, FloatArray]:
    """Per-family means ``x_i`` (columns) and variances ``E||w_i||^2 - ||x_i||^2``."""
    weighted = inst.matrix * lam.entries
    means = np.zeros((inst.d, inst.n))
    np.add.at(means.T, inst.family_index, weighted.T)
    second = np.bincount(
        inst.family_index,
        weights=lam.entries * np.sum(inst.matrix**2, axis=0),
        minlength=inst.n,
    )
    variances = second - np.sum(means**2, axis=0)
    return means, variances


def sample_selection(inst: Instance, lam: Coefficients, rng: Rng) -> Selection:
    """Draw one member per family independently, family ``i`` by ``lambda|_{U_i}``.

    Args:
        inst: The families ``U_1, ..., U_k``.
        lam: A point of ``Delta_U``.
        rng: The random stream.

    Returns:
        The sampled selection.
    """
    choices = []
    for i in range(inst.n):
        weights = np.clip(lam.family_entries(i), 0.0, None)
        choices.append(rng.choice(weights / weights.sum()))
    return Selection(tuple(choices))


def conditional_expectation(
    prefix: Sequence[int], inst: Instance, lam: Coefficients
) -> float:
    """``E||s + sum_{i>j} w_i - x||^2`` with the first ``j`` families fixed.

    Uses the closed form ``||s + sum_{i>j} x_i - x||^2 + sum_{i>j} (E||w_i||^2 - ||x_i||^2)``
    where ``s`` is the sum of the fixed members and ``x_i = U_i lambda|_{U_i}``.

    Args:
        prefix: Member indices chosen for families ``0..j-1``.
        inst: The families.
        lam: A point of ``Delta_U``.

    Returns:
        The conditional expectation.

    Examples:
        >>> inst = Instance.from_families([[[1.0, 0.0], [0.0, 1.0]]], "l2")
        >>> conditional_expectation([], inst, Coefficients([0.5, 0.5], inst))
        0.5
    """
    means, variances = _family_terms(inst, lam)
    j = len(prefix)
    fixed = np.asarray(prefix, dtype=np.int64) + np.asarray(inst.offsets[:j], dtype=np.int64)
    residual = inst.matrix[:, fixed].sum(axis=1) - means[:, :j].sum(axis=1)
    return float(residual @ residual + variances[j:].sum())


def derandomized_select(inst: Instance, lam: Coefficients) -> tuple[Selection, RoundingTrace]:
    """Round ``lambda`` to a selection ``mu`` with ``||U lambda - U mu||_2^2 <= k``.

    Families are fixed in input order; each takes the member minimizing the
    conditional expectation, ties going to the lowest member index.

    Args:
        inst: The families ``U_1, ..., U_k`` in the Euclidean unit ball.
        lam: A point of ``Delta_U``.

    Returns:
        The selection and the trace of conditional expectations.

    Raises:
        ValueError: If a member lies outside the Euclidean unit ball.
        InvariantViolationError: If the averaging argument is violated numerically.
    """
    _check_ball(inst)
    means, variances = _family_terms(inst, lam)

    # residual = s + sum_{i >= j} x_i - x, which starts at zero.
    residual = np.zeros(inst.d)
    remaining = float(variances.sum())
    trace = RoundingTrace(expectations=[remaining])

    for i in range(inst.n):
        block = inst.family(i)
        shifted = residual[:, None] - means[:, i : i + 1] + block
        remaining -= float(variances[i])
        values = np.sum(shifted**2, axis=0) + remaining
        choice = int(np.argmin(values))
        residual = shifted[:, choice]
        trace.choices.append(choice)
        trace.expectations.append(float(values[choice]))

    trace.squared_error = float(residual @ residual)
    trace.check(inst.n)
    logger.debug(
        f"Derandomized rounding: E0={trace.expectations[0]:.6g}, "
        f"error^2={trace.squared_error:.6g}, k={inst.n}"
    )
    return Selection(tuple(trace.choices)), trace
