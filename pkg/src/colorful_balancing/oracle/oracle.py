"""Exhaustive ground truth for small instances.

:func:`brute_force_min` walks the selection space ``V_1 x ... x V_n`` in
lexicographic order. The trailing families are expanded once into a table of
partial sums; the leading families are stepped with a mixed-radix counter
that updates their sum incrementally, so each counter step evaluates a whole
table of selections at once.
"""

import itertools
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from colorful_balancing.exceptions import BudgetExceededError
from colorful_balancing.model import Coefficients, Instance, NormKind, Selection, selection_norm
from colorful_balancing.model.model import FloatArray
from colorful_balancing.reduction import standard_form

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**7
# Selections whose values differ by less than this are tied.
TIE_TOL = 1e-12
# Largest table of trailing partial sums evaluated at once.
TAIL_LIMIT = 4096
VERTEX_TOL = 1e-8


@dataclass(frozen=True)
class OracleResult:
    """The exact minimum over all selections.

    Attributes:
        best_selection: The lexicographically first minimizer.
        best_value: Its value ``||sum_i v_i - shift||``.
        enumerated_count: Number of selections examined, ``prod_i m_i``.
    """

    best_selection: Selection
    best_value: float
    enumerated_count: int

    def to_dict(self) -> dict[str, object]:
        return {
            "best_selection": list(self.best_selection.choices),
            "best_value": self.best_value,
            "enumerated_count": self.enumerated_count,
        }


def selection_count(inst: Instance) -> int:
    """``prod_i m_i`` as an exact integer."""
    return math.prod(inst.family_sizes)


def _split(inst: Instance) -> int:
    """Index of the first trailing family expanded into the partial-sum table."""
    start, size = inst.n, 1
    while start > 0 and (size == 1 or size * inst.family_sizes[start - 1] <= TAIL_LIMIT):
        start -= 1
        size *= inst.family_sizes[start]
    return start


def _tail_sums(inst: Instance, start: int) -> FloatArray:
    """Partial sums of families ``start..n-1``, one column per choice tuple in order."""
    sums = np.zeros((inst.d, 1))
    for i in range(start, inst.n):
        block = inst.family(i)
        sums = (sums[:, :, None] + block[:, None, :]).reshape(inst.d, -1)
    return sums


def _counter(sizes: tuple[int, ...]) -> Iterator[tuple[int, list[int]]]:
    """Mixed-radix counter; yields the lowest digit that changed and the digits."""
    digits = [0] * len(sizes)
    yield len(sizes), digits
    while True:
        pos = len(sizes) - 1
        while pos >= 0 and digits[pos] == sizes[pos] - 1:
            digits[pos] = 0
            pos -= 1
        if pos < 0:
            return
        digits[pos] += 1
        yield pos, digits


def brute_force_min(
    inst: Instance,
    shift: npt.ArrayLike | None = None,
    norm: NormKind | str | None = None,
    budget: int = DEFAULT_BUDGET,
) -> OracleResult:
    """Minimize ``||sum_i v_i - shift||`` over every selection.

    Args:
        inst: The instance.
        shift: Target point; defaults to zero.
        norm: Norm to minimize; defaults to the instance's declared norm.
        budget: Largest number of selections allowed.

    Returns:
        The minimum, its lexicographically first minimizer and the count.

    Raises:
        BudgetExceededError: If ``prod_i m_i`` exceeds ``budget``.

    Examples:
        >>> inst = Instance.from_families([[[1.0, 0.0], [-1.0, 0.0]], [[0.0, 1.0], [0.0, -1.0]]])
        >>> result = brute_force_min(inst)
        >>> round(result.best_value ** 2, 12), result.best_selection.choices
        (2.0, (0, 0))
    """
    count = selection_count(inst)
    if count > budget:
        msg = f"{count} selections exceed the enumeration budget {budget}"
        raise BudgetExceededError(msg)
    kind = inst.norm_kind if norm is None else NormKind(norm)
    target = np.zeros(inst.d) if shift is None else np.asarray(shift, dtype=np.float64)

    start = _split(inst)
    tail = _tail_sums(inst, start) - target[:, None]
    tail_sizes = inst.family_sizes[start:]
    head_sizes = inst.family_sizes[:start]
    offsets = inst.offsets

    head = np.zeros(inst.d)
    for i in range(start):
        head += inst.matrix[:, offsets[i]]

    best_value = math.inf
    best: tuple[int, ...] = ()
    for changed, digits in _counter(head_sizes):
        if changed < start:
            # Digits after ``changed`` wrapped to zero, ``changed`` went up by one.
            head += inst.matrix[:, offsets[changed] + digits[changed]]
            head -= inst.matrix[:, offsets[changed] + digits[changed] - 1]
            for i in range(changed + 1, start):
                head += inst.matrix[:, offsets[i]]
                head -= inst.matrix[:, offsets[i + 1] - 1]
        values = kind.of_columns(head[:, None] + tail)
        j = int(np.argmin(values))
        if values[j] < best_value - TIE_TOL:
            best_value = float(values[j])
            best = tuple(digits) + tuple(int(c) for c in np.unravel_index(j, tail_sizes))

    selection = Selection(best)
    value = selection_norm(inst, selection, target, kind)
    logger.debug(f"Oracle enumerated {count} selections, minimum {value:.6g}")
    return OracleResult(best_selection=selection, best_value=value, enumerated_count=count)


def enumerate_zero_vertices(inst: Instance, budget: int = DEFAULT_BUDGET) -> list[Coefficients]:
    """Every vertex of ``P = {lambda in Delta_V : V lambda = 0}``, by basis enumeration.

    Each vertex is the basic feasible solution of some set of linearly
    independent columns of ``[V; E]`` whose size is the rank of the system.

    Args:
        inst: The instance.
        budget: Largest number of column subsets allowed.

    Returns:
        The distinct vertices, in order of first discovery.

    Raises:
        BudgetExceededError: If the number of column subsets exceeds ``budget``.
    """
    a_eq, b_eq = standard_form(inst)
    rank = int(np.linalg.matrix_rank(a_eq))
    subsets = math.comb(inst.m, rank)
    if subsets > budget:
        msg = f"{subsets} column subsets exceed the enumeration budget {budget}"
        raise BudgetExceededError(msg)

    vertices: list[FloatArray] = []
    for support in itertools.combinations(range(inst.m), rank):
        columns = a_eq[:, list(support)]
        if np.linalg.matrix_rank(columns) < rank:
            continue
        solution, *_ = np.linalg.lstsq(columns, b_eq, rcond=None)
        if np.max(np.abs(columns @ solution - b_eq)) > VERTEX_TOL or np.any(
            solution < -VERTEX_TOL
        ):
            continue
        point = np.zeros(inst.m)
        point[list(support)] = np.clip(solution, 0.0, None)
        if not any(np.max(np.abs(point - v)) <= VERTEX_TOL for v in vertices):
            vertices.append(point)

    logger.debug(f"Enumerated {len(vertices)} vertices from {subsets} column subsets")
    return [Coefficients(v, inst) for v in vertices]
