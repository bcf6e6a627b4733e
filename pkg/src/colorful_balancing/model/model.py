"""Core data types: instances, coefficient vectors, selections and index partitions.

An :class:`Instance` stores all family members column-wise as one dense
``d x m`` matrix (the vector family matrix ``V = (V_1 | ... | V_n)``) together
with a family-offset table, so that restrictions ``V|_J`` are cheap to build.
A :class:`Coefficients` vector is indexed by the columns of its owner instance
and lives in ``Delta_V`` (the product of the per-family simplices) when it is
non-negative and sums to one on each family.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt

from colorful_balancing.exceptions import InvalidInstanceError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# Entries in (tau, 1 - tau) are fractional.
FRACTIONAL_TOL = 1e-9
# Additive slack on unit-ball membership.
BALL_SLACK = 1e-9
# Per-family sums must equal one within this tolerance.
SIMPLEX_TOL = 1e-9
NEGATIVITY_TOL = 1e-12


class NormKind(str, Enum):
    """The two norms an instance can be declared in."""

    EUCLIDEAN = "l2"
    MAXIMUM = "linf"

    @property
    def order(self) -> float:
        """The ``ord`` argument of :func:`numpy.linalg.norm` for this norm."""
        return 2.0 if self is NormKind.EUCLIDEAN else float(np.inf)

    def of(self, vector: npt.ArrayLike) -> float:
        """Evaluate the norm of a single vector."""
        return float(np.linalg.norm(np.asarray(vector, dtype=np.float64), ord=self.order))

    def of_columns(self, matrix: FloatArray) -> FloatArray:
        """Evaluate the norm of every column of a matrix."""
        if matrix.shape[1] == 0:
            return np.zeros(0)
        return np.linalg.norm(matrix, ord=self.order, axis=0)


@dataclass(frozen=True, eq=False)
class Instance:
    """A vector family matrix with its partition into families and its declared norm.

    Attributes:
        matrix: The ``d x m`` matrix whose columns are the family members in order.
        offsets: Family boundaries; family ``i`` owns columns ``offsets[i]:offsets[i+1]``.
        norm_kind: The norm whose unit ball the members must lie in.
        columns: For a restriction, the column indices in ``parent`` that were kept.
        family_ids: For a restriction, the parent family index of every family.
        parent: The instance this one was restricted from, if any.

    Examples:
        >>> inst = Instance.from_families([[[1.0, 0.0]], [[0.0, 1.0]]], NormKind.MAXIMUM)
        >>> inst.d, inst.n, inst.m
        (2, 2, 2)
    """

    matrix: FloatArray
    offsets: tuple[int, ...]
    norm_kind: NormKind = NormKind.EUCLIDEAN
    columns: IntArray = field(default=None)  # type: ignore[assignment]
    family_ids: tuple[int, ...] = field(default=None)  # type: ignore[assignment]
    parent: "Instance | None" = None

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.float64, copy=True)
        if matrix.ndim != 2:
            msg = f"Vector family matrix must be two-dimensional, got shape {matrix.shape}"
            raise ValueError(msg)
        offsets = tuple(int(o) for o in self.offsets)
        if not offsets or offsets[0] != 0 or offsets[-1] != matrix.shape[1]:
            msg = f"Family offsets {offsets} do not cover {matrix.shape[1]} columns"
            raise ValueError(msg)
        if any(b < a for a, b in zip(offsets, offsets[1:])):
            msg = f"Family offsets must be non-decreasing, got {offsets}"
            raise ValueError(msg)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "norm_kind", NormKind(self.norm_kind))

        columns = (
            np.arange(matrix.shape[1], dtype=np.int64)
            if self.columns is None
            else np.asarray(self.columns, dtype=np.int64).copy()
        )
        columns.setflags(write=False)
        object.__setattr__(self, "columns", columns)
        if self.family_ids is None:
            object.__setattr__(self, "family_ids", tuple(range(len(offsets) - 1)))

    @classmethod
    def from_families(
        cls,
        families: Sequence[Sequence[Sequence[float]]],
        norm_kind: NormKind | str = NormKind.EUCLIDEAN,
        d: int | None = None,
    ) -> "Instance":
        """Build an instance from nested lists of family members.

        Args:
            families: ``families[i][j]`` is the ``j``-th member of family ``i``.
            norm_kind: The declared norm (``"l2"`` or ``"linf"``).
            d: The ambient dimension; inferred from the first member when omitted.

        Returns:
            The instance. Structural problems such as empty families are kept so
            that :func:`validate_instance` can report them.

        Raises:
            ValueError: If member lengths disagree with the dimension.
        """
        if d is None:
            first = next((member for family in families for member in family), None)
            if first is None:
                msg = "Cannot infer the dimension of an instance without members"
                raise ValueError(msg)
            d = len(first)

        columns: list[Sequence[float]] = []
        offsets = [0]
        for i, family in enumerate(families):
            for j, member in enumerate(family):
                if len(member) != d:
                    msg = f"Member {j} of family {i} has length {len(member)}, expected {d}"
                    raise ValueError(msg)
                columns.append(member)
            offsets.append(len(columns))

        matrix = np.array(columns, dtype=np.float64).T if columns else np.zeros((d, 0))
        return cls(matrix=matrix, offsets=tuple(offsets), norm_kind=NormKind(norm_kind))

    @property
    def d(self) -> int:
        """Ambient dimension."""
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        """Total number of members over all families."""
        return int(self.matrix.shape[1])

    @property
    def n(self) -> int:
        """Number of families."""
        return len(self.offsets) - 1

    @property
    def family_sizes(self) -> tuple[int, ...]:
        """The sizes ``m_i`` of the families."""
        return tuple(b - a for a, b in zip(self.offsets, self.offsets[1:]))

    @property
    def family_index(self) -> IntArray:
        """For every column, the index of the family it belongs to."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.family_sizes)

    @property
    def rows(self) -> FloatArray:
        """The rows ``W^j`` of the family matrix, one per coordinate."""
        return self.matrix

    def family_slice(self, i: int) -> slice:
        """Column range of family ``i``."""
        return slice(self.offsets[i], self.offsets[i + 1])

    def family(self, i: int) -> FloatArray:
        """The ``d x m_i`` block of family ``i``."""
        return self.matrix[:, self.family_slice(i)]

    def family_indicators(self) -> FloatArray:
        """The ``n x m`` matrix whose row ``i`` is the indicator of family ``i``."""
        indicators = np.zeros((self.n, self.m))
        indicators[self.family_index, np.arange(self.m)] = 1.0
        return indicators

    def with_norm(self, norm_kind: NormKind | str) -> "Instance":
        """Return the same family matrix declared in another norm."""
        return Instance(matrix=self.matrix, offsets=self.offsets, norm_kind=NormKind(norm_kind))

    def restrict(self, index: Sequence[int] | IntArray) -> "Instance":
        """Restrict the family matrix to a set of columns, ``V|_J``.

        Families that lose all their columns disappear; the others keep their
        relative order, and so do their surviving members.

        Args:
            index: Column indices into this instance.

        Returns:
            The restricted instance, whose ``parent`` is this instance.

        Raises:
            IndexError: If an index is out of range.
        """
        kept = np.unique(np.asarray(index, dtype=np.int64))
        if kept.size and (kept[0] < 0 or kept[-1] >= self.m):
            msg = f"Column index out of range for an instance with {self.m} columns"
            raise IndexError(msg)

        owners = self.family_index[kept]
        family_ids = tuple(int(i) for i in np.unique(owners))
        counts = [int(np.count_nonzero(owners == i)) for i in family_ids]
        offsets = tuple(int(o) for o in np.concatenate([[0], np.cumsum(counts)]))
        return Instance(
            matrix=self.matrix[:, kept],
            offsets=offsets,
            norm_kind=self.norm_kind,
            columns=kept,
            family_ids=family_ids,
            parent=self,
        )


@dataclass
class ValidationReport:
    """Every invariant an instance violates, as human-readable messages."""

    violations: list[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        """True iff no violation was found."""
        return not self.violations

    def raise_if_invalid(self) -> None:
        """Raise :class:`InvalidInstanceError` listing all violations."""
        if self.violations:
            msg = "Invalid instance: " + "; ".join(self.violations)
            raise InvalidInstanceError(msg)


def validate_instance(inst: Instance) -> ValidationReport:
    """Check an instance against the hypotheses of the balancing theorems.

    Args:
        inst: The instance to check.

    Returns:
        A report with one message per violated invariant; empty iff well-formed.

    Examples:
        >>> inst = Instance.from_families([[[1.5, 0.0]]], "l2")
        >>> validate_instance(inst).violations
        ['norm exceeds 1: family 0 member 0 has norm 1.5']
    """
    report = ValidationReport()
    if inst.d < 1:
        report.violations.append(f"dimension must be at least 1, got {inst.d}")
    if inst.n < 1:
        report.violations.append("instance has no families")

    for i, size in enumerate(inst.family_sizes):
        if size == 0:
            report.violations.append(f"empty family: family {i}")

    if not np.all(np.isfinite(inst.matrix)):
        report.violations.append("non-finite vector component")
        return report

    norms = inst.norm_kind.of_columns(inst.matrix)
    family_index = inst.family_index
    for column in np.flatnonzero(norms > 1.0 + BALL_SLACK):
        i = int(family_index[column])
        j = int(column) - inst.offsets[i]
        report.violations.append(
            f"norm exceeds 1: family {i} member {j} has norm {norms[column]:.6g}"
        )

    if report.violations:
        logger.debug(f"Instance validation found {len(report.violations)} violations")
    return report


@dataclass(frozen=True)
class IndexPartition:
    """Split of the column indices ``[m]`` into fractional ``F`` and locked ``L``."""

    size: int
    fractional: tuple[int, ...]
    locked: tuple[int, ...]

    def __post_init__(self) -> None:
        f_set, l_set = set(self.fractional), set(self.locked)
        if f_set & l_set:
            msg = "Fractional and locked index sets overlap"
            raise ValueError(msg)
        if f_set | l_set != set(range(self.size)):
            msg = f"Index sets do not cover [0, {self.size})"
            raise ValueError(msg)

    @classmethod
    def from_fractional(cls, size: int, fractional: Sequence[int]) -> "IndexPartition":
        """Build the partition whose fractional side is ``fractional``."""
        f_sorted = tuple(sorted(int(i) for i in fractional))
        f_set = set(f_sorted)
        return cls(size, f_sorted, tuple(i for i in range(size) if i not in f_set))


@dataclass(frozen=True, eq=False)
class Coefficients:
    """A coefficient vector ``beta`` over the columns of an instance.

    Membership in ``Delta_V`` is not enforced at construction because
    restrictions to partial families are legitimate intermediate objects;
    use :meth:`violations` or :meth:`in_simplex` to check it.
    """

    entries: FloatArray
    owner: Instance

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.float64, copy=True).reshape(-1)
        if entries.shape[0] != self.owner.m:
            msg = f"Expected {self.owner.m} coefficients, got {entries.shape[0]}"
            raise ValueError(msg)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return int(self.entries.shape[0])

    def family_entries(self, i: int) -> FloatArray:
        """The coefficients of family ``i``."""
        return self.entries[self.owner.family_slice(i)]

    def family_sums(self) -> FloatArray:
        """Per-family coefficient sums."""
        return np.bincount(
            self.owner.family_index, weights=self.entries, minlength=self.owner.n
        ).astype(np.float64)

    def image(self) -> FloatArray:
        """The point ``V beta`` in ``R^d``."""
        return self.owner.matrix @ self.entries

    def violations(self) -> list[str]:
        """Reasons this vector is not a point of ``Delta_V``."""
        problems = []
        if np.any(self.entries < -NEGATIVITY_TOL):
            problems.append("negative coefficient")
        sums = self.family_sums()
        bad = np.flatnonzero(np.abs(sums - 1.0) > SIMPLEX_TOL)
        problems.extend(f"family {int(i)} sums to {sums[i]:.12g}" for i in bad)
        return problems

    def in_simplex(self) -> bool:
        """True iff the vector lies in ``Delta_V`` up to tolerance."""
        return not self.violations()

    def fractional_mask(self, tol: float = FRACTIONAL_TOL) -> npt.NDArray[np.bool_]:
        """Mask of the entries lying strictly inside ``(tol, 1 - tol)``."""
        return (self.entries > tol) & (self.entries < 1.0 - tol)

    def partition(self, tol: float = FRACTIONAL_TOL) -> IndexPartition:
        """Split the indices into fractional and locked coordinates."""
        return IndexPartition.from_fractional(
            len(self), np.flatnonzero(self.fractional_mask(tol)).tolist()
        )

    def free_families(self, tol: float = FRACTIONAL_TOL) -> tuple[int, ...]:
        """Families holding at least one fractional entry."""
        owners = self.owner.family_index[self.fractional_mask(tol)]
        return tuple(int(i) for i in np.unique(owners))

    def locked_families(self, tol: float = FRACTIONAL_TOL) -> tuple[int, ...]:
        """Families all of whose entries are within ``tol`` of 0 or 1."""
        free = set(self.free_families(tol))
        return tuple(i for i in range(self.owner.n) if i not in free)

    def is_selection(self, tol: float = FRACTIONAL_TOL) -> bool:
        """True iff every family is locked and the vector lies in ``Delta_V``."""
        near_binary = np.all(
            (np.abs(self.entries) <= tol) | (np.abs(self.entries - 1.0) <= tol)
        )
        return bool(near_binary) and self.in_simplex()

    def to_selection(self) -> "Selection":
        """Convert a selection vector into the chosen member indices.

        Raises:
            ValueError: If the vector is not a selection vector.
        """
        if not self.is_selection():
            msg = "Coefficients are not a selection vector"
            raise ValueError(msg)
        return Selection(
            tuple(int(np.argmax(self.family_entries(i))) for i in range(self.owner.n))
        )


@dataclass(frozen=True)
class Selection:
    """One chosen member per family; ``choices[i]`` indexes into family ``i``."""

    choices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(int(c) for c in self.choices))

    def __len__(self) -> int:
        return len(self.choices)

    def check(self, inst: Instance) -> None:
        """Raise if the selection does not fit the instance.

        Raises:
            ValueError: If the family count differs.
            IndexError: If a choice is out of range for its family.
        """
        if len(self.choices) != inst.n:
            msg = f"Selection has {len(self.choices)} choices for {inst.n} families"
            raise ValueError(msg)
        for i, (choice, size) in enumerate(zip(self.choices, inst.family_sizes)):
            if not 0 <= choice < size:
                msg = f"Choice {choice} out of range for family {i} of size {size}"
                raise IndexError(msg)

    def columns(self, inst: Instance) -> IntArray:
        """Column indices of the chosen members."""
        self.check(inst)
        return np.asarray(inst.offsets[:-1], dtype=np.int64) + np.asarray(
            self.choices, dtype=np.int64
        )

    def to_coefficients(self, inst: Instance) -> Coefficients:
        """The 0/1 selection vector of this selection."""
        entries = np.zeros(inst.m)
        entries[self.columns(inst)] = 1.0
        return Coefficients(entries, inst)

    def vector_sum(self, inst: Instance) -> FloatArray:
        """The sum of the selected members, recomputed from the raw vectors."""
        return inst.matrix[:, self.columns(inst)].sum(axis=1)


def restrict(coeff: Coefficients, index: Sequence[int] | IntArray) -> Coefficients:
    """Restrict a coefficient vector to a set of columns.

    Args:
        coeff: The coefficients to restrict.
        index: Column indices into ``coeff.owner``.

    Returns:
        The coefficients over ``coeff.owner.restrict(index)``.

    Raises:
        IndexError: If an index is out of range.

    Examples:
        >>> inst = Instance.from_families([[[1.0], [-1.0]], [[0.0]]], "l2")
        >>> restrict(Coefficients([0.5, 0.5, 1.0], inst), [0, 1]).entries.tolist()
        [0.5, 0.5]
    """
    sub = coeff.owner.restrict(index)
    return Coefficients(coeff.entries[sub.columns], sub)


def _placement(owner: Instance) -> tuple[Instance, IntArray]:
    # An unrestricted instance keeps all of its own columns.
    return (owner if owner.parent is None else owner.parent), owner.columns


def concatenate(a: Coefficients, b: Coefficients) -> Coefficients:
    """Merge coefficients over complementary restrictions, ``a v b``.

    Either side may be the full vector when the other is the empty restriction
    of the same instance.

    Args:
        a: Coefficients over ``V|_L``.
        b: Coefficients over ``V|_F``.

    Returns:
        The coefficients over ``V`` agreeing with ``a`` on ``L`` and ``b`` on ``F``.

    Raises:
        ValueError: If the owners are not restrictions of the same instance or the
            index sets overlap or leave columns uncovered.
    """
    parent, a_columns = _placement(a.owner)
    b_parent, b_columns = _placement(b.owner)
    if b_parent is not parent:
        msg = "Concatenated coefficients must be restrictions of the same instance"
        raise ValueError(msg)

    covered = np.zeros(parent.m, dtype=np.int64)
    np.add.at(covered, a_columns, 1)
    np.add.at(covered, b_columns, 1)
    if np.any(covered > 1):
        msg = "Index sets of concatenated coefficients overlap"
        raise ValueError(msg)
    if np.any(covered == 0):
        msg = "Index sets of concatenated coefficients are incomplete"
        raise ValueError(msg)

    entries = np.empty(parent.m)
    entries[a_columns] = a.entries
    entries[b_columns] = b.entries
    return Coefficients(entries, parent)


def selection_norm(
    inst: Instance,
    sel: Selection,
    shift: npt.ArrayLike | None = None,
    norm_kind: NormKind | str | None = None,
) -> float:
    """Norm of the selected sum minus a shift, ``||sum_i v_i - shift||``.

    Args:
        inst: The instance.
        sel: The selection.
        shift: Vector subtracted from the sum; defaults to zero.
        norm_kind: Norm to use; defaults to the instance's declared norm.

    Returns:
        The norm value.
    """
    total = sel.vector_sum(inst)
    if shift is not None:
        total = total - np.asarray(shift, dtype=np.float64)
    kind = inst.norm_kind if norm_kind is None else NormKind(norm_kind)
    return kind.of(total)
