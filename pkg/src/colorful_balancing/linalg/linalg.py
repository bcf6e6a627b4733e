"""Dense linear-algebra kernel for the balancing algorithms.

Subspaces are stored by an orthonormal basis (one basis vector per row) built
with two-pass modified Gram-Schmidt, which keeps the basis orthonormal to
roughly machine precision even when it is rebuilt many times on shrinking
constraint sets.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

# A residual shorter than this after orthogonalization counts as dependent.
RANK_TOL = 1e-8


def _as_rows(vectors: Sequence[npt.ArrayLike] | FloatArray, width: int) -> FloatArray:
    rows = np.asarray(vectors, dtype=np.float64)
    if rows.size == 0:
        return np.zeros((0, width))
    rows = rows.reshape(-1, width)
    return rows


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of ``R^m`` given by an orthonormal basis.

    Attributes:
        ambient_dim: The dimension ``m`` of the ambient space.
        basis: ``r x m`` array whose rows are orthonormal.
        normals: The constraint normals the subspace was built to annihilate.
    """

    ambient_dim: int
    basis: FloatArray
    normals: FloatArray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        basis = _as_rows(self.basis, self.ambient_dim).copy()
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        normals = (
            np.zeros((0, self.ambient_dim))
            if self.normals is None
            else _as_rows(self.normals, self.ambient_dim).copy()
        )
        normals.setflags(write=False)
        object.__setattr__(self, "normals", normals)

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        """The whole space ``R^m`` with its standard basis."""
        return cls(ambient_dim, np.eye(ambient_dim))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        """The zero subspace of ``R^m``."""
        return cls(ambient_dim, np.zeros((0, ambient_dim)))

    @property
    def dim(self) -> int:
        """Dimension of the subspace."""
        return int(self.basis.shape[0])

    def embed(self, columns: npt.ArrayLike, ambient_dim: int) -> "Subspace":
        """Embed this subspace into a larger space along the given coordinates.

        Coordinates outside ``columns`` are exactly zero on every basis vector.
        """
        columns = np.asarray(columns, dtype=np.int64)
        basis = np.zeros((self.dim, ambient_dim))
        basis[:, columns] = self.basis
        normals = np.zeros((self.normals.shape[0], ambient_dim))
        normals[:, columns] = self.normals
        return Subspace(ambient_dim, basis, normals)

    def orthonormality_error(self) -> float:
        """Largest deviation of the basis Gram matrix from the identity."""
        if self.dim == 0:
            return 0.0
        gram = self.basis @ self.basis.T
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def annihilation_error(self) -> float:
        """Largest inner product between a recorded normal and a basis vector."""
        if self.dim == 0 or self.normals.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(self.normals @ self.basis.T)))


def gram_schmidt(
    vectors: FloatArray,
    against: FloatArray | None = None,
    tol: float = RANK_TOL,
) -> FloatArray:
    """Orthonormalize the rows of ``vectors`` with two-pass modified Gram-Schmidt.

    Args:
        vectors: ``q x r`` array, one candidate vector per row.
        against: Orthonormal rows every output vector must also be orthogonal to.
        tol: Residual length below which a candidate is dropped as dependent.

    Returns:
        Orthonormal rows spanning the part of ``span(vectors)`` orthogonal to
        ``against``, in input order with dependent candidates skipped.
    """
    width = vectors.shape[1]
    accepted: list[FloatArray] = [] if against is None else list(against)
    n_fixed = len(accepted)
    for candidate in vectors:
        residual = np.array(candidate, dtype=np.float64)
        for _ in range(2):
            for q in accepted:
                residual = residual - np.dot(q, residual) * q
        length = float(np.linalg.norm(residual))
        if length > tol:
            accepted.append(residual / length)
    if len(accepted) == n_fixed:
        return np.zeros((0, width))
    return np.array(accepted[n_fixed:])


def _complement(rows: FloatArray, dim: int, tol: float = RANK_TOL) -> FloatArray:
    """Orthonormal basis of the orthogonal complement of ``rows`` in ``R^dim``.

    Standard basis vectors are added greedily by largest residual, which keeps
    every accepted residual at least ``sqrt(1 - k / dim)``-sized and makes the
    choice deterministic.
    """
    target = dim - rows.shape[0]
    basis = [q for q in rows]
    extra: list[FloatArray] = []
    while len(extra) < target:
        spanned = np.array(basis) if basis else np.zeros((0, dim))
        residual_sq = 1.0 - np.sum(spanned**2, axis=0)
        pick = int(np.argmax(residual_sq))
        new = gram_schmidt(np.eye(dim)[pick : pick + 1], against=spanned, tol=tol)
        if new.shape[0] == 0:
            break
        basis.append(new[0])
        extra.append(new[0])
    return np.array(extra) if extra else np.zeros((0, dim))


def null_space_basis(
    normals: Sequence[npt.ArrayLike] | FloatArray,
    within: Subspace,
    tol: float = RANK_TOL,
) -> Subspace:
    """Orthonormal basis of ``{x in within : <x, z> = 0 for all z in normals}``.

    The normals are projected onto ``within``, orthonormalized there, and the
    result is the orthogonal complement of their span inside ``within``.

    Args:
        normals: Constraint normals of length ``m``.
        within: The subspace to cut down.
        tol: Rank tolerance on residual lengths.

    Returns:
        The constrained subspace; its dimension is ``dim(within)`` minus the
        numerical rank of the projected normals.

    Examples:
        >>> sub = null_space_basis([[1.0, 0.0, 0.0]], Subspace.full(3))
        >>> sub.dim
        2
    """
    m = within.ambient_dim
    normal_rows = _as_rows(normals, m)
    recorded = np.vstack([within.normals, normal_rows])
    if within.dim == 0:
        return Subspace(m, np.zeros((0, m)), recorded)
    if normal_rows.shape[0] == 0:
        return Subspace(m, within.basis, recorded)

    # Unit normals, so the rank tolerance is an absolute residual length.
    lengths = np.linalg.norm(normal_rows, axis=1)
    unit = normal_rows[lengths > 0] / lengths[lengths > 0, None]
    # Work in the coordinates of ``within``; its basis is orthonormal.
    coords = unit @ within.basis.T
    spanned = gram_schmidt(coords, tol=tol)
    complement = _complement(spanned, within.dim, tol=tol)
    basis = complement @ within.basis if complement.shape[0] else np.zeros((0, m))
    logger.debug(
        f"Null space: dim {within.dim} -> {basis.shape[0]} "
        f"after {normal_rows.shape[0]} normals (rank {spanned.shape[0]})"
    )
    return Subspace(m, basis, recorded)


def project(sub: Subspace, u: npt.ArrayLike) -> FloatArray:
    """Orthogonal projection ``P_sub(u)``.

    Examples:
        >>> sub = Subspace(2, [[2**-0.5, 2**-0.5]])
        >>> project(sub, [1.0, 0.0]).round(12).tolist()
        [0.5, 0.5]
    """
    vector = np.asarray(u, dtype=np.float64)
    if sub.dim == 0:
        return np.zeros_like(vector)
    return sub.basis.T @ (sub.basis @ vector)


class Rng:
    """Seeded random stream built on numpy's counter-based Philox generator.

    Identical seeds give identical streams. Independent child streams are
    derived from ``(seed, key...)`` so concurrent workers, walk rounds and
    restarts never share state.

    Examples:
        >>> Rng(7).standard_normal(2).tolist() == Rng(7).standard_normal(2).tolist()
        True
    """

    def __init__(self, seed: int = 0, key: Sequence[int] = ()) -> None:
        if seed < 0 or seed >= 2**64:
            msg = f"Seed must be an unsigned 64-bit integer, got {seed}"
            raise ValueError(msg)
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def derive(self, *key: int) -> "Rng":
        """An independent stream identified by this stream's key extended by ``key``."""
        return Rng(self.seed, self.key + tuple(key))

    @property
    def generator(self) -> np.random.Generator:
        """The underlying numpy generator."""
        return self._generator

    def standard_normal(self, size: int | tuple[int, ...]) -> FloatArray:
        """Independent standard normal deviates."""
        return self._generator.standard_normal(size)

    def choice(self, probabilities: FloatArray) -> int:
        """Draw an index with the given (non-negative, summing to one) probabilities."""
        return int(self._generator.choice(len(probabilities), p=probabilities))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, key={self.key})"


def gaussian_on(sub: Subspace, rng: Rng) -> FloatArray:
    """Draw ``G ~ N(sub)``: independent standard normals along an orthonormal basis.

    Returns:
        A length-``m`` vector; the zero vector for the zero subspace.
    """
    if sub.dim == 0:
        return np.zeros(sub.ambient_dim)
    return rng.standard_normal(sub.dim) @ sub.basis


def gaussian_batch(sub: Subspace, rng: Rng, count: int) -> FloatArray:
    """Draw ``count`` independent samples of ``N(sub)`` as the rows of an array."""
    if sub.dim == 0:
        return np.zeros((count, sub.ambient_dim))
    return rng.standard_normal((count, sub.dim)) @ sub.basis
