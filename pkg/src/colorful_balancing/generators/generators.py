"""Reproducible instance construction, every instance with a zero-sum witness.

The random kinds draw members, draw weights ``lambda`` in ``Delta_V`` and then
cancel the drift ``x = V lambda`` by moving the heaviest member of each family
by ``-x / (n lambda_ij)``. Scaling the whole instance back into the unit ball
keeps ``V lambda = 0``.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from colorful_balancing.linalg import Rng
from colorful_balancing.model import Coefficients, Instance, NormKind, validate_instance
from colorful_balancing.model.model import FloatArray

logger = logging.getLogger(__name__)

WITNESS_TOL = 1e-10


class GeneratorKind(str, Enum):
    """Member distributions."""

    CUBE = "cube"
    SPHERE = "sphere"
    SHARP = "sharp"
    ANTIPODAL = "antipodal"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class GenSpec:
    """Recipe of one generated instance.

    Attributes:
        d: Dimension.
        n: Number of families.
        sizes: Inclusive range of family sizes; ignored by ``sharp``, rounded up
            to even sizes by ``antipodal``.
        norm: Declared norm of the instance.
        kind: Member distribution.
        seed: Seed of the generator stream.
    """

    d: int
    n: int
    sizes: tuple[int, int] = (2, 4)
    norm: NormKind = NormKind.EUCLIDEAN
    kind: GeneratorKind = GeneratorKind.DIRICHLET
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "norm", NormKind(self.norm))
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if self.d < 1 or self.n < 1:
            msg = f"Need d >= 1 and n >= 1, got d={self.d}, n={self.n}"
            raise ValueError(msg)
        lo, hi = self.sizes
        if lo < 1 or hi < lo:
            msg = f"Family size range must satisfy 1 <= lo <= hi, got {self.sizes}"
            raise ValueError(msg)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "d": self.d,
            "n": self.n,
            "sizes": list(self.sizes),
            "norm": self.norm.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GenSpec":
        """Build a spec from a plain-JSON mapping, ignoring unknown keys."""
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        if "sizes" in known:
            known["sizes"] = tuple(known["sizes"])
        return cls(**known)


def _unit_columns(points: FloatArray, norm: NormKind) -> FloatArray:
    lengths = norm.of_columns(points)
    return points / np.where(lengths > 0.0, lengths, 1.0)


def _draw_members(spec: GenSpec, gen: np.random.Generator, m: int) -> FloatArray:
    d = spec.d
    if spec.kind is GeneratorKind.CUBE:
        signs = gen.choice([-1.0, 1.0], size=(d, m))
        return signs if spec.norm is NormKind.MAXIMUM else signs / np.sqrt(d)
    directions = _unit_columns(gen.standard_normal((d, m)), spec.norm)
    if spec.kind is GeneratorKind.SPHERE:
        return directions
    # Dirichlet: uniform radius profile of the ball.
    return directions * gen.random(m) ** (1.0 / d)


def _cancel_drift(
    matrix: FloatArray, offsets: list[int], weights: FloatArray
) -> FloatArray:
    n = len(offsets) - 1
    drift = matrix @ weights
    matrix = matrix.copy()
    for i in range(n):
        a, b = offsets[i], offsets[i + 1]
        j = a + int(np.argmax(weights[a:b]))
        matrix[:, j] -= drift / (n * weights[j])
    return matrix


def _sharp(spec: GenSpec) -> tuple[FloatArray, list[int], FloatArray]:
    matrix = np.zeros((spec.d, 2 * spec.n))
    for i in range(spec.n):
        matrix[i % spec.d, 2 * i] = 1.0
        matrix[i % spec.d, 2 * i + 1] = -1.0
    return matrix, list(range(0, 2 * spec.n + 1, 2)), np.full(2 * spec.n, 0.5)


def _antipodal(
    spec: GenSpec, gen: np.random.Generator, sizes: list[int]
) -> tuple[FloatArray, list[int], FloatArray]:
    pairs = [(s + 1) // 2 for s in sizes]
    base = _unit_columns(gen.standard_normal((spec.d, sum(pairs))), spec.norm)
    base *= gen.uniform(0.5, 1.0, size=base.shape[1])
    # Members alternate +v, -v.
    matrix = np.empty((spec.d, 2 * base.shape[1]))
    matrix[:, 0::2] = base
    matrix[:, 1::2] = -base
    offsets = [0, *np.cumsum([2 * p for p in pairs]).tolist()]
    weights = np.concatenate([np.full(2 * p, 1.0 / (2 * p)) for p in pairs])
    return matrix, offsets, weights


def generate(spec: GenSpec) -> tuple[Instance, Coefficients]:
    """Generate an instance and a witness ``lambda`` with ``V lambda = 0``.

    Args:
        spec: The recipe.

    Returns:
        The instance and its witness. Identical specs give bit-identical output.

    Raises:
        ValueError: If the witness misses ``V lambda = 0``.
        InvalidInstanceError: If the instance fails validation.

    Examples:
        >>> inst, witness = generate(GenSpec(d=3, n=3, kind="sharp"))
        >>> inst.family(0).T.tolist(), witness.entries.tolist()[:2]
        ([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], [0.5, 0.5])
    """
    gen = Rng(spec.seed).generator
    lo, hi = spec.sizes
    sizes = gen.integers(lo, hi + 1, size=spec.n).tolist()

    if spec.kind is GeneratorKind.SHARP:
        matrix, offsets, weights = _sharp(spec)
    elif spec.kind is GeneratorKind.ANTIPODAL:
        matrix, offsets, weights = _antipodal(spec, gen, sizes)
    else:
        offsets = [0, *np.cumsum(sizes).tolist()]
        matrix = _draw_members(spec, gen, offsets[-1])
        alpha = 0.5 if spec.kind is GeneratorKind.DIRICHLET else 1.0
        weights = np.concatenate([gen.dirichlet(np.full(s, alpha)) for s in sizes])
        matrix = _cancel_drift(matrix, offsets, weights)
        largest = float(np.max(spec.norm.of_columns(matrix)))
        if largest > 1.0:
            matrix = matrix / largest

    inst = Instance(matrix=matrix, offsets=tuple(offsets), norm_kind=spec.norm)
    validate_instance(inst).raise_if_invalid()
    witness = Coefficients(weights, inst)
    residual = float(np.max(np.abs(witness.image())))
    if residual > WITNESS_TOL or not witness.in_simplex():
        msg = f"Generated witness misses V lambda = 0 by {residual:.3e}"
        raise ValueError(msg)
    logger.debug(
        f"Generated {spec.kind.value} instance d={inst.d}, n={inst.n}, m={inst.m}, "
        f"witness residual {residual:.2e}"
    )
    return inst, witness
