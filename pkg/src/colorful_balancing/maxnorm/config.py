"""Walk parameters: slab width, step scale, freeze threshold and horizon."""

import logging
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any

logger = logging.getLogger(__name__)

K_DEFAULT = 8
DEFAULT_RESTARTS = 200
DELTA_CAP = 0.099


class FidelityMode(str, Enum):
    """How the walk step scale is chosen."""

    FAITHFUL = "faithful"
    PRACTICAL = "practical"


def omega(m: int, d: int) -> float:
    """Slab half-width ``4 sqrt(m ln(8d / m))`` for ``m`` active coordinates in ``R^d``.

    Raises:
        ValueError: Unless ``1 <= m <= 2d``.

    Examples:
        >>> round(omega(1, 1), 4)
        5.7681
    """
    if m < 1 or m > 2 * d:
        msg = f"omega needs 1 <= m <= 2d, got m={m}, d={d}"
        raise ValueError(msg)
    return 4.0 * math.sqrt(m * math.log(8.0 * d / m))


def horizon(epsilon: float, k: int = K_DEFAULT) -> int:
    """Number of walk steps ``T = ceil(K / epsilon^2)``."""
    return math.ceil(k / epsilon**2)


def faithful_violations(
    epsilon: float, m: int, d: int, delta: float, k: int = K_DEFAULT
) -> list[str]:
    """The step-scale constraints a faithful walk violates, empty if none.

    The three constraints keep each single step below ``delta`` in every
    constraint direction with high probability, bound the accumulated
    escape probability, and bound the expected largest step.
    """
    problems = []
    if not 0.0 < delta < 0.1:
        problems.append(f"delta={delta} outside (0, 0.1)")
        return problems
    t = horizon(epsilon, k)
    if epsilon > delta / math.sqrt(24.0 * m * math.log(d * m / epsilon)):
        problems.append("epsilon > delta / sqrt(24 m ln(dm/epsilon))")
    if 22.0 * epsilon * m**2 * math.log(k / epsilon**2) > 0.01:
        problems.append("22 epsilon m^2 ln(K/epsilon^2) > 0.01")
    if epsilon > 1.0 / math.sqrt(10.0 * math.log(t)):
        problems.append("epsilon > 1 / sqrt(10 ln T)")
    return problems


def solve_epsilon(m: int, d: int, delta: float, k: int = K_DEFAULT) -> float:
    """Largest ``2^-j`` (``j >= 1``) meeting the three faithful step-scale constraints.

    Raises:
        ValueError: If ``delta`` is outside ``(0, 0.1)``.

    Examples:
        >>> solve_epsilon(4, 2, 0.05) == 2.0**-21
        True
    """
    if not 0.0 < delta < 0.1:
        msg = f"delta must lie in (0, 0.1), got {delta}"
        raise ValueError(msg)
    j = 1
    while faithful_violations(2.0**-j, m, d, delta, k):
        j += 1
    logger.debug(f"Faithful epsilon for m={m}, d={d}, delta={delta}: 2^-{j}")
    return 2.0**-j


def practical_epsilon(delta: float, k: int = K_DEFAULT) -> float:
    """Fixed point of ``epsilon = min(delta / 4, 1 / sqrt(10 ln T(epsilon)))``."""
    epsilon = delta / 4.0
    for _ in range(50):
        updated = min(delta / 4.0, 1.0 / math.sqrt(10.0 * math.log(horizon(epsilon, k))))
        if updated == epsilon:
            break
        epsilon = updated
    return epsilon


def default_delta(d: int, max_family: int) -> float:
    """``min(d^(-3/2), 1 / (1 + max_i |U_i|), 0.099)``."""
    return min(d**-1.5, 1.0 / (1 + max_family), DELTA_CAP)


@dataclass(frozen=True)
class WalkConfig:
    """Parameters of the Gaussian walk and of the rounds built on it.

    ``epsilon`` and ``delta`` left as ``None`` are resolved per round by
    :meth:`for_round`.

    Attributes:
        epsilon: Step scale.
        delta: Freeze threshold.
        k: Horizon constant, ``T = ceil(k / epsilon^2)``.
        max_restarts: Independent runs allowed per skeleton round.
        mode: Faithful or practical step-scale selection.
        seed: Master seed of all walk randomness.
        max_block: Upper bound on the number of steps drawn at once.
    """

    epsilon: float | None = None
    delta: float | None = None
    k: int = K_DEFAULT
    max_restarts: int = DEFAULT_RESTARTS
    mode: FidelityMode = FidelityMode.PRACTICAL
    seed: int = 0
    max_block: int = 1 << 16

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", FidelityMode(self.mode))
        if self.delta is not None and not 0.0 < self.delta < 0.1:
            msg = f"delta must lie in (0, 0.1), got {self.delta}"
            raise ValueError(msg)
        if self.epsilon is not None and self.epsilon <= 0.0:
            msg = f"epsilon must be positive, got {self.epsilon}"
            raise ValueError(msg)
        if self.max_restarts < 1:
            msg = f"max_restarts must be at least 1, got {self.max_restarts}"
            raise ValueError(msg)

    @property
    def horizon(self) -> int:
        """``T = ceil(K / epsilon^2)``; needs a resolved epsilon."""
        if self.epsilon is None:
            msg = "Horizon requested before epsilon was resolved"
            raise ValueError(msg)
        return horizon(self.epsilon, self.k)

    def with_delta(self, d: int, max_family: int) -> "WalkConfig":
        """Fill in the default delta for dimension ``d`` if none was given."""
        if self.delta is not None:
            return self
        return replace(self, delta=default_delta(d, max_family))

    def for_round(self, m: int, d: int, max_family: int) -> "WalkConfig":
        """Resolve delta and epsilon for a round on ``m`` active coordinates.

        Raises:
            ValueError: If a faithful configuration violates the step-scale constraints.
        """
        cfg = self.with_delta(d, max_family)
        assert cfg.delta is not None
        if cfg.epsilon is None:
            if cfg.mode is FidelityMode.FAITHFUL:
                epsilon = solve_epsilon(m, d, cfg.delta, cfg.k)
            else:
                epsilon = practical_epsilon(cfg.delta, cfg.k)
            cfg = replace(cfg, epsilon=epsilon)
        if cfg.mode is FidelityMode.FAITHFUL:
            assert cfg.epsilon is not None
            problems = faithful_violations(cfg.epsilon, m, d, cfg.delta, cfg.k)
            if problems:
                msg = "Faithful walk parameters rejected: " + "; ".join(problems)
                raise ValueError(msg)
        return cfg

    def to_dict(self) -> dict[str, Any]:
        """Plain-JSON view of the configuration."""
        data = asdict(self)
        data["mode"] = self.mode.value
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "WalkConfig":
        """Build a configuration from a plain-JSON mapping, ignoring unknown keys."""
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)
