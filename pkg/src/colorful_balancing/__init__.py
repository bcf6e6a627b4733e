"""Colorful vector balancing - one vector per family with a provably small sum.

Given families ``V_1, ..., V_n`` of vectors in the unit ball of ``R^d`` with
``0`` in the sum of their convex hulls, the package selects ``v_i in V_i``
with ``||v_1 + ... + v_n||_2 <= sqrt(d)``, or ``||.||_inf <= 48 sqrt(d)`` for
families in the unit cube, and checks every bound at runtime.

Examples:
    Basic usage::

        import colorful_balancing as cb

        # Load an instance and balance it
        inst, witness = cb.utils.load_instance("instance.json")
        report = cb.Balancer().balance(inst, witness)

        # Generate one instead
        inst, witness = cb.generate(cb.GenSpec(d=4, n=6, kind="dirichlet", seed=7))
"""

from colorful_balancing import (
    core,
    euclid,
    generators,
    linalg,
    maxnorm,
    model,
    oracle,
    reduction,
    utils,
)
from colorful_balancing.core.core import BalanceReport, Balancer
from colorful_balancing.generators.generators import GenSpec, generate
from colorful_balancing.maxnorm.config import WalkConfig
from colorful_balancing.model.model import Instance

__version__ = "0.1.0"
__all__ = [
    "BalanceReport",
    "Balancer",
    "GenSpec",
    "Instance",
    "WalkConfig",
    "core",
    "euclid",
    "generate",
    "generators",
    "linalg",
    "maxnorm",
    "model",
    "oracle",
    "reduction",
    "utils",
    "__version__",
]
