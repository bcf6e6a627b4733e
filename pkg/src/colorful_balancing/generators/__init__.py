"""Random and structured instances with zero-sum witnesses."""

from colorful_balancing.generators.generators import GeneratorKind, GenSpec, generate

__all__ = ["GenSpec", "GeneratorKind", "generate"]
