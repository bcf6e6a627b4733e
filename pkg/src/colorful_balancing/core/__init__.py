"""The balancing pipeline and its benchmark driver."""

from colorful_balancing.core.bench import BENCH_COLUMNS, bench
from colorful_balancing.core.core import BalanceReport, Balancer, theorem_bound

__all__ = ["BENCH_COLUMNS", "BalanceReport", "Balancer", "bench", "theorem_bound"]
