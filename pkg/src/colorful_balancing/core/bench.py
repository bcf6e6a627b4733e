"""Benchmark driver: generate, balance and tabulate a list of instance specs."""

import csv
import logging
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

from colorful_balancing.core.core import Balancer
from colorful_balancing.exceptions import BalancingError
from colorful_balancing.generators import GenSpec, generate
from colorful_balancing.maxnorm import WalkConfig

logger = logging.getLogger(__name__)

BENCH_COLUMNS = (
    "kind",
    "d",
    "n",
    "m",
    "norm",
    "seed",
    "status",
    "achieved",
    "bound",
    "ratio",
    "k",
    "fractional",
    "rounds",
    "restarts",
    "steps",
    "wall_time",
    "error",
)


def _row(spec: GenSpec, balancer: Balancer) -> dict[str, Any]:
    row: dict[str, Any] = dict.fromkeys(BENCH_COLUMNS, "")
    row.update(kind=spec.kind.value, d=spec.d, n=spec.n, norm=spec.norm.value, seed=spec.seed)
    started = time.perf_counter()
    try:
        inst, witness = generate(spec)
        row["m"] = inst.m
        report = balancer.balance(inst, witness)
    except (BalancingError, ValueError) as e:
        row["status"] = type(e).__name__
        row["error"] = str(e)
        row["wall_time"] = time.perf_counter() - started
        logger.warning(f"Bench row {spec.to_dict()} failed: {e}")
        return row

    row.update(
        status=report.status,
        achieved=report.achieved,
        bound=report.bound,
        ratio=report.achieved / report.bound,
        k=report.k,
        fractional=report.fractional,
        rounds=report.rounds,
        restarts=report.restarts,
        steps=report.steps,
        wall_time=report.wall_time,
    )
    return row


def bench(
    specs: Sequence[GenSpec],
    cfg: WalkConfig | None = None,
    out: str | Path | None = None,
    workers: int = 1,
) -> list[dict[str, Any]]:
    """Balance one generated instance per spec and collect one row per spec.

    A failing row records the error class and message; the run continues.

    Args:
        specs: Instance recipes.
        cfg: Walk parameters shared by all rows.
        out: Optional CSV destination.
        workers: Processes balancing rows in parallel; rows keep the order of ``specs``.

    Returns:
        The rows, keyed by :data:`BENCH_COLUMNS`.

    Raises:
        ValueError: If ``workers`` is below one.
    """
    if workers < 1:
        msg = f"workers must be at least 1, got {workers}"
        raise ValueError(msg)
    balancer = Balancer(cfg)
    if workers == 1:
        rows = []
        for index, spec in enumerate(specs):
            logger.info(f"Bench row {index + 1}/{len(specs)}: {spec.to_dict()}")
            rows.append(_row(spec, balancer))
    else:
        logger.info(f"Bench: {len(specs)} rows on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, specs, [balancer] * len(specs)))

    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=BENCH_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
        logger.info(f"Wrote {len(rows)} bench rows to {path}")
    failed = sum(1 for row in rows if row["status"] != "success")
    if failed:
        logger.warning(f"{failed} of {len(rows)} bench rows did not succeed")
    return rows
