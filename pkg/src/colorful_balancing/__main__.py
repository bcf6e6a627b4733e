"""Command-line interface: ``colorbal {balance,gen,verify,oracle,bench}``."""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from colorful_balancing.core import Balancer, bench
from colorful_balancing.exceptions import BalancingError, BoundViolatedError
from colorful_balancing.generators import GeneratorKind, GenSpec, generate
from colorful_balancing.maxnorm import FidelityMode, WalkConfig
from colorful_balancing.model import NormKind
from colorful_balancing.oracle import brute_force_min
from colorful_balancing.utils import (
    attach_telemetry,
    dump_instance,
    load_bench_spec,
    load_instance,
    load_selection,
    write_report,
)

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

NORMS = [kind.value for kind in NormKind]


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        msg = f"seed must be an unsigned 64-bit integer, got {text}"
        raise argparse.ArgumentTypeError(msg)
    return value


def build_parser() -> argparse.ArgumentParser:
    """The argument parser of the ``colorbal`` tool."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="Enable verbose output")
    common.add_argument("-d", "--debug", action="store_true", help="Enable debug mode")

    parser = argparse.ArgumentParser(
        prog="colorbal",
        description="Colorful vector balancing - pick one vector per family with a small sum",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    balance = commands.add_parser("balance", parents=[common], help="Balance an instance")
    balance.add_argument("--input", type=Path, required=True, help="Instance JSON file")
    balance.add_argument("--norm", choices=NORMS, help="Override the instance's norm")
    balance.add_argument(
        "--mode",
        choices=[mode.value for mode in FidelityMode],
        default=FidelityMode.PRACTICAL.value,
        help="Step-scale selection of the max-norm walk",
    )
    balance.add_argument("--seed", type=_seed, default=0, help="Seed of all walk randomness")
    balance.add_argument("--delta", type=float, help="Freeze threshold of the walk")
    balance.add_argument("--max-restarts", type=int, default=200, help="Walk runs per round")
    balance.add_argument("--out", type=Path, help="Write the report JSON here")
    balance.add_argument("--telemetry", type=Path, help="Write walk telemetry JSON lines here")

    gen = commands.add_parser("gen", parents=[common], help="Generate an instance")
    gen.add_argument(
        "--kind",
        choices=[kind.value for kind in GeneratorKind],
        default=GeneratorKind.DIRICHLET.value,
    )
    gen.add_argument("--d", type=int, required=True, help="Dimension")
    gen.add_argument("--n", type=int, required=True, help="Number of families")
    gen.add_argument("--seed", type=_seed, default=0)
    gen.add_argument("--norm", choices=NORMS, default=NormKind.EUCLIDEAN.value)
    gen.add_argument("--min-size", type=int, default=2, help="Smallest family size")
    gen.add_argument("--max-size", type=int, default=4, help="Largest family size")
    gen.add_argument("--out", type=Path, required=True, help="Instance JSON destination")

    verify = commands.add_parser("verify", parents=[common], help="Check a selection")
    verify.add_argument("--input", type=Path, required=True, help="Instance JSON file")
    verify.add_argument("--selection", type=Path, required=True, help="Selection JSON file")

    oracle = commands.add_parser("oracle", parents=[common], help="Exhaustive minimum")
    oracle.add_argument("--input", type=Path, required=True, help="Instance JSON file")
    oracle.add_argument("--budget", type=int, default=10**7, help="Largest selection count")

    bench_cmd = commands.add_parser("bench", parents=[common], help="Run a benchmark")
    bench_cmd.add_argument("--spec", type=Path, required=True, help="Bench spec JSON file")
    bench_cmd.add_argument("--out", type=Path, required=True, help="CSV destination")
    bench_cmd.add_argument("--workers", type=int, default=1, help="Parallel worker processes")
    return parser


def _balance(args: argparse.Namespace) -> int:
    inst, witness = load_instance(args.input)
    cfg = WalkConfig(
        delta=args.delta,
        max_restarts=args.max_restarts,
        mode=FidelityMode(args.mode),
        seed=args.seed,
    )
    if args.telemetry is not None:
        attach_telemetry(args.telemetry)
    report = Balancer(cfg).balance(inst, witness, norm=args.norm, verbose=args.verbose)
    if args.out is not None:
        write_report(report.to_dict(), args.out)
    print(report.to_json())
    if not report.ok:
        msg = f"Achieved {report.achieved:.6g} exceeds the bound {report.bound:.6g}"
        raise BoundViolatedError(msg)
    return 0


def _gen(args: argparse.Namespace) -> int:
    spec = GenSpec(
        d=args.d,
        n=args.n,
        sizes=(args.min_size, args.max_size),
        norm=NormKind(args.norm),
        kind=GeneratorKind(args.kind),
        seed=args.seed,
    )
    inst, witness = generate(spec)
    dump_instance(inst, args.out, witness)
    print(f"Generated {spec.kind.value} instance d={inst.d}, n={inst.n}, m={inst.m}")
    return 0


def _verify(args: argparse.Namespace) -> int:
    inst, _ = load_instance(args.input)
    report = Balancer().verify(inst, load_selection(args.selection))
    summary = report.to_dict()
    summary.update(status=report.status, oracle_min=report.oracle_min)
    print(json.dumps(summary, indent=2))
    if not report.ok:
        msg = f"Selection norm {report.achieved:.6g} exceeds the bound {report.bound:.6g}"
        raise BoundViolatedError(msg)
    return 0


def _oracle(args: argparse.Namespace) -> int:
    inst, _ = load_instance(args.input)
    print(json.dumps(brute_force_min(inst, budget=args.budget).to_dict(), indent=2))
    return 0


def _bench(args: argparse.Namespace) -> int:
    cfg, specs = load_bench_spec(args.spec)
    rows = bench(specs, cfg, args.out, workers=args.workers)
    ok = sum(1 for row in rows if row["status"] == "success")
    print(f"Bench finished: {ok}/{len(rows)} rows succeeded, table in {args.out}")
    return 0


COMMANDS = {
    "balance": _balance,
    "gen": _gen,
    "verify": _verify,
    "oracle": _oracle,
    "bench": _bench,
}


def main(argv: Sequence[str] | None = None) -> NoReturn:
    """Main entry point for the CLI."""
    args = build_parser().parse_args(argv)

    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.verbose:
        logging.getLogger().setLevel(logging.INFO)
    else:
        logging.getLogger().setLevel(logging.WARNING)

    try:
        sys.exit(COMMANDS[args.command](args))
    except BalancingError as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.exit(e.exit_code)
    except FileNotFoundError as e:
        logger.error(str(e))
        sys.exit(1)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON: {e}")
        sys.exit(1)
    except ValueError as e:
        logger.error(str(e))
        sys.exit(1)
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
