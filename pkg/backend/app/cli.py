"""
Command line interface.

    poisson-coverage analytic --config fig1.env
    poisson-coverage simulate --config fig1.env --snapshots 20000 --workers 4
    poisson-coverage hex      --config fig1.env
    poisson-coverage sweep    --config fig1.env --output results/fig1.csv
    poisson-coverage compare  --rows results/fig1.csv --level 0.5

Errors are printed to stderr as one JSON object and exit with status 2.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from app import __version__
from app.core.errors import CoverageError
from app.core.logging_config import configure_logging
from app.services.config_service import load_config
from app.services.sweep_service import (
    compare_models,
    provenance,
    read_rows,
    render_csv,
    run_sweep,
    write_rows,
)

logger = logging.getLogger(__name__)

SUBCOMMAND_MODELS = {
    "analytic": ["poisson_analytic"],
    "simulate": ["poisson_mc"],
    "hex": ["hexagonal_mc"],
    "sweep": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson-coverage",
        description="Outage and handover probabilities of Poisson cellular networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("analytic", "analytic probabilities over the sweep"),
        ("simulate", "Poisson-network Monte Carlo over the sweep"),
        ("hex", "hexagonal-grid Monte Carlo over the sweep"),
        ("sweep", "every enabled model over the sweep"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="experiment document")
        sub.add_argument("--output", default=None, help="CSV or .json result file (default: stdout)")
        sub.add_argument("--seed", type=int, default=None, help="overrides SIM_SEED")
        sub.add_argument("--snapshots", type=int, default=None, help="overrides SIM_SNAPSHOTS")
        sub.add_argument("--workers", type=int, default=None, help="parallel sweep tasks")

    compare = commands.add_parser("compare", help="dB gap between Poisson and hexagonal curves")
    source = compare.add_mutually_exclusive_group(required=True)
    source.add_argument("--rows", help="result file written by sweep")
    source.add_argument("--config", help="run the sweep first")
    compare.add_argument("--level", type=float, default=0.5, help="outage level")
    compare.add_argument("--reference", default="poisson_analytic")
    compare.add_argument("--baseline", default="hexagonal_mc")
    compare.add_argument("--seed", type=int, default=None)
    compare.add_argument("--snapshots", type=int, default=None)
    compare.add_argument("--workers", type=int, default=None)
    return parser


def _run_models(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    rows = run_sweep(
        config,
        models=SUBCOMMAND_MODELS[args.command],
        workers=args.workers,
        seed=args.seed,
        snapshots=args.snapshots,
    )
    output = args.output or config.output_path
    if output:
        write_rows(rows, output, config, args.seed)
    else:
        sys.stdout.write(render_csv(rows, provenance(config, args.seed)))
    return 0


def _run_compare(args: argparse.Namespace) -> int:
    if args.rows:
        rows = read_rows(args.rows)
    else:
        config = load_config(args.config)
        models = sorted({args.reference, args.baseline})
        rows = run_sweep(config, models=models, workers=args.workers, seed=args.seed, snapshots=args.snapshots)
    report = compare_models(rows, args.level, args.reference, args.baseline)
    sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.command == "compare":
            return _run_compare(args)
        return _run_models(args)
    except CoverageError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 2
    except (ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"type": type(exc).__name__, "error": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
