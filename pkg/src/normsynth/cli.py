"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .algorithms import ALGORITHM_NAMES
from .errors import ConfigurationError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment configuration file")
    common.add_argument("--problem", choices=["two", "five"])
    common.add_argument("--seed", type=int, help="run seed (run) or campaign master seed (experiment)")
    common.add_argument("--executions", type=int)
    common.add_argument("--out", help="campaign directory")
    common.add_argument("--profile", choices=sorted(harness.PROFILES))
    common.add_argument("--workers", type=int)
    common.add_argument("--revalidate", type=int, metavar="SAMPLES",
                        help="re-evaluate final archives with this many Monte-Carlo paths")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="normsynth", description="Multi-value norm synthesis with MOEAs")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="one algorithm run")
    run.add_argument("--algorithm", required=True, help=f"one of {', '.join(ALGORITHM_NAMES)}")
    run.add_argument("--execution", type=int, default=0)

    exp = sub.add_parser("experiment", parents=[common], help="executions x algorithms campaign")
    exp.add_argument("--algorithm", action="append", help="restrict to these algorithms (repeatable)")
    exp.add_argument("--alpha", type=float, default=0.01)

    sub.add_parser("indicators", parents=[common], help="hypervolume and IGD+ per run")
    cmp_ = sub.add_parser("compare", parents=[common], help="statistical comparison table")
    cmp_.add_argument("--alpha", type=float, default=0.01)
    sel = sub.add_parser("select", parents=[common], help="solutions by objective priority")
    sel.add_argument("--prioritize", type=int, required=True, metavar="K", help="1-based objective index")
    plot = sub.add_parser("plotdata", parents=[common], help="plot data files and figures")
    plot.add_argument("--no-figures", action="store_true")
    return parser


def _config(args, algorithms=None) -> harness.ExperimentConfig:
    flags = {
        "problem": args.problem,
        "executions": args.executions,
        "out": args.out,
        "workers": args.workers,
        "revalidate": args.revalidate,
        "algorithms": algorithms,
    }
    if args.command == "experiment":
        flags["master_seed"] = args.seed
    return harness.build_config(args.config, args.profile, **flags)


def _campaign(args) -> Path:
    if args.out:
        return Path(args.out)
    if args.config:
        return Path(harness.build_config(args.config).out)
    raise ConfigurationError("give the campaign directory with --out")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            if args.algorithm not in ALGORITHM_NAMES:
                raise ConfigurationError(
                    f"unknown algorithm {args.algorithm!r}; valid names: {', '.join(ALGORITHM_NAMES)}"
                )
            config = _config(args, [args.algorithm])
            record = harness.cmd_run(config, args.algorithm, args.seed, args.execution)
            where = harness.run_dir(Path(config.out), record.algorithm, record.execution)
            print(f"{record.algorithm}: {len(record.archive)} solutions, "
                  f"{record.evaluations} evaluations -> {where / 'front.csv'}")
        elif args.command == "experiment":
            config = _config(args, args.algorithm)
            campaign = harness.cmd_experiment(config)
            if (campaign / "compare.md").exists() and args.alpha != 0.01:
                harness.cmd_compare(campaign, args.alpha)
            if (campaign / "compare.md").exists():
                print((campaign / "compare.md").read_text())
            print(f"campaign written to {campaign}")
        elif args.command == "indicators":
            print(f"wrote {harness.cmd_indicators(_campaign(args))}")
        elif args.command == "compare":
            campaign = _campaign(args)
            harness.cmd_compare(campaign, args.alpha)
            print((campaign / "compare.md").read_text())
        elif args.command == "select":
            sel = harness.cmd_select(_campaign(args), args.prioritize)
            print(harness.describe_selection(sel))
        elif args.command == "plotdata":
            print(f"wrote {harness.cmd_plotdata(_campaign(args), figures=not args.no_figures)}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
