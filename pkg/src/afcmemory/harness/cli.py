"""Command line: ``afcmemory run | validate | list-experiments``.

Exit codes: 0 success, 1 an invariant check failed, 2 bad configuration,
3 the experiment raised.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, serialize, validate_config
from .experiments import EXPERIMENT_RUNNERS, run_experiment

log = logging.getLogger("afcmemory")


def _read(path: str | None) -> str | None:
    if path is None:
        return None
    return Path(path).read_text()


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afcmemory", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment and write its tables")
    r.add_argument("--config", help="YAML config file (defaults apply when omitted)")
    r.add_argument("--experiment", help="overrides the experiment named in the config")
    r.add_argument("--seed", type=int)
    r.add_argument("--out-dir")
    r.add_argument("--format", choices=("csv", "json"))
    r.add_argument("--trials", type=int, help="Monte Carlo trials; 0 runs the analytic path only")

    v = sub.add_parser("validate", help="validate a config and print it fully defaulted")
    v.add_argument("--config", required=True)
    v.add_argument("--experiment")

    sub.add_parser("list-experiments", help="list experiment names")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    if args.command == "list-experiments":
        for name, (_, desc) in EXPERIMENT_RUNNERS.items():
            print(f"{name:20s} {desc}")
        return 0

    try:
        if args.command == "validate":
            cfg = validate_config(_read(args.config), experiment=args.experiment)
            sys.stdout.write(serialize(cfg))
            return 0
        cfg = validate_config(
            _read(args.config),
            experiment=args.experiment,
            seed=args.seed,
            output_dir=args.out_dir,
            format=args.format,
            trials=args.trials,
        )
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        report = run_experiment(cfg)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    paths = report.write(cfg.output_dir, cfg.format)
    for k, val in report.summary.items():
        print(f"{k} = {val:.6g}")
    for path in paths:
        log.info("wrote %s", path)
    print(f"{report.experiment} {report.config_hash} {report.duration_s:.2f} s")
    failed = report.failed_invariants()
    if failed:
        print("invariant check failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0
