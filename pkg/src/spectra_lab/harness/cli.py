"""``spectra-lab`` command line.

Exit codes: 0 all checks passed, 2 a check failed, 3 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from ..errors import ConfigError
from .config import parse_config
from .experiments import f_star_for_config, run_experiment
from .metrics import emit_metrics

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 2, 3

log = logging.getLogger("spectra_lab")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectra-lab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write metrics")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", help="output directory (env SPECTRA_OUT)")
    run.add_argument("--jobs", type=int, help="worker processes (env SPECTRA_JOBS)")
    run.add_argument("--wall-time", action="store_true", help="include the wall_time_s column")

    val = sub.add_parser("validate", help="parse a config and print the resolved values")
    val.add_argument("config")

    fst = sub.add_parser("fstar", help="print F* certificates as JSON")
    fst.add_argument("config")
    fst.add_argument("--seed", type=int)
    return parser


def _jobs(arg) -> int:
    if arg is not None:
        jobs = arg
    else:
        try:
            jobs = int(os.environ.get("SPECTRA_JOBS", "1"))
        except ValueError as exc:
            raise ConfigError("SPECTRA_JOBS must be an integer") from exc
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    return jobs


def _load(path, seed=None):
    cfg = parse_config(path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed).resolved()
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "validate":
            cfg = _load(args.config)
            print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "fstar":
            cfg = _load(args.config, args.seed)
            print(json.dumps(f_star_for_config(cfg), indent=2))
            return EXIT_OK

        cfg = _load(args.config, args.seed)
        jobs = _jobs(args.jobs)
        out_dir = Path(args.out or os.environ.get("SPECTRA_OUT") or cfg.output_path)
        result = run_experiment(cfg, jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    path = out_dir / f"{cfg.experiment}_seed{cfg.seed}.csv"
    summary = dict(result.summary, checks=result.checks, passed=result.passed)
    emit_metrics(result.records, path, config=cfg.to_dict(), summary=summary, wall_time=args.wall_time)
    for name, ok in result.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"wrote {path}")
    return EXIT_OK if result.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
