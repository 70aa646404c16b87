#!/usr/bin/env python3
"""Command-line entry point of the max-consensus simulator."""

import argparse
import json
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, Sequence

sys.path.append(str(Path(__file__).resolve().parent.parent))

# --- Project imports
import env_loader
import streams
from config import comparison_defaults, default_ranges, logs_dir, nomographic_defaults
from db.results_db import ResultsDB
from harness.comparison import compare_tdma
from harness.reporting import (
    comparison_frame,
    save_csv,
    summary_json,
    write_comparison_csv,
    write_nomographic_csv,
    write_summary_json,
    write_trace_csv,
)
from harness.runner import run_batch, run_scenario
from harness.scenario import ScenarioError, load_scenario
from network.graph import TopologyError
from radio.airlink import SignalRanges
from radio.channel import ChannelModel
from radio.nomographic import APPROXIMATIONS, NomographicConfig, demo_failure_under_pipeline
from utils import ROOT_LOGGER, make_run_id

# Usage, schema and IO problems exit with 2, anything unexpected with 1
EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
_USAGE_ERRORS = (ScenarioError, TopologyError, ValueError, OSError, json.JSONDecodeError)


# -----------------------------------------------------------------------------
# Logging
# -----------------------------------------------------------------------------
def setup_logger(verbosity: int = 0) -> logging.Logger:
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    # stdout is reserved for artifacts (JSON summaries, CSV)
    ch = logging.StreamHandler(sys.stderr)
    ch.setLevel(logging.DEBUG if verbosity >= 2 else logging.INFO if verbosity == 1 else logging.WARNING)
    ch.setFormatter(logging.Formatter("%(asctime)s | %(levelname)s | %(message)s"))

    fh = RotatingFileHandler(
        Path(logs_dir) / "airmax.log", maxBytes=5_000_000, backupCount=3, encoding="utf-8"
    )
    fh.setLevel(logging.DEBUG)
    fh.setFormatter(logging.Formatter("%(asctime)s | %(levelname)s | %(name)s | %(message)s"))

    # fresh handlers on every call, so repeated invocations never stack them
    for h in list(logger.handlers):
        logger.removeHandler(h)
        h.close()
    logger.addHandler(ch)
    logger.addHandler(fh)
    return logger


# -----------------------------------------------------------------------------
# Subcommands
# -----------------------------------------------------------------------------
def _record(db_path: Optional[str], action, logger: logging.Logger) -> None:
    """Best-effort write to the results ledger; never fails the command."""
    if db_path is None:
        return
    try:
        db = ResultsDB(None if db_path == "" else db_path)
        action(db)
    except Exception as e:
        logger.warning("DuckDB: recording failed (non-blocking): %s: %s",
                       type(e).__name__, e, exc_info=True)


def cmd_run(args, logger: logging.Logger) -> int:
    cfg = load_scenario(args.scenario)
    result = run_scenario(cfg)
    if args.trace:
        write_trace_csv(result, args.trace)
    if args.summary:
        write_summary_json(result, args.summary, cfg.name)
    if not args.trace:
        print(summary_json(result, cfg.name))
    run_id = make_run_id(cfg.name)
    _record(args.db, lambda db: db.record_run(run_id, cfg.name, result), logger)
    return EXIT_OK


def cmd_batch(args, logger: logging.Logger) -> int:
    df = run_batch(args.directory, workers=args.workers, trace_dir=args.trace_dir)
    if args.out:
        save_csv(df, args.out)
    else:
        sys.stdout.write(df.to_csv(index=False, lineterminator="\n"))
    return EXIT_OK


def cmd_compare(args, logger: logging.Logger) -> int:
    if args.n_min > args.n_max:
        raise ValueError(f"--n-min {args.n_min} exceeds --n-max {args.n_max}")
    workers = args.workers or env_loader.workers_override() or comparison_defaults["workers"]
    records = compare_tdma(
        range(args.n_min, args.n_max + 1),
        args.trials,
        ChannelModel.rayleigh(args.channel_scale),
        args.seed,
        density=args.density,
        workers=workers,
    )
    if args.out:
        write_comparison_csv(records, args.out)
    else:
        sys.stdout.write(comparison_frame(records).to_csv(index=False, lineterminator="\n"))
    run_id = make_run_id(f"tdma-{args.seed}")
    _record(args.db, lambda db: db.record_comparison(run_id, records), logger)
    return EXIT_OK


def cmd_demo_nomographic(args, logger: logging.Logger) -> int:
    ranges = SignalRanges.from_dict(default_ranges)
    xs = nomographic_defaults["xs"]
    cfg = NomographicConfig.uniform(len(xs), 1.0)
    rng = streams.generator(args.seed, streams.NOMOGRAPHIC)
    df = demo_failure_under_pipeline(
        xs, nomographic_defaults["p_values"], cfg, ranges, noise=args.noise, rng=rng, which=args.which
    )
    if args.out:
        write_nomographic_csv(df, args.out)
    else:
        sys.stdout.write(df.to_csv(index=False, lineterminator="\n"))
    return EXIT_OK


def cmd_validate(args, logger: logging.Logger) -> int:
    load_scenario(args.scenario)
    print("ok")
    return EXIT_OK


# -----------------------------------------------------------------------------
# CLI
# -----------------------------------------------------------------------------
def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="airmax",
        description="Max-consensus over a fading wireless multiple-access channel.",
    )
    p.add_argument(
        "--env",
        choices=env_loader.ENVIRONMENTS,
        default=None,
        help=f"Loads the corresponding .env.{{env}} file. Choices: {', '.join(env_loader.ENVIRONMENTS)}.",
    )
    p.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase verbosity (use -vv for debug).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one scenario file.")
    run.add_argument("scenario", type=str)
    run.add_argument("--trace", type=str, default=None, help="Write the per-agent trace CSV here.")
    run.add_argument("--summary", type=str, default=None, help="Write the JSON run summary here.")
    run.add_argument("--db", nargs="?", const="", default=None,
                     help="Record the run in the results ledger (optionally at this path).")
    run.set_defaults(func=cmd_run)

    batch = sub.add_parser("batch", help="Run every *.json scenario in a directory.")
    batch.add_argument("directory", type=str)
    batch.add_argument("--workers", type=int, default=1)
    batch.add_argument("--trace-dir", type=str, default=None)
    batch.add_argument("--out", type=str, default=None, help="Summary CSV (default: stdout).")
    batch.set_defaults(func=cmd_batch)

    cmp_ = sub.add_parser("compare-tdma", help="Slot cost of FTC against TDMA max-consensus.")
    cmp_.add_argument("--n-min", type=int, default=comparison_defaults["n_min"])
    cmp_.add_argument("--n-max", type=int, default=comparison_defaults["n_max"])
    cmp_.add_argument("--trials", type=int, default=comparison_defaults["trials"])
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.add_argument("--density", type=float, default=comparison_defaults["density"])
    cmp_.add_argument("--channel-scale", type=float, default=1.0, help="Rayleigh scale σ.")
    cmp_.add_argument("--workers", type=int, default=None)
    cmp_.add_argument("--out", type=str, default=None, help="Comparison CSV (default: stdout).")
    cmp_.add_argument("--db", nargs="?", const="", default=None)
    cmp_.set_defaults(func=cmd_compare)

    demo = sub.add_parser("demo-nomographic", help="Error of nomographic max under receiver noise.")
    demo.add_argument("--which", choices=APPROXIMATIONS, default="sum_of_powers")
    demo.add_argument("--noise", type=float, default=None,
                      help="Receiver noise standard deviation (default: a fraction of the power range).")
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--out", type=str, default=None, help="CSV with columns p,abs_error (default: stdout).")
    demo.set_defaults(func=cmd_demo_nomographic)

    val = sub.add_parser("validate", help="Check a scenario file against the schema.")
    val.add_argument("scenario", type=str)
    val.set_defaults(func=cmd_validate)

    return p


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    env_loader.load_env(args.env)
    logger = setup_logger(args.verbose)

    try:
        return args.func(args, logger)
    except _USAGE_ERRORS as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.debug("Command %s crashed", args.command, exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
