"""Command-line entry point: ``cruc run`` and ``cruc stats``.

Exit codes: 0 success, 1 usage/configuration error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, coerce_setting, read_config_file, resolve
from .errors import CrucError
from .evaluation import run_experiment
from .ingestion import FORMATS, IOT_EVENTS, compute_stats, parse_iot_events, parse_movielens, reformulate_iot
from .matrix import RatingScale

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# flag -> config key; every value is parsed by the config module so file and flag agree
_RUN_FLAGS = {
    "--data": "data_path",
    "--format": "data_format",
    "--scale": "scale",
    "--schemes": "schemes",
    "--fractions": "fractions",
    "--folds": "folds",
    "--seed": "seed",
    "--m": "m",
    "--k": "k",
    "--clusters": "clusters",
    "--min-overlap": "min_overlap",
    "--lambda": "lam",
    "--delta": "delta",
    "--significant-filter": "significant_filter",
    "--smoothing": "smoothing",
    "--max-iters": "max_iters",
    "--timing": "timing",
    "--strict-parse": "strict_parse",
    "--output": "output_path",
    "--output-format": "output_format",
    "--threads": "threads",
}

_HELP = {
    "--data": "ratings file (MovieLens) or sensor log (iot-events); '-' for stdin",
    "--format": f"input layout: {', '.join(FORMATS)}",
    "--scale": "rating scale as MIN,MAX (default 1,5 for tab-separated, 0.5,5 for double-colon)",
    "--schemes": "comma-separated schemes to evaluate",
    "--fractions": "comma-separated training fractions in (0, 1)",
    "--lambda": "fusion weight of user-based within the non-hybrid share (default 0.75)",
    "--delta": "fusion weight of the hybrid prediction (default 0.1)",
    "--significant-filter": "on/off: restrict neighbors and clustering to frequent raters",
    "--smoothing": "on/off: cluster-based smoothing of missing ratings",
    "--timing": "on/off: record wall time per cell (makes reports non-reproducible byte-wise)",
    "--strict-parse": "on/off: abort on the first malformed line (default on)",
    "--output": "report destination (default stdout)",
    "--threads": "parallel experiment cells (default $CRUC_THREADS or 1)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cruc", description="Cold-start collaborative filtering experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log one line per experiment cell")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run a scheme x fraction x fold sweep and write a report")
    run.add_argument("--config", help="key = value experiment file; flags override it")
    for flag, key in _RUN_FLAGS.items():
        run.add_argument(flag, dest=key, metavar=key.upper(), help=_HELP.get(flag))
    run.add_argument("--lenient", action="store_true", help="shorthand for --strict-parse off")

    stats = sub.add_parser("stats", help="print dataset statistics")
    stats.add_argument("data", help="ratings file or '-' for stdin")
    stats.add_argument("--format", default="tab-separated", help=_HELP["--format"])
    stats.add_argument("--scale", help="rating scale MIN,MAX (iot-events only)")
    stats.add_argument("--lenient", action="store_true", help="skip malformed lines instead of failing")
    return parser


def _overrides(args) -> dict:
    out = {}
    for key in _RUN_FLAGS.values():
        raw = getattr(args, key)
        if raw is not None:
            k, v = coerce_setting(key, raw)
            out[k] = v
    if args.lenient:
        out["strict_parse"] = False
    return out


def _env_threads():
    raw = os.environ.get("CRUC_THREADS")
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("threads", f"CRUC_THREADS={raw!r} is not an integer") from None


def cmd_run(args) -> int:
    file_values = read_config_file(args.config) if args.config else {}
    overrides = _overrides(args)
    if "threads" not in overrides and "threads" not in file_values and _env_threads() is not None:
        overrides["threads"] = _env_threads()
    cfg = resolve(file_values, overrides)
    if cfg.data_path is None:
        raise ConfigError("data", "no input given (set data_path in the config file or pass --data)")
    report = run_experiment(cfg)
    text = report.to_json() if cfg.output_format == "json" else report.to_csv()
    if cfg.output_path and cfg.output_path != "-":
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(args) -> int:
    if args.format not in FORMATS:
        raise ConfigError("format", f"expected one of {', '.join(FORMATS)}, got {args.format!r}")
    if args.format == IOT_EVENTS:
        if not args.scale:
            raise ConfigError("scale", "required for iot-events data")
        _, (lo, hi) = coerce_setting("scale", args.scale)
        events, skipped = parse_iot_events(args.data, strict=not args.lenient)
        stats = compute_stats(reformulate_iot(events, RatingScale(lo, hi)))
    else:
        _, stats = parse_movielens(args.data, args.format, strict=not args.lenient)
        skipped = stats.n_skipped
    if stats.n_ratings == 0:
        print(f"empty dataset: no ratings in {args.data}", file=sys.stderr)
        return EXIT_DATA
    print(stats.format())
    if skipped:
        print(f"skipped_lines: {skipped}")
    return EXIT_OK


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cruc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return cmd_run(args) if args.command == "run" else cmd_stats(args)
    except ConfigError as exc:
        print(f"cruc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CrucError as exc:
        print(f"cruc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"cruc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(run())

