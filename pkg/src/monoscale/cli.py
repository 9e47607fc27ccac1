"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 input parse error,
4 pipeline failure.
"""

import argparse
import sys

from .config import load_config
from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    InvalidRotationError,
    MonoscaleError,
    ParseError,
    UnsupportedFormatError,
)
from .pipeline import run_eval, run_plot, run_recover, run_synth

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_PIPELINE = 4

_INPUT_ERRORS = (
    ParseError,
    UnsupportedFormatError,
    DimensionMismatchError,
    InvalidRotationError,
    FileNotFoundError,
    NotADirectoryError,
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="monoscale",
        description=(
            "Recover the metric scale of a monocular visual-odometry "
            "trajectory from the mounted camera height."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser(
        "synth", help="generate a synthetic sequence with ground truth"
    )
    p_synth.add_argument("--config", required=True)
    p_synth.add_argument("--out", required=True)

    p_recover = sub.add_parser(
        "recover", help="recover per-frame scales and a metric trajectory"
    )
    p_recover.add_argument("--config", required=True)
    p_recover.add_argument("--in", dest="input_dir", required=True)
    p_recover.add_argument("--out", required=True)

    p_eval = sub.add_parser("eval", help="trajectory accuracy report (JSON)")
    p_eval.add_argument("--est", required=True)
    p_eval.add_argument("--ref", required=True)
    p_eval.add_argument("--out", required=True)

    p_plot = sub.add_parser("plot", help="top-down SVG overlay plus positions CSV")
    p_plot.add_argument(
        "--traj", action="append", required=True, help="repeatable trajectory path"
    )
    p_plot.add_argument("--out", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            config = load_config(args.config)
            run_synth(config, args.out)
        elif args.command == "recover":
            config = load_config(args.config)
            run_recover(config, args.input_dir, args.out)
        elif args.command == "eval":
            run_eval(args.est, args.ref, args.out)
        elif args.command == "plot":
            run_plot(args.traj, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MonoscaleError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
