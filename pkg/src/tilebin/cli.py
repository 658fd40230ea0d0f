"""Command-line entry point.

    tilebin <stage|all> --config <file> --input <dir> --output <dir>
            [--seed N] [--workers N] [--train]

Exit codes: 0 success, 2 precondition error (missing stage inputs),
3 configuration error. The segmenter endpoint, when one is available, is
taken from the TILEBIN_SEGMENTER environment variable as host:port.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import (
    ConfigError,
    IncompleteInputError,
    NotFoundError,
    PreconditionError,
    TilebinError,
)
from .pipeline import STAGES, run_all, run_stage

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PRECONDITION = 2
EXIT_CONFIG = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilebin",
        description="Tile, score, merge, binarize, refine, and evaluate "
                    "high-resolution defect images.",
    )
    parser.add_argument("stage", choices=STAGES + ("all",),
                        help="pipeline stage to run, or `all` for the whole chain")
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--input", required=True, help="dataset root (per-category subdirs)")
    parser.add_argument("--output", required=True, help="artifact root")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides the augmentation seed from the config")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel workers per stage (default 1)")
    parser.add_argument("--train", action="store_true",
                        help="process training data (tiling of train normals, augmentation)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        configs = load_config(args.config)
        if args.stage == "all":
            run_all(configs, args.input, args.output,
                    seed=args.seed, workers=args.workers, train=args.train)
        else:
            run_stage(args.stage, configs, args.input, args.output,
                      seed=args.seed, workers=args.workers, train=args.train)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PreconditionError, NotFoundError, IncompleteInputError) as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except TilebinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
