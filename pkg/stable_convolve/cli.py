"""Command-line entry point: ``stable-convolve <kind> --config FILE``.

Precedence for every setting is flag > config file > environment > default.
The only environment setting is STABLE_CONVOLVE_THREADS, the fallback for
``--threads``.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from . import __version__
from .config import KINDS, load_config
from .replication import THREADS_ENV
from .runner import EXIT_CONFIG_ERROR, create_runner

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stable-convolve",
        description=(
            "Simulate stochastic convolutions of cylindrical alpha-stable noise "
            "and check moment, small-ball and Burgers properties by Monte Carlo."
        ),
        epilog=(
            "Settings resolve as: command-line flag, then config file, then "
            f"environment ({THREADS_ENV} for --threads), then built-in default. "
            "Exit status: 0 all gates passed, 1 a gate failed, 2 configuration error."
        ),
    )
    parser.add_argument("kind", choices=KINDS, help="Experiment to run")
    parser.add_argument(
        "--config",
        metavar="FILE",
        help="JSON experiment config (a manifest.json from an earlier run also works)",
    )
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--out", metavar="DIR", help="Output directory")
    parser.add_argument(
        "--threads",
        type=int,
        metavar="K",
        help=f"Worker threads (default: ${THREADS_ENV} or 1)",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    overrides = {
        "kind": args.kind,
        "seed": args.seed,
        "out": args.out,
        "threads": args.threads,
    }
    try:
        config = load_config(args.config, overrides)
    except (OSError, ValueError) as e:
        # ValidationError and JSONDecodeError are both ValueErrors
        kind = "invalid config" if isinstance(e, ValidationError) else "cannot read config"
        print(f"stable-convolve: {kind}: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    outcome = create_runner(config).run()
    if outcome.exit_code == EXIT_CONFIG_ERROR:
        for violation in outcome.violations:
            if violation.level == "error":
                print(f"stable-convolve: {violation}", file=sys.stderr)
        if not any(v.level == "error" for v in outcome.violations):
            print(f"stable-convolve: {outcome.message}", file=sys.stderr)
    elif outcome.message:
        print(f"stable-convolve: {outcome.message}", file=sys.stderr)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
