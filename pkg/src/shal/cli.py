"""
Command line entry point.

::

    shal synth --output corpus.jsonl --events events.csv --seed 7
    shal cluster --input corpus.jsonl --rho 0.5 --output clusters.json
    shal train --input clusters.json --corpus corpus.jsonl --output model.json
"""

import argparse
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from . import __version__, register
from .exceptions import DataError, UsageError
from .utils import configure_logging, get_logger

logger = get_logger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class ShalArgumentParser(argparse.ArgumentParser):
    """Raise UsageError instead of exiting, so run() owns every exit code"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> ShalArgumentParser:
    common = ShalArgumentParser(add_help=False)
    common.add_argument("--input", help="primary input file")
    common.add_argument("--output", help="primary output file (tables default to stdout)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--config", help="MiningConfig JSON; explicit flags take precedence")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = ShalArgumentParser(prog="shal", description="Smart Home Activity Learner")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    register(subparsers, parents=[common])
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 1 on a usage or configuration error (including a
        missing input file), 2 on invalid input data
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            raise UsageError("shal: a subcommand is required")
    except UsageError as e:
        configure_logging(0)
        logger.error("%s", e)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.verbose)
    command = args.command_class()
    try:
        return command.execute(args)
    except UsageError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except ValidationError as e:
        logger.error("invalid configuration: %s", e)
        return EXIT_USAGE
    except FileNotFoundError as e:
        logger.error("missing input: %s", e)
        return EXIT_USAGE
    except (DataError, ValueError, OSError) as e:
        logger.error("%s: %s", args.subcommand, e)
        return EXIT_DATA


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
