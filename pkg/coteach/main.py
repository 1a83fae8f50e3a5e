import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from coteach import __version__
from coteach.commands import (
    register_train,
    register_evaluate,
    register_compare,
    register_transfer,
    register_sweep,
    register_export,
    register_pretrain,
)
from coteach.config import get_settings
from coteach.exceptions import ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors are configuration errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(
        prog="coteach",
        description="Cooperative multiagent learning to teach: training, comparison and export harness",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    register_train(subparsers)
    register_evaluate(subparsers)
    register_compare(subparsers)
    register_transfer(subparsers)
    register_sweep(subparsers)
    register_export(subparsers)
    register_pretrain(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    # Configure logging
    logging.basicConfig(level=settings.log_level.upper())

    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except Exception:
        logger.exception(f"'{args.command}' failed")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
