import argparse
import sys
from typing import List, Optional

from loguru import logger

from coinv import __version__
from coinv.config import settings
from coinv.handlers import classify, example, predict, skew, snf, torsion

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def setup_logging(level: Optional[str] = None) -> None:
    """Stderr sink at the configured level, plus a rotating file sink when LOG_FILE is set"""
    level = level or settings.LOG_LEVEL
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level)
    if settings.LOG_FILE:
        try:
            logger.add(settings.LOG_FILE, rotation="00:00", retention="30 days", level=level)
            logger.info(f"File logging enabled: {settings.LOG_FILE}")
        except (PermissionError, OSError) as e:
            logger.warning(f"File logging disabled: {e}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Emit the run report as JSON")
    common.add_argument("--seed", type=int, default=None, help="Seed for random data (default from settings)")
    common.add_argument("--log-level", default=None, help="Override COINV_LOG_LEVEL")

    parser = argparse.ArgumentParser(
        prog="coinv",
        description="Torsion in coinvariants of skew products of Cantor minimal systems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register subcommands
    for module in (predict, torsion, skew, snf, example, classify):
        module.register(subparsers, [common])
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command, print its report and return the exit status"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level.upper() if args.log_level else None)
    logger.debug(f"Running {args.command}")
    report = args.handler(args)
    print(report.to_json() if args.json else args.render(report))
    return report.exit_status


def main() -> None:
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        logger.info("Interrupted")
        sys.exit(130)


if __name__ == "__main__":
    main()
