# app/main.py
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from app.api.command_handler import handle_command
from app.api.config_parser import parse_config
from app.api.schema import COMMANDS
from app.core import logger
from app.core.errors import AQRelaxError, ArtifactIOError, VERDICT_FAIL_EXIT

OUTPUT_DIR_ENV = "AQRELAX_OUTPUT_DIR"
LOG_FILE = "aqrelax.log"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aqrelax", description="A-quasiconvex envelopes and relaxation checks.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", help="configuration file ([section] / key = value)")
    parser.add_argument("--output-dir", default=None, help=f"overrides the config; ${OUTPUT_DIR_ENV} overrides both")
    parser.add_argument("--log-level", default="INFO")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.setup_logging(args.log_level)
    try:
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            raise ArtifactIOError(f"Cannot read config {args.config}: {e}")
        config = parse_config(text)
        config.command = args.command
        config.output_dir = os.environ.get(OUTPUT_DIR_ENV) or args.output_dir or config.output_dir
        output_dir = Path(config.output_dir)
        try:
            output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ArtifactIOError(f"Cannot create output directory {output_dir}: {e}")
        logger.setup_logging(args.log_level, filename=str(output_dir / LOG_FILE))

        outcome = handle_command(config, output_dir)
        print(outcome.message)
        return 0 if outcome.passed else VERDICT_FAIL_EXIT
    except AQRelaxError as e:
        logging.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    finally:
        logger.shutdown_logging()


if __name__ == "__main__":
    sys.exit(main())
