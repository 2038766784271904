# app logger

import logging
from typing import Optional


def setup_logging(level: str = "INFO", filename: Optional[str] = None):
    # Configure logging
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format='%(asctime)s %(levelname)s - %(message)s',
                        filename=filename, filemode='a', force=True)


def shutdown_logging():
    logging.shutdown()
