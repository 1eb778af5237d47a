import os
import sys
import logging
from datetime import datetime
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: str = "INFO", log_dir: Optional[str] = "logs") -> logging.Logger:
    """Configure the root logger and return the application logger.

    Args:
        level: log level name (DEBUG/INFO/WARNING/...)
        log_dir: directory for the log file; empty means stderr only
    """
    handlers = [logging.StreamHandler(sys.stderr)]

    if log_dir:
        # Create the log directory
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        log_filename = os.path.join(log_dir, f"thermoflux_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log")
        handlers.append(logging.FileHandler(log_filename, encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )

    # Reduce third-party log output
    logging.getLogger('matplotlib').setLevel(logging.WARNING)
    logging.getLogger('numexpr').setLevel(logging.WARNING)

    return logging.getLogger('thermoflux')
