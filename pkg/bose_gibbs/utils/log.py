"""
utils/log.py

JSON log setup for the command-line entry points. Library modules only ever
call ``logging.getLogger(__name__)``; handlers are attached here, once.
"""

import logging
import logging.handlers
from typing import Optional

from pythonjsonlogger import jsonlogger

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def setup_logging(
    log_file: Optional[str] = "bose_gibbs.log",
    level: int = logging.INFO,
    console_level: int = logging.WARNING,
) -> logging.Logger:
    """
    Attach a rotating JSON file handler and a console handler to the
    ``bose_gibbs`` logger tree. Calling it again replaces the handlers.
    """
    root = logging.getLogger("bose_gibbs")
    root.setLevel(level)
    for old in list(root.handlers):
        root.removeHandler(old)
        old.close()

    if log_file:
        handler = logging.handlers.RotatingFileHandler(
            filename=log_file,
            maxBytes=10_000_000,  # 10 MB
            backupCount=5,
        )
        handler.setFormatter(jsonlogger.JsonFormatter(LOG_FORMAT))
        handler.setLevel(level)
        root.addHandler(handler)

    # stderr, so stdout stays clean for JSON/CSV artifacts
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter("%(levelname)s %(name)s %(message)s"))
    console_handler.setLevel(console_level)
    root.addHandler(console_handler)
    return root
