import logging
import os
from typing import Optional

from core.errors import ConfigError

LOG_LEVEL_ENV = "LCL_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(
    level: Optional[str] = None, log_file: Optional[str] = None
) -> None:
    level_name = (level or os.getenv(LOG_LEVEL_ENV) or "INFO").upper()
    numeric = logging.getLevelName(level_name)
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level {level_name!r}")

    handler: logging.Handler = (
        logging.FileHandler(log_file, encoding="utf-8")
        if log_file
        else logging.StreamHandler()
    )
    handler.setFormatter(logging.Formatter(LOG_FORMAT))

    root = logging.getLogger()
    for old in list(root.handlers):
        root.removeHandler(old)
    root.addHandler(handler)
    root.setLevel(numeric)
