"""Logging setup: rich handler on standard error, level from WAVELOCATE_LOG."""

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

from wavelocate.core.errors import ConfigError

LOG_ENV_VAR = "WAVELOCATE_LOG"

_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

stderr_console = Console(stderr=True)


def configure_logging(level: str | None = None) -> int:
    """Install the rich stderr handler on the package logger.

    Args:
        level: Level name; defaults to the WAVELOCATE_LOG environment variable, then "info".

    Returns:
        The numeric level that was applied.

    Raises:
        ConfigError: If the level name is not one of error, info, debug.
    """
    name = (level or os.environ.get(LOG_ENV_VAR) or "info").strip().lower()
    if name not in _LEVELS:
        raise ConfigError(f"{LOG_ENV_VAR} must be one of {sorted(_LEVELS)}, got {name!r}")

    handler = RichHandler(console=stderr_console, show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(message)s"))

    logger = logging.getLogger("wavelocate")
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.setLevel(_LEVELS[name])
    logger.propagate = False
    return _LEVELS[name]
