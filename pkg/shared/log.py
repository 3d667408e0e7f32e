"""
Logging helpers.
Every module gets its logger here so all output hangs under one project logger.
"""
import json
import logging
from typing import Any, Optional

from config.constants import LOGGER_ROOT, LOG_FORMAT, DEFAULT_LOG_LEVEL


class JsonLineFormatter(logging.Formatter):
    """Formats records as one JSON object per line, including event fields."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            'time': self.formatTime(record),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        payload.update(getattr(record, 'fields', {}))
        return json.dumps(payload, default=float)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger below the project root logger.

    Args:
        name: Dotted module name (e.g. 'solvers.lyap_adi')

    Returns:
        Logger named '<root>.<name>'
    """
    return logging.getLogger(f"{LOGGER_ROOT}.{name}")


def configure_logging(level: str = DEFAULT_LOG_LEVEL, json_path: Optional[str] = None) -> logging.Logger:
    """
    Install console (and optionally JSON-lines) handlers on the project logger.

    Calling it again replaces the previously installed handlers.

    Args:
        level: Logging level name
        json_path: Optional file receiving structured JSON lines

    Returns:
        The configured project logger
    """
    root = logging.getLogger(LOGGER_ROOT)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    root.setLevel(level.upper())
    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(console)

    if json_path is not None:
        file_handler = logging.FileHandler(json_path, encoding='utf-8')
        file_handler.setFormatter(JsonLineFormatter())
        root.addHandler(file_handler)

    root.propagate = False
    return root


def log_event(logger: logging.Logger, event: str, level: int = logging.INFO, **fields: Any):
    """
    Log an event with key=value fields.

    Args:
        logger: Target logger
        event: Short event name
        level: Logging level
        **fields: Values attached to the record (JSON handler emits them as keys)
    """
    if not logger.isEnabledFor(level):
        return
    text = ' '.join(f"{key}={_short(value)}" for key, value in fields.items())
    logger.log(level, f"{event} {text}".rstrip(), extra={'fields': fields})


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.3e}"
    return str(value)
