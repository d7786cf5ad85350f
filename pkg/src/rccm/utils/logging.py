"""Logging utilities for the RCCM toolkit."""

import logging
import sys
from typing import Any, Optional

import structlog


def setup_logging(
    level: str = "INFO",
    format: str = "console",
    log_file: Optional[str] = None,
) -> None:
    """
    Setup structured logging.

    Log records go to stderr so that result files and stdout stay clean. Fields
    bound with ``bind_run_context`` (command, seed, threads) are merged into
    every record.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR)
        format: Log format (json, console)
        log_file: Optional log file path
    """
    numeric_level = getattr(logging, level.upper())
    logging.basicConfig(level=numeric_level, stream=sys.stderr, format="%(message)s", force=True)

    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]
    if format == "json":
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=False))

    structlog.configure(
        processors=processors,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(numeric_level)
        logging.getLogger().addHandler(file_handler)


def bind_run_context(**fields: Any) -> None:
    """Attach fields such as the command name and seed to every later log record."""
    structlog.contextvars.bind_contextvars(**{key: value for key, value in fields.items() if value is not None})


def clear_run_context() -> None:
    structlog.contextvars.clear_contextvars()


def get_logger(name: str):
    """
    Get a structured logger instance.

    Args:
        name: Logger name

    Returns:
        A structured logger instance
    """
    return structlog.get_logger(name)
