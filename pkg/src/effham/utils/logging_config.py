"""
Logging for effham commands and solvers.

Log records always go to standard error so that command results on standard
output stay machine-readable. Every record emitted while a command runs
carries the same correlation ID; long solver calls are timed.
"""

import functools
import json
import logging
import logging.handlers
import sys
import time
import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, Optional, TypeVar

F = TypeVar("F", bound=Callable[..., Any])

_correlation_id: ContextVar[Optional[str]] = ContextVar("effham_correlation_id", default=None)

# Attributes passed through ``extra=`` that solvers use
RECORD_FIELDS = ("command", "cell", "track", "steps", "elapsed_ms")

_LEVEL_STYLES = {
    "DEBUG": "\033[2m",
    "INFO": "\033[34m",
    "WARNING": "\033[33m",
    "ERROR": "\033[31m",
    "CRITICAL": "\033[1;31m",
}
_PLAIN = "\033[0m"

_MAX_LOG_BYTES = 5 * 1024 * 1024
_LOG_BACKUPS = 3


def get_correlation_id() -> str:
    """Return the correlation ID of the current run, creating one on first use."""
    current = _correlation_id.get()
    if current is None:
        current = uuid.uuid4().hex
        _correlation_id.set(current)
    return current


@contextmanager
def run_context(correlation_id: Optional[str] = None) -> Iterator[str]:
    """Scope a correlation ID to one run; the previous ID is restored on exit."""
    token = _correlation_id.set(correlation_id or uuid.uuid4().hex)
    try:
        yield _correlation_id.get()  # type: ignore[misc]
    finally:
        _correlation_id.reset(token)


def _record_extras(record: logging.LogRecord) -> Dict[str, Any]:
    return {name: getattr(record, name) for name in RECORD_FIELDS if hasattr(record, name)}


class StructuredFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "correlation_id": get_correlation_id(),
        }
        entry.update(_record_extras(record))
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, default=str)


class ConsoleFormatter(logging.Formatter):
    """Short colored lines: level, run ID prefix, logger and message."""

    def format(self, record: logging.LogRecord) -> str:
        style = _LEVEL_STYLES.get(record.levelname, "")
        line = f"{style}{record.levelname:<8}{_PLAIN} [{get_correlation_id()[:8]}] {record.name}: {record.getMessage()}"
        if record.exc_info:
            line = f"{line}\n{self.formatException(record.exc_info)}"
        return line


def _rotating_handler(path: Path, level: int) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(
        path, maxBytes=_MAX_LOG_BYTES, backupCount=_LOG_BACKUPS, encoding="utf-8"
    )
    handler.setLevel(level)
    handler.setFormatter(StructuredFormatter())
    return handler


def setup_logging(
    app_name: str = "effham",
    log_level: str = "WARNING",
    log_file: Optional[str] = None,
    use_json: bool = False,
) -> logging.Logger:
    """
    Configure the package logger.

    Args:
        app_name: Logger to configure; solver modules log below it
        log_level: Threshold name, e.g. ``"INFO"``
        log_file: Optional JSON log file. ERROR records are also written to
            a ``<stem>_error<suffix>`` file next to it.
        use_json: Emit JSON on standard error instead of colored text

    Returns:
        The configured logger
    """
    level = logging.getLevelName(log_level.upper())
    logger = logging.getLogger(app_name)
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()
    logger.setLevel(level)

    stream = logging.StreamHandler(sys.stderr)
    stream.setLevel(level)
    stream.setFormatter(StructuredFormatter() if use_json else ConsoleFormatter())
    logger.addHandler(stream)

    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        logger.addHandler(_rotating_handler(path, level))
        errors = path.with_name(f"{path.stem}_error{path.suffix or '.log'}")
        logger.addHandler(_rotating_handler(errors, logging.ERROR))

    return logger


class LoggingDecorator:
    """Decorators that attach timing records to solver calls."""

    @staticmethod
    def log_execution(logger: Optional[logging.Logger] = None) -> Callable[[F], F]:
        """Log the wall time of each call at INFO, or the failure at ERROR."""

        def decorator(func: F) -> F:
            log = logger or logging.getLogger(func.__module__)
            name = func.__name__

            @functools.wraps(func)
            def wrapper(*args: Any, **kwargs: Any) -> Any:
                started = time.perf_counter()
                try:
                    result = func(*args, **kwargs)
                except Exception as exc:
                    elapsed = (time.perf_counter() - started) * 1000.0
                    log.error(f"{name} failed after {elapsed:.2f}ms: {exc}", extra={"elapsed_ms": elapsed})
                    raise
                elapsed = (time.perf_counter() - started) * 1000.0
                log.info(f"Completed {name} in {elapsed:.2f}ms", extra={"elapsed_ms": elapsed})
                return result

            return wrapper  # type: ignore[return-value]

        return decorator
