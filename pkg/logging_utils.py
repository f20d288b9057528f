"""
Logging and Error Reporting for truncated-evi.

Library modules log through child loggers of the application logger
(``get_logger(__name__)``) and never print. The command-line front end calls
``setup_logging`` once, which attaches a stderr handler (and optionally a
file handler) to the application logger, so reports and CSV written to
stdout stay machine-readable.

Every failure that reaches the front end is turned into one line of the form
``CODE: message`` by ``ErrorHandler``.
"""

import logging
import sys
import time
from pathlib import Path
from types import TracebackType
from typing import Optional, Type

from config import APP_INFO, ERROR_CODES, LOGGING_CONFIG
from errors import ConfigError, TailEstimationError


def _level_number(level: str) -> int:
    number = logging.getLevelName(str(level).upper())
    if not isinstance(number, int):
        raise ConfigError(f"unknown log level {level!r}", key="log_level")
    return number


def _attach(logger: logging.Logger, handler: logging.Handler, level: int) -> None:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt=LOGGING_CONFIG["format"], datefmt=LOGGING_CONFIG["datefmt"]))
    logger.addHandler(handler)


def setup_logging(
    level: str = LOGGING_CONFIG["level"],
    log_file: Optional[str] = None,
    console_output: bool = True,
) -> logging.Logger:
    """
    (Re)configure the application logger.

    Calling it again replaces the previous handlers, so the front end can
    first log at the default level and switch once ``--log-level`` is known.

    Args:
        level: Threshold for the logger and its handlers, e.g. "INFO"
        log_file: Optional file that receives the same records as stderr
        console_output: Attach the stderr handler

    Returns:
        The application logger

    Raises:
        ConfigError: If ``level`` is not a logging level name

    Example:
        >>> logger = setup_logging(level="DEBUG", log_file="runs/curves.log")
    """
    threshold = _level_number(level)
    logger = logging.getLogger(APP_INFO["name"])
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.setLevel(threshold)

    if console_output:
        _attach(logger, logging.StreamHandler(sys.stderr), threshold)
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        _attach(logger, logging.FileHandler(path, encoding="utf-8"), threshold)
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Return the application logger, or its child ``<app>.<name>``.

    Args:
        name: Module name (typically __name__)
    """
    root_name = APP_INFO["name"]
    return logging.getLogger(f"{root_name}.{name}" if name else root_name)


class ErrorHandler:
    """
    Turns exceptions into the single-line ``CODE: message`` reports of the front end.

    Toolkit errors use their own ``code``; OS errors are reported as
    ``E_IO`` and anything else as ``E_UNEXPECTED``. The caller prints the
    returned line, so the report itself and any traceback are logged at
    DEBUG only and stderr carries a single line at the default level.

    Args:
        logger: Where each report is logged at DEBUG (default: the ErrorHandler child logger)
    """

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or get_logger("errors")

    def _report(self, code: str, message: str) -> str:
        line = " ".join(str(message).split())
        self.logger.debug("%s: %s", code, line)
        return f"{code}: {line}"

    def handle_estimation_error(self, error: TailEstimationError, context: str = "") -> str:
        """Report a typed toolkit error, optionally prefixed by the failing operation."""
        message = f"{context}: {error}" if context else str(error)
        return self._report(error.code, message)

    def handle_config_error(self, error: ConfigError) -> str:
        """Report a configuration error; the offending key is appended unless the message names it."""
        message = str(error)
        if error.key and error.key not in message:
            message = f"{message} (key: {error.key})"
        return self._report(error.code, message)

    def handle_io_error(self, error: OSError, path: str = "") -> str:
        """Report an unreadable input or unwritable output file."""
        target = path or getattr(error, "filename", "") or ""
        reason = error.strerror or str(error)
        return self._report(ERROR_CODES["io"], f"cannot access {target}: {reason}" if target else reason)

    def handle_unexpected_error(self, error: Exception, context: str = "") -> str:
        """Report a programming error; the traceback goes to the DEBUG log."""
        where = f"unexpected error in {context}" if context else "unexpected error"
        self.logger.debug("traceback of %s", where, exc_info=error)
        return self._report(ERROR_CODES["unexpected"], f"{where}: {type(error).__name__}: {error}")

    def handle(self, error: Exception, context: str = "") -> str:
        """Dispatch an exception to the matching handler and return its report line."""
        if isinstance(error, ConfigError):
            return self.handle_config_error(error)
        if isinstance(error, TailEstimationError):
            return self.handle_estimation_error(error, context)
        if isinstance(error, OSError):
            return self.handle_io_error(error)
        return self.handle_unexpected_error(error, context)


def setup_exception_logging(logger: logging.Logger) -> None:
    """
    Install a ``sys.excepthook`` that logs exceptions escaping the front end.

    Toolkit errors are logged with their code only; other exceptions are
    logged with the full traceback. Ctrl-C keeps the default behaviour.
    """

    def hook(exc_type: Type[BaseException], exc_value: BaseException, exc_traceback: Optional[TracebackType]) -> None:
        if issubclass(exc_type, KeyboardInterrupt):
            sys.__excepthook__(exc_type, exc_value, exc_traceback)
        elif isinstance(exc_value, TailEstimationError):
            logger.error("unhandled %s: %s", exc_value.code, exc_value)
        else:
            logger.critical("unhandled exception", exc_info=(exc_type, exc_value, exc_traceback))

    sys.excepthook = hook


class LoggingContext:
    """
    Times a long operation and logs its start, completion or failure at one level.

    Failures are not logged at ERROR: the front end reports them itself.

    Example:
        >>> with LoggingContext(logger, "bias/RMSE curves"):
        ...     result = run_bias_rmse(spec)
    """

    def __init__(self, logger: logging.Logger, operation: str, level: int = logging.INFO):
        self.logger = logger
        self.operation = operation
        self.level = level
        self.elapsed: Optional[float] = None
        self._started = 0.0

    def __enter__(self) -> "LoggingContext":
        self._started = time.perf_counter()
        self.logger.log(self.level, "%s: started", self.operation)
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc_value: Optional[BaseException],
        exc_traceback: Optional[TracebackType],
    ) -> None:
        self.elapsed = time.perf_counter() - self._started
        if exc_type is None:
            self.logger.log(self.level, "%s: done in %.2fs", self.operation, self.elapsed)
        else:
            self.logger.log(self.level, "%s: failed after %.2fs (%s)", self.operation, self.elapsed, exc_value)
