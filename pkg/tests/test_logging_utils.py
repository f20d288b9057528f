"""Tests for logging setup and error reporting."""

import logging

import pytest

from errors import ConfigError, DegenerateThresholdError, TruncationOrderError
from logging_utils import ErrorHandler, LoggingContext, get_logger, setup_logging


@pytest.fixture
def handler():
    return ErrorHandler(logging.getLogger("truncated-evi.tests"))


class TestErrorHandler:
    def test_estimation_error(self, handler):
        message = handler.handle(TruncationOrderError("data.csv: line 4: x exceeds y", row=4))
        assert message == "E_ORDER: data.csv: line 4: x exceeds y"

    def test_single_line(self, handler):
        message = handler.handle(DegenerateThresholdError("F_n(t) = 0\n at t = 2"))
        assert "\n" not in message
        assert message.startswith("E_THRESHOLD: ")

    def test_config_error_names_key(self, handler):
        assert handler.handle(ConfigError("value out of range", key="pn")) == "E_CONFIG: value out of range (key: pn)"
        assert handler.handle(ConfigError("pn must lie in (0, 1)", key="pn")) == "E_CONFIG: pn must lie in (0, 1)"

    def test_io_error(self, handler):
        error = FileNotFoundError(2, "No such file or directory", "absent.csv")
        assert handler.handle(error) == "E_IO: cannot access absent.csv: No such file or directory"

    def test_unexpected_error(self, handler):
        assert handler.handle(RuntimeError("boom")).startswith("E_UNEXPECTED: unexpected error: RuntimeError: boom")

    def test_reports_stay_off_the_console(self, handler, caplog):
        with caplog.at_level(logging.DEBUG, logger="truncated-evi.tests"):
            handler.handle(TruncationOrderError("data.csv: line 4: x exceeds y", row=4))
            handler.handle(RuntimeError("boom"))
        assert caplog.records
        assert {record.levelno for record in caplog.records} == {logging.DEBUG}


class TestLogging:
    def test_module_loggers_are_children(self):
        assert get_logger("estimators").name == "truncated-evi.estimators"
        assert get_logger().name == "truncated-evi"

    def test_setup_replaces_handlers(self, tmp_path):
        logger = setup_logging(level="INFO", log_file=str(tmp_path / "logs" / "run.log"))
        logger = setup_logging(level="INFO", log_file=str(tmp_path / "logs" / "run.log"))
        assert len(logger.handlers) == 2
        assert logger.level == logging.INFO
        setup_logging(level="WARNING")

    def test_logging_context(self, caplog):
        logger = logging.getLogger("truncated-evi.tests")
        with caplog.at_level(logging.INFO, logger="truncated-evi.tests"):
            with LoggingContext(logger, "curves"):
                pass
        messages = [record.getMessage() for record in caplog.records]
        assert messages[0] == "curves: started"
        assert messages[1].startswith("curves: done in ")

    def test_logging_context_failure(self, caplog):
        logger = logging.getLogger("truncated-evi.tests")
        with caplog.at_level(logging.INFO, logger="truncated-evi.tests"):
            with pytest.raises(ValueError):
                with LoggingContext(logger, "curves"):
                    raise ValueError("bad")
        assert caplog.records[-1].levelno == logging.INFO
        assert "curves: failed after" in caplog.records[-1].getMessage()
