"""
Unit tests for settings and logging.
"""

import json
import logging

import pytest

from effham.config import (
    Settings,
    SolverConfig,
    StrictConfig,
    get_settings,
    load_config,
    use_settings,
)
from effham.exceptions import ModelFileError
from effham.utils.logging_config import (
    ConsoleFormatter,
    LoggingDecorator,
    StructuredFormatter,
    get_correlation_id,
    run_context,
    setup_logging,
)


def make_record(message: str = "hello", **extra) -> logging.LogRecord:
    record = logging.LogRecord("effham.test", logging.INFO, __file__, 1, message, None, None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


@pytest.fixture
def clean_logger():
    yield logging.getLogger("effham")
    logger = logging.getLogger("effham")
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)


@pytest.mark.unit
class TestSettings:
    """Tests for configuration classes and overrides."""

    def test_defaults_from_config_class(self):
        settings = load_config()
        assert settings.tol_eig == SolverConfig.TOL_EIG
        assert settings.max_step_norm == 0.1
        assert settings.steps == 2000

    def test_strict_class(self):
        settings = load_config(config_class=StrictConfig)
        assert settings.tol_eig == 1e-11
        assert settings.tol_cluster == SolverConfig.TOL_CLUSTER

    def test_overrides_file(self, tmp_path):
        path = tmp_path / "effham.json"
        path.write_text(json.dumps({"cyclic_tol": 1e-4, "steps": 500}), encoding="utf-8")
        settings = load_config(path)
        assert settings.cyclic_tol == 1e-4
        assert settings.steps == 500
        assert settings.zero_overlap == SolverConfig.ZERO_OVERLAP

    @pytest.mark.parametrize(
        "content, field",
        [
            ('{"tol_rank": 0}', "tol_rank"),
            ('{"unknown_tol": 1}', "unknown_tol"),
            ("[1, 2]", "config"),
            ("{broken", "config"),
        ],
    )
    def test_bad_overrides(self, tmp_path, content, field):
        path = tmp_path / "effham.json"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(ModelFileError) as exc:
            load_config(path)
        assert exc.value.field == field

    def test_explicit_missing_file(self, tmp_path):
        with pytest.raises(ModelFileError):
            load_config(tmp_path / "absent.json")

    def test_settings_are_frozen(self):
        with pytest.raises(Exception):
            get_settings().tol_eig = 1.0  # type: ignore[misc]

    def test_use_settings_restores(self):
        before = get_settings()
        override = Settings(tol_eig=1e-5)
        with use_settings(override) as active:
            assert get_settings() is active
            assert get_settings().tol_eig == 1e-5
        assert get_settings() is before

    def test_use_settings_restores_after_error(self):
        before = get_settings()
        with pytest.raises(RuntimeError):
            with use_settings(Settings(tol_eig=1e-5)):
                raise RuntimeError("boom")
        assert get_settings() is before


@pytest.mark.unit
class TestLogging:
    """Tests for correlation IDs, formatters and timing."""

    def test_run_context_scopes_correlation_id(self):
        outer = get_correlation_id()
        with run_context("cell-run") as cid:
            assert cid == "cell-run"
            assert get_correlation_id() == "cell-run"
        assert get_correlation_id() == outer

    def test_run_context_generates_ids(self):
        with run_context() as first:
            pass
        with run_context() as second:
            pass
        assert first != second

    def test_structured_formatter(self):
        with run_context("abc"):
            payload = json.loads(StructuredFormatter().format(make_record("scan done", cell=[1, 2], steps=100)))
        assert payload["message"] == "scan done"
        assert payload["level"] == "INFO"
        assert payload["correlation_id"] == "abc"
        assert payload["cell"] == [1, 2]
        assert payload["steps"] == 100
        assert "track" not in payload

    def test_console_formatter(self):
        with run_context("0123456789"):
            text = ConsoleFormatter().format(make_record("ready"))
        assert "[01234567]" in text
        assert text.endswith("effham.test: ready")

    def test_setup_logging_file_handlers(self, tmp_path, clean_logger):
        log_file = tmp_path / "logs" / "run.log"
        logger = setup_logging(log_level="INFO", log_file=str(log_file))
        assert len(logger.handlers) == 3
        logger.info("kept")
        logger.error("failed")
        for handler in logger.handlers:
            handler.flush()
        lines = log_file.read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["message"] for line in lines] == ["kept", "failed"]
        errors = (tmp_path / "logs" / "run_error.log").read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["message"] for line in errors] == ["failed"]

    def test_execution_timing(self, caplog):
        @LoggingDecorator.log_execution(logging.getLogger("effham.timing"))
        def square(x):
            return x * x

        with caplog.at_level(logging.INFO, logger="effham.timing"):
            assert square(3) == 9
        (record,) = [r for r in caplog.records if r.name == "effham.timing"]
        assert record.getMessage().startswith("Completed square in ")
        assert record.elapsed_ms >= 0.0

    def test_execution_errors_logged_and_raised(self, caplog):
        @LoggingDecorator.log_execution(logging.getLogger("effham.timing"))
        def fail():
            raise ValueError("bad input")

        with caplog.at_level(logging.INFO, logger="effham.timing"):
            with pytest.raises(ValueError):
                fail()
        (record,) = [r for r in caplog.records if r.levelno == logging.ERROR]
        assert "bad input" in record.getMessage()
