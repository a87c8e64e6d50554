"""Config validation, the queued result writer and logging setup."""
import logging
from logging.handlers import RotatingFileHandler
from unittest.mock import MagicMock, patch

import pytest

import app.result_writer as writer_module
from app.logger import LOGGER_NAME, log_status, setup_logging
from config.config import Config
from config.utils import config_float, config_int
from config.validation import ConfigValidationError, validate_config


def test_validate_config_defaults_pass(monkeypatch):
    monkeypatch.delenv("TRIGRAPH_MODE", raising=False)
    monkeypatch.delenv("TRIGRAPH_DEADLOCK_TIMEOUT_SEC", raising=False)
    validate_config()
    assert Config.RUNTIME_MODE == "interleaved"


def test_runtime_mode_read_on_each_access(monkeypatch):
    monkeypatch.setenv("TRIGRAPH_MODE", " Concurrent ")
    assert Config.RUNTIME_MODE == "concurrent"
    validate_config()


def test_validate_config_rejects_unknown_mode(monkeypatch):
    monkeypatch.setenv("TRIGRAPH_MODE", "mpi")
    with pytest.raises(ConfigValidationError, match="TRIGRAPH_MODE"):
        validate_config()


@pytest.mark.parametrize("value", ["0", "-3", "soon"])
def test_validate_config_rejects_bad_timeout(monkeypatch, value):
    monkeypatch.setenv("TRIGRAPH_DEADLOCK_TIMEOUT_SEC", value)
    with pytest.raises(ConfigValidationError):
        validate_config()


@pytest.mark.parametrize("key, value", [("POLL_EVERY_NODES", 0), ("DEFAULT_RANKS", 2.5), ("DEFAULT_Q", 0.0)])
def test_validate_config_rejects_bad_tunables(monkeypatch, key, value):
    monkeypatch.setattr(Config, key, value)
    with pytest.raises(ConfigValidationError, match=key):
        validate_config()


def test_validate_config_rejects_negative_retry_delay(monkeypatch):
    monkeypatch.setattr(Config, "WRITE_RETRY_DELAY_SEC", -1)
    with pytest.raises(ConfigValidationError):
        validate_config()


def test_config_helpers_fall_back_under_mock():
    mock = MagicMock()
    assert config_int(mock, "POLL_EVERY_NODES", 7) == 7
    assert config_float(mock, "DEADLOCK_TIMEOUT_SEC", 1.5) == 1.5
    mock.POLL_EVERY_NODES = 3
    assert config_int(mock, "POLL_EVERY_NODES", 7) == 3
    assert config_int(Config, "MISSING", 9) == 9


def test_config_info_names_mode(monkeypatch):
    monkeypatch.setenv("TRIGRAPH_MODE", "interleaved")
    assert "interleaved" in Config.get_info()


def test_write_text_and_lines(tmp_path):
    target = tmp_path / "nested" / "out.txt"
    writer_module.write_text(target, "first\n")
    assert writer_module.flush() is True
    assert target.read_text(encoding="utf-8") == "first\n"
    writer_module.write_lines(target, ["a\n", "b\n"])
    assert writer_module.flush() is True
    assert target.read_text(encoding="utf-8") == "a\nb\n"


def test_write_retries_transient_errors(monkeypatch):
    monkeypatch.setattr(Config, "WRITE_RETRY_DELAY_SEC", 0.0)
    write = MagicMock(side_effect=[OSError("busy"), None])
    assert writer_module._write_with_retry(write) is True
    assert write.call_count == 2


def test_write_gives_up_after_attempts(monkeypatch, caplog):
    monkeypatch.setattr(Config, "WRITE_RETRY_DELAY_SEC", 0.0)
    monkeypatch.setattr(Config, "WRITE_RETRY_ATTEMPTS", 2)
    write = MagicMock(side_effect=OSError("disk full"))
    with caplog.at_level(logging.WARNING, logger=LOGGER_NAME):
        assert writer_module._write_with_retry(write) is False
    assert write.call_count == 2
    assert "after 2 attempts" in caplog.text


def test_failed_write_is_reported_by_flush(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, "WRITE_RETRY_DELAY_SEC", 0.0)
    with patch.object(writer_module, "_do_write", side_effect=OSError("read-only")):
        writer_module.write_text(tmp_path / "x.txt", "data\n")
        assert writer_module.flush() is False
    assert writer_module.flush() is True


def test_writer_restarts_when_thread_died():
    first = writer_module.get_result_writer()
    assert writer_module.get_result_writer() is first
    with patch.object(first, "is_alive", return_value=False):
        second = writer_module.get_result_writer()
    assert second is not first
    first.stop()


def test_setup_logging_adds_rotating_file_handler(tmp_path, monkeypatch):
    monkeypatch.setenv("TRIGRAPH_LOG_DIR", str(tmp_path))
    logger = logging.getLogger(LOGGER_NAME)
    saved = list(logger.handlers)
    for h in saved:
        logger.removeHandler(h)
    try:
        result = setup_logging()
        assert result is logger
        handlers = [h for h in logger.handlers if isinstance(h, RotatingFileHandler)]
        assert len(handlers) == 1
        setup_logging()
        assert len([h for h in logger.handlers if isinstance(h, RotatingFileHandler)]) == 1
        log_status("plan ready", "warning")
        handlers[0].flush()
        text = (tmp_path / "trigraph.log").read_text(encoding="utf-8")
        assert "[WARNING] [trigraph] - plan ready" in text
    finally:
        for h in list(logger.handlers):
            logger.removeHandler(h)
            h.close()
        for h in saved:
            logger.addHandler(h)
