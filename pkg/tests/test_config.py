"""Tests for configuration and logging setup."""

import logging

import pytest

from src.utils.config import Config
from src.utils.logger import LoggerMixin, get_logger, setup_logger


class TestConfig:
    """Test cases for Config."""

    def test_defaults(self, monkeypatch):
        """Test the built-in defaults."""
        monkeypatch.delenv("WRONBETA_EPSILON", raising=False)
        config = Config(_env_file=None)
        assert config.epsilon == 1e-8
        assert config.window == 500
        assert config.windows == [100, 300, 500]
        assert config.column == "close"
        assert config.validate()

    def test_environment_override(self, monkeypatch):
        """Test WRONBETA_ environment variables."""
        monkeypatch.setenv("WRONBETA_EPSILON", "1e-6")
        monkeypatch.setenv("WRONBETA_WINDOWS", "[20, 40]")
        config = Config(_env_file=None)
        assert config.epsilon == 1e-6
        assert config.windows == [20, 40]

    def test_env_file(self, tmp_path, monkeypatch):
        """Test settings read from a .env file."""
        monkeypatch.delenv("WRONBETA_WINDOW", raising=False)
        monkeypatch.delenv("WRONBETA_COLUMN", raising=False)
        env_file = tmp_path / ".env"
        env_file.write_text("WRONBETA_WINDOW=250\nWRONBETA_COLUMN=adj_close\n")
        config = Config(_env_file=env_file)
        assert config.window == 250
        assert config.column == "adj_close"

    @pytest.mark.parametrize(
        "overrides",
        [{"epsilon": 0.0}, {"window": 1}, {"windows": [1, 50]}, {"significant_digits": 20}],
    )
    def test_validate_rejects(self, overrides):
        """Test that validate rejects inconsistent settings."""
        with pytest.raises(ValueError):
            Config(_env_file=None, **overrides).validate()


class TestLogger:
    """Test cases for logger setup."""

    def test_module_loggers_share_package_root(self):
        """Test that module loggers live under the package logger."""
        assert get_logger("src.analysis.beta_engine").name == "wronbeta.analysis.beta_engine"

    def test_file_handler(self, tmp_path):
        """Test the rotating file handler."""
        log_file = tmp_path / "logs" / "wronbeta.log"
        logger = setup_logger(name="wronbeta.test", level="DEBUG", log_file=str(log_file))
        logger.debug("hello")
        for handler in logger.handlers:
            handler.flush()
        assert "hello" in log_file.read_text()
        assert logger.level == logging.DEBUG

    def test_mixin(self):
        """Test the logger mixin property."""
        class Worker(LoggerMixin):
            pass

        assert isinstance(Worker().logger, logging.Logger)
