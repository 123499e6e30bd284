"""Utilities Package."""

from .config import Config, get_config
from .logger import LoggerMixin, get_logger, setup_logger

__all__ = [
    "Config",
    "get_config",
    "LoggerMixin",
    "get_logger",
    "setup_logger",
]
