"""Command-line interface."""

from .args import Command, RunConfig, build_parser, parse_args
from .runner import EXIT_DATA, EXIT_OK, EXIT_USAGE, CommandRunner, main, run

__all__ = [
    "EXIT_DATA",
    "EXIT_OK",
    "EXIT_USAGE",
    "Command",
    "CommandRunner",
    "RunConfig",
    "build_parser",
    "main",
    "parse_args",
    "run",
]
