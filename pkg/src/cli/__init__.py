"""Command-line interface."""

from src.cli.app import build_parser, run

__all__ = ["build_parser", "run"]
