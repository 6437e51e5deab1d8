"""
Centralized logging utility for modmirror.

This module provides a logger setup that:
- Saves logs to files in the configured log directory (default logs/)
- Rotates log files automatically (10MB max size, keeps 5 backups)
- Keeps a separate errors.log for ERROR and above
- Writes console output to standard error so CSV/JSON on stdout stay clean
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from config.settings import get_settings


class LoggerSetup:
    """Centralized logger configuration."""

    _initialized = False
    _loggers = {}

    @staticmethod
    def initialize(
        log_level: Optional[str] = None,
        enable_console: bool = True,
        log_to_file: Optional[bool] = None,
    ):
        """
        Initialize the logging system.

        Args:
            log_level: Default log level (DEBUG, INFO, WARNING, ERROR, CRITICAL);
                falls back to settings.LOG_LEVEL
            enable_console: Whether to enable console output on stderr
            log_to_file: Whether to write rotating log files; falls back to
                settings.LOG_TO_FILE
        """
        if LoggerSetup._initialized:
            return

        settings = get_settings()
        log_level = log_level or settings.LOG_LEVEL
        if log_to_file is None:
            log_to_file = settings.LOG_TO_FILE

        numeric_level = getattr(logging, log_level.upper(), logging.INFO)

        root_logger = logging.getLogger()
        root_logger.setLevel(numeric_level)
        root_logger.handlers = []

        formatter = logging.Formatter(
            fmt="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

        if log_to_file:
            logs_dir = Path(settings.LOG_DIR)
            logs_dir.mkdir(parents=True, exist_ok=True)

            file_handler = RotatingFileHandler(
                logs_dir / "app.log",
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5,
                encoding="utf-8",
            )
            file_handler.setLevel(logging.INFO)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)

            error_handler = RotatingFileHandler(
                logs_dir / "errors.log",
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5,
                encoding="utf-8",
            )
            error_handler.setLevel(logging.ERROR)
            error_handler.setFormatter(formatter)
            root_logger.addHandler(error_handler)

        if enable_console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(numeric_level)
            console_handler.setFormatter(formatter)
            root_logger.addHandler(console_handler)

        # Reduce noise from third-party libraries
        logging.getLogger("matplotlib").setLevel(logging.WARNING)
        logging.getLogger("numexpr").setLevel(logging.WARNING)
        logging.getLogger("asyncio").setLevel(logging.WARNING)

        LoggerSetup._initialized = True

    @staticmethod
    def set_level(log_level: str):
        """Change the root and console level after initialization."""
        numeric_level = getattr(logging, log_level.upper(), logging.INFO)
        root_logger = logging.getLogger()
        root_logger.setLevel(numeric_level)
        for handler in root_logger.handlers:
            if not isinstance(handler, RotatingFileHandler):
                handler.setLevel(numeric_level)

    @staticmethod
    def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
        """
        Get or create a logger instance.

        Args:
            name: Logger name (typically __name__ of the module)
            level: Optional specific log level for this logger

        Returns:
            Configured logger instance
        """
        if not LoggerSetup._initialized:
            LoggerSetup.initialize()

        if name in LoggerSetup._loggers:
            logger = LoggerSetup._loggers[name]
            if level:
                logger.setLevel(getattr(logging, level.upper(), logging.INFO))
            return logger

        logger = logging.getLogger(name)
        if level:
            logger.setLevel(getattr(logging, level.upper(), logging.INFO))

        LoggerSetup._loggers[name] = logger
        return logger


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    Convenience function to get a logger instance.

    Usage:
        from src.utils.logger import get_logger
        logger = get_logger(__name__)
        logger.info("Sweep started")

    Args:
        name: Logger name (use __name__ for automatic module naming)
        level: Optional log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        Configured logger instance
    """
    return LoggerSetup.get_logger(name, level)


def setup_logging(
    log_level: Optional[str] = None,
    enable_console: bool = True,
    log_to_file: Optional[bool] = None,
):
    """
    Initialize the logging system.

    This should be called once at application startup (the CLI does it).

    Args:
        log_level: Default log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        enable_console: Whether to enable console output
        log_to_file: Whether to write rotating files under settings.LOG_DIR
    """
    LoggerSetup.initialize(log_level, enable_console, log_to_file)
    if log_level:
        LoggerSetup.set_level(log_level)
