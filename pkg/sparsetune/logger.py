"""Prefix logger writing to stderr; stdout is reserved for artifacts."""

import sys
from enum import Enum
from typing import Optional, TextIO


class LogLevel(Enum):
    DEBUG = 0
    INFO = 1
    WARNING = 2
    ERROR = 3


class Logger:
    """Terminal logger with a bracketed prefix and a level filter.

    Scoped children share the parent's level, so changing the global level
    from config.json also affects loggers created before the change.
    """

    def __init__(self, prefix: str = "[sparsetune]", level: LogLevel = LogLevel.INFO, parent: Optional["Logger"] = None):
        self.prefix = prefix
        self._level = level
        self._parent = parent

    @property
    def level(self) -> LogLevel:
        return self._parent.level if self._parent is not None else self._level

    @level.setter
    def level(self, value: LogLevel) -> None:
        self._level = value

    def child(self, scope: str) -> "Logger":
        return Logger(f"{self.prefix} [{scope}]", parent=self)

    def enabled(self, level: LogLevel) -> bool:
        return level.value >= self.level.value

    def log(self, level: LogLevel, message: str, stream: Optional[TextIO] = None) -> None:
        if not self.enabled(level):
            return
        print(f"{self.prefix} [{level.name}] {message}", file=stream or sys.stderr)

    def debug(self, message: str) -> None:
        """Log debug message."""
        self.log(LogLevel.DEBUG, message)

    def info(self, message: str) -> None:
        """Log info message."""
        self.log(LogLevel.INFO, message)

    def warning(self, message: str) -> None:
        """Log warning message."""
        self.log(LogLevel.WARNING, message)

    def error(self, message: str) -> None:
        """Log error message."""
        self.log(LogLevel.ERROR, message)


_logger = Logger()


def set_level(level: LogLevel | str) -> None:
    """Change the global log level; accepts a LogLevel or its name."""
    if isinstance(level, str):
        level = LogLevel[level.upper()]
    _logger.level = level


def scoped(scope: str) -> Logger:
    """Logger whose lines carry an extra [scope] tag, e.g. a repetition."""
    return _logger.child(scope)


def debug(message: str) -> None:
    """Log debug message."""
    _logger.debug(message)


def info(message: str) -> None:
    """Log info message."""
    _logger.info(message)


def warning(message: str) -> None:
    """Log warning message."""
    _logger.warning(message)


def error(message: str) -> None:
    """Log error message."""
    _logger.error(message)
