"""
Structured logging for the bnspn pipeline.

Every message is written to standard error as ``message | Context: {json}``
so standard output stays reserved for machine-readable results.
"""

import json
import logging
import os
import sys
from datetime import datetime

ROOT_LOGGER_NAME = "bnspn"


def _configure_root() -> logging.Logger:
    root = logging.getLogger(ROOT_LOGGER_NAME)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        handler.setFormatter(formatter)
        root.addHandler(handler)
        root.setLevel(os.environ.get("BNSPN_LOG_LEVEL", "WARNING").upper())
        root.propagate = False
    return root


class ContextLogger:
    """Logger wrapper that attaches keyword context as JSON"""

    def __init__(self, name: str = ROOT_LOGGER_NAME):
        _configure_root()
        self.name = name
        self.logger = logging.getLogger(name)

    def debug(self, message: str, **kwargs):
        if self.logger.isEnabledFor(logging.DEBUG):
            self.logger.debug(self._format_message(message, **kwargs))

    def info(self, message: str, **kwargs):
        self.logger.info(self._format_message(message, **kwargs))

    def warning(self, message: str, **kwargs):
        self.logger.warning(self._format_message(message, **kwargs))

    def error(self, message: str, **kwargs):
        self.logger.error(self._format_message(message, **kwargs))

    def _format_message(self, message: str, **kwargs) -> str:
        if not kwargs:
            return message
        context = {"timestamp": datetime.now().isoformat(), **kwargs}
        return f"{message} | Context: {json.dumps(context, default=str)}"


def get_logger(component: str) -> ContextLogger:
    return ContextLogger(f"{ROOT_LOGGER_NAME}.{component}")


def set_log_level(level: str) -> None:
    _configure_root().setLevel(level.upper())
