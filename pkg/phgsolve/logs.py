"""
Logs Module - bracket-tagged loggers

Messages render as "[Tag] message" on stderr; stdout is reserved for reports.
"""

from __future__ import annotations

import logging
import sys
from typing import Optional

ROOT_LOGGER = "phgsolve"
_FORMAT = "[%(tag)s] %(message)s"


class _TagFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "tag"):
            record.tag = record.name.rsplit(".", 1)[-1]
        return True


def _root() -> logging.Logger:
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.addFilter(_TagFilter())
        root.addHandler(handler)
        root.propagate = False
    return root


def get_logger(tag: str) -> logging.Logger:
    """Logger printing as [tag]."""
    _root()
    return logging.getLogger(f"{ROOT_LOGGER}.{tag}")


def set_level(level: Optional[str]) -> None:
    if level:
        _root().setLevel(getattr(logging, level.upper(), logging.INFO))
