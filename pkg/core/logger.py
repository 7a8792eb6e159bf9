"""
Centralized logging configuration and utilities
"""

import json
import logging
import sys
import time
from datetime import datetime, timezone
from typing import Any, Dict, Optional

# Attributes every LogRecord carries; anything else came in through ``extra=``
_RESERVED = set(
    logging.LogRecord("", 0, "", 0, "", None, None).__dict__.keys()
) | {"message", "asctime"}

_level = logging.INFO


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


class JSONFormatter(logging.Formatter):
    """JSON formatter for structured logging"""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
        }

        for key, value in record.__dict__.items():
            if key not in _RESERVED and not key.startswith("_"):
                log_data[key] = _jsonable(value)

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data)


def set_level(level: int) -> None:
    """Apply a level to every logger created through get_logger"""
    global _level
    _level = level
    for name in list(logging.root.manager.loggerDict):
        candidate = logging.getLogger(name)
        if getattr(candidate, "_mor_managed", False):
            candidate.setLevel(level)
            for handler in candidate.handlers:
                handler.setLevel(level)


def get_logger(name: str, level: Optional[int] = None) -> logging.Logger:
    """Get configured logger instance writing JSON lines to stderr"""
    logger = logging.getLogger(name)
    level = _level if level is None else level
    logger.setLevel(level)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(level)
        handler.setFormatter(JSONFormatter())
        logger.addHandler(handler)
        logger.propagate = False
        logger._mor_managed = True

    return logger


class RunLogger:
    """Logger for one labelled unit of work (a path solve, a campaign cell)"""

    def __init__(self, run_id: str, logger: logging.Logger):
        self.run_id = run_id
        self.logger = logger
        self._started: Optional[float] = None

    def log_start(self, kind: str, params: Optional[Dict] = None):
        """Log start of the unit"""
        self._started = time.perf_counter()
        self.logger.info(
            "Run %s started",
            self.run_id,
            extra={"run_id": self.run_id, "kind": kind, "params": params},
        )

    def log_done(self, **fields: Any) -> float:
        """Log completion and return the elapsed wall time in seconds"""
        elapsed = 0.0
        if self._started is not None:
            elapsed = time.perf_counter() - self._started
        self.logger.info(
            "Run %s completed",
            self.run_id,
            extra={"run_id": self.run_id, "duration_s": elapsed, **fields},
        )
        return elapsed

    def log_error(self, error: Exception, context: Optional[Dict] = None):
        """Log error with context"""
        self.logger.error(
            "Run %s error: %s",
            self.run_id,
            error,
            extra={
                "run_id": self.run_id,
                "error_type": type(error).__name__,
                "context": context or getattr(error, "context", None),
            },
        )
