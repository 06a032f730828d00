"""
Structured logging configuration with run IDs
"""

import json
import logging
import sys
import time
import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Callable, Iterator, Optional, TypeVar

from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware

# Context variable tying every log line to one CLI run or HTTP request
run_id_var: ContextVar[Optional[str]] = ContextVar("run_id", default=None)

_RESERVED = {
    "name",
    "msg",
    "args",
    "levelname",
    "levelno",
    "pathname",
    "filename",
    "module",
    "lineno",
    "funcName",
    "created",
    "msecs",
    "relativeCreated",
    "thread",
    "threadName",
    "processName",
    "process",
    "getMessage",
    "exc_info",
    "exc_text",
    "stack_info",
    "message",
    "taskName",
}


class StructuredFormatter(logging.Formatter):
    """Custom JSON formatter for structured logging"""

    def __init__(self, service_name: str = "diffeo-trees"):
        self.service_name = service_name
        super().__init__()

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "service": self.service_name,
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "run_id": run_id_var.get(),
        }

        if record.exc_info:
            log_entry["exception"] = {
                "type": record.exc_info[0].__name__ if record.exc_info[0] else None,
                "message": str(record.exc_info[1]) if record.exc_info[1] else None,
                "traceback": self.formatException(record.exc_info),
            }

        extra_fields = {
            key: value for key, value in record.__dict__.items() if key not in _RESERVED
        }
        if extra_fields:
            log_entry["extra"] = extra_fields

        if record.pathname:
            log_entry["source"] = {
                "file": record.filename,
                "function": record.funcName,
                "line": record.lineno,
            }

        return json.dumps(log_entry, default=str, ensure_ascii=False)


class RunIdMiddleware(BaseHTTPMiddleware):
    """Middleware to generate and echo a run ID for each request"""

    async def dispatch(self, request: Request, call_next):
        run_id = (
            request.headers.get("x-run-id")
            or request.headers.get("x-request-id")
            or str(uuid.uuid4())
        )
        token = run_id_var.set(run_id)
        request.state.run_id = run_id
        try:
            response = await call_next(request)
        finally:
            run_id_var.reset(token)
        response.headers["x-run-id"] = run_id
        return response


def setup_structured_logging(
    service_name: str = "diffeo-trees",
    log_level: str = "WARNING",
    enable_json_logging: bool = True,
) -> None:
    """
    Configure structured logging for the application

    Logs go to stderr; stdout carries reports and must stay byte-identical
    between runs with the same arguments and seed.

    Args:
        service_name: Name of the service for log identification
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        enable_json_logging: Whether to use JSON formatting for logs
    """
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)

    if enable_json_logging:
        formatter: logging.Formatter = StructuredFormatter(service_name)
    else:
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )

    console_handler.setFormatter(formatter)
    root_logger.setLevel(getattr(logging, log_level.upper()))
    root_logger.addHandler(console_handler)

    logging.getLogger("uvicorn").setLevel(logging.WARNING)
    logging.getLogger("uvicorn.access").setLevel(logging.WARNING)


@contextmanager
def run_context(run_id: Optional[str] = None) -> Iterator[str]:
    """Context manager binding a run ID to the enclosed computation"""
    run_id = run_id or str(uuid.uuid4())
    token = run_id_var.set(run_id)
    try:
        yield run_id
    finally:
        run_id_var.reset(token)


class StructuredLogger:
    """
    Wrapper for structured logging with convenient methods for common use cases
    """

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)

    def _log_with_extra(self, level: str, message: str, **kwargs):
        getattr(self.logger, level)(message, extra=kwargs)

    def info(self, message: str, **kwargs):
        self._log_with_extra("info", message, **kwargs)

    def warning(self, message: str, **kwargs):
        self._log_with_extra("warning", message, **kwargs)

    def error(self, message: str, **kwargs):
        self._log_with_extra("error", message, **kwargs)

    def debug(self, message: str, **kwargs):
        self._log_with_extra("debug", message, **kwargs)

    def suite_started(self, suite: str, **parameters: Any):
        self.info("Suite started", suite=suite, **parameters)

    def suite_completed(
        self, suite: str, passed: bool, checks: int, failed: int, duration_ms: float
    ):
        """Log suite completion with structured data"""
        if passed:
            self.info(
                "Suite passed",
                suite=suite,
                checks=checks,
                duration_ms=round(duration_ms, 2),
            )
        else:
            self.error(
                "Suite failed",
                suite=suite,
                checks=checks,
                failed=failed,
                duration_ms=round(duration_ms, 2),
            )

    def check_failed(self, identity: str, params: dict, lhs: str, rhs: str):
        self.error(
            "Identity check failed", identity=identity, params=params, lhs=lhs, rhs=rhs
        )

    def computation(self, operation: str, duration_ms: float, **kwargs):
        self.debug(
            f"{operation} computed",
            operation=operation,
            duration_ms=round(duration_ms, 2),
            **kwargs,
        )


def get_structured_logger(name: str) -> StructuredLogger:
    """Get a structured logger instance"""
    return StructuredLogger(name)


F = TypeVar("F", bound=Callable[..., Any])


def log_performance(logger: StructuredLogger, operation: str) -> Callable[[F], F]:
    """Decorator to log how long a computation took"""

    def decorator(func: F) -> F:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(
                    f"{operation} failed",
                    operation=operation,
                    function=func.__name__,
                    error_message=str(e),
                )
                raise
            logger.computation(
                operation,
                (time.perf_counter() - start_time) * 1000,
                function=func.__name__,
            )
            return result

        return wrapper  # type: ignore[return-value]

    return decorator
