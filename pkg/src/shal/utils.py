"""Utility functions shared across the Smart Home Activity Learner"""

import logging
import os
import statistics
import sys
import tempfile
import time
from datetime import datetime, timezone
from typing import Callable, TypeVar

from .constants import LOG_FORMAT, LOGGER_NAME, TIMING_REPEATS

T = TypeVar("T")


def get_logger(component: str) -> logging.Logger:
    """Get the package logger for a component, e.g. ``get_logger("clustering")``"""
    return logging.getLogger(f"{LOGGER_NAME}.{component}")


def configure_logging(verbosity: int = 0) -> None:
    """Send package log records to stderr; 0 = warnings, 1 = info, 2+ = debug"""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG

    root = logging.getLogger(LOGGER_NAME)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False


def truncate_to_second(moment: datetime) -> datetime:
    """Drop sub-second precision and normalize aware instants to naive UTC"""
    if moment.tzinfo is not None:
        moment = moment.astimezone(timezone.utc).replace(tzinfo=None)
    return moment.replace(microsecond=0)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp at one-second resolution.

    Raises:
        ValueError: If the text is not a valid instant (e.g. hour 25)
    """
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    return truncate_to_second(datetime.fromisoformat(text))


def format_timestamp(moment: datetime) -> str:
    """Render an instant as ``YYYY-MM-DDTHH:MM:SS``"""
    return moment.strftime("%Y-%m-%dT%H:%M:%S")


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path through a temporary sibling file and a rename.

    Raises:
        OSError: If the directory is not writable
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, temp_path = tempfile.mkstemp(prefix=".shal-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def read_text(path: str) -> str:
    """Read a UTF-8 text file, dropping a leading byte-order mark"""
    with open(path, "r", encoding="utf-8-sig") as handle:
        return handle.read()


def median_runtime_ms(func: Callable[[], T], repeats: int = TIMING_REPEATS) -> tuple[T, float]:
    """Run func repeatedly; return its last result and the median wall-clock milliseconds"""
    assert repeats >= 1, "Need at least one timing run"
    timings = []
    result = None
    for _ in range(repeats):
        started = time.perf_counter()
        result = func()
        timings.append((time.perf_counter() - started) * 1000.0)
    return result, statistics.median(timings)  # type: ignore[return-value]
