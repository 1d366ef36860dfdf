"""Shared utility functions for atten-forge."""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from rich.logging import RichHandler

from .exceptions import ConfigError

# Allow ATTEN_FORGE_THREADS to come from a local .env file
load_dotenv()

THREADS_ENV = "ATTEN_FORGE_THREADS"
PACKAGE_LOGGER = "attenforge"


def configure_logging(verbose: bool = False) -> logging.Logger:
    """
    Attach a single RichHandler to the package logger.

    Args:
        verbose: Log at DEBUG instead of INFO

    Returns:
        The configured package logger
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        logger.addHandler(handler)
    logger.propagate = False
    return logger


def resolve_thread_count() -> Optional[int]:
    """
    Read the sweep parallelism cap from the environment.

    Returns:
        Worker count, or None to let the executor choose (unset or 0)

    Raises:
        ConfigError: If the variable is not a non-negative integer
    """
    raw = os.getenv(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
    if value < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value or None


def ensure_directory(path: Path) -> None:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        path: Directory path to create
    """
    path.mkdir(parents=True, exist_ok=True)


def default_config_path(name: str = "default.cfg") -> Path:
    """Path of a configuration shipped with the package."""
    return Path(__file__).parent / "configs" / name


def metrics_path_for(states_path: Path) -> Path:
    """Companion metrics file written next to a state CSV."""
    return states_path.with_name(f"{states_path.stem}_metrics{states_path.suffix or '.csv'}")


def format_state_label(nominal_db: float) -> str:
    """Label of a state: its nominal relative attenuation with one decimal."""
    return f"{nominal_db:.1f}"
