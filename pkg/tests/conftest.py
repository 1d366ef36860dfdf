"""
Pytest configuration and fixtures for atten-forge tests.

This module provides common fixtures and test utilities used across all test modules.
"""

import tempfile
from pathlib import Path

import pytest

from attenforge.models import (
    AttenuatorChipSpec,
    CalibrationEntry,
    CalibrationTable,
    ChipConfig,
    FrequencyGrid,
)
from attenforge.parser import parse_config
from attenforge.utils import THREADS_ENV, default_config_path

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def default_config_text() -> str:
    """Text of the shipped tuned design."""
    return default_config_path().read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def default_config(default_config_text) -> ChipConfig:
    """The shipped tuned design, parsed."""
    return parse_config(default_config_text)


@pytest.fixture(scope="session")
def default_chip(default_config) -> AttenuatorChipSpec:
    return default_config.chip


@pytest.fixture
def band17() -> FrequencyGrid:
    """Tuning band: 17 points over 20-100 GHz."""
    return FrequencyGrid.linspace(20e9, 100e9, 17)


@pytest.fixture
def eq1_params() -> dict:
    """4-dB T-pad elements with a 10-ohm shunt switch."""
    return {"r1": 11.3137, "r2": 104.8288, "r_on2": 10.0, "c_comp": 20e-15, "z0": 50.0}


@pytest.fixture
def linear_calibration() -> CalibrationTable:
    """Synthetic 0.1-dB table at 60 GHz with vc = target / 2."""
    entries = tuple(
        CalibrationEntry(target_db=round(0.1 * k, 9), vc=0.05 * k, achieved_db=round(0.1 * k, 9))
        for k in range(21)
    )
    return CalibrationTable(f0_hz=60e9, entries=entries)


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory holding the reference netlists."""
    return FIXTURES


@pytest.fixture
def temp_directory():
    """Create a temporary directory for testing file operations."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture(autouse=True)
def clear_thread_env(monkeypatch):
    """Run every test without a sweep parallelism cap from the environment."""
    monkeypatch.delenv(THREADS_ENV, raising=False)
