"""
Error hierarchy for atten-forge.

Every error carries an ``exit_code`` that the CLI returns to the shell:
2 for configuration problems, 3 for numerical failures and 4 for a report
that misses one of its thresholds.
"""

from typing import Optional


class AttenForgeError(Exception):
    """Base class for all atten-forge errors."""

    exit_code: int = 1


class ConfigError(AttenForgeError):
    """Invalid configuration text, netlist text or Touchstone data."""

    exit_code = 2

    def __init__(
        self, message: str, *, line: Optional[int] = None, key: Optional[str] = None
    ):
        self.line = line
        self.key = key
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if key is not None:
            prefix.append(f"key '{key}'")
        text = f"{', '.join(prefix)}: {message}" if prefix else message
        super().__init__(text)


class NetlistError(ConfigError):
    """Malformed netlist or netlist invariant violation."""


class TouchstoneError(ConfigError):
    """Malformed Touchstone file; ``row`` is the zero-based data-row index."""

    def __init__(
        self, message: str, *, line: Optional[int] = None, row: Optional[int] = None
    ):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message, line=line)


class NumericalError(AttenForgeError):
    """A computation could not produce a finite, well-defined result."""

    exit_code = 3


class DegenerateNetworkError(NumericalError):
    """Singular conversion or solve (zero denominator, singular nodal matrix)."""


class NonFiniteError(NumericalError):
    """NaN or infinity produced where a finite value is required."""


class ZeroMagnitudeError(NumericalError):
    """Logarithm of a zero magnitude."""


class UnsupportedDcError(NumericalError):
    """DC analysis requested for a netlist containing inductors."""


class OutOfRangeError(NumericalError):
    """Control voltage outside the FET's control range."""


class UnreachableTargetError(NumericalError):
    """A root-finder bracket does not contain the requested target."""


class FetRangeError(NumericalError):
    """The continuous unit cannot reach a calibration target."""

    def __init__(self, target_db: float, reachable_db: float):
        self.target_db = target_db
        self.reachable_db = reachable_db
        super().__init__(
            f"continuous unit cannot reach {target_db:.3f} dB "
            f"(maximum {reachable_db:.3f} dB at vc_hi)"
        )


class CalibrationError(NumericalError):
    """Calibration table does not cover a requested continuous setting."""


class TuningError(NumericalError):
    """A step of the tuning pipeline failed."""


class TargetMissError(AttenForgeError):
    """A report threshold was not met."""

    exit_code = 4
