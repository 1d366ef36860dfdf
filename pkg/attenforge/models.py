"""
Pydantic v2 data models for atten-forge.

Defines validated, immutable representations for:
- Device models (SwitchModel, ResistorModel, ContinuousFetModel)
- Attenuation units and the full chip (TTypeUnitSpec, SimplifiedTUnitSpec,
  ContinuousUnitSpec, TransmissionLineSpec, AttenuatorChipSpec)
- Operating points (AttenuatorState) and frequency grids (FrequencyGrid)
- Design products (CalibrationTable, BandMetrics, TuningReport)
- Run configuration (RunOptions, SynthesisTargets, ChipConfig, ReportTargets)
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .exceptions import CalibrationError, ConfigError
from .utils import format_state_label


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SwitchState(str, Enum):
    ON = "on"
    OFF = "off"


class UnitState(str, Enum):
    """Setting of a switched unit: reference (low loss) or attenuation."""

    REF = "ref"
    ATT = "att"


# Devices


class SwitchModel(_Frozen):
    """Switch transistor: on-resistance, off-capacitance and on-state parasitic."""

    r_on: float = Field(default=10.0, gt=0, description="On-resistance (ohm)")
    c_off: float = Field(default=15e-15, ge=0, description="Off-state capacitance (F)")
    c_par_on: float = Field(
        default=0.0, ge=0, description="Drain/source parasitic in the on-state (F)"
    )


class ResistorModel(_Frozen):
    """Resistor with its distributed parasitic lumped as c_par/2 at each terminal."""

    r: float = Field(gt=0, description="Resistance (ohm)")
    c_par: float = Field(default=0.0, ge=0, description="Parasitic to ground (F)")


class ContinuousFetModel(_Frozen):
    """Shunt FET used as a voltage-controlled resistor."""

    r_min: float = Field(gt=0, description="Resistance at vc_hi (ohm)")
    r_max: float = Field(gt=0, description="Resistance at vc_lo (ohm)")
    vc_lo: float = Field(description="Lowest control voltage (V)")
    vc_hi: float = Field(description="Highest control voltage (V)")
    shape: float = Field(default=6.0, gt=0, description="Steepness of the control map")

    @model_validator(mode="after")
    def _check_ranges(self) -> ContinuousFetModel:
        if not self.r_min < self.r_max:
            raise ValueError("r_min must be smaller than r_max")
        if not self.vc_lo < self.vc_hi:
            raise ValueError("vc_lo must be smaller than vc_hi")
        return self


# Units and chip


class TTypeUnitSpec(_Frozen):
    """T-type unit with series bypass switch M1 and shunt switch M2."""

    r1: ResistorModel = Field(description="Each series arm")
    r2: ResistorModel = Field(description="Shunt resistor")
    c_comp: float = Field(default=0.0, ge=0, description="Compensation capacitor across r2 (F)")
    series_switch: SwitchModel = Field(description="M1, bridges the series path")
    shunt_switch: SwitchModel = Field(description="M2, grounds the shunt branch")


class SimplifiedTUnitSpec(_Frozen):
    """T-type unit without the series switch; arms are always in the signal path."""

    r1: ResistorModel = Field(description="Each metal-line series arm")
    r2: ResistorModel = Field(description="Shunt resistor")
    c_comp: float = Field(default=0.0, ge=0, description="Compensation capacitor across r2 (F)")
    shunt_switch: SwitchModel = Field(description="M2, grounds the shunt branch")


class ContinuousUnitSpec(_Frozen):
    """Shunt-only unit: r2 in series with a voltage-controlled FET."""

    r2: ResistorModel
    fet: ContinuousFetModel


class TransmissionLineSpec(_Frozen):
    """Ideal line described by its electrical length at a reference frequency."""

    z_c: float = Field(gt=0, description="Characteristic impedance (ohm)")
    theta_ref_deg: float = Field(ge=0, description="Electrical length at f_ref (deg)")
    f_ref_hz: float = Field(gt=0, description="Reference frequency (Hz)")


class AttenuatorChipSpec(_Frozen):
    """unit4 · tl_a · unit2 · tl_b · cont, referenced to z0."""

    unit4: TTypeUnitSpec
    tl_a: TransmissionLineSpec
    unit2: SimplifiedTUnitSpec
    tl_b: TransmissionLineSpec
    cont: ContinuousUnitSpec
    z0: float = Field(default=50.0, gt=0, description="Reference impedance (ohm)")


class AttenuatorState(_Frozen):
    """One digital + continuous setting of the chip."""

    bit4: UnitState = UnitState.REF
    bit2: UnitState = UnitState.REF
    vc: float = Field(description="Continuous-unit control voltage (V)")
    nominal_db: float = Field(default=0.0, ge=0, description="Ideal relative attenuation (dB)")

    @property
    def label(self) -> str:
        return format_state_label(self.nominal_db)

    @property
    def is_reference(self) -> bool:
        return self.nominal_db == 0.0


class FrequencyGrid(_Frozen):
    """Strictly increasing, positive frequency points in Hz."""

    points: tuple[float, ...]

    @field_validator("points")
    @classmethod
    def _check_points(cls, points: tuple[float, ...]) -> tuple[float, ...]:
        if not points:
            raise ValueError("frequency grid must not be empty")
        if any(not (math.isfinite(f) and f > 0) for f in points):
            raise ValueError("frequencies must be finite and positive")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise ValueError("frequencies must be strictly increasing")
        return points

    @classmethod
    def linspace(cls, start_hz: float, stop_hz: float, count: int) -> FrequencyGrid:
        if count == 1:
            return cls(points=(float(start_hz),))
        return cls(points=tuple(float(f) for f in np.linspace(start_hz, stop_hz, count)))

    def resampled(self, count: int) -> FrequencyGrid:
        """Evenly spaced grid with the same span."""
        return FrequencyGrid.linspace(self.points[0], self.points[-1], count)

    def __len__(self) -> int:
        return len(self.points)


# Design products


class CalibrationEntry(_Frozen):
    target_db: float
    vc: float
    achieved_db: float


class CalibrationTable(_Frozen):
    """Control voltages of the continuous unit for evenly spaced attenuation targets."""

    f0_hz: float = Field(gt=0, description="Calibration frequency (Hz)")
    entries: tuple[CalibrationEntry, ...]

    @field_validator("entries")
    @classmethod
    def _check_monotone(
        cls, entries: tuple[CalibrationEntry, ...]
    ) -> tuple[CalibrationEntry, ...]:
        if not entries:
            raise ValueError("calibration table must not be empty")
        for prev, cur in zip(entries, entries[1:]):
            if cur.target_db <= prev.target_db:
                raise ValueError("calibration targets must be strictly increasing")
            if cur.vc <= prev.vc:
                raise ValueError("calibration control voltages must be strictly increasing")
        return entries

    @property
    def targets_db(self) -> list[float]:
        return [e.target_db for e in self.entries]

    @property
    def voltages(self) -> list[float]:
        return [e.vc for e in self.entries]

    def vc_for(self, target_db: float, tolerance_db: float = 1e-9) -> float:
        """
        Interpolate the control voltage for a continuous attenuation target.

        Raises:
            CalibrationError: If the target lies outside the table
        """
        lo, hi = self.entries[0].target_db, self.entries[-1].target_db
        if target_db < lo - tolerance_db or target_db > hi + tolerance_db:
            raise CalibrationError(
                f"no calibration for {target_db:.3f} dB (table covers {lo:.3f}..{hi:.3f} dB)"
            )
        return float(np.interp(target_db, self.targets_db, self.voltages))


class BandMetrics(_Frozen):
    """Per-frequency figures of merit; RMS arrays are None for a loss-only profile."""

    frequencies_hz: tuple[float, ...]
    il_db: tuple[float, ...]
    rl_in_db: tuple[float, ...]
    rl_out_db: tuple[float, ...]
    rms_amp_err_db: Optional[tuple[float, ...]] = None
    rms_phase_err_deg: Optional[tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_lengths(self) -> BandMetrics:
        n = len(self.frequencies_hz)
        arrays = [self.il_db, self.rl_in_db, self.rl_out_db]
        arrays += [a for a in (self.rms_amp_err_db, self.rms_phase_err_deg) if a is not None]
        if any(len(a) != n for a in arrays):
            raise ValueError("metric arrays must match the frequency grid length")
        return self

    @property
    def rl_worst_db(self) -> tuple[float, ...]:
        return tuple(min(a, b) for a, b in zip(self.rl_in_db, self.rl_out_db))

    def summary(self) -> dict[str, float]:
        """Band extremes as reported against thresholds."""
        out = {
            "il_min": min(self.il_db),
            "il_max": max(self.il_db),
            "rl_min": min(self.rl_worst_db),
        }
        if self.rms_amp_err_db is not None:
            out["rms_amp"] = max(self.rms_amp_err_db)
        if self.rms_phase_err_deg is not None:
            out["rms_phase"] = max(self.rms_phase_err_deg)
        return out


class TuningPassSummary(_Frozen):
    index: int
    unit4_r2: float
    unit2_r2: float
    unit4_c_comp: float
    unit2_c_comp: float
    tl_a_theta_deg: float
    tl_b_theta_deg: float
    margin: float


class TuningReport(_Frozen):
    passes: tuple[TuningPassSummary, ...] = ()

    @property
    def final_margin(self) -> float:
        return self.passes[-1].margin if self.passes else math.nan


# Run configuration


class RunOptions(_Frozen):
    f0_hz: float = Field(default=60e9, gt=0, description="Calibration frequency (Hz)")
    step_db: float = Field(default=0.5, gt=0, description="State pitch (dB)")


class SynthesisTargets(_Frozen):
    unit4_db: Optional[float] = Field(default=None, gt=0)
    unit2_db: Optional[float] = Field(default=None, gt=0)


class ChipConfig(_Frozen):
    """Everything a configuration file describes."""

    chip: AttenuatorChipSpec
    grid: FrequencyGrid
    run: RunOptions = RunOptions()
    targets: SynthesisTargets = SynthesisTargets()


class ReportTargets(_Frozen):
    """Pass/fail thresholds of the band report."""

    il_max: float = Field(default=3.8, description="Maximum reference-state IL (dB)")
    rms_amp: float = Field(default=0.15, description="Maximum RMS amplitude error (dB)")
    rms_phase: float = Field(default=1.6, description="Maximum RMS phase error (deg)")
    rl_min: float = Field(default=11.5, description="Minimum return loss (dB)")

    @classmethod
    def from_option(cls, text: Optional[str]) -> ReportTargets:
        """
        Parse ``name=value,name=value``; missing names keep their defaults.

        Raises:
            ConfigError: On unknown names or non-numeric values
        """
        if not text:
            return cls()
        values: dict[str, float] = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            name, sep, raw = item.partition("=")
            name = name.strip()
            if not sep or name not in cls.model_fields:
                raise ConfigError(f"unknown report target {item!r}", key=name or None)
            try:
                values[name] = float(raw)
            except ValueError as e:
                raise ConfigError(f"target value {raw!r} is not a number", key=name) from e
        return cls(**values)

    def evaluate(self, metrics: BandMetrics) -> dict[str, tuple[float, bool]]:
        """Measured value and verdict per threshold."""
        summary = metrics.summary()
        return {
            "il_max": (summary["il_max"], summary["il_max"] <= self.il_max),
            "rms_amp": (summary["rms_amp"], summary["rms_amp"] <= self.rms_amp),
            "rms_phase": (summary["rms_phase"], summary["rms_phase"] <= self.rms_phase),
            "rl_min": (summary["rl_min"], summary["rl_min"] >= self.rl_min),
        }
