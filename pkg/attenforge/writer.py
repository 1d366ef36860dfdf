"""
File writers and readers for atten-forge.

This module provides:
- TouchstoneWriter / read_touchstone: version-1, 2-port S-parameter files
  through scikit-rf, written in RI format with 17 significant digits
- ReportWriter: CSV tables (via pandas) for sweeps, band metrics,
  calibration tables and continuous-unit curves

Identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
import skrf as rf

from .design import ContinuousCurves, SweepResult, relative_attenuation_db, relative_phase_deg
from .exceptions import TouchstoneError
from .models import BandMetrics, CalibrationTable
from .netcore import SParams2
from .utils import ensure_directory, metrics_path_for

CSV_FLOAT_FORMAT = "%.10g"
TOUCHSTONE_FORMAT = "{:.17g}"
FREQUENCY_UNITS = ("hz", "khz", "mhz", "ghz")
S_DB_FLOOR = -300.0


@dataclass(frozen=True)
class TouchstoneData:
    """Rows of a 2-port Touchstone file."""

    z0_ohms: float
    frequencies_hz: tuple[float, ...]
    sparams: tuple[SParams2, ...]


class TouchstoneWriter:
    """Writes one state's S-parameters as a ``.s2p`` file."""

    def to_network(
        self,
        frequencies_hz: Sequence[float],
        sparams: Sequence[SParams2],
        z0: float,
        name: str = "state",
        comment: str = "",
    ) -> rf.Network:
        frequency = rf.Frequency.from_f(np.asarray(frequencies_hz, dtype=float), unit="hz")
        frequency.unit = "ghz"
        # skrf indexes s[f, to_port, from_port]
        s = np.array([[[sp.s11, sp.s12], [sp.s21, sp.s22]] for sp in sparams], dtype=complex)
        return rf.Network(frequency=frequency, s=s, z0=z0, name=name, comments=comment)

    def format_rows(
        self,
        frequencies_hz: Sequence[float],
        sparams: Sequence[SParams2],
        z0: float,
        comment: str = "",
    ) -> str:
        network = self.to_network(frequencies_hz, sparams, z0, comment=comment)
        return network.write_touchstone(
            filename=network.name,
            return_string=True,
            skrf_comment=False,
            form="ri",
            format_spec_A=TOUCHSTONE_FORMAT,
            format_spec_B=TOUCHSTONE_FORMAT,
            format_spec_freq=TOUCHSTONE_FORMAT,
        )

    def write_state(self, sweep: SweepResult, state_index: int, path: Path) -> None:
        """Write the S-parameters of ``sweep.states[state_index]``."""
        state = sweep.states[state_index]
        z0 = sweep.sparams[state_index][0].z0_ohms
        text = self.format_rows(
            sweep.grid.points,
            sweep.sparams[state_index],
            z0,
            comment=f"atten-forge state {state.label} dB (bit4={state.bit4.value}, "
            f"bit2={state.bit2.value}, vc={state.vc!r} V)",
        )
        ensure_directory(path.parent)
        path.write_text(text, encoding="utf-8")


def write_touchstone(sweep: SweepResult, state_index: int, path: Path) -> None:
    TouchstoneWriter().write_state(sweep, state_index, path)


def _check_option_line(line: str, number: int) -> None:
    tokens = line[1:].lower().split()
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token in ("y", "z", "h", "g"):
            raise TouchstoneError("only S-parameters are supported", line=number)
        if token == "r":
            try:
                z0 = float(tokens[i + 1])
            except (IndexError, ValueError) as e:
                raise TouchstoneError("bad reference resistance", line=number) from e
            if not z0 > 0:
                raise TouchstoneError("reference resistance must be positive", line=number)
            i += 1
        elif token not in (*FREQUENCY_UNITS, "s", "ri", "ma", "db"):
            raise TouchstoneError(f"unknown option {token!r}", line=number)
        i += 1


def _check_layout(text: str) -> None:
    """Row checks scikit-rf leaves out: one option line, 9 numeric fields, increasing frequency."""
    seen_option = False
    last_f = -math.inf
    row = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if seen_option:
                raise TouchstoneError("second option line", line=number)
            _check_option_line(line, number)
            seen_option = True
            continue
        if not seen_option:
            raise TouchstoneError("data before the option line", line=number)
        fields = line.split()
        if len(fields) != 9:
            raise TouchstoneError(f"expected 9 fields, found {len(fields)}", line=number, row=row)
        try:
            f = float(fields[0])
            for field in fields[1:]:
                float(field)
        except ValueError as e:
            raise TouchstoneError(f"non-numeric field in {line!r}", line=number, row=row) from e
        if f <= last_f:
            raise TouchstoneError("frequencies must be strictly increasing", line=number, row=row)
        last_f = f
        row += 1
    if not seen_option:
        raise TouchstoneError("missing option line")


def read_touchstone(path: Path) -> TouchstoneData:
    """
    Read a 2-port Touchstone file (RI, MA or DB format).

    Raises:
        TouchstoneError: On a malformed option line, non-monotone frequency or bad row width
    """
    if path.suffix.lower() != ".s2p":
        raise TouchstoneError(f"expected a .s2p file, got {path.name!r}")
    _check_layout(path.read_text(encoding="utf-8"))
    try:
        network = rf.Network(str(path))
    except Exception as e:
        raise TouchstoneError(f"unreadable Touchstone file {path.name!r}: {e}") from e
    z0 = float(network.z0[0, 0].real)
    rows = tuple(
        SParams2(
            s11=complex(s[0, 0]),
            s21=complex(s[1, 0]),
            s12=complex(s[0, 1]),
            s22=complex(s[1, 1]),
            z0_ohms=z0,
        )
        for s in network.s
    )
    return TouchstoneData(
        z0_ohms=z0, frequencies_hz=tuple(float(f) for f in network.f), sparams=rows
    )


def _db(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(20.0 * np.log10(values), S_DB_FLOOR)


class ReportWriter:
    """Builds and writes the CSV tables."""

    def states_frame(self, sweep: SweepResult) -> pd.DataFrame:
        att = relative_attenuation_db(sweep)
        phase = relative_phase_deg(sweep)
        s11 = np.array([[abs(sp.s11) for sp in row] for row in sweep.sparams])
        s22 = np.array([[abs(sp.s22) for sp in row] for row in sweep.sparams])
        n_states, n_freq = att.shape
        return pd.DataFrame(
            {
                "f_ghz": np.tile(np.asarray(sweep.grid.points) / 1e9, n_states),
                "state": np.repeat([s.label for s in sweep.states], n_freq),
                "att_db": att.ravel(),
                "phase_deg": phase.ravel(),
                "s11_db": _db(s11).ravel(),
                "s22_db": _db(s22).ravel(),
            }
        )

    def metrics_frame(self, metrics: BandMetrics) -> pd.DataFrame:
        nan = [math.nan] * len(metrics.frequencies_hz)
        return pd.DataFrame(
            {
                "f_ghz": np.asarray(metrics.frequencies_hz) / 1e9,
                "il_db": metrics.il_db,
                "rms_amp_db": metrics.rms_amp_err_db or nan,
                "rms_phase_deg": metrics.rms_phase_err_deg or nan,
                "rl_worst_db": metrics.rl_worst_db,
            }
        )

    def calibration_frame(self, table: CalibrationTable) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "target_db": [e.target_db for e in table.entries],
                "vc": [e.vc for e in table.entries],
                "achieved_db": [e.achieved_db for e in table.entries],
            }
        )

    def curves_frame(self, curves: ContinuousCurves) -> pd.DataFrame:
        n_entries, n_freq = curves.attenuation_db.shape
        return pd.DataFrame(
            {
                "target_db": np.repeat(curves.targets_db, n_freq),
                "f_ghz": np.tile(np.asarray(curves.frequencies_hz) / 1e9, n_entries),
                "att_db": curves.attenuation_db.ravel(),
                "phase_deg": curves.phase_deg.ravel(),
            }
        )

    @staticmethod
    def _write(frame: pd.DataFrame, path: Path) -> None:
        ensure_directory(path.parent)
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")

    def write_report(self, sweep: SweepResult, metrics: BandMetrics, path: Path) -> Path:
        """
        Write the state table at ``path`` and the metrics table next to it.

        Returns:
            Path of the metrics file
        """
        if metrics.frequencies_hz != sweep.grid.points:
            raise ValueError("metrics were computed on a different grid")
        self._write(self.states_frame(sweep), path)
        metrics_path = metrics_path_for(path)
        self._write(self.metrics_frame(metrics), metrics_path)
        return metrics_path

    def write_calibration(self, table: CalibrationTable, path: Path) -> None:
        self._write(self.calibration_frame(table), path)

    def write_curves(self, curves: ContinuousCurves, path: Path) -> None:
        self._write(self.curves_frame(curves), path)


def write_report_csv(sweep: SweepResult, metrics: BandMetrics, path: Path) -> Path:
    return ReportWriter().write_report(sweep, metrics, path)


def write_calibration_csv(table: CalibrationTable, path: Path) -> None:
    ReportWriter().write_calibration(table, path)


def write_curves_csv(curves: ContinuousCurves, path: Path) -> None:
    ReportWriter().write_curves(curves, path)
