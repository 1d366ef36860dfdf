"""
Element synthesis, compensation, calibration and figures of merit.

All optimizers here are one-dimensional and deterministic: bisection for
roots, a coarse grid followed by golden-section refinement for minima.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .attenuator import SwitchedUnit, chip_twoport, unit_twoport
from .exceptions import FetRangeError, UnreachableTargetError
from .models import (
    AttenuatorChipSpec,
    AttenuatorState,
    BandMetrics,
    CalibrationEntry,
    CalibrationTable,
    FrequencyGrid,
    UnitState,
)
from .netcore import SParams2, abcd_to_s, angular, mag_db, phase_deg, wrap_deg
from .utils import resolve_thread_count

logger = logging.getLogger(__name__)

R2_BRACKET = (1.0, 1e4)
CCOMP_SEARCH = (0.0, 50e-15)
COARSE_POINTS = 64
CCOMP_TOLERANCE = 1e-17  # 0.01 fF
RL_CAP_DB = 99.0

INV_PHI = (math.sqrt(5) - 1) / 2


# Synthesis


def synth_ttype(atten_db: float, z0: float = 50.0) -> tuple[float, float]:
    """
    Matched resistive T-pad.

    Returns:
        (r1, r2): series-arm and shunt resistances in ohms
    """
    if not atten_db > 0:
        raise ValueError(f"attenuation must be positive, got {atten_db}")
    k = 10.0 ** (atten_db / 20.0)
    return z0 * (k - 1.0) / (k + 1.0), 2.0 * z0 * k / (k * k - 1.0)


def unit_delta_db(unit: SwitchedUnit, omega: float, z0: float = 50.0) -> float:
    """Relative attenuation of a switched unit, reference vs. attenuation state."""
    ref = abcd_to_s(unit_twoport(unit, UnitState.REF, omega), z0).s21
    att = abcd_to_s(unit_twoport(unit, UnitState.ATT, omega), z0).s21
    return mag_db(ref) - mag_db(att)


def unit_phase_diff_deg(unit: SwitchedUnit, omega: float, z0: float = 50.0) -> float:
    """Phase of the attenuation state minus that of the reference state."""
    ref = abcd_to_s(unit_twoport(unit, UnitState.REF, omega), z0).s21
    att = abcd_to_s(unit_twoport(unit, UnitState.ATT, omega), z0).s21
    return wrap_deg(phase_deg(att) - phase_deg(ref))


def _with_r2(unit: SwitchedUnit, r2: float) -> SwitchedUnit:
    return unit.model_copy(update={"r2": unit.r2.model_copy(update={"r": r2})})


def fit_r2_for_delta(
    unit: SwitchedUnit,
    target_delta_db: float,
    f0: float,
    z0: float = 50.0,
    bracket: tuple[float, float] = R2_BRACKET,
    tol_db: float = 1e-4,
) -> float:
    """
    Shunt resistance giving the requested relative attenuation at f0.

    The unit's other elements stay fixed; relative attenuation falls as r2 grows.

    Raises:
        UnreachableTargetError: If the bracket does not contain the target
    """
    lo, hi = bracket
    if target_delta_db <= 0:
        return hi
    omega = angular(f0)

    def delta(r2: float) -> float:
        return unit_delta_db(_with_r2(unit, r2), omega, z0)

    d_lo, d_hi = delta(lo), delta(hi)
    if not d_hi <= target_delta_db <= d_lo:
        raise UnreachableTargetError(
            f"{target_delta_db:.4f} dB outside [{d_hi:.4f}, {d_lo:.4f}] dB "
            f"reachable with r2 in [{lo:g}, {hi:g}] ohm"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if delta(mid) > target_delta_db:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    r2 = 0.5 * (lo + hi)
    achieved = delta(r2)
    if abs(achieved - target_delta_db) > tol_db:
        raise UnreachableTargetError(
            f"r2 fit stalled at {r2:.6g} ohm with {achieved:.6f} dB (target {target_delta_db} dB)"
        )
    logger.debug("Fitted r2 = %.6g ohm for %.3f dB at %.4g GHz", r2, target_delta_db, f0 / 1e9)
    return r2


# Scalar minimization


def golden_section(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Golden-section search on [a, b]; returns (x, f(x)) with a final bracket below tol."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def grid_golden_minimize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    points: int = COARSE_POINTS,
) -> tuple[float, float]:
    """
    Global coarse grid, then golden-section refinement around the best point.

    Ties go to the smaller argument. The refined point is only taken when it
    does not make the objective worse.
    """
    if not lo < hi:
        raise ValueError(f"empty search interval [{lo}, {hi}]")
    step = (hi - lo) / (points - 1)
    best_x, best_f = lo, math.inf
    for i in range(points):
        x = lo + step * i
        fx = f(x)
        if fx < best_f:
            best_x, best_f = x, fx
    x, fx = golden_section(f, max(lo, best_x - step), min(hi, best_x + step), tol)
    if fx < best_f or (fx == best_f and x < best_x):
        return x, fx
    return best_x, best_f


def phase_objective(
    unit: SwitchedUnit, c_comp: float, band: FrequencyGrid, z0: float = 50.0
) -> float:
    """RMS over the band of the att-minus-ref phase difference, in degrees."""
    trial = unit.model_copy(update={"c_comp": c_comp})
    diffs = [unit_phase_diff_deg(trial, angular(f), z0) for f in band.points]
    return math.sqrt(sum(d * d for d in diffs) / len(diffs))


def optimize_ccomp(
    unit: SwitchedUnit,
    band: FrequencyGrid,
    search: tuple[float, float] = CCOMP_SEARCH,
    z0: float = 50.0,
) -> float:
    """Compensation capacitor minimizing the RMS phase difference over the band."""
    c_lo, c_hi = search
    c_best, rms = grid_golden_minimize(
        lambda c: phase_objective(unit, c, band, z0), c_lo, c_hi, CCOMP_TOLERANCE
    )
    logger.debug("c_comp = %.4f fF (RMS phase %.4f deg)", c_best * 1e15, rms)
    return c_best


# Continuous unit


def _baseline_state(vc: float) -> AttenuatorState:
    return AttenuatorState(bit4=UnitState.REF, bit2=UnitState.REF, vc=vc)


def continuous_delta_db(chip: AttenuatorChipSpec, vc: float, omega: float) -> float:
    """Chip attenuation at vc relative to vc_lo, digital bits in reference."""
    base = chip_twoport(chip, _baseline_state(chip.cont.fet.vc_lo), omega).s21
    s21 = chip_twoport(chip, _baseline_state(vc), omega).s21
    return mag_db(base) - mag_db(s21)


def calibrate_continuous(
    chip: AttenuatorChipSpec,
    f0: float = 60e9,
    step_db: float = 0.1,
    range_db: float = 2.0,
    tol_db: float = 1e-3,
) -> CalibrationTable:
    """
    Control voltages for 0, step, 2·step, ... range_db of continuous attenuation at f0.

    Raises:
        FetRangeError: Naming the first target the FET cannot reach
    """
    fet = chip.cont.fet
    omega = angular(f0)

    def delta(vc: float) -> float:
        return continuous_delta_db(chip, vc, omega)

    reachable = delta(fet.vc_hi)
    count = round(range_db / step_db)
    entries = [CalibrationEntry(target_db=0.0, vc=fet.vc_lo, achieved_db=0.0)]
    for k in range(1, count + 1):
        target = round(k * step_db, 9)
        if reachable < target - tol_db:
            raise FetRangeError(target, reachable)
        lo, hi = entries[-1].vc, fet.vc_hi
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if delta(mid) < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12:
                break
        vc = 0.5 * (lo + hi)
        achieved = delta(vc)
        if abs(achieved - target) > tol_db:
            raise FetRangeError(target, reachable)
        entries.append(CalibrationEntry(target_db=target, vc=vc, achieved_db=achieved))
    logger.info("Calibrated %d continuous settings at %.4g GHz", len(entries), f0 / 1e9)
    return CalibrationTable(f0_hz=f0, entries=tuple(entries))


@dataclass(frozen=True)
class ContinuousCurves:
    """Continuous-unit response per calibration entry over frequency."""

    targets_db: tuple[float, ...]
    frequencies_hz: tuple[float, ...]
    attenuation_db: np.ndarray  # (entries, frequencies)
    phase_deg: np.ndarray


def continuous_curves(
    chip: AttenuatorChipSpec, table: CalibrationTable, grid: FrequencyGrid
) -> ContinuousCurves:
    """Relative attenuation and phase vs. frequency for every calibrated setting."""
    vc_lo = chip.cont.fet.vc_lo
    att = np.empty((len(table.entries), len(grid)))
    phase = np.empty_like(att)
    for j, f in enumerate(grid.points):
        omega = angular(f)
        base = chip_twoport(chip, _baseline_state(vc_lo), omega).s21
        for i, entry in enumerate(table.entries):
            s21 = chip_twoport(chip, _baseline_state(entry.vc), omega).s21
            att[i, j] = mag_db(base) - mag_db(s21)
            phase[i, j] = wrap_deg(phase_deg(s21) - phase_deg(base))
    return ContinuousCurves(
        targets_db=tuple(table.targets_db),
        frequencies_hz=grid.points,
        attenuation_db=att,
        phase_deg=phase,
    )


def unit_response(
    unit: SwitchedUnit, grid: FrequencyGrid, z0: float = 50.0
) -> tuple[np.ndarray, np.ndarray]:
    """Relative attenuation (dB) and phase difference (deg) of one switched unit."""
    omegas = [angular(f) for f in grid.points]
    return (
        np.array([unit_delta_db(unit, w, z0) for w in omegas]),
        np.array([unit_phase_diff_deg(unit, w, z0) for w in omegas]),
    )


# Sweeps and metrics


@dataclass(frozen=True)
class SweepResult:
    """S-parameters for every state (major) at every frequency (minor)."""

    states: tuple[AttenuatorState, ...]
    grid: FrequencyGrid
    sparams: tuple[tuple[SParams2, ...], ...]

    def __len__(self) -> int:
        return len(self.states) * len(self.grid)

    @property
    def reference_index(self) -> int:
        for i, state in enumerate(self.states):
            if state.is_reference:
                return i
        raise ValueError("sweep has no reference (0 dB) state")

    def state_index(self, label: str) -> int:
        for i, state in enumerate(self.states):
            if state.label == label:
                return i
        raise KeyError(label)

    def records(self):
        """(state, frequency, sparams) triples in state-major order."""
        for state, row in zip(self.states, self.sparams):
            for f, sp in zip(self.grid.points, row):
                yield state, f, sp

    def s21(self) -> np.ndarray:
        return np.array([[sp.s21 for sp in row] for row in self.sparams])


def _sweep_state(chip: AttenuatorChipSpec, state: AttenuatorState, grid: FrequencyGrid) -> tuple[SParams2, ...]:
    return tuple(chip_twoport(chip, state, angular(f)) for f in grid.points)


def sweep(
    chip: AttenuatorChipSpec,
    states: Sequence[AttenuatorState],
    grid: FrequencyGrid,
    threads: Optional[int] = None,
) -> SweepResult:
    """
    Evaluate every state at every grid point.

    Args:
        threads: Worker cap; defaults to ATTEN_FORGE_THREADS (unset or 0 = auto)
    """
    if not states:
        raise ValueError("sweep needs at least one state")
    workers = threads if threads is not None else resolve_thread_count()
    with ThreadPoolExecutor(max_workers=workers or None) as pool:
        rows = tuple(pool.map(lambda s: _sweep_state(chip, s, grid), states))
    logger.info("Swept %d states x %d frequencies", len(states), len(grid))
    return SweepResult(states=tuple(states), grid=grid, sparams=rows)


def relative_attenuation_db(sweep_result: SweepResult) -> np.ndarray:
    """20·log10(|s21_ref| / |s21_state|) per state and frequency."""
    mags = np.abs(sweep_result.s21())
    ref = mags[sweep_result.reference_index]
    return 20.0 * np.log10(ref / mags)


def relative_phase_deg(sweep_result: SweepResult) -> np.ndarray:
    """Phase of s21 relative to the reference state, wrapped to (-180, 180]."""
    s21 = sweep_result.s21()
    diff = np.degrees(np.angle(s21) - np.angle(s21[sweep_result.reference_index]))
    wrapped = np.mod(diff + 180.0, 360.0) - 180.0
    return np.where(wrapped == -180.0, 180.0, wrapped)


def _rms_over_states(errors: np.ndarray, ref: int) -> np.ndarray:
    others = np.delete(errors, ref, axis=0)
    if others.shape[0] == 0:
        return np.zeros(errors.shape[1])
    return np.sqrt(np.mean(others**2, axis=0))


def rms_amp_error(
    sweep_result: SweepResult, ideal_db: Optional[Sequence[float]] = None
) -> np.ndarray:
    """
    Per-frequency RMS deviation of relative attenuation from nominal.

    The reference state is excluded; ideal_db defaults to each state's nominal label.
    """
    if ideal_db is None:
        ideal_db = [s.nominal_db for s in sweep_result.states]
    ideal = np.asarray(ideal_db, dtype=float)[:, None]
    errors = relative_attenuation_db(sweep_result) - ideal
    return _rms_over_states(errors, sweep_result.reference_index)


def rms_phase_error(sweep_result: SweepResult) -> np.ndarray:
    """Per-frequency RMS of the wrapped phase relative to the reference state."""
    return _rms_over_states(relative_phase_deg(sweep_result), sweep_result.reference_index)


def _return_loss_db(worst: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        rl = -20.0 * np.log10(worst)
    return np.minimum(rl, RL_CAP_DB)


def il_rl(sweep_result: SweepResult) -> BandMetrics:
    """Reference-state insertion loss and worst-state return loss per port."""
    s11 = np.array([[abs(sp.s11) for sp in row] for row in sweep_result.sparams])
    s22 = np.array([[abs(sp.s22) for sp in row] for row in sweep_result.sparams])
    ref_s21 = np.abs(sweep_result.s21()[sweep_result.reference_index])
    with np.errstate(divide="ignore"):
        il = -20.0 * np.log10(ref_s21)
    return BandMetrics(
        frequencies_hz=sweep_result.grid.points,
        il_db=tuple(float(x) for x in il),
        rl_in_db=tuple(float(x) for x in _return_loss_db(s11.max(axis=0))),
        rl_out_db=tuple(float(x) for x in _return_loss_db(s22.max(axis=0))),
    )


def band_metrics(
    sweep_result: SweepResult, ideal_db: Optional[Sequence[float]] = None
) -> BandMetrics:
    """Loss profile plus both RMS error curves."""
    loss = il_rl(sweep_result)
    return loss.model_copy(
        update={
            "rms_amp_err_db": tuple(float(x) for x in rms_amp_error(sweep_result, ideal_db)),
            "rms_phase_err_deg": tuple(float(x) for x in rms_phase_error(sweep_result)),
        }
    )
