"""
Sequential coordinate tuning of the chip.

Each pass runs the steps in a fixed order:
1. Fit unit4 r2 to 4 dB and unit2 r2 to 2 dB at f0
2. Optimize c_comp of unit4 and unit2 for minimum RMS phase difference
3. Set the electrical length of tl_a, then tl_b, for the best target margin

Every step takes and returns a TuningContext, so the pipeline is a plain
tuple of callables. Three passes is a heuristic, not a convergence test.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .attenuator import UNIT2_NOMINAL_DB, UNIT4_NOMINAL_DB, chip_twoport
from .design import (
    CCOMP_SEARCH,
    fit_r2_for_delta,
    grid_golden_minimize,
    optimize_ccomp,
)
from .exceptions import NumericalError, TuningError
from .models import (
    AttenuatorChipSpec,
    AttenuatorState,
    FrequencyGrid,
    ReportTargets,
    TuningPassSummary,
    TuningReport,
    UnitState,
)
from .netcore import angular, mag_db, phase_deg, wrap_deg

logger = logging.getLogger(__name__)

TUNING_BAND_POINTS = 17
THETA_SEARCH_DEG = (0.0, 90.0)
THETA_TOLERANCE_DEG = 1e-3
DEFAULT_PASSES = 3


@dataclass(frozen=True)
class TuningContext:
    chip: AttenuatorChipSpec
    band: FrequencyGrid
    f0_hz: float
    targets: ReportTargets


TuningStep = Callable[[TuningContext], TuningContext]


def _digital_states(chip: AttenuatorChipSpec) -> list[AttenuatorState]:
    vc = chip.cont.fet.vc_lo
    ref, att = UnitState.REF, UnitState.ATT
    return [
        AttenuatorState(bit4=ref, bit2=ref, vc=vc, nominal_db=0.0),
        AttenuatorState(bit4=att, bit2=ref, vc=vc, nominal_db=UNIT4_NOMINAL_DB),
        AttenuatorState(bit4=ref, bit2=att, vc=vc, nominal_db=UNIT2_NOMINAL_DB),
        AttenuatorState(bit4=att, bit2=att, vc=vc, nominal_db=UNIT4_NOMINAL_DB + UNIT2_NOMINAL_DB),
    ]


def tuning_margin(
    chip: AttenuatorChipSpec, band: FrequencyGrid, targets: ReportTargets
) -> float:
    """
    Worst normalized distance to the report thresholds; below 1 means all pass.

    Uses the four digital states at vc_lo for the RMS errors and adds the
    all-reference state at vc_hi to the match check.
    """
    states = _digital_states(chip)
    heavy = AttenuatorState(vc=chip.cont.fet.vc_hi)
    s_limit = 10.0 ** (-targets.rl_min / 20.0)
    worst = 0.0
    for f in band.points:
        omega = angular(f)
        sps = [chip_twoport(chip, s, omega) for s in states]
        extra = chip_twoport(chip, heavy, omega)
        ref = sps[0].s21
        amp = [mag_db(ref) - mag_db(sp.s21) - s.nominal_db for s, sp in zip(states[1:], sps[1:])]
        phase = [wrap_deg(phase_deg(sp.s21) - phase_deg(ref)) for sp in sps[1:]]
        reflection = max(max(abs(sp.s11), abs(sp.s22)) for sp in [*sps, extra])
        worst = max(
            worst,
            math.sqrt(np.mean(np.square(amp))) / targets.rms_amp,
            math.sqrt(np.mean(np.square(phase))) / targets.rms_phase,
            reflection / s_limit,
        )
    return worst


def fit_r2_step(ctx: TuningContext) -> TuningContext:
    """Refit both shunt resistors at f0."""
    chip = ctx.chip
    unit4_r2 = fit_r2_for_delta(chip.unit4, UNIT4_NOMINAL_DB, ctx.f0_hz, chip.z0)
    unit2_r2 = fit_r2_for_delta(chip.unit2, UNIT2_NOMINAL_DB, ctx.f0_hz, chip.z0)
    chip = chip.model_copy(
        update={
            "unit4": chip.unit4.model_copy(update={"r2": chip.unit4.r2.model_copy(update={"r": unit4_r2})}),
            "unit2": chip.unit2.model_copy(update={"r2": chip.unit2.r2.model_copy(update={"r": unit2_r2})}),
        }
    )
    return replace(ctx, chip=chip)


def ccomp_step(ctx: TuningContext) -> TuningContext:
    """Re-optimize both compensation capacitors over the band."""
    chip = ctx.chip
    c4 = optimize_ccomp(chip.unit4, ctx.band, CCOMP_SEARCH, chip.z0)
    c2 = optimize_ccomp(chip.unit2, ctx.band, CCOMP_SEARCH, chip.z0)
    chip = chip.model_copy(
        update={
            "unit4": chip.unit4.model_copy(update={"c_comp": c4}),
            "unit2": chip.unit2.model_copy(update={"c_comp": c2}),
        }
    )
    return replace(ctx, chip=chip)


def _line_step(field: str) -> TuningStep:
    def step(ctx: TuningContext) -> TuningContext:
        def with_theta(theta: float) -> AttenuatorChipSpec:
            line = getattr(ctx.chip, field).model_copy(update={"theta_ref_deg": theta})
            return ctx.chip.model_copy(update={field: line})

        theta, margin = grid_golden_minimize(
            lambda t: tuning_margin(with_theta(t), ctx.band, ctx.targets),
            *THETA_SEARCH_DEG,
            THETA_TOLERANCE_DEG,
        )
        logger.debug("%s theta = %.4f deg (margin %.4f)", field, theta, margin)
        return replace(ctx, chip=with_theta(theta))

    step.__name__ = f"{field}_theta_step"
    step.__doc__ = f"Choose the electrical length of {field} for the best margin."
    return step


JOINT_PIPELINE: tuple[TuningStep, ...] = (
    fit_r2_step,
    ccomp_step,
    _line_step("tl_a"),
    _line_step("tl_b"),
)
CCOMP_PIPELINE: tuple[TuningStep, ...] = (ccomp_step,)


def run_tuning(
    chip: AttenuatorChipSpec,
    band: FrequencyGrid,
    f0_hz: float = 60e9,
    targets: ReportTargets = ReportTargets(),
    passes: int = DEFAULT_PASSES,
    joint: bool = True,
) -> tuple[AttenuatorChipSpec, TuningReport]:
    """
    Run the tuning pipeline.

    Args:
        joint: All steps for ``passes`` passes; otherwise one c_comp pass only

    Raises:
        TuningError: Wrapping the numerical failure of a step
    """
    pipeline = JOINT_PIPELINE if joint else CCOMP_PIPELINE
    passes = passes if joint else 1
    ctx = TuningContext(chip=chip, band=band, f0_hz=f0_hz, targets=targets)
    summaries = []
    for index in range(passes):
        for step in pipeline:
            try:
                ctx = step(ctx)
            except NumericalError as e:
                raise TuningError(f"Failed in {step.__name__}: {e}") from e
        c = ctx.chip
        summary = TuningPassSummary(
            index=index,
            unit4_r2=c.unit4.r2.r,
            unit2_r2=c.unit2.r2.r,
            unit4_c_comp=c.unit4.c_comp,
            unit2_c_comp=c.unit2.c_comp,
            tl_a_theta_deg=c.tl_a.theta_ref_deg,
            tl_b_theta_deg=c.tl_b.theta_ref_deg,
            margin=tuning_margin(c, band, targets),
        )
        logger.info("Tuning pass %d: margin %.4f", index + 1, summary.margin)
        summaries.append(summary)
    return ctx.chip, TuningReport(passes=tuple(summaries))
