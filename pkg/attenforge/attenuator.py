"""
Attenuation units, the chip cascade and their closed forms.

The chip is unit4 (T-type, 4 dB) · tl_a · unit2 (simplified T-type, 2 dB)
· tl_b · continuous unit (0 to 2 dB). Every builder has an equivalent lumped
netlist so that the nodal solver can check it independently.

Shunt branches of all three units share one structure: the top resistor r2
(optionally bypassed by c_comp) in series with a lower element (switch or
FET) to ground, r2's parasitic split as c_par/2 on either terminal.
"""

from __future__ import annotations

import math
from typing import Optional, Union

from .devices import (
    admittance,
    fet_resistance,
    parallel_rc,
    resistor_twoport,
    switch_branch,
)
from .exceptions import CalibrationError, DegenerateNetworkError
from .mna import Netlist, NetlistBuilder
from .models import (
    AttenuatorChipSpec,
    AttenuatorState,
    CalibrationTable,
    ContinuousUnitSpec,
    ResistorModel,
    SimplifiedTUnitSpec,
    SwitchModel,
    SwitchState,
    TransmissionLineSpec,
    TTypeUnitSpec,
    UnitState,
)
from .netcore import (
    Abcd,
    SParams2,
    abcd_bridge,
    abcd_shunt,
    abcd_tline,
    abcd_to_s,
    tline_theta,
)

UNIT4_NOMINAL_DB = 4.0
UNIT2_NOMINAL_DB = 2.0
CONTINUOUS_RANGE_DB = 2.0
TOTAL_RANGE_DB = 7.5
LADDER_SECTIONS = 16

SwitchedUnit = Union[TTypeUnitSpec, SimplifiedTUnitSpec]


# Closed forms


def eval_eq1(
    r1: float, r2: float, r_on2: float, c_comp: float, z0: float, omega: float
) -> complex:
    """
    S21 of the attenuation state: series arms r1, shunt r_on2 + (r2 ∥ c_comp).

    Raises:
        ValueError: If a resistance is not positive
        DegenerateNetworkError: If the denominator vanishes
    """
    if min(r1, r2, r_on2, z0) <= 0:
        raise ValueError("resistances and z0 must be positive")
    jwc = 1j * omega * c_comp
    zr = z0 + r1
    num = 2 * z0 * (r2 + r_on2) + 2 * jwc * z0 * r_on2 * r2
    den = (1 + jwc * r2) * (2 * r_on2 * zr + zr**2) + 2 * r2 * zr
    if den == 0:
        raise DegenerateNetworkError("closed-form S21 has a zero denominator")
    return num / den


def eval_eq2(
    r1: float, r2: float, r_on2: float, c_comp: float, z0: float, omega: float
) -> float:
    """First-order (in ω) phase of eval_eq1, in radians."""
    if min(r1, r2, r_on2, z0) <= 0:
        raise ValueError("resistances and z0 must be positive")
    wc = omega * c_comp
    lead = wc * r_on2 * r2 / (r2 + r_on2)
    lag = wc * (2 * r_on2 + r1 + z0) * r2 / (z0 + r1 + 2 * r_on2 + 2 * r2)
    return lead - lag


# Two-port builders


def shunt_branch_admittance(
    r2: ResistorModel, c_comp: float, lower: Optional[complex], omega: float
) -> complex:
    """
    Admittance to ground seen at the tee's centre node.

    Args:
        r2: Top resistor with its parasitic
        c_comp: Capacitor across r2
        lower: Impedance from the internal node to ground, None when open
        omega: Angular frequency
    """
    y_half = 1j * omega * r2.c_par / 2.0
    y_internal = y_half + admittance(lower)
    if y_internal == 0:
        return y_half
    return y_half + 1.0 / (parallel_rc(r2.r, c_comp, omega) + 1.0 / y_internal)


def _tee(r1: ResistorModel, y_shunt: complex, omega: float) -> Abcd:
    arm = resistor_twoport(r1, omega)
    return arm @ abcd_shunt(y_shunt) @ arm


def _shunt_switch_state(state: UnitState) -> SwitchState:
    return SwitchState.ON if state is UnitState.ATT else SwitchState.OFF


def ttype_twoport(spec: TTypeUnitSpec, state: UnitState, omega: float) -> Abcd:
    """T-type unit; M1 bridges the whole tee (on in ref, off-capacitance in att)."""
    lower = switch_branch(spec.shunt_switch, _shunt_switch_state(state), omega)
    tee = _tee(spec.r1, shunt_branch_admittance(spec.r2, spec.c_comp, lower, omega), omega)
    m1_state = SwitchState.OFF if state is UnitState.ATT else SwitchState.ON
    return abcd_bridge(tee, admittance(switch_branch(spec.series_switch, m1_state, omega)))


def simplified_twoport(spec: SimplifiedTUnitSpec, state: UnitState, omega: float) -> Abcd:
    """Simplified T-type unit; only the shunt switch changes with state."""
    lower = switch_branch(spec.shunt_switch, _shunt_switch_state(state), omega)
    return _tee(spec.r1, shunt_branch_admittance(spec.r2, spec.c_comp, lower, omega), omega)


def continuous_twoport(spec: ContinuousUnitSpec, vc: float, omega: float) -> Abcd:
    """Shunt r2 in series with the FET channel at control voltage vc."""
    r_fet = fet_resistance(spec.fet, vc)
    return abcd_shunt(shunt_branch_admittance(spec.r2, 0.0, complex(r_fet), omega))


def unit_twoport(unit: SwitchedUnit, state: UnitState, omega: float) -> Abcd:
    if isinstance(unit, TTypeUnitSpec):
        return ttype_twoport(unit, state, omega)
    return simplified_twoport(unit, state, omega)


def tline_twoport(line: TransmissionLineSpec, f_hz: float) -> Abcd:
    return abcd_tline(line.z_c, tline_theta(line.theta_ref_deg, line.f_ref_hz, f_hz))


def chip_abcd(chip: AttenuatorChipSpec, state: AttenuatorState, omega: float) -> Abcd:
    f_hz = omega / (2.0 * math.pi)
    return (
        ttype_twoport(chip.unit4, state.bit4, omega)
        @ tline_twoport(chip.tl_a, f_hz)
        @ simplified_twoport(chip.unit2, state.bit2, omega)
        @ tline_twoport(chip.tl_b, f_hz)
        @ continuous_twoport(chip.cont, state.vc, omega)
    )


def chip_twoport(chip: AttenuatorChipSpec, state: AttenuatorState, omega: float) -> SParams2:
    """S-parameters of the full cascade at chip.z0."""
    return abcd_to_s(chip_abcd(chip, state, omega), chip.z0)


# State enumeration


def _is_multiple(value: float, step: float) -> bool:
    ratio = value / step
    return abs(ratio - round(ratio)) < 1e-9


def enumerate_states(
    chip: AttenuatorChipSpec,
    step_db: float,
    f0: float,
    calibration: CalibrationTable,
) -> list[AttenuatorState]:
    """
    States from 0 to 7.5 dB at the given pitch, reference state first.

    Each label splits into a digital part (0, 2, 4 or 6 dB from the two
    switched units) and a continuous remainder below 2 dB, whose control
    voltage is interpolated from the calibration table.

    Raises:
        ValueError: If the step does not divide the range
        CalibrationError: If the table was made elsewhere or does not cover a setting
    """
    if not (step_db > 0 and _is_multiple(TOTAL_RANGE_DB, step_db)):
        raise ValueError(f"step {step_db} dB does not divide {TOTAL_RANGE_DB} dB")
    if not math.isclose(calibration.f0_hz, f0, rel_tol=1e-9):
        raise CalibrationError(
            f"calibration was made at {calibration.f0_hz / 1e9:g} GHz, not {f0 / 1e9:g} GHz"
        )
    fet = chip.cont.fet
    states = []
    for i in range(round(TOTAL_RANGE_DB / step_db) + 1):
        label = round(i * step_db, 9)
        digital = 2.0 * math.floor(label / UNIT2_NOMINAL_DB + 1e-9)
        continuous = round(label - digital, 9)
        vc = calibration.vc_for(continuous)
        if not fet.vc_lo <= vc <= fet.vc_hi:
            raise CalibrationError(f"calibrated vc {vc} V lies outside the FET range")
        states.append(
            AttenuatorState(
                bit4=UnitState.ATT if digital >= UNIT4_NOMINAL_DB else UnitState.REF,
                bit2=UnitState.ATT if round(digital) % 4 == 2 else UnitState.REF,
                vc=vc,
                nominal_db=label,
            )
        )
    return states


# Equivalent netlists


def _add_switch(
    b: NetlistBuilder, a: int, z: int, model: SwitchModel, state: SwitchState, name: str
) -> None:
    if state is SwitchState.ON:
        b.resistor(a, z, model.r_on, f"{name}_ron")
        b.capacitor(a, z, model.c_par_on, f"{name}_cpar")
    else:
        b.capacitor(a, z, model.c_off, f"{name}_coff")


def _add_resistor(b: NetlistBuilder, a: int, z: int, model: ResistorModel, name: str) -> None:
    b.resistor(a, z, model.r, name)
    b.capacitor(a, b.GROUND, model.c_par / 2.0, f"{name}_cpa")
    b.capacitor(z, b.GROUND, model.c_par / 2.0, f"{name}_cpb")


def _add_shunt_branch(
    b: NetlistBuilder, node: int, r2: ResistorModel, c_comp: float, name: str
) -> int:
    """Top half of a shunt branch; returns the internal node for the lower element."""
    internal = b.node()
    _add_resistor(b, node, internal, r2, f"{name}_r2")
    b.capacitor(node, internal, c_comp, f"{name}_ccomp")
    return internal


def _add_tee(
    b: NetlistBuilder, a: int, z: int, unit: SwitchedUnit, state: UnitState, name: str
) -> None:
    mid = b.node()
    _add_resistor(b, a, mid, unit.r1, f"{name}_r1a")
    _add_resistor(b, mid, z, unit.r1, f"{name}_r1b")
    internal = _add_shunt_branch(b, mid, unit.r2, unit.c_comp, name)
    _add_switch(b, internal, b.GROUND, unit.shunt_switch, _shunt_switch_state(state), f"{name}_m2")


def _add_ttype(b: NetlistBuilder, a: int, z: int, spec: TTypeUnitSpec, state: UnitState) -> None:
    _add_tee(b, a, z, spec, state, "u4")
    m1_state = SwitchState.OFF if state is UnitState.ATT else SwitchState.ON
    _add_switch(b, a, z, spec.series_switch, m1_state, "u4_m1")


def _add_continuous(b: NetlistBuilder, node: int, spec: ContinuousUnitSpec, vc: float) -> None:
    internal = _add_shunt_branch(b, node, spec.r2, 0.0, "cont")
    b.resistor(internal, b.GROUND, fet_resistance(spec.fet, vc), "cont_fet")


def _add_ladder(b: NetlistBuilder, a: int, line: TransmissionLineSpec, sections: int, name: str) -> int:
    """LC ladder standing in for an ideal line; returns its output node."""
    if line.theta_ref_deg == 0:
        return a
    delay = math.radians(line.theta_ref_deg) / (2.0 * math.pi * line.f_ref_hz)
    l_section = line.z_c * delay / sections
    c_section = delay / line.z_c / sections
    node = a
    for k in range(sections):
        centre = b.node()
        b.inductor(node, centre, l_section / 2.0, f"{name}_l{k}a")
        b.capacitor(centre, b.GROUND, c_section, f"{name}_c{k}")
        node = b.node()
        b.inductor(centre, node, l_section / 2.0, f"{name}_l{k}b")
    return node


def eq1_netlist(r1: float, r2: float, r_on2: float, c_comp: float) -> Netlist:
    """Equivalent circuit of the attenuation state that eval_eq1 describes exactly."""
    b = NetlistBuilder()
    inp, out, mid, internal = b.node(), b.node(), b.node(), b.node()
    b.resistor(inp, mid, r1, "r1a").resistor(mid, out, r1, "r1b")
    b.resistor(mid, internal, r2, "r2").capacitor(mid, internal, c_comp, "ccomp")
    b.resistor(internal, b.GROUND, r_on2, "ron2")
    return b.build((inp, b.GROUND), (out, b.GROUND))


def ttype_netlist(spec: TTypeUnitSpec, state: UnitState) -> Netlist:
    b = NetlistBuilder()
    inp, out = b.node(), b.node()
    _add_ttype(b, inp, out, spec, state)
    return b.build((inp, b.GROUND), (out, b.GROUND))


def simplified_netlist(spec: SimplifiedTUnitSpec, state: UnitState) -> Netlist:
    b = NetlistBuilder()
    inp, out = b.node(), b.node()
    _add_tee(b, inp, out, spec, state, "u2")
    return b.build((inp, b.GROUND), (out, b.GROUND))


def continuous_netlist(spec: ContinuousUnitSpec, vc: float) -> Netlist:
    """Shunt-only unit: both ports sit on the same node."""
    b = NetlistBuilder()
    node = b.node()
    _add_continuous(b, node, spec, vc)
    return b.build((node, b.GROUND), (node, b.GROUND))


def chip_netlist(
    chip: AttenuatorChipSpec, state: AttenuatorState, sections: int = LADDER_SECTIONS
) -> Netlist:
    """Whole chip with each line replaced by an LC ladder (needs omega > 0)."""
    b = NetlistBuilder()
    inp, after_unit4 = b.node(), b.node()
    _add_ttype(b, inp, after_unit4, chip.unit4, state.bit4)
    before_unit2 = _add_ladder(b, after_unit4, chip.tl_a, sections, "tla")
    after_unit2 = b.node()
    _add_tee(b, before_unit2, after_unit2, chip.unit2, state.bit2, "u2")
    out = _add_ladder(b, after_unit2, chip.tl_b, sections, "tlb")
    _add_continuous(b, out, chip.cont, state.vc)
    return b.build((inp, b.GROUND), (out, b.GROUND))
