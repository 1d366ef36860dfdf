"""
Unit tests for attenforge.attenuator module.

Tests the unit builders and chip cascade:
- Closed-form S21 of the attenuation state and its first-order phase
- Reference/attenuation behaviour of each unit
- State enumeration over the digital and continuous settings
"""

import cmath
import math

import numpy as np
import pytest

from attenforge.attenuator import (
    chip_twoport,
    continuous_twoport,
    enumerate_states,
    eval_eq1,
    eval_eq2,
    shunt_branch_admittance,
    simplified_twoport,
    ttype_twoport,
    unit_twoport,
)
from attenforge.exceptions import CalibrationError
from attenforge.models import AttenuatorState, ResistorModel, UnitState
from attenforge.netcore import abcd_to_s, angular, mag_db

pytestmark = pytest.mark.unit


class TestClosedForm:
    """Test the closed-form S21 and its first-order phase."""

    def test_without_compensation_is_real(self, eq1_params):
        p = {**eq1_params, "c_comp": 0.0}
        r1, r2, r_on2, z0 = p["r1"], p["r2"], p["r_on2"], p["z0"]
        expected = 2 * z0 * (r2 + r_on2) / ((z0 + r1) ** 2 + 2 * (r2 + r_on2) * (z0 + r1))
        for f in (1e9, 60e9):
            s21 = eval_eq1(**p, omega=angular(f))
            assert s21.imag == 0
            assert s21.real == pytest.approx(expected, rel=1e-14)

    def test_four_db_pad_with_switch_resistance(self, eq1_params):
        s21 = eval_eq1(**{**eq1_params, "c_comp": 0.0}, omega=0.0)
        assert abs(s21) == pytest.approx(0.64364, abs=1e-5)
        assert mag_db(s21) == pytest.approx(-3.827, abs=1e-3)

    def test_rejects_non_positive_resistance(self, eq1_params):
        with pytest.raises(ValueError):
            eval_eq1(**{**eq1_params, "r_on2": 0.0}, omega=1.0)

    def test_first_order_phase_residual_is_cubic(self, default_chip):
        unit = default_chip.unit4
        args = (unit.r1.r, unit.r2.r, unit.shunt_switch.r_on, unit.c_comp, 50.0)
        freqs = np.geomspace(0.5e9, 4e9, 12)
        residual = [
            abs(cmath.phase(eval_eq1(*args, angular(f))) - eval_eq2(*args, angular(f))) for f in freqs
        ]
        slope = np.polyfit(np.log(freqs), np.log(residual), 1)[0]
        assert slope == pytest.approx(3.0, abs=0.3)

    def test_first_order_phase_tracks_exact_phase_at_low_frequency(self, eq1_params):
        omega = angular(0.5e9)
        exact = cmath.phase(eval_eq1(**eq1_params, omega=omega))
        assert eval_eq2(**eq1_params, omega=omega) == pytest.approx(exact, rel=1e-3)


class TestUnits:
    """Test the three attenuation units."""

    def test_shunt_branch_open_lower_element(self):
        r2 = ResistorModel(r=100.0, c_par=2e-15)
        omega = angular(60e9)
        y_half = 1j * omega * 1e-15
        # the far half of r2's parasitic still reaches ground through r2
        assert shunt_branch_admittance(r2, 0.0, None, omega) == pytest.approx(y_half + 1 / (100.0 + 1 / y_half))
        assert shunt_branch_admittance(ResistorModel(r=100.0), 0.0, None, omega) == 0

    def test_shunt_branch_series_path(self):
        assert shunt_branch_admittance(ResistorModel(r=90.0), 0.0, 10.0, 0.0) == pytest.approx(0.01)

    @pytest.mark.parametrize("name,nominal", [("unit4", 4.0), ("unit2", 2.0)])
    def test_switched_units_hit_nominal_at_f0(self, default_chip, name, nominal):
        unit = getattr(default_chip, name)
        omega = angular(60e9)
        ref = abcd_to_s(unit_twoport(unit, UnitState.REF, omega), 50.0).s21
        att = abcd_to_s(unit_twoport(unit, UnitState.ATT, omega), 50.0).s21
        assert mag_db(ref) - mag_db(att) == pytest.approx(nominal, abs=0.02)

    def test_ttype_reference_state_is_low_loss(self, default_chip):
        sp = abcd_to_s(ttype_twoport(default_chip.unit4, UnitState.REF, angular(60e9)), 50.0)
        assert -mag_db(sp.s21) < 1.0

    def test_compensation_delays_attenuation_state(self, default_chip):
        omega = angular(60e9)
        phases = []
        for c in np.linspace(0.0, 50e-15, 11):
            unit = default_chip.unit2.model_copy(update={"c_comp": float(c)})
            phases.append(cmath.phase(abcd_to_s(simplified_twoport(unit, UnitState.ATT, omega), 50.0).s21))
        assert all(b < a for a, b in zip(phases, phases[1:]))

    def test_continuous_unit_nearly_transparent_at_vc_lo(self, default_chip):
        sp = abcd_to_s(continuous_twoport(default_chip.cont, 0.0, angular(60e9)), 50.0)
        assert abs(sp.s21) == pytest.approx(1.0, abs=0.02)

    def test_continuous_unit_attenuation_grows_with_vc(self, default_chip):
        omega = angular(60e9)
        mags = [abs(abcd_to_s(continuous_twoport(default_chip.cont, v, omega), 50.0).s21) for v in np.linspace(0, 1.2, 13)]
        assert all(b < a for a, b in zip(mags, mags[1:]))

    def test_chip_is_reciprocal(self, default_chip):
        state = AttenuatorState(bit4=UnitState.ATT, bit2=UnitState.REF, vc=0.7, nominal_db=5.0)
        sp = chip_twoport(default_chip, state, angular(85e9))
        assert sp.s12 == pytest.approx(sp.s21, abs=1e-12)

    def test_every_state_reciprocal_and_passive(self, default_chip, linear_calibration):
        states = enumerate_states(default_chip, 0.1, 60e9, linear_calibration)
        for state in states:
            for f in np.linspace(20e9, 100e9, 81):
                sp = chip_twoport(default_chip, state, angular(f))
                assert sp.s12 == pytest.approx(sp.s21, abs=1e-12)
                s = np.array([[sp.s11, sp.s12], [sp.s21, sp.s22]])
                assert np.linalg.eigvalsh(np.eye(2) - s.conj().T @ s).min() >= -1e-12

    def test_chip_heaviest_state_near_full_range(self, default_chip):
        omega = angular(60e9)
        ref = chip_twoport(default_chip, AttenuatorState(vc=0.0), omega).s21
        heavy = AttenuatorState(bit4=UnitState.ATT, bit2=UnitState.ATT, vc=1.1496, nominal_db=7.5)
        att = chip_twoport(default_chip, heavy, omega).s21
        assert mag_db(ref) - mag_db(att) == pytest.approx(7.5, abs=0.5)

    def test_continuous_range_exceeds_two_db(self, default_chip):
        omega = angular(60e9)
        low = chip_twoport(default_chip, AttenuatorState(vc=0.0), omega).s21
        high = chip_twoport(default_chip, AttenuatorState(vc=1.2), omega).s21
        assert mag_db(low) - mag_db(high) > 2.0


class TestEnumerateStates:
    """Test digital/continuous state enumeration."""

    def test_half_db_pitch(self, default_chip, linear_calibration):
        states = enumerate_states(default_chip, 0.5, 60e9, linear_calibration)
        assert len(states) == 16
        assert [s.label for s in states[:3]] == ["0.0", "0.5", "1.0"]
        assert states[-1].label == "7.5"
        assert states[0].is_reference

    def test_tenth_db_pitch(self, default_chip, linear_calibration):
        states = enumerate_states(default_chip, 0.1, 60e9, linear_calibration)
        assert len(states) == 76
        assert len({s.label for s in states}) == 76

    @pytest.mark.parametrize(
        "label,bit4,bit2,vc",
        [
            ("0.0", UnitState.REF, UnitState.REF, 0.0),
            ("1.5", UnitState.REF, UnitState.REF, 0.75),
            ("2.0", UnitState.REF, UnitState.ATT, 0.0),
            ("4.5", UnitState.ATT, UnitState.REF, 0.25),
            ("6.0", UnitState.ATT, UnitState.ATT, 0.0),
            ("7.5", UnitState.ATT, UnitState.ATT, 0.75),
        ],
    )
    def test_decomposition(self, default_chip, linear_calibration, label, bit4, bit2, vc):
        states = {s.label: s for s in enumerate_states(default_chip, 0.5, 60e9, linear_calibration)}
        state = states[label]
        assert (state.bit4, state.bit2) == (bit4, bit2)
        assert state.vc == pytest.approx(vc, abs=1e-12)

    def test_step_must_divide_range(self, default_chip, linear_calibration):
        with pytest.raises(ValueError):
            enumerate_states(default_chip, 0.4, 60e9, linear_calibration)
        with pytest.raises(ValueError):
            enumerate_states(default_chip, 0.0, 60e9, linear_calibration)

    @pytest.mark.parametrize("step,count", [(0.3, 26), (0.25, 31), (1.5, 6)])
    def test_any_step_dividing_the_range(self, default_chip, linear_calibration, step, count):
        states = enumerate_states(default_chip, step, 60e9, linear_calibration)
        assert len(states) == count
        assert states[0].is_reference
        assert states[-1].label == "7.5"

    def test_off_grid_step_decomposition(self, default_chip, linear_calibration):
        states = {s.label: s for s in enumerate_states(default_chip, 0.3, 60e9, linear_calibration)}
        assert (states["2.1"].bit4, states["2.1"].bit2) == (UnitState.REF, UnitState.ATT)
        assert states["2.1"].vc == pytest.approx(0.05, abs=1e-12)
        assert (states["6.3"].bit4, states["6.3"].bit2) == (UnitState.ATT, UnitState.ATT)
        assert states["6.3"].vc == pytest.approx(0.15, abs=1e-12)

    def test_calibration_frequency_must_match(self, default_chip, linear_calibration):
        with pytest.raises(CalibrationError):
            enumerate_states(default_chip, 0.5, 50e9, linear_calibration)

    def test_vc_is_monotone_within_each_digital_setting(self, default_chip, linear_calibration):
        states = enumerate_states(default_chip, 0.1, 60e9, linear_calibration)
        for digital in (0, 2, 4, 6):
            group = [s.vc for s in states if math.floor(s.nominal_db / 2 + 1e-9) * 2 == digital]
            assert all(b > a for a, b in zip(group, group[1:]))
