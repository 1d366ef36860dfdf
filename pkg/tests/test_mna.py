"""
Unit tests for attenforge.mna module.

Tests the nodal reference solver:
- Netlist validation (ports, node range, floating nodes)
- Stamping and solving against hand-derived two-ports
- Netlist construction with NetlistBuilder
- Agreement with the ABCD builders and the closed-form S21
"""

import math

import numpy as np
import pytest

from attenforge.attenuator import (
    chip_netlist,
    chip_twoport,
    continuous_netlist,
    continuous_twoport,
    eq1_netlist,
    eval_eq1,
    simplified_netlist,
    simplified_twoport,
    ttype_netlist,
    ttype_twoport,
)
from attenforge.exceptions import NetlistError, UnsupportedDcError
from attenforge.mna import Element, ElementKind, Netlist, NetlistBuilder, solve_sparams, stamp_system
from attenforge.models import (
    AttenuatorState,
    ContinuousFetModel,
    ContinuousUnitSpec,
    ResistorModel,
    SimplifiedTUnitSpec,
    SwitchModel,
    TTypeUnitSpec,
    UnitState,
)
from attenforge.netcore import abcd_to_s, angular
from attenforge.parser import parse_netlist

pytestmark = pytest.mark.unit


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-12)


class TestNetlistValidation:
    """Test Netlist invariants."""

    def test_floating_nodes_rejected(self, fixtures_dir):
        with pytest.raises(NetlistError, match="no path to ground"):
            parse_netlist((fixtures_dir / "floating.net").read_text())

    def test_node_out_of_range(self):
        element = Element(kind=ElementKind.RESISTOR, value=50.0, nodes=(1, 5))
        with pytest.raises(NetlistError, match="outside"):
            Netlist(elements=(element,), node_count=3)

    def test_port_on_single_node(self):
        element = Element(kind=ElementKind.RESISTOR, value=50.0, nodes=(1, 0))
        with pytest.raises(NetlistError, match="port2"):
            Netlist(elements=(element,), node_count=2, port2=(1, 1))

    def test_element_value_must_be_positive(self):
        with pytest.raises(ValueError):
            Element(kind=ElementKind.CAPACITOR, value=0.0, nodes=(1, 0))


class TestSolve:
    """Test stamping and solving against known two-ports."""

    def test_series_resistor(self, fixtures_dir):
        sp = solve_sparams(parse_netlist((fixtures_dir / "series_r.net").read_text()), 0.0)
        assert sp.s21 == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert sp.s11 == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert sp.conditioning_warning is None

    def test_shunt_branch_with_shared_port_node(self, fixtures_dir):
        net = parse_netlist((fixtures_dir / "shunt_rc.net").read_text())
        omega = angular(60e9)
        z = 10.0 + 25.0 / (1 + 1j * omega * 25.0 * 20e-15)
        sp = solve_sparams(net, omega)
        assert sp.s21 == pytest.approx(2.0 / (2.0 + 50.0 / z), rel=1e-12)
        assert sp.s11 == pytest.approx(sp.s21 - 1.0, abs=1e-12)

    def test_dc_tee_pad_attenuates_four_db(self, fixtures_dir):
        sp = solve_sparams(parse_netlist((fixtures_dir / "tee_pad.net").read_text()), 0.0)
        assert -20 * math.log10(abs(sp.s21)) == pytest.approx(4.0, abs=1e-4)
        assert abs(sp.s11) < 1e-5

    def test_butterworth_half_power_at_cutoff(self, fixtures_dir):
        net = parse_netlist((fixtures_dir / "lc_lowpass.net").read_text())
        sp = solve_sparams(net, angular(1e9))
        assert abs(sp.s21) ** 2 == pytest.approx(0.5, abs=1e-4)
        assert abs(sp.s11) ** 2 + abs(sp.s21) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_dc_with_inductors_unsupported(self, fixtures_dir):
        net = parse_netlist((fixtures_dir / "lc_lowpass.net").read_text())
        with pytest.raises(UnsupportedDcError):
            solve_sparams(net, 0.0)

    def test_negative_frequency_rejected(self, fixtures_dir):
        net = parse_netlist((fixtures_dir / "series_r.net").read_text())
        with pytest.raises(ValueError):
            stamp_system(net, -1.0)

    def test_stamp_is_symmetric_without_ground_row(self, fixtures_dir):
        net = parse_netlist((fixtures_dir / "tee_pad.net").read_text())
        system = stamp_system(net, 0.0)
        assert system.matrix.shape == (3, 3)
        assert np.allclose(system.matrix, system.matrix.T)


class TestNetlistBuilder:
    """Test incremental netlist construction."""

    def test_nodes_allocated_from_one(self):
        b = NetlistBuilder()
        assert [b.node(), b.node(), b.node()] == [1, 2, 3]

    def test_zero_capacitor_skipped(self):
        b = NetlistBuilder()
        a, z = b.node(), b.node()
        net = b.resistor(a, z, 50.0).capacitor(a, b.GROUND, 0.0).resistor(z, b.GROUND, 50.0).build((a, 0), (z, 0))
        assert len(net.elements) == 2
        assert net.node_count == 3


class TestOracleEquivalence:
    """The nodal solver and the ABCD/closed-form models describe the same circuits."""

    def test_closed_form_matches_equivalent_circuit(self):
        rng = np.random.default_rng(2024)
        freqs = np.linspace(20e9, 100e9, 50)
        for _ in range(20):
            r1 = rng.uniform(2.0, 30.0)
            r2 = rng.uniform(20.0, 300.0)
            r_on2 = rng.uniform(2.0, 40.0)
            c_comp = rng.uniform(0.0, 50e-15)
            net = eq1_netlist(r1, r2, r_on2, c_comp)
            for f in freqs:
                omega = angular(f)
                expected = solve_sparams(net, omega).s21
                assert _rel(eval_eq1(r1, r2, r_on2, c_comp, 50.0, omega), expected) < 1e-9

    @pytest.mark.parametrize("state", [UnitState.REF, UnitState.ATT])
    def test_ttype_unit(self, default_chip, state):
        net = ttype_netlist(default_chip.unit4, state)
        for f in (20e9, 47e9, 60e9, 100e9):
            omega = angular(f)
            expected = solve_sparams(net, omega)
            actual = abcd_to_s(ttype_twoport(default_chip.unit4, state, omega), 50.0)
            assert _rel(actual.s21, expected.s21) < 1e-9
            assert abs(actual.s11 - expected.s11) < 1e-9

    @pytest.mark.parametrize("state", [UnitState.REF, UnitState.ATT])
    def test_simplified_unit(self, default_chip, state):
        net = simplified_netlist(default_chip.unit2, state)
        for f in (20e9, 60e9, 100e9):
            omega = angular(f)
            expected = solve_sparams(net, omega)
            actual = abcd_to_s(simplified_twoport(default_chip.unit2, state, omega), 50.0)
            assert _rel(actual.s21, expected.s21) < 1e-9
            assert abs(actual.s22 - expected.s22) < 1e-9

    @pytest.mark.parametrize("vc", [0.0, 0.6, 1.0, 1.2])
    def test_continuous_unit(self, default_chip, vc):
        net = continuous_netlist(default_chip.cont, vc)
        omega = angular(80e9)
        expected = solve_sparams(net, omega)
        actual = abcd_to_s(continuous_twoport(default_chip.cont, vc, omega), 50.0)
        assert _rel(actual.s21, expected.s21) < 1e-9

    def test_chip_without_lines_is_exact(self, default_chip):
        chip = default_chip.model_copy(
            update={
                "tl_a": default_chip.tl_a.model_copy(update={"theta_ref_deg": 0.0}),
                "tl_b": default_chip.tl_b.model_copy(update={"theta_ref_deg": 0.0}),
            }
        )
        state = AttenuatorState(bit4=UnitState.ATT, bit2=UnitState.ATT, vc=0.9, nominal_db=6.5)
        omega = angular(75e9)
        expected = solve_sparams(chip_netlist(chip, state), omega)
        assert _rel(chip_twoport(chip, state, omega).s21, expected.s21) < 1e-9

    def test_chip_with_ladder_lines(self, default_chip):
        state = AttenuatorState(bit4=UnitState.ATT, bit2=UnitState.REF, vc=0.0, nominal_db=4.0)
        for f in (20e9, 60e9):
            omega = angular(f)
            expected = solve_sparams(chip_netlist(default_chip, state), omega)
            actual = chip_twoport(default_chip, state, omega)
            assert abs(actual.s21 - expected.s21) < 1e-3
            assert abs(actual.s11 - expected.s11) < 1e-3


def _switch(rng: np.random.Generator) -> SwitchModel:
    return SwitchModel(
        r_on=rng.uniform(2.0, 20.0), c_off=rng.uniform(5e-15, 30e-15), c_par_on=rng.uniform(0.0, 10e-15)
    )


def _resistor(rng: np.random.Generator, lo: float, hi: float) -> ResistorModel:
    return ResistorModel(r=rng.uniform(lo, hi), c_par=rng.uniform(0.0, 3e-15))


class TestRandomDrawEquivalence:
    """Unit two-ports against their netlists over random element values."""

    FREQS = np.geomspace(20e9, 100e9, 50)
    DRAWS = 20

    def _assert_match(self, net, twoport) -> None:
        for f in self.FREQS:
            omega = angular(f)
            expected = solve_sparams(net, omega)
            actual = abcd_to_s(twoport(omega), 50.0)
            assert _rel(actual.s21, expected.s21) < 1e-9
            assert _rel(actual.s12, expected.s12) < 1e-9
            assert abs(actual.s11 - expected.s11) < 1e-9
            assert abs(actual.s22 - expected.s22) < 1e-9

    @pytest.mark.parametrize("state", [UnitState.REF, UnitState.ATT])
    def test_ttype_draws(self, state):
        rng = np.random.default_rng(11)
        for _ in range(self.DRAWS):
            spec = TTypeUnitSpec(
                r1=_resistor(rng, 2.0, 30.0),
                r2=_resistor(rng, 20.0, 300.0),
                c_comp=rng.uniform(0.0, 50e-15),
                series_switch=_switch(rng),
                shunt_switch=_switch(rng),
            )
            self._assert_match(ttype_netlist(spec, state), lambda w: ttype_twoport(spec, state, w))

    @pytest.mark.parametrize("state", [UnitState.REF, UnitState.ATT])
    def test_simplified_draws(self, state):
        rng = np.random.default_rng(12)
        for _ in range(self.DRAWS):
            spec = SimplifiedTUnitSpec(
                r1=_resistor(rng, 0.5, 10.0),
                r2=_resistor(rng, 50.0, 500.0),
                c_comp=rng.uniform(0.0, 50e-15),
                shunt_switch=_switch(rng),
            )
            self._assert_match(simplified_netlist(spec, state), lambda w: simplified_twoport(spec, state, w))

    def test_continuous_draws(self):
        rng = np.random.default_rng(13)
        for _ in range(self.DRAWS):
            r_min = rng.uniform(5.0, 50.0)
            fet = ContinuousFetModel(
                r_min=r_min,
                r_max=r_min + rng.uniform(500.0, 5000.0),
                vc_lo=0.0,
                vc_hi=1.2,
                shape=rng.uniform(1.0, 12.0),
            )
            spec = ContinuousUnitSpec(r2=_resistor(rng, 20.0, 300.0), fet=fet)
            for vc in (fet.vc_lo, rng.uniform(fet.vc_lo, fet.vc_hi), fet.vc_hi):
                self._assert_match(continuous_netlist(spec, vc), lambda w: continuous_twoport(spec, vc, w))
