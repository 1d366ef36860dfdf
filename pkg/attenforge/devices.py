"""
Small-signal models of the switch transistors, resistors and the tuned shunt FET.

An off switch at DC (or with zero off-capacitance) is an open branch,
returned as ``None`` rather than an infinite impedance.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.special import expit

from .exceptions import OutOfRangeError
from .models import ContinuousFetModel, ResistorModel, SwitchModel, SwitchState
from .netcore import Abcd, abcd_series, abcd_shunt


def parallel_rc(r: float, c: float, omega: float) -> complex:
    """Impedance of r in parallel with c."""
    if c == 0 or omega == 0:
        return complex(r)
    return r / (1.0 + 1j * omega * r * c)


def switch_branch(model: SwitchModel, state: SwitchState, omega: float) -> Optional[complex]:
    """
    Impedance of a switch transistor between its drain and source.

    Returns:
        r_on ∥ c_par_on when on, 1/(jω·c_off) when off, None for an open branch
    """
    if state is SwitchState.ON:
        return parallel_rc(model.r_on, model.c_par_on, omega)
    if omega == 0 or model.c_off == 0:
        return None
    return 1.0 / (1j * omega * model.c_off)


def admittance(z: Optional[complex]) -> complex:
    """Admittance of a branch; an open branch has zero admittance."""
    return 0j if z is None else 1.0 / z


def resistor_twoport(model: ResistorModel, omega: float) -> Abcd:
    """Symmetric π model: c_par/2 to ground on each side of r."""
    y_half = 1j * omega * model.c_par / 2.0
    return abcd_shunt(y_half) @ abcd_series(model.r) @ abcd_shunt(y_half)


# Linear share blended into the logistic; keeps r(vc) strictly decreasing
# in double precision where a steep logistic saturates.
SLOPE_FLOOR = 1e-9


def fet_resistance(model: ContinuousFetModel, vc: float) -> float:
    """
    Channel resistance of the shunt FET at control voltage vc.

    A logistic curve centred on the middle of the control range, rescaled so
    that vc_lo maps exactly to r_max and vc_hi exactly to r_min. Each half is
    evaluated from the endpoint it approaches, so neither tail cancels.

    Raises:
        OutOfRangeError: If vc lies outside [vc_lo, vc_hi]
    """
    if not model.vc_lo <= vc <= model.vc_hi:
        raise OutOfRangeError(
            f"control voltage {vc} V outside [{model.vc_lo}, {model.vc_hi}] V"
        )
    u = (vc - model.vc_lo) / (model.vc_hi - model.vc_lo)
    k = model.shape
    span = float(np.tanh(k / 4.0))
    lo = float(expit(-k / 2.0))
    x = k * (0.5 - u)
    delta_r = model.r_max - model.r_min
    if u < 0.5:
        drop = (float(expit(-x)) - lo) / span
        return model.r_max - delta_r * ((1.0 - SLOPE_FLOOR) * drop + SLOPE_FLOOR * u)
    rise = (float(expit(x)) - lo) / span
    return model.r_min + delta_r * ((1.0 - SLOPE_FLOOR) * rise + SLOPE_FLOOR * (1.0 - u))
