"""
ABCD two-port algebra and S-parameter conversion.

Networks are evaluated one frequency point at a time. Every value type here
is immutable; every operation is a pure function of its arguments.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .exceptions import DegenerateNetworkError, NonFiniteError, ZeroMagnitudeError


def _require_finite(what: str, *values: complex) -> None:
    for value in values:
        if not cmath.isfinite(value):
            raise NonFiniteError(f"{what} produced a non-finite value: {value!r}")


@dataclass(frozen=True, slots=True)
class Abcd:
    """Chain matrix [[a, b], [c, d]]; b in ohms, c in siemens."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        _require_finite("ABCD matrix", self.a, self.b, self.c, self.d)

    @classmethod
    def identity(cls) -> Abcd:
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: Abcd) -> Abcd:
        """Cascade: self followed by other."""
        return Abcd(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


@dataclass(frozen=True, slots=True)
class SParams2:
    """Two-port scattering parameters referenced to a real z0."""

    s11: complex
    s21: complex
    s12: complex
    s22: complex
    z0_ohms: float = 50.0
    conditioning_warning: str | None = None

    def __post_init__(self) -> None:
        _require_finite("S-parameters", self.s11, self.s21, self.s12, self.s22)
        if not self.z0_ohms > 0:
            raise ValueError(f"z0 must be positive, got {self.z0_ohms}")


def abcd_series(z: complex) -> Abcd:
    """Series impedance z."""
    return Abcd(1.0 + 0j, complex(z), 0j, 1.0 + 0j)


def abcd_shunt(y: complex) -> Abcd:
    """Shunt admittance y to ground."""
    return Abcd(1.0 + 0j, 0j, complex(y), 1.0 + 0j)


def abcd_cascade(left: Abcd, right: Abcd, *more: Abcd) -> Abcd:
    """Matrix product left·right (·more...), in signal-flow order."""
    result = left @ right
    for m in more:
        result = result @ m
    return result


def tline_theta(theta_ref_deg: float, f_ref_hz: float, f_hz: float) -> float:
    """Electrical length in radians at f_hz of a line that is theta_ref_deg long at f_ref_hz."""
    return math.radians(theta_ref_deg) * f_hz / f_ref_hz


def abcd_tline(z_c: float, theta_rad: float) -> Abcd:
    """Ideal lossless transmission line."""
    if not z_c > 0:
        raise ValueError(f"characteristic impedance must be positive, got {z_c}")
    cos_t = math.cos(theta_rad)
    sin_t = math.sin(theta_rad)
    return Abcd(complex(cos_t), 1j * z_c * sin_t, 1j * sin_t / z_c, complex(cos_t))


def abcd_bridge(m: Abcd, y: complex) -> Abcd:
    """
    Connect a series admittance y from port 1 to port 2, in parallel with m.

    The two networks share both ports and ground, so their Y-parameters add.
    """
    if y == 0:
        return m
    if m.b == 0:
        raise DegenerateNetworkError("cannot bridge a network with b = 0 (no Y-parameters)")
    y11 = m.d / m.b + y
    y12 = -m.det / m.b - y
    y21 = -1.0 / m.b - y
    y22 = m.a / m.b + y
    if y21 == 0:
        raise DegenerateNetworkError("bridged network has y21 = 0 (no ABCD form)")
    return Abcd(
        -y22 / y21,
        -1.0 / y21,
        -(y11 * y22 - y12 * y21) / y21,
        -y11 / y21,
    )


def abcd_to_s(m: Abcd, z0: float) -> SParams2:
    """
    Convert a chain matrix to S-parameters at a real reference impedance.

    Raises:
        ValueError: If z0 is not positive
        DegenerateNetworkError: If a + b/z0 + c·z0 + d vanishes
    """
    if not z0 > 0:
        raise ValueError(f"reference impedance must be positive, got {z0}")
    bz = m.b / z0
    cz = m.c * z0
    den = m.a + bz + cz + m.d
    if den == 0:
        raise DegenerateNetworkError("ABCD to S conversion has a zero denominator")
    return SParams2(
        s11=(m.a + bz - cz - m.d) / den,
        s21=2.0 / den,
        s12=2.0 * m.det / den,
        s22=(-m.a + bz - cz + m.d) / den,
        z0_ohms=z0,
    )


def mag_db(s: complex) -> float:
    """20·log10|s|."""
    magnitude = abs(s)
    if magnitude == 0:
        raise ZeroMagnitudeError("magnitude in dB of zero is -infinity")
    return 20.0 * math.log10(magnitude)


def wrap_deg(angle_deg: float) -> float:
    """Wrap an angle to (-180, 180]."""
    wrapped = math.fmod(angle_deg + 180.0, 360.0)
    if wrapped < 0:
        wrapped += 360.0
    wrapped -= 180.0
    return 180.0 if wrapped == -180.0 else wrapped


def phase_deg(s: complex) -> float:
    """Phase of s in degrees, (-180, 180]."""
    return wrap_deg(math.degrees(cmath.phase(s)))


def angular(f_hz: float) -> float:
    """Angular frequency 2πf."""
    return 2.0 * math.pi * f_hz
