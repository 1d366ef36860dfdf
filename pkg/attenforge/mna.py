"""
Modified nodal analysis of lumped RLC two-ports.

This is the independent reference solver: it never touches the ABCD algebra.
Node 0 is ground and is eliminated from the system. Each port is terminated in
z0; a Norton source of 2/z0 drives one port at a time so that, with equal real
references, S11 = V1 - 1 and S21 = V2 directly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import lu_factor, lu_solve

from .exceptions import DegenerateNetworkError, NetlistError, UnsupportedDcError
from .netcore import SParams2

logger = logging.getLogger(__name__)

# Pivot growth above this bound is reported on the result
GROWTH_WARNING_LIMIT = 1e8


class ElementKind(str, Enum):
    RESISTOR = "R"
    CAPACITOR = "C"
    INDUCTOR = "L"


class Element(BaseModel):
    """Two-terminal lumped element."""

    model_config = ConfigDict(frozen=True)

    kind: ElementKind
    value: float = Field(gt=0, allow_inf_nan=False, description="ohm, farad or henry")
    nodes: tuple[int, int]
    name: str = ""

    def admittance(self, omega: float) -> complex:
        if self.kind is ElementKind.RESISTOR:
            return complex(1.0 / self.value)
        if self.kind is ElementKind.CAPACITOR:
            return 1j * omega * self.value
        return 1.0 / (1j * omega * self.value)


class Netlist(BaseModel):
    """Elements plus the two port node pairs; ground is node 0."""

    model_config = ConfigDict(frozen=True)

    elements: tuple[Element, ...]
    node_count: int = Field(ge=2)
    port1: tuple[int, int] = (1, 0)
    port2: tuple[int, int] = (2, 0)

    @model_validator(mode="after")
    def _check_topology(self) -> Netlist:
        for label, (p, n) in (("port1", self.port1), ("port2", self.port2)):
            if not (0 <= p < self.node_count and 0 <= n < self.node_count) or p == n:
                raise NetlistError(f"{label} nodes {(p, n)} are invalid")
        for element in self.elements:
            if any(not 0 <= k < self.node_count for k in element.nodes):
                raise NetlistError(
                    f"element {element.name or element.kind.value} uses a node outside 0..{self.node_count - 1}"
                )
        floating = _floating_nodes(self)
        if floating:
            raise NetlistError(f"nodes {sorted(floating)} have no path to ground")
        return self

    @property
    def has_inductors(self) -> bool:
        return any(e.kind is ElementKind.INDUCTOR for e in self.elements)


def _floating_nodes(net: Netlist) -> set[int]:
    parent = list(range(net.node_count))

    def find(k: int) -> int:
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    edges = [e.nodes for e in net.elements] + [net.port1, net.port2]
    for a, b in edges:
        parent[find(a)] = find(b)
    ground = find(0)
    return {k for k in range(1, net.node_count) if find(k) != ground}


@dataclass(frozen=True)
class StampedSystem:
    """Reduced node-admittance matrix and port incidence vectors (ground removed)."""

    matrix: np.ndarray
    port_vectors: np.ndarray
    omega: float


def _incidence(pair: tuple[int, int], size: int) -> np.ndarray:
    vector = np.zeros(size, dtype=complex)
    p, n = pair
    if p:
        vector[p - 1] += 1.0
    if n:
        vector[n - 1] -= 1.0
    return vector


def stamp_system(net: Netlist, omega: float) -> StampedSystem:
    """
    Assemble Y for the netlist alone (no port terminations).

    Raises:
        UnsupportedDcError: If omega is 0 and the netlist has inductors
    """
    if omega < 0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    if omega == 0 and net.has_inductors:
        raise UnsupportedDcError("inductor stamps need omega > 0")
    size = net.node_count - 1
    matrix = np.zeros((size, size), dtype=complex)
    for element in net.elements:
        y = element.admittance(omega)
        a, b = element.nodes
        if a:
            matrix[a - 1, a - 1] += y
        if b:
            matrix[b - 1, b - 1] += y
        if a and b:
            matrix[a - 1, b - 1] -= y
            matrix[b - 1, a - 1] -= y
    ports = np.column_stack([_incidence(net.port1, size), _incidence(net.port2, size)])
    return StampedSystem(matrix=matrix, port_vectors=ports, omega=omega)


def solve_sparams(net: Netlist, omega: float, z0: float = 50.0) -> SParams2:
    """
    Exact S-parameters of the netlist at one angular frequency.

    Raises:
        DegenerateNetworkError: If the terminated system is singular
    """
    if not z0 > 0:
        raise ValueError(f"reference impedance must be positive, got {z0}")
    system = stamp_system(net, omega)
    ports = system.port_vectors
    matrix = system.matrix + (ports @ ports.T) / z0
    if not np.all(np.isfinite(matrix)):
        raise DegenerateNetworkError("nodal matrix contains non-finite entries")

    lu, piv = lu_factor(matrix, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots == 0):
        raise DegenerateNetworkError("nodal matrix is singular after port termination")

    warning = None
    growth = float(np.max(np.abs(np.triu(lu))) / np.max(np.abs(matrix)))
    if growth > GROWTH_WARNING_LIMIT:
        warning = f"LU pivot growth {growth:.3g} exceeds {GROWTH_WARNING_LIMIT:.0e}"
        logger.warning("Ill-conditioned nodal solve at omega=%.6g: %s", omega, warning)

    voltages = lu_solve((lu, piv), ports * (2.0 / z0), check_finite=False)
    v = ports.T @ voltages  # v[i, j]: voltage at port i when port j is driven
    if not np.all(np.isfinite(v)):
        raise DegenerateNetworkError("nodal solve produced non-finite voltages")
    return SParams2(
        s11=complex(v[0, 0] - 1.0),
        s21=complex(v[1, 0]),
        s12=complex(v[0, 1]),
        s22=complex(v[1, 1] - 1.0),
        z0_ohms=z0,
        conditioning_warning=warning,
    )


class NetlistBuilder:
    """
    Incremental netlist construction.

    ``node()`` allocates nodes from 1 upward; ground is ``GROUND``.
    Zero-valued capacitors are skipped (an absent parasitic).
    """

    GROUND = 0

    def __init__(self) -> None:
        self._elements: list[Element] = []
        self._next_node = 1

    def node(self) -> int:
        k = self._next_node
        self._next_node += 1
        return k

    def _add(self, kind: ElementKind, a: int, b: int, value: float, name: str) -> None:
        self._elements.append(Element(kind=kind, value=value, nodes=(a, b), name=name))

    def resistor(self, a: int, b: int, value: float, name: str = "") -> NetlistBuilder:
        self._add(ElementKind.RESISTOR, a, b, value, name)
        return self

    def capacitor(self, a: int, b: int, value: float, name: str = "") -> NetlistBuilder:
        if value > 0:
            self._add(ElementKind.CAPACITOR, a, b, value, name)
        return self

    def inductor(self, a: int, b: int, value: float, name: str = "") -> NetlistBuilder:
        self._add(ElementKind.INDUCTOR, a, b, value, name)
        return self

    def build(self, port1: tuple[int, int], port2: tuple[int, int]) -> Netlist:
        return Netlist(
            elements=tuple(self._elements),
            node_count=self._next_node,
            port1=port1,
            port2=port2,
        )
