"""Hamiltonian universal gate set, circuits, and lowering of standard gates.

The native gates are signed Pauli-word exponentials

    S(axis, sign, dphi) = exp(-1j * sign * P * dphi),

with P one of X, Z on a single qubit or X(x)X on a qubit pair. Every gate
stores dphi as a positive magnitude with the orientation in ``sign``; this is
the bit that Pauli-frame conjugation flips.

Standard gates (Hadamard, phase, controlled-phase, CNOT) lower to short fixed
sequences of native gates:

- Hadamard(q)            -> Z(pi/4) X(pi/4) Z(pi/4)                (3 gates)
- Phase(q, phi)          -> Z(|phi|/2) with sign(phi)              (1 gate)
- ControlledPhase(.,phi) -> two-sided X<->Z basis change around one
                            XX(|phi|/4) plus two Z(|phi|/4)        (11 gates)
- CNOT(c, t)             -> one-sided basis change on the control
                            around one XX(pi/4) plus local
                            X/Z(pi/4) rotations                    (7 gates)

The X<->Z basis change is the two-gate product V = S_X(pi/4) S_Z(pi/4),
which conjugates X into Z exactly. All lowerings equal their standard gate
up to a global phase and are verified against dense matrices in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .statecore import StateVector, apply_one_qubit, apply_two_qubit

__all__ = [
    "AXIS_X",
    "AXIS_Z",
    "AXIS_XX",
    "HamiltonianGate",
    "Circuit",
    "Hadamard",
    "Phase",
    "ControlledPhase",
    "CNOT",
    "gate_matrix",
    "apply",
    "lower_standard",
    "circuit_to_text",
    "circuit_from_text",
]

AXIS_X = "X"
AXIS_Z = "Z"
AXIS_XX = "XX"

_PAULI = {
    AXIS_X: np.array([[0, 1], [1, 0]], dtype=complex),
    AXIS_Z: np.array([[1, 0], [0, -1]], dtype=complex),
}
_PAULI[AXIS_XX] = np.kron(_PAULI[AXIS_X], _PAULI[AXIS_X])


@dataclass(frozen=True)
class HamiltonianGate:
    """One native gate exp(-1j*sign*P*dphi) with P a Pauli word."""

    axis: str
    qubits: tuple
    sign: int
    dphi: float

    def __post_init__(self):
        if self.axis not in (AXIS_X, AXIS_Z, AXIS_XX):
            raise ValueError(f"unknown axis {self.axis!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        want = 2 if self.axis == AXIS_XX else 1
        if len(self.qubits) != want:
            raise ValueError(f"axis {self.axis} needs {want} qubit(s), got {self.qubits}")
        if self.axis == AXIS_XX and self.qubits[0] == self.qubits[1]:
            raise ValueError("XX gate requires two distinct qubits")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not 0.0 < self.dphi < 2.0 * math.pi:
            raise ValueError(f"dphi must lie in (0, 2*pi), got {self.dphi}")

    def flipped(self) -> "HamiltonianGate":
        return HamiltonianGate(self.axis, self.qubits, -self.sign, self.dphi)


@dataclass(frozen=True)
class Circuit:
    """Ordered native-gate program with standard-gate bookkeeping.

    ``standard_gate_boundaries[k]`` is the index one past the last native gate
    of the k-th standard gate; PAREC refresh points land on these boundaries.
    ``iteration_len`` is the number of native gates per map iteration.
    """

    gates: tuple
    standard_gate_boundaries: tuple
    iteration_len: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(
            self, "standard_gate_boundaries", tuple(self.standard_gate_boundaries)
        )
        b = self.standard_gate_boundaries
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise ValueError("standard_gate_boundaries must be strictly increasing")
        if b and b[-1] != len(self.gates):
            raise ValueError("standard_gate_boundaries must end at the gate count")

    @property
    def n_standard_gates(self) -> int:
        return len(self.standard_gate_boundaries)

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    def total_delay_scale(self) -> float:
        """Sum of dphi/pi over all native gates (total imperfection exposure)."""
        return sum(g.dphi for g in self.gates) / math.pi

    def max_qubit(self) -> int:
        return max(q for g in self.gates for q in g.qubits)


# --- standard gates -------------------------------------------------------


@dataclass(frozen=True)
class Hadamard:
    qubit: int


@dataclass(frozen=True)
class Phase:
    """diag(1, exp(1j*phi)) on one qubit."""

    qubit: int
    phi: float


@dataclass(frozen=True)
class ControlledPhase:
    """diag(1, 1, 1, exp(1j*phi)) on a qubit pair (symmetric in the qubits)."""

    q1: int
    q2: int
    phi: float


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


StandardGate = Union[Hadamard, Phase, ControlledPhase, CNOT]


def gate_matrix(g: HamiltonianGate) -> np.ndarray:
    """Dense matrix cos(dphi)*I - 1j*sign*sin(dphi)*P."""
    p = _PAULI[g.axis]
    return math.cos(g.dphi) * np.eye(p.shape[0]) - 1j * g.sign * math.sin(g.dphi) * p


def apply(circuit_or_gate, state: StateVector) -> StateVector:
    """Apply a gate, a gate iterable, or a Circuit to a state, in list order."""
    if isinstance(circuit_or_gate, HamiltonianGate):
        gates: Iterable[HamiltonianGate] = (circuit_or_gate,)
    elif isinstance(circuit_or_gate, Circuit):
        gates = circuit_or_gate.gates
    else:
        gates = circuit_or_gate
    for g in gates:
        if any(q >= state.n_q for q in g.qubits):
            raise ValueError(f"gate on qubits {g.qubits} exceeds n_q={state.n_q}")
        u = gate_matrix(g)
        if g.axis == AXIS_XX:
            apply_two_qubit(state, g.qubits[0], g.qubits[1], u)
        else:
            apply_one_qubit(state, g.qubits[0], u)
    return state


def _wrap_angle(phi: float) -> float:
    """Wrap into (-pi, pi]; multiples of 2*pi collapse to exactly 0."""
    w = math.remainder(phi, 2.0 * math.pi)
    if w == -math.pi:
        w = math.pi
    return w


def _basis_change_in(q: int) -> list:
    # V^dag applied first: X(-pi/4) then Z(-pi/4); V Z V^dag = X
    return [
        HamiltonianGate(AXIS_X, (q,), -1, math.pi / 4),
        HamiltonianGate(AXIS_Z, (q,), -1, math.pi / 4),
    ]


def _basis_change_out(q: int) -> list:
    # V applied: Z(pi/4) then X(pi/4); V X V^dag = Z
    return [
        HamiltonianGate(AXIS_Z, (q,), 1, math.pi / 4),
        HamiltonianGate(AXIS_X, (q,), 1, math.pi / 4),
    ]


def lower_standard(gate: StandardGate) -> list:
    """Native-gate sequence equal to the standard gate up to a global phase.

    Deterministic; identical inputs yield identical lists. Phase-like gates
    with angle exactly 0 (mod 2*pi) lower to the empty list.
    """
    if isinstance(gate, Hadamard):
        q = gate.qubit
        return [
            HamiltonianGate(AXIS_Z, (q,), 1, math.pi / 4),
            HamiltonianGate(AXIS_X, (q,), 1, math.pi / 4),
            HamiltonianGate(AXIS_Z, (q,), 1, math.pi / 4),
        ]

    if isinstance(gate, Phase):
        w = _wrap_angle(gate.phi)
        if w == 0.0:
            return []
        sign = 1 if w > 0 else -1
        return [HamiltonianGate(AXIS_Z, (gate.qubit,), sign, abs(w) / 2)]

    if isinstance(gate, ControlledPhase):
        w = _wrap_angle(gate.phi)
        if w == 0.0:
            return []
        sign = 1 if w > 0 else -1
        dp = abs(w) / 4
        q1, q2 = gate.q1, gate.q2
        seq = _basis_change_in(q1) + _basis_change_in(q2)
        seq.append(HamiltonianGate(AXIS_XX, (q1, q2), -sign, dp))
        seq += _basis_change_out(q1) + _basis_change_out(q2)
        seq.append(HamiltonianGate(AXIS_Z, (q1,), sign, dp))
        seq.append(HamiltonianGate(AXIS_Z, (q2,), sign, dp))
        return seq

    if isinstance(gate, CNOT):
        c, t = gate.control, gate.target
        seq = _basis_change_in(c)
        seq.append(HamiltonianGate(AXIS_XX, (c, t), -1, math.pi / 4))
        seq += _basis_change_out(c)
        seq.append(HamiltonianGate(AXIS_X, (t,), 1, math.pi / 4))
        seq.append(HamiltonianGate(AXIS_Z, (c,), 1, math.pi / 4))
        return seq

    raise TypeError(f"not a standard gate: {gate!r}")


# --- serialization --------------------------------------------------------


def circuit_to_text(circuit: Circuit) -> str:
    """Line-oriented text form: one `AXIS sign qubits dphi` line per gate.

    Header comments carry iteration_len and the standard-gate boundaries so a
    Circuit round-trips exactly; dphi uses repr for bit-exact reload.
    """
    lines = [
        f"# iteration_len = {circuit.iteration_len}",
        "# boundaries = " + ",".join(str(b) for b in circuit.standard_gate_boundaries),
    ]
    for g in circuit.gates:
        sign = "+" if g.sign > 0 else "-"
        qs = " ".join(str(q) for q in g.qubits)
        lines.append(f"{g.axis} {sign} {qs} {float(g.dphi)!r}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    gates = []
    iteration_len = None
    boundaries: list = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("iteration_len"):
                iteration_len = int(body.split("=", 1)[1])
            elif body.startswith("boundaries"):
                val = body.split("=", 1)[1].strip()
                boundaries = [int(x) for x in val.split(",")] if val else []
            continue
        parts = line.split()
        axis = parts[0]
        sign = 1 if parts[1] == "+" else -1
        nq = 2 if axis == AXIS_XX else 1
        qubits = tuple(int(x) for x in parts[2 : 2 + nq])
        dphi = float(parts[2 + nq])
        gates.append(HamiltonianGate(axis, qubits, sign, dphi))
    if iteration_len is None:
        iteration_len = len(gates)
    if not boundaries:
        boundaries = [len(gates)] if gates else []
    return Circuit(tuple(gates), tuple(boundaries), iteration_len)
