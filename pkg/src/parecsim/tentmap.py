"""Quantum tent map: exact split-operator oracle and standard-gate circuit.

One map iteration is kick followed by free evolution, in dimensionless
resonant units. On the position grid theta_m = 2*pi*m/N (N = 2**n_q) the
kick multiplies by exp(1j*kick_amp*W(theta_m)) with the piecewise-quadratic
profile

    W(theta) = (theta - pi/2)**2 / 2                 for theta in [0, pi)
             = -(theta - 3*pi/2)**2 / 2 + pi**2/4    for theta in [pi, 2*pi),

whose derivative is the tent-shaped force. The free evolution is diagonal in
the momentum basis with phase -pi*n**2/N over the symmetric window
n in {-N/2, ..., N/2-1}. The effective Planck constant is tau = 2*pi/N and
kick_amp = K/tau, so the classical limit is the area-preserving map
v' = v + K*W'(x), x' = x + v' on the torus, with a stable fixed point at
(3*pi/2, 0) and an unstable one at (pi/2, 0).

The circuit form writes both diagonals as quadratic forms in the index bits:
phase and controlled-phase gates for the free evolution (conjugated by
no-swap QFT cores, the bit reversal being absorbed into the quadratic form),
and for the kick a quadratic form in the low n_q-1 bits whose sign is
conditioned on the most-significant bit, realized with controlled- and
doubly-controlled phases; the latter expand into the fixed 5-gate
controlled-phase/CNOT template.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gateset as gs
from .statecore import StateVector, fourier_kernel

__all__ = [
    "TentMapParams",
    "kick_profile",
    "kick_phase",
    "apply_exact_map",
    "exact_map_amplitudes",
    "standard_gate_sequence",
    "build_circuit",
    "standard_gate_count_formula",
]


@dataclass(frozen=True)
class TentMapParams:
    """Map parameters: qubit count and classical chaos parameter K."""

    n_q: int
    K: float

    def __post_init__(self):
        if self.n_q < 1:
            raise ValueError(f"n_q must be >= 1, got {self.n_q}")

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def tau(self) -> float:
        """Effective Planck constant; tau*N = 2*pi exactly by resonance."""
        return 2.0 * math.pi / self.N

    @property
    def kick_amp(self) -> float:
        return self.K / self.tau


def kick_profile(theta):
    """Piecewise-quadratic kick profile W(theta), continuous on the torus."""
    th = np.mod(theta, 2.0 * np.pi)
    return np.where(
        th < np.pi,
        (th - np.pi / 2) ** 2 / 2,
        -((th - 3 * np.pi / 2) ** 2) / 2 + np.pi**2 / 4,
    )


def kick_phase(params: TentMapParams, theta):
    """Kick phase kick_amp * W(theta) in radians."""
    return params.kick_amp * kick_profile(theta)


def _free_phases(params: TentMapParams, window_offset: int = 0) -> np.ndarray:
    """Free-evolution phases -pi*n^2/N over the symmetric momentum window.

    ``window_offset`` shifts every momentum label by that amount; the default
    window is {-N/2, ..., N/2-1}. n^2 is reduced mod 2N in exact integer
    arithmetic before scaling, keeping the phase argument O(1).
    """
    n_idx = np.arange(params.N, dtype=np.int64)
    n = np.where(n_idx < params.N // 2, n_idx, n_idx - params.N) + window_offset
    return -np.pi * ((n * n) % (2 * params.N)) / params.N


def exact_map_amplitudes(
    amp: np.ndarray, params: TentMapParams, window_offset: int = 0
) -> np.ndarray:
    """One tent-map iteration on amplitudes shaped (..., N)."""
    m = np.arange(params.N)
    kick = np.exp(1j * kick_phase(params, 2.0 * np.pi * m / params.N))
    free = np.exp(1j * _free_phases(params, window_offset))
    out = fourier_kernel(amp * kick)
    return fourier_kernel(out * free, inverse=True)


def apply_exact_map(state: StateVector, params: TentMapParams) -> StateVector:
    """Apply one exact map iteration in place."""
    if state.n_q != params.n_q:
        raise ValueError(f"state has n_q={state.n_q}, params n_q={params.n_q}")
    state.amp = exact_map_amplitudes(state.amp, params)
    return state


def standard_gate_count_formula(n_q: int) -> int:
    """Reference standard-gate count (9/2)n_q^2 - (11/2)n_q + 4.

    This counts every diagonal gate of the construction including those whose
    angle is an exact multiple of 2*pi; build_circuit prunes the latter, so
    its n_standard_gates can be smaller.
    """
    return (9 * n_q * n_q - 11 * n_q + 8) // 2


def _qft_core(n_q: int) -> list:
    """No-swap QFT core G with F = B G (B = bit reversal, F the forward DFT)."""
    gates: list = []
    for i in range(n_q - 1, -1, -1):
        gates.append(gs.Hadamard(i))
        for k in range(i - 1, -1, -1):
            gates.append(gs.ControlledPhase(k, i, -math.pi / 2 ** (i - k)))
    return gates


def _inverse(core: list) -> list:
    out = []
    for g in reversed(core):
        if isinstance(g, gs.Hadamard):
            out.append(g)
        else:
            out.append(gs.ControlledPhase(g.q1, g.q2, -g.phi))
    return out


def _doubly_controlled_phase(a: int, b: int, c: int, phi: float) -> list:
    """Fixed 5-gate template: phase phi iff all three qubits are 1."""
    return [
        gs.ControlledPhase(a, c, phi / 2),
        gs.CNOT(a, b),
        gs.ControlledPhase(b, c, -phi / 2),
        gs.CNOT(a, b),
        gs.ControlledPhase(b, c, phi / 2),
    ]


def standard_gate_sequence(params: TentMapParams) -> list:
    """One map iteration as standard gates (kick, QFT, free diagonal, IQFT)."""
    n_q, N = params.n_q, params.N
    if n_q < 2:
        raise ValueError("circuit construction requires n_q >= 2")
    tau = params.tau
    kick_amp = params.kick_amp
    msb = n_q - 1

    gates: list = []

    # kick: kick_amp * [(1 - 2*b_msb) * Q(r) + b_msb * pi^2/4] with
    # Q(r) = (theta_r - pi/2)^2/2 = c2 r^2 + c1 r + c0; the constant is a
    # global phase and the b_msb single term cancels exactly (pi^2/4 = 2 c0).
    c2 = tau * tau / 2
    c1 = -math.pi * tau / 2
    alpha = {i: kick_amp * (c2 * 4**i + c1 * 2**i) for i in range(msb)}
    beta = {
        (i, j): kick_amp * 2 * c2 * 2 ** (i + j)
        for i in range(msb)
        for j in range(i + 1, msb)
    }
    for i, a in alpha.items():
        gates.append(gs.Phase(i, a))
    for (i, j), b in beta.items():
        gates.append(gs.ControlledPhase(i, j, b))
    for i, a in alpha.items():
        gates.append(gs.ControlledPhase(i, msb, -2 * a))
    for (i, j), b in beta.items():
        gates.extend(_doubly_controlled_phase(msb, i, j, -2 * b))

    # free evolution: conjugate the quadratic momentum phase by QFT cores;
    # the core leaves momentum bit i on qubit n_q-1-i, so the quadratic form
    # is written directly in bit-reversed coordinates instead of swapping.
    core = _qft_core(n_q)
    gates.extend(core)
    for i in range(n_q):
        gates.append(gs.Phase(n_q - 1 - i, -math.pi * 4**i / N))
    for i in range(n_q):
        for j in range(i + 1, n_q):
            q1, q2 = n_q - 1 - i, n_q - 1 - j
            gates.append(gs.ControlledPhase(q1, q2, -2 * math.pi * 2 ** (i + j) / N))
    gates.extend(_inverse(core))
    return gates


def build_circuit(params: TentMapParams) -> gs.Circuit:
    """Lower one map iteration to a native-gate Circuit with boundaries.

    Standard gates whose lowering is empty (diagonal angle exactly 0 mod
    2*pi) are pruned, so n_standard_gates can fall below
    standard_gate_count_formula(n_q); the product still equals the exact map
    up to a global phase.
    """
    native: list = []
    boundaries: list = []
    for g in standard_gate_sequence(params):
        seq = gs.lower_standard(g)
        if not seq:
            continue
        native.extend(seq)
        boundaries.append(len(native))
    return gs.Circuit(tuple(native), tuple(boundaries), len(native))
