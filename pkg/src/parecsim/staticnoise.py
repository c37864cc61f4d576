"""Static inter-qubit imperfections: disorder sampling and delay propagators.

One realization draws n_q detunings d_i and n_q-1 nearest-neighbour couplings
g_i uniformly from [-sqrt(3)*eps, sqrt(3)*eps] (variance exactly eps**2) and
keeps them fixed for the whole computation. Between native gates the state
evolves under

    H = sum_i d_i Z_i + sum_i g_i (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1})

for a dimensionless duration ``scale`` = dphi/pi of the *following* gate
(gates with larger accumulated phase take longer to set up).

Two interchangeable backends compute exp(-1j*H*scale):

- EXACT: one-time dense eigendecomposition, then transform-phase-transform
  per call; intended for validation at small n_q.
- TROTTER: first-order splitting, one diagonal pass for the commuting Z
  terms followed by the closed-form two-qubit exponential of each bond in
  ascending order (phases exp(-1j*g*s) on the triplet block and
  exp(+3j*g*s) on the singlet). Splitting error per call is
  O((eps*scale)**2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gateset as gs
from .statecore import StateVector, one_qubit_kernel, two_qubit_kernel

__all__ = [
    "StaticImperfection",
    "sample",
    "zeeman_phases",
    "bond_matrix",
    "dense_hamiltonian",
    "ExactPropagator",
    "TrotterPropagator",
    "apply_propagator",
    "noisy_apply",
    "dump_imperfection",
    "load_imperfection",
]

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class StaticImperfection:
    """One frozen disorder realization (dimensionless couplings per unit delay)."""

    n_q: int
    epsilon: float
    seed: int
    d: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=np.float64))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=np.float64))
        if self.d.shape != (self.n_q,):
            raise ValueError(f"d must have shape ({self.n_q},), got {self.d.shape}")
        if self.g.shape != (self.n_q - 1,):
            raise ValueError(f"g must have shape ({self.n_q - 1},), got {self.g.shape}")
        bound = SQRT3 * self.epsilon + 1e-300
        if np.any(np.abs(self.d) > bound) or np.any(np.abs(self.g) > bound):
            raise ValueError("couplings exceed the sqrt(3)*epsilon interval")


def sample(n_q: int, epsilon: float, seed: int) -> StaticImperfection:
    """Draw a realization: 2*n_q - 1 uniforms on [-sqrt(3)*eps, sqrt(3)*eps].

    The first n_q draws are the detunings, the rest the couplings; the same
    seed reproduces the realization bit-exactly.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(-SQRT3 * epsilon, SQRT3 * epsilon, 2 * n_q - 1)
    return StaticImperfection(n_q, epsilon, seed, draws[:n_q], draws[n_q:])


def zeeman_phases(imp: StaticImperfection) -> np.ndarray:
    """Diagonal of the Z part: sum_i d_i * (1 - 2*bit_i(b)) per basis index."""
    idx = np.arange(1 << imp.n_q)
    out = np.zeros(1 << imp.n_q)
    for i in range(imp.n_q):
        out += imp.d[i] * (1.0 - 2.0 * ((idx >> i) & 1))
    return out


def bond_matrix(g: float, scale: float) -> np.ndarray:
    """Closed-form exp(-1j*g*scale*(XX+YY+ZZ)) on one bond, index 2*b_hi+b_lo."""
    gs_ = g * scale
    e0 = np.exp(-1j * gs_)
    ep = np.exp(1j * gs_)
    c, s = np.cos(2 * gs_), np.sin(2 * gs_)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = e0
    m[1, 1] = m[2, 2] = ep * c
    m[1, 2] = m[2, 1] = -1j * ep * s
    return m


def dense_hamiltonian(imp: StaticImperfection) -> np.ndarray:
    """Full 2^n x 2^n imperfection Hamiltonian (real symmetric)."""
    n = 1 << imp.n_q
    i2 = np.eye(2)
    px = np.array([[0, 1], [1, 0]], dtype=float)
    py_im = np.array([[0, -1], [1, 0]], dtype=float)  # Y = 1j * py_im
    pz = np.array([[1, 0], [0, -1]], dtype=float)

    def embed(op, q):
        out = np.array([[1.0]])
        for k in range(imp.n_q - 1, -1, -1):
            out = np.kron(out, op if k == q else i2)
        return out

    h = np.zeros((n, n))
    for i in range(imp.n_q):
        h += imp.d[i] * embed(pz, i)
    for i in range(imp.n_q - 1):
        h += imp.g[i] * (
            embed(px, i) @ embed(px, i + 1)
            - embed(py_im, i) @ embed(py_im, i + 1)  # (1j)^2 = -1
            + embed(pz, i) @ embed(pz, i + 1)
        )
    return h


class ExactPropagator:
    """exp(-1j*H*scale) via a cached eigendecomposition (validation backend)."""

    def __init__(self, imp: StaticImperfection):
        self.imp = imp
        w, v = np.linalg.eigh(dense_hamiltonian(imp))
        self._w = w
        self._v = v

    def apply(self, amp: np.ndarray, scale: float) -> np.ndarray:
        coef = amp @ self._v.conj()  # (..., N) in the eigenbasis
        coef *= np.exp(-1j * self._w * scale)
        return coef @ self._v.T


class TrotterPropagator:
    """First-order split: Z diagonal, then bonds 0..n_q-2 in ascending order."""

    def __init__(self, imp: StaticImperfection):
        self.imp = imp
        self._zs = zeeman_phases(imp)

    def apply(self, amp: np.ndarray, scale: float) -> np.ndarray:
        amp = amp * np.exp(-1j * self._zs * scale)
        for i in range(self.imp.n_q - 1):
            amp = two_qubit_kernel(
                amp, self.imp.n_q, i + 1, i, bond_matrix(self.imp.g[i], scale)
            )
        return amp


_BACKENDS = {"exact": ExactPropagator, "trotter": TrotterPropagator}


def apply_propagator(
    state: StateVector, imp: StaticImperfection, scale: float, backend: str = "trotter"
) -> StateVector:
    """Multiply the state by exp(-1j*H*scale), in place."""
    if scale < 0:
        raise ValueError(f"scale must be >= 0, got {scale}")
    if state.n_q != imp.n_q:
        raise ValueError(f"state has n_q={state.n_q}, imperfection n_q={imp.n_q}")
    prop = _BACKENDS[backend](imp)
    state.amp = prop.apply(state.amp, scale)
    return state


def noisy_apply(
    circuit,
    state: StateVector,
    imp: StaticImperfection | None,
    backend: str = "trotter",
) -> StateVector:
    """Run a circuit with an imperfection delay before every native gate.

    Each gate is preceded by the propagator at scale dphi/pi. With imp None
    (or epsilon 0) this reduces to gateset.apply.
    """
    gates = circuit.gates if isinstance(circuit, gs.Circuit) else tuple(circuit)
    if imp is None:
        return gs.apply(gates, state)
    prop = _BACKENDS[backend](imp)
    for g in gates:
        if any(q >= state.n_q for q in g.qubits):
            raise ValueError(f"gate on qubits {g.qubits} exceeds n_q={state.n_q}")
        state.amp = prop.apply(state.amp, g.dphi / math.pi)
        u = gs.gate_matrix(g)
        if g.axis == gs.AXIS_XX:
            state.amp = two_qubit_kernel(state.amp, state.n_q, g.qubits[0], g.qubits[1], u)
        else:
            state.amp = one_qubit_kernel(state.amp, state.n_q, g.qubits[0], u)
    return state


def dump_imperfection(imp: StaticImperfection) -> str:
    """Text form for exact replay: header plus one `d i value` / `g i value` per line."""
    lines = [
        f"# epsilon = {float(imp.epsilon)!r}",
        f"# seed = {imp.seed}",
        f"# n_q = {imp.n_q}",
    ]
    for i, v in enumerate(imp.d):
        lines.append(f"d {i} {float(v)!r}")
    for i, v in enumerate(imp.g):
        lines.append(f"g {i} {float(v)!r}")
    return "\n".join(lines) + "\n"


def load_imperfection(text: str) -> StaticImperfection:
    epsilon = 0.0
    seed = 0
    n_q = None
    d_vals = {}
    g_vals = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            key = key.strip()
            if key == "epsilon":
                epsilon = float(val)
            elif key == "seed":
                seed = int(val)
            elif key == "n_q":
                n_q = int(val)
            continue
        kind, idx, val = line.split()
        (d_vals if kind == "d" else g_vals)[int(idx)] = float(val)
    if n_q is None:
        n_q = len(d_vals)
    d = np.array([d_vals[i] for i in range(n_q)])
    g = np.array([g_vals[i] for i in range(n_q - 1)])
    return StaticImperfection(n_q, epsilon, seed, d, g)
