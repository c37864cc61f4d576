"""Dense complex state vectors and the low-level gate-application kernels.

Conventions used throughout the package:

- Basis index b of an ``n_q``-qubit state runs over ``[0, 2**n_q)``; qubit i
  holds bit i of b, so qubit 0 is the least-significant bit.
- Two-qubit matrices are indexed by ``2*bit(q1) + bit(q2)``, i.e. a product
  operator ``A`` on q1 and ``B`` on q2 is ``np.kron(A, B)``.
- The forward Fourier transform maps the position grid to the momentum grid
  with kernel ``exp(-2j*pi*n*m/N)/sqrt(N)`` (unitary normalization); the
  inverse uses the opposite sign.

All kernels accept amplitude arrays of shape ``(..., N)`` and act along the
last axis, so a batch of state vectors can be processed in one call. The
public operations below work on a single :class:`StateVector` in place; a
state belongs to one worker at a time, while distinct states can be
processed in parallel freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StateVector",
    "basis_state",
    "random_state",
    "fidelity",
    "apply_one_qubit",
    "apply_two_qubit",
    "apply_diagonal_phase",
    "fourier_transform",
    "assert_unitary",
]

UNITARITY_TOL = 1e-12


@dataclass
class StateVector:
    """N = 2**n_q complex amplitudes in the position basis."""

    n_q: int
    amp: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n_q < 1:
            raise ValueError(f"n_q must be >= 1, got {self.n_q}")
        n = 1 << self.n_q
        if self.amp is None:
            self.amp = np.zeros(n, dtype=np.complex128)
            self.amp[0] = 1.0
        else:
            self.amp = np.asarray(self.amp, dtype=np.complex128)
            if self.amp.shape != (n,):
                raise ValueError(
                    f"amplitude array has shape {self.amp.shape}, expected ({n},)"
                )

    @property
    def dim(self) -> int:
        return 1 << self.n_q

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def copy(self) -> "StateVector":
        return StateVector(self.n_q, self.amp.copy())


def basis_state(n_q: int, index: int) -> StateVector:
    """Computational basis state |index> on n_q qubits."""
    n = 1 << n_q
    if not 0 <= index < n:
        raise ValueError(f"basis index {index} out of range [0, {n})")
    state = StateVector(n_q)
    state.amp[0] = 0.0
    state.amp[index] = 1.0
    return state


def random_state(n_q: int, rng: np.random.Generator) -> StateVector:
    """Haar-like random state (normalized complex Gaussian vector)."""
    n = 1 << n_q
    amp = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector(n_q, amp / np.linalg.norm(amp))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, clipped into [0, 1] against roundoff."""
    if a.n_q != b.n_q:
        raise ValueError(f"qubit counts differ: {a.n_q} vs {b.n_q}")
    f = abs(np.vdot(a.amp, b.amp)) ** 2
    return float(min(max(f, 0.0), 1.0))


def assert_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> None:
    u = np.asarray(u)
    d = u.shape[0]
    dev = np.max(np.abs(u @ u.conj().T - np.eye(d)))
    if dev > tol:
        raise ValueError(f"matrix is not unitary within {tol:g} (deviation {dev:.3e})")


# ---------------------------------------------------------------------------
# array-level kernels (batch-capable, act on the last axis)
# ---------------------------------------------------------------------------

def one_qubit_kernel(amp: np.ndarray, n_q: int, qubit: int, u: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix on one qubit of amplitudes shaped (..., N)."""
    n = 1 << n_q
    lead = amp.shape[:-1]
    outer = n >> (qubit + 1)
    inner = 1 << qubit
    v = amp.reshape(lead + (outer, 2, inner))
    v = np.einsum("ij,...jb->...ib", u, v)
    return v.reshape(lead + (n,))


def two_qubit_kernel(
    amp: np.ndarray, n_q: int, q1: int, q2: int, u: np.ndarray
) -> np.ndarray:
    """Apply a 4x4 matrix on the ordered pair (q1, q2), rows indexed 2*b(q1)+b(q2)."""
    n = 1 << n_q
    hi, lo = (q1, q2) if q1 > q2 else (q2, q1)
    if q1 < q2:
        # reorder the matrix so its pair index is (b_hi, b_lo)
        perm = [0, 2, 1, 3]
        u = u[np.ix_(perm, perm)]
    lead = amp.shape[:-1]
    outer = n >> (hi + 1)
    mid = 1 << (hi - lo - 1)
    inner = 1 << lo
    v = amp.reshape(lead + (outer, 2, mid, 2, inner))
    v = np.einsum("ijkl,...akblc->...aibjc", u.reshape(2, 2, 2, 2), v)
    return v.reshape(lead + (n,))


def diagonal_kernel(amp: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Multiply amplitudes by exp(1j * phases) along the last axis."""
    return amp * np.exp(1j * phases)


def fourier_kernel(amp: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unitary DFT along the last axis; forward kernel exp(-2j*pi*n*m/N)/sqrt(N)."""
    if inverse:
        return np.fft.ifft(amp, axis=-1, norm="ortho")
    return np.fft.fft(amp, axis=-1, norm="ortho")


# ---------------------------------------------------------------------------
# public single-state operations
# ---------------------------------------------------------------------------

def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n_q:
        raise ValueError(f"qubit {qubit} out of range for n_q={state.n_q}")


def apply_one_qubit(state: StateVector, qubit: int, u: np.ndarray) -> StateVector:
    """Apply a unitary 2x2 matrix to one qubit, in place."""
    _check_qubit(state, qubit)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    assert_unitary(u)
    state.amp = one_qubit_kernel(state.amp, state.n_q, qubit, u)
    return state


def apply_two_qubit(
    state: StateVector, q1: int, q2: int, u: np.ndarray
) -> StateVector:
    """Apply a unitary 4x4 matrix to the ordered qubit pair (q1, q2), in place."""
    if q1 == q2:
        raise ValueError(f"q1 and q2 must differ, both are {q1}")
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {u.shape}")
    assert_unitary(u)
    state.amp = two_qubit_kernel(state.amp, state.n_q, q1, q2, u)
    return state


def apply_diagonal_phase(state: StateVector, phase) -> StateVector:
    """Multiply amplitude[b] by exp(1j*phase(b)) for every basis index b, in place.

    ``phase`` may be a callable evaluated on the index array, or an array of
    length N with the phase in radians per index.
    """
    n = state.dim
    if callable(phase):
        idx = np.arange(n)
        try:
            ph = np.asarray(phase(idx), dtype=np.float64)
            if ph.shape != (n,):
                raise TypeError
        except (TypeError, ValueError):  # non-vectorized callable
            ph = np.array([float(phase(b)) for b in range(n)])
    else:
        ph = np.asarray(phase, dtype=np.float64)
        if ph.shape != (n,):
            raise ValueError(f"phase array has shape {ph.shape}, expected ({n},)")
    state.amp = diagonal_kernel(state.amp, ph)
    return state


def fourier_transform(state: StateVector, inverse: bool = False) -> StateVector:
    """Unitary discrete Fourier transform of the amplitudes, in place."""
    state.amp = fourier_kernel(state.amp, inverse=inverse)
    return state
