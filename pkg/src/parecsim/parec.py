"""Pauli-frame bookkeeping and randomized execution of gate programs.

The randomization protocol: draw a uniform Pauli label per qubit and apply
that layer physically, run the next stretch of the program with every native
gate conjugated by the current frame (which at most flips the gate's sign
bit), and at each refresh point apply only the transition layer
old*new (again a Pauli layer) while the classical frame record is updated.
A final layer returns to the computational basis, so with no imperfections
the output equals the plain circuit's output up to a global phase. Frame
refreshes are scheduled in units of *standard* gates of the original
decomposition and always land on standard-gate boundaries.

Pauli layers are treated as perfect and delay-free by default; an optional
switch inserts an imperfection delay at scale 1/2 (the delay of a pi/2
phase) before each layer for sensitivity studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gateset as gs
from . import staticnoise as sn
from .statecore import StateVector

__all__ = [
    "PauliFrame",
    "ParecSchedule",
    "sample_frame",
    "frame_transition",
    "conjugate_gate",
    "frame_layer_amplitudes",
    "apply_frame_layer",
    "run_parec",
    "ParecResult",
    "frame_log_to_text",
    "frame_log_from_text",
]

LABELS = "IXYZ"

# label products with the scalar phase discarded: PROD[a][b] = label of a*b
_PROD = {
    ("I", "I"): "I", ("I", "X"): "X", ("I", "Y"): "Y", ("I", "Z"): "Z",
    ("X", "I"): "X", ("X", "X"): "I", ("X", "Y"): "Z", ("X", "Z"): "Y",
    ("Y", "I"): "Y", ("Y", "X"): "Z", ("Y", "Y"): "I", ("Y", "Z"): "X",
    ("Z", "I"): "Z", ("Z", "X"): "Y", ("Z", "Y"): "X", ("Z", "Z"): "I",
}

# labels that anticommute with each single-qubit gate axis
_FLIPS_X_AXIS = frozenset("YZ")
_FLIPS_Z_AXIS = frozenset("XY")


@dataclass(frozen=True)
class PauliFrame:
    """Per-qubit Pauli labels defining the current computational basis."""

    labels: str

    def __post_init__(self):
        if not self.labels or any(c not in LABELS for c in self.labels):
            raise ValueError(f"labels must be a nonempty string over {LABELS!r}")

    @property
    def n_q(self) -> int:
        return len(self.labels)

    def is_identity(self) -> bool:
        return set(self.labels) == {"I"}


@dataclass(frozen=True)
class ParecSchedule:
    """Frame-refresh period in standard gates, plus the frame-draw seed."""

    n_gef: int
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_gef < 1:
            raise ValueError(f"n_gef must be >= 1, got {self.n_gef}")


def sample_frame(n_q: int, rng: np.random.Generator) -> PauliFrame:
    """Uniform independent label per qubit."""
    codes = rng.integers(0, 4, n_q)
    return PauliFrame("".join(LABELS[c] for c in codes))


def frame_transition(old: PauliFrame, new: PauliFrame) -> PauliFrame:
    """Per-qubit product old*new reduced to labels (scalar phase discarded)."""
    if old.n_q != new.n_q:
        raise ValueError(f"frame lengths differ: {old.n_q} vs {new.n_q}")
    return PauliFrame(
        "".join(_PROD[(a, b)] for a, b in zip(old.labels, new.labels))
    )


def gate_sign_flips(g: gs.HamiltonianGate, frame: PauliFrame) -> bool:
    """Whether conjugating by the frame flips the gate's sign bit."""
    if g.axis == gs.AXIS_X:
        return frame.labels[g.qubits[0]] in _FLIPS_X_AXIS
    if g.axis == gs.AXIS_Z:
        return frame.labels[g.qubits[0]] in _FLIPS_Z_AXIS
    a = frame.labels[g.qubits[0]] in _FLIPS_X_AXIS
    b = frame.labels[g.qubits[1]] in _FLIPS_X_AXIS
    return a != b


def conjugate_gate(g: gs.HamiltonianGate, frame: PauliFrame) -> gs.HamiltonianGate:
    """R g R with R the frame's Pauli layer: same gate, possibly flipped sign."""
    return g.flipped() if gate_sign_flips(g, frame) else g


def frame_layer_amplitudes(amp: np.ndarray, frame: PauliFrame) -> np.ndarray:
    """Apply the frame's Pauli product exactly (including its i**n_Y phase).

    Acts on the last axis: X and Y flip the qubit's bit, Y and Z contribute
    (-1)**bit, and each Y one factor of i.
    """
    n_q = frame.n_q
    n = 1 << n_q
    if amp.shape[-1] != n:
        raise ValueError(f"amplitudes have dim {amp.shape[-1]}, frame wants {n}")
    xmask = 0
    zymask = 0
    n_y = 0
    for q, lab in enumerate(frame.labels):
        if lab in "XY":
            xmask |= 1 << q
        if lab in "YZ":
            zymask |= 1 << q
        if lab == "Y":
            n_y += 1
    idx = np.arange(n)
    parity = np.bitwise_count(idx & zymask) & 1
    phase = np.where(parity, -1.0 + 0j, 1.0 + 0j) * (1j) ** n_y
    out = np.empty_like(amp)
    out[..., idx ^ xmask] = amp * phase
    return out


def apply_frame_layer(state: StateVector, frame: PauliFrame) -> StateVector:
    state.amp = frame_layer_amplitudes(state.amp, frame)
    return state


@dataclass
class ParecResult:
    state: StateVector
    frame_log: list = field(default_factory=list)  # (standard_gate_index, PauliFrame)


def run_parec(
    circuit: gs.Circuit,
    state: StateVector,
    imp: sn.StaticImperfection | None,
    schedule: ParecSchedule,
    backend: str = "trotter",
    forced_frames: list | None = None,
    pauli_layer_delay: bool = False,
) -> ParecResult:
    """Execute the circuit once under random Pauli frames, in place.

    With ``forced_frames`` the frame sequence is replayed from a list (as
    produced in a previous run's frame_log) instead of drawn from the seeded
    stream; this reproduces the perturbed state bit-identically.
    """
    rng = np.random.default_rng(schedule.rng_seed)
    prop = None
    if imp is not None:
        prop = (sn.ExactPropagator if backend == "exact" else sn.TrotterPropagator)(imp)

    forced = list(forced_frames) if forced_frames is not None else None

    def draw() -> PauliFrame:
        if forced is not None:
            return forced.pop(0)
        return sample_frame(state.n_q, rng)

    def delay(scale: float) -> None:
        if prop is not None:
            state.amp = prop.apply(state.amp, scale)

    frame = draw()
    log = [(0, frame)]
    if pauli_layer_delay:
        delay(0.5)
    apply_frame_layer(state, frame)

    boundaries = circuit.standard_gate_boundaries
    gi = 0
    for std_idx, boundary in enumerate(boundaries):
        while gi < boundary:
            g = conjugate_gate(circuit.gates[gi], frame)
            delay(g.dphi / math.pi)
            gs.apply(g, state)
            gi += 1
        done = std_idx + 1
        if done % schedule.n_gef == 0 and done < len(boundaries):
            new = draw()
            log.append((done, new))
            if pauli_layer_delay:
                delay(0.5)
            apply_frame_layer(state, frame_transition(frame, new))
            frame = new

    if pauli_layer_delay:
        delay(0.5)
    apply_frame_layer(state, frame)
    return ParecResult(state, log)


def frame_log_to_text(log) -> str:
    """One line per refresh: `t_gate F_0F_1...F_{n_q-1}`."""
    return "\n".join(f"{t} {frame.labels}" for t, frame in log) + "\n"


def frame_log_from_text(text: str) -> list:
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        t, labels = line.split()
        out.append((int(t), PauliFrame(labels)))
    return out
