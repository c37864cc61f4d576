"""Compiled execution engine for noisy (and frame-randomized) circuit runs.

The reference implementations in staticnoise/parec dispatch one numpy call
per kernel application, which dominates runtime for production traces
(thousands of native gates per iteration, thousands of iterations, several
disorder realizations). This module compiles a circuit once into flat arrays
and runs whole segments of [propagator, gate] steps inside a single numba
kernel, batched over disorder realizations ("lanes"). Lanes are fully
independent, so the parallel loop is bitwise deterministic for any thread
count.

Per-gate semantics are identical to staticnoise.noisy_apply with the TROTTER
backend (Z diagonal, then bonds in ascending order, then the gate) and to
parec.run_parec for frame handling; the equivalence is pinned by tests.
The constant scalar factor exp(-1j*g_b*s) of every bond exponential is
folded into the diagonal pass, so the bond update only touches the
odd-parity pair block.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from . import gateset as gs
from . import parec as pc
from . import staticnoise as sn
from . import tentmap as tm

__all__ = ["CompiledCircuit", "BatchRunner", "trace_batch"]

KIND_X, KIND_Z, KIND_XX = 0, 1, 2
_KIND_BY_AXIS = {gs.AXIS_X: KIND_X, gs.AXIS_Z: KIND_Z, gs.AXIS_XX: KIND_XX}

_LABEL_CODE = {c: i for i, c in enumerate(pc.LABELS)}  # I X Y Z -> 0..3
_FLIPS_X = np.array([0, 0, 1, 1], dtype=np.uint8)  # labels anticommuting with X
_FLIPS_Z = np.array([0, 1, 1, 0], dtype=np.uint8)  # labels anticommuting with Z


class CompiledCircuit:
    """Flat-array form of a Circuit plus its unique delay scales."""

    def __init__(self, circuit: gs.Circuit, n_q: int):
        if circuit.n_gates and circuit.max_qubit() >= n_q:
            raise ValueError("circuit uses qubits beyond n_q")
        self.circuit = circuit
        self.n_q = n_q
        g = circuit.gates
        self.kind = np.array([_KIND_BY_AXIS[x.axis] for x in g], dtype=np.int8)
        self.q1 = np.array([x.qubits[0] for x in g], dtype=np.int32)
        self.q2 = np.array(
            [x.qubits[1] if x.axis == gs.AXIS_XX else -1 for x in g], dtype=np.int32
        )
        self.sign = np.array([x.sign for x in g], dtype=np.int8)
        self.dphi = np.array([x.dphi for x in g], dtype=np.float64)
        self.cosd = np.cos(self.dphi)
        self.sind = np.sin(self.dphi)
        scales = self.dphi / math.pi
        self.scales, self.scale_id = np.unique(scales, return_inverse=True)
        self.scale_id = self.scale_id.astype(np.int32)
        self.boundaries = np.array(circuit.standard_gate_boundaries, dtype=np.int64)

    def gate_range_for_standard(self, std_lo: int, std_hi: int) -> tuple:
        """Native-gate index range covering standard gates [std_lo, std_hi)."""
        lo = 0 if std_lo == 0 else int(self.boundaries[std_lo - 1])
        hi = int(self.boundaries[std_hi - 1]) if std_hi > 0 else 0
        return lo, hi


@njit(cache=True, parallel=True)
def _run_segment(
    amp,  # (S, N) complex128, modified in place
    g_lo,
    g_hi,
    kind,
    q1,
    q2,
    cosd,
    sind,
    scale_id,
    signs,  # (G, S) int8: effective sign per gate per lane
    has_noise,
    zdiag,  # (nscales, S, N) complex128
    bond_a,  # (nscales, S, NB) complex128: exp(2j*g*s)*cos(2*g*s)
    bond_b,  # (nscales, S, NB) complex128: -1j*exp(2j*g*s)*sin(2*g*s)
):
    S, N = amp.shape
    NB = bond_a.shape[2]
    for lane in prange(S):
        a = amp[lane]
        for g in range(g_lo, g_hi):
            if has_noise:
                sid = scale_id[g]
                zd = zdiag[sid, lane]
                for i in range(N):
                    a[i] = a[i] * zd[i]
                for b in range(NB):
                    ua = bond_a[sid, lane, b]
                    ub = bond_b[sid, lane, b]
                    sl = 1 << b
                    sh = sl << 1
                    for base in range(0, N, sh << 1):
                        for off in range(sl):
                            i01 = base + off + sl
                            i10 = base + off + sh
                            x01 = a[i01]
                            x10 = a[i10]
                            a[i01] = ua * x01 + ub * x10
                            a[i10] = ub * x01 + ua * x10
            k = kind[g]
            sg = signs[g, lane]
            c = cosd[g]
            ms = -1j * sg * sind[g]
            if k == 1:  # Z rotation: diagonal
                p0 = c + ms  # exp(-1j*sign*dphi) on bit 0
                p1 = c - ms
                step = 1 << q1[g]
                for base in range(0, N, step << 1):
                    for off in range(step):
                        a[base + off] = a[base + off] * p0
                        a[base + off + step] = a[base + off + step] * p1
            elif k == 0:  # X rotation: mix bit pairs
                step = 1 << q1[g]
                for base in range(0, N, step << 1):
                    for off in range(step):
                        i0 = base + off
                        i1 = i0 + step
                        x0 = a[i0]
                        x1 = a[i1]
                        a[i0] = c * x0 + ms * x1
                        a[i1] = ms * x0 + c * x1
            else:  # XX rotation: mix across the two-bit flip mask
                mask = (1 << q1[g]) | (1 << q2[g])
                for i in range(N):
                    j = i ^ mask
                    if j > i:
                        xi = a[i]
                        xj = a[j]
                        a[i] = c * xi + ms * xj
                        a[j] = ms * xi + c * xj


class BatchRunner:
    """Evolve a batch of perturbed lanes through repeated circuit iterations.

    Each lane owns one disorder realization and, in parec mode, one frame
    stream. Frame refreshes are synchronized across lanes (same n_gef), so a
    segment between refresh points is one compiled kernel call for the whole
    batch.
    """

    def __init__(
        self,
        compiled: CompiledCircuit,
        amp0: np.ndarray,
        imps=None,
        n_gef: int | None = None,
        frame_seeds=None,
        pauli_layer_delay: bool = False,
    ):
        cc = compiled
        self.cc = cc
        n = 1 << cc.n_q
        amp0 = np.asarray(amp0, dtype=np.complex128)
        if amp0.ndim == 1:
            amp0 = amp0[None, :]
        self.amp = amp0.copy()
        self.S = self.amp.shape[0]
        if self.amp.shape[1] != n:
            raise ValueError(f"amplitudes have dim {self.amp.shape[1]}, expected {n}")

        self.imps = list(imps) if imps is not None else None
        if self.imps is not None and len(self.imps) != self.S:
            raise ValueError("need one imperfection realization per lane")
        self.has_noise = self.imps is not None
        self._build_noise_tables()

        self.parec = n_gef is not None
        self.n_gef = n_gef
        self.pauli_layer_delay = pauli_layer_delay
        self.std_done = 0
        self.frame_logs = [[] for _ in range(self.S)]
        if self.parec:
            if frame_seeds is None:
                frame_seeds = list(range(self.S))
            self._frame_rngs = [np.random.default_rng(s) for s in frame_seeds]
            self._labels = np.zeros((self.S, cc.n_q), dtype=np.uint8)
            self._draw_frames()
            self._apply_frame_layers(self._labels)
        self._signs_cache = None

    # -- noise tables --------------------------------------------------

    def _build_noise_tables(self):
        cc = self.cc
        n = 1 << cc.n_q
        nsc = len(cc.scales)
        if not self.has_noise:
            # minimal placeholder arrays keep the kernel signature uniform
            self.zdiag = np.zeros((1, self.S, n), dtype=np.complex128)
            self.bond_a = np.zeros((1, self.S, 1), dtype=np.complex128)
            self.bond_b = np.zeros((1, self.S, 1), dtype=np.complex128)
            return
        zs = np.stack([sn.zeeman_phases(imp) for imp in self.imps])  # (S, N)
        gsum = np.array([imp.g.sum() for imp in self.imps])  # (S,)
        gmat = np.stack([imp.g for imp in self.imps])  # (S, NB)
        sc = cc.scales[:, None]
        self.zdiag = np.exp(
            -1j * sc[:, None] * (zs[None, :, :] + gsum[None, :, None])
        ).astype(np.complex128)
        two_gs = 2.0 * sc[:, None] * gmat[None, :, :]  # (nscales, S, NB)
        ep = np.exp(1j * two_gs)  # exp(2j*g*scale)
        self.bond_a = (ep * np.cos(two_gs)).astype(np.complex128)
        self.bond_b = (-1j * ep * np.sin(two_gs)).astype(np.complex128)

    # -- frame handling --------------------------------------------------

    def _draw_frames(self):
        for lane in range(self.S):
            codes = self._frame_rngs[lane].integers(0, 4, self.cc.n_q)
            self._labels[lane] = codes
            self.frame_logs[lane].append(
                (self.std_done, pc.PauliFrame("".join(pc.LABELS[c] for c in codes)))
            )

    def _apply_frame_layers(self, label_mat):
        if self.has_noise and self.pauli_layer_delay:
            self._propagate_all(0.5)
        for lane in range(self.S):
            frame = pc.PauliFrame("".join(pc.LABELS[c] for c in label_mat[lane]))
            self.amp[lane] = pc.frame_layer_amplitudes(self.amp[lane], frame)

    def _propagate_all(self, scale):
        for lane in range(self.S):
            prop = sn.TrotterPropagator(self.imps[lane])
            self.amp[lane] = prop.apply(self.amp[lane], scale)

    def _gate_signs(self, g_lo, g_hi):
        """Effective per-lane signs for gates [g_lo, g_hi) under current frames."""
        cc = self.cc
        base = cc.sign[g_lo:g_hi]
        if not self.parec:
            return np.broadcast_to(base[:, None], (g_hi - g_lo, self.S)).astype(np.int8)
        fx = _FLIPS_X[self._labels]  # (S, n_q)
        fz = _FLIPS_Z[self._labels]
        k = cc.kind[g_lo:g_hi]
        q1 = cc.q1[g_lo:g_hi]
        q2 = cc.q2[g_lo:g_hi]
        flip = np.where(
            k[None, :] == KIND_Z,
            fz[:, q1],
            np.where(
                k[None, :] == KIND_X,
                fx[:, q1],
                fx[:, q1] ^ fx[:, np.where(q2 >= 0, q2, 0)],
            ),
        )  # (S, G)
        return (base[None, :] * (1 - 2 * flip.astype(np.int8))).T.copy()

    # -- execution --------------------------------------------------------

    def _run_gates(self, g_lo, g_hi):
        if g_hi <= g_lo:
            return
        cc = self.cc
        signs = np.ascontiguousarray(self._gate_signs(g_lo, g_hi))
        # kernel indexes signs by absolute gate index
        full = np.zeros((cc.kind.size, self.S), dtype=np.int8)
        full[g_lo:g_hi] = signs
        _run_segment(
            self.amp,
            g_lo,
            g_hi,
            cc.kind,
            cc.q1,
            cc.q2,
            cc.cosd,
            cc.sind,
            cc.scale_id,
            full,
            self.has_noise,
            self.zdiag,
            self.bond_a,
            self.bond_b,
        )

    def advance_standard_gates(self, count: int):
        """Run the next `count` standard gates (wrapping over iterations)."""
        cc = self.cc
        n_std = cc.circuit.n_standard_gates
        remaining = count
        while remaining > 0:
            pos = self.std_done % n_std
            if self.parec:
                until_refresh = self.n_gef - (self.std_done % self.n_gef)
            else:
                until_refresh = remaining
            chunk = min(remaining, until_refresh, n_std - pos)
            g_lo, g_hi = cc.gate_range_for_standard(pos, pos + chunk)
            self._run_gates(g_lo, g_hi)
            self.std_done += chunk
            remaining -= chunk
            if self.parec and self.std_done % self.n_gef == 0:
                old = self._labels.copy()
                self._draw_frames()
                trans = _label_products(old, self._labels)
                self._apply_frame_layers(trans)

    def advance_iterations(self, iters: int = 1):
        self.advance_standard_gates(iters * self.cc.circuit.n_standard_gates)

    def unframed_amplitudes(self) -> np.ndarray:
        """Current lanes mapped back to the computational basis (peek)."""
        if not self.parec:
            return self.amp.copy()
        out = np.empty_like(self.amp)
        for lane in range(self.S):
            frame = pc.PauliFrame(
                "".join(pc.LABELS[c] for c in self._labels[lane])
            )
            out[lane] = pc.frame_layer_amplitudes(self.amp[lane], frame)
        return out

    def fidelities(self, ideal_amp: np.ndarray) -> np.ndarray:
        """|<ideal|lane>|^2 per lane, frames peeled off."""
        un = self.unframed_amplitudes()
        ov = un @ ideal_amp.conj()
        return np.clip(np.abs(ov) ** 2, 0.0, 1.0)

    def finalize(self):
        """Apply the closing frame layers (ends the randomized execution)."""
        if self.parec:
            self._apply_frame_layers(self._labels)
            self.parec = False
        return self.amp


_CODE_PROD = np.zeros((4, 4), dtype=np.uint8)
for _a in range(4):
    for _b in range(4):
        _CODE_PROD[_a, _b] = _LABEL_CODE[
            pc._PROD[(pc.LABELS[_a], pc.LABELS[_b])]
        ]


def _label_products(old: np.ndarray, new: np.ndarray) -> np.ndarray:
    return _CODE_PROD[old, new]


def trace_batch(
    params: tm.TentMapParams,
    circuit: gs.Circuit,
    init_amp: np.ndarray,
    imps,
    n_gef: int | None,
    frame_seeds,
    t_max: int,
    sample_every: int,
    pauli_layer_delay: bool = False,
):
    """Fidelity-vs-iteration traces for a batch of disorder lanes.

    The ideal reference evolves by the exact split-operator map; each lane
    evolves through the compiled circuit with its own static imperfections
    (and frame stream when n_gef is set). Returns (times, fids (S, n_t)).
    """
    cc = CompiledCircuit(circuit, params.n_q)
    lanes = len(imps) if imps is not None else 1
    amp0 = np.broadcast_to(init_amp, (lanes, init_amp.size))
    runner = BatchRunner(
        cc, amp0, imps, n_gef=n_gef, frame_seeds=frame_seeds,
        pauli_layer_delay=pauli_layer_delay,
    )
    ideal = init_amp.copy()
    times = [0]
    fids = [runner.fidelities(ideal)]
    for t in range(1, t_max + 1):
        runner.advance_iterations(1)
        ideal = tm.exact_map_amplitudes(ideal, params)
        if t % sample_every == 0 or t == t_max:
            times.append(t)
            fids.append(runner.fidelities(ideal))
    return np.array(times), np.stack(fids, axis=1), runner
