"""Pauli-frame algebra, conjugation rules, and randomized-run invariance.

The conjugation rule is checked exhaustively against dense R P R products;
ideal invariance (randomized run == plain run up to global phase) is the
protocol's defining identity.
"""

import numpy as np
import pytest

from parecsim import gateset as gs
from parecsim import parec as pc
from parecsim import statecore as sc
from parecsim import staticnoise as sn
from parecsim import tentmap as tm
from conftest import PAULI_BY_LABEL, kron_chain, max_dev_up_to_phase, random_vec


class ConstRng:
    """Stub generator: integers() always returns zeros."""

    def integers(self, lo, hi, size=None):
        return np.zeros(size, dtype=np.int64) if size is not None else 0


def test_sample_frame_forced_zero_rng_gives_identity():
    f = pc.sample_frame(4, ConstRng())
    assert f.labels == "IIII"
    assert f.is_identity()


def test_sample_frame_uniform():
    rng = np.random.default_rng(11)
    counts = {c: 0 for c in "IXYZ"}
    n = 10**5
    for _ in range(n // 100):
        f = pc.sample_frame(100, rng)
        for c in f.labels:
            counts[c] += 1
    for c in "IXYZ":
        assert abs(counts[c] / n - 0.25) < 0.01


def test_sample_frame_deterministic():
    a = pc.sample_frame(8, np.random.default_rng(5))
    b = pc.sample_frame(8, np.random.default_rng(5))
    assert a == b


def test_frame_transition_table():
    assert pc.frame_transition(pc.PauliFrame("XYZI"), pc.PauliFrame("XYZI")).labels == "IIII"
    assert pc.frame_transition(pc.PauliFrame("X"), pc.PauliFrame("Z")).labels == "Y"
    assert pc.frame_transition(pc.PauliFrame("IY"), pc.PauliFrame("XI")).labels == "XY"
    with pytest.raises(ValueError, match="lengths differ"):
        pc.frame_transition(pc.PauliFrame("X"), pc.PauliFrame("XY"))


def test_frame_transition_matches_dense_product_up_to_phase():
    rng = np.random.default_rng(12)
    for _ in range(20):
        a = pc.sample_frame(3, rng)
        b = pc.sample_frame(3, rng)
        t = pc.frame_transition(a, b)
        dense_a = kron_chain([PAULI_BY_LABEL[c] for c in reversed(a.labels)])
        dense_b = kron_chain([PAULI_BY_LABEL[c] for c in reversed(b.labels)])
        dense_t = kron_chain([PAULI_BY_LABEL[c] for c in reversed(t.labels)])
        assert max_dev_up_to_phase(dense_a @ dense_b, dense_t) < 1e-14


def test_conjugation_rule_single_qubit_exhaustive():
    # R S R must equal the predicted gate exactly up to global phase,
    # for every axis and every frame label
    for axis in ("X", "Z"):
        for lab in "IXYZ":
            g = gs.HamiltonianGate(axis, (0,), 1, 0.7)
            out = pc.conjugate_gate(g, pc.PauliFrame(lab))
            r = PAULI_BY_LABEL[lab]
            conj = r @ gs.gate_matrix(g) @ r
            assert max_dev_up_to_phase(conj, gs.gate_matrix(out)) < 1e-14
            assert out.dphi == g.dphi and out.axis == g.axis and out.qubits == g.qubits


def test_conjugation_rule_spec_cases():
    g = gs.HamiltonianGate("X", (0,), 1, 0.9)
    assert pc.conjugate_gate(g, pc.PauliFrame("Z")).sign == -1
    assert pc.conjugate_gate(g, pc.PauliFrame("Y")).sign == -1
    assert pc.conjugate_gate(g, pc.PauliFrame("X")).sign == 1
    assert pc.conjugate_gate(g, pc.PauliFrame("I")).sign == 1

    gxx = gs.HamiltonianGate("XX", (0, 1), 1, 0.9)
    assert pc.conjugate_gate(gxx, pc.PauliFrame("ZZ")).sign == 1
    assert pc.conjugate_gate(gxx, pc.PauliFrame("YI")).sign == -1


def test_conjugation_rule_xx_exhaustive():
    # all 16 frame label pairs against the dense 4x4 conjugation
    g = gs.HamiltonianGate("XX", (1, 0), 1, 1.1)
    for l1 in "IXYZ":
        for l0 in "IXYZ":
            frame = pc.PauliFrame(l0 + l1)  # label index = qubit index
            out = pc.conjugate_gate(g, frame)
            r = np.kron(PAULI_BY_LABEL[frame.labels[1]], PAULI_BY_LABEL[frame.labels[0]])
            conj = r @ gs.gate_matrix(g) @ r
            assert max_dev_up_to_phase(conj, gs.gate_matrix(out)) < 1e-14


def test_frame_layer_matches_dense_pauli_product():
    rng = np.random.default_rng(13)
    for _ in range(10):
        frame = pc.sample_frame(3, rng)
        dense = kron_chain([PAULI_BY_LABEL[c] for c in reversed(frame.labels)])
        amp = random_vec(3, rng)
        out = pc.frame_layer_amplitudes(amp, frame)
        np.testing.assert_allclose(out, dense @ amp, atol=1e-14)


def test_frame_layer_is_involution_up_to_phase():
    rng = np.random.default_rng(14)
    frame = pc.sample_frame(4, rng)
    amp = random_vec(4, rng)
    twice = pc.frame_layer_amplitudes(pc.frame_layer_amplitudes(amp, frame), frame)
    assert max_dev_up_to_phase(twice, amp) < 1e-14


def _small_circuit(n_q=3):
    return tm.build_circuit(tm.TentMapParams(n_q, 1.7))


def test_ideal_invariance_many_schedules():
    # the defining identity: without imperfections the randomized run equals
    # the plain run with fidelity 1, for any schedule and seed
    circuit = _small_circuit(3)
    rng = np.random.default_rng(15)
    amp = random_vec(3, rng)
    plain = sc.StateVector(3, amp.copy())
    gs.apply(circuit, plain)
    for trial in range(100):
        n_gef = int(rng.integers(1, circuit.n_standard_gates + 10))
        sched = pc.ParecSchedule(n_gef, rng_seed=trial)
        s = sc.StateVector(3, amp.copy())
        pc.run_parec(circuit, s, None, sched)
        assert 1.0 - sc.fidelity(plain, s) < 1e-10


def test_degenerate_schedule_two_layers_only():
    circuit = _small_circuit(3)
    sched = pc.ParecSchedule(circuit.n_standard_gates + 100, rng_seed=3)
    s = sc.basis_state(3, 0)
    res = pc.run_parec(circuit, s, None, sched)
    assert len(res.frame_log) == 1  # initial frame only; final layer reuses it


def test_forced_identity_frames_match_noisy_apply():
    circuit = _small_circuit(3)
    imp = sn.sample(3, 1e-4, 77)
    rng = np.random.default_rng(16)
    amp = random_vec(3, rng)
    frames = [pc.PauliFrame("III")] * 100
    s = sc.StateVector(3, amp.copy())
    pc.run_parec(circuit, s, imp, pc.ParecSchedule(5, 1), forced_frames=frames)
    ref = sc.StateVector(3, amp.copy())
    sn.noisy_apply(circuit, ref, imp)
    np.testing.assert_array_equal(s.amp, ref.amp)


def test_frame_log_replay_bit_identical():
    circuit = _small_circuit(3)
    imp = sn.sample(3, 1e-4, 88)
    rng = np.random.default_rng(17)
    amp = random_vec(3, rng)
    s1 = sc.StateVector(3, amp.copy())
    res = pc.run_parec(circuit, s1, imp, pc.ParecSchedule(7, rng_seed=123))
    frames = [f for _, f in res.frame_log]
    s2 = sc.StateVector(3, amp.copy())
    res2 = pc.run_parec(
        circuit, s2, imp, pc.ParecSchedule(7, rng_seed=999), forced_frames=frames
    )
    np.testing.assert_array_equal(s1.amp, s2.amp)
    assert res2.frame_log == res.frame_log


def test_refresh_cadence_counts_standard_gates():
    circuit = _small_circuit(3)
    n_std = circuit.n_standard_gates
    res = pc.run_parec(
        sc_state := sc.basis_state(3, 0) and circuit,
        sc.basis_state(3, 0),
        None,
        pc.ParecSchedule(5, rng_seed=4),
    )
    refresh_points = [t for t, _ in res.frame_log]
    assert refresh_points[0] == 0
    assert all(t % 5 == 0 for t in refresh_points[1:])
    assert all(t < n_std for t in refresh_points)


def test_noisy_parec_differs_from_plain_noisy():
    # with imperfections on, frame randomization changes the trajectory
    circuit = _small_circuit(3)
    imp = sn.sample(3, 1e-3, 5)
    rng = np.random.default_rng(18)
    amp = random_vec(3, rng)
    a = sc.StateVector(3, amp.copy())
    pc.run_parec(circuit, a, imp, pc.ParecSchedule(5, rng_seed=42))
    b = sc.StateVector(3, amp.copy())
    sn.noisy_apply(circuit, b, imp)
    assert max_dev_up_to_phase(a.amp, b.amp) > 1e-8


def test_pauli_layer_delay_switch():
    circuit = _small_circuit(3)
    imp = sn.sample(3, 1e-3, 6)
    rng = np.random.default_rng(19)
    amp = random_vec(3, rng)
    frames = [pc.PauliFrame("XYZ")] * 50
    a = sc.StateVector(3, amp.copy())
    pc.run_parec(circuit, a, imp, pc.ParecSchedule(5, 1), forced_frames=list(frames))
    b = sc.StateVector(3, amp.copy())
    pc.run_parec(
        circuit, b, imp, pc.ParecSchedule(5, 1),
        forced_frames=list(frames), pauli_layer_delay=True,
    )
    assert max_dev_up_to_phase(a.amp, b.amp) > 1e-10


def test_frame_log_text_roundtrip():
    log = [(0, pc.PauliFrame("XYZI")), (20, pc.PauliFrame("IIZY"))]
    text = pc.frame_log_to_text(log)
    assert text == "0 XYZI\n20 IIZY\n"
    assert pc.frame_log_from_text(text) == log
