"""Dense reference constructions for the built-in validation checks.

Deliberately naive (explicit Kronecker embedding, full matrix products) so
the self-checks in the CLI exercise the optimized kernels against an
independent code path.
"""

from __future__ import annotations

import numpy as np

from . import gateset as gs

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def embed_one_dense(u, qubit, n_q):
    out = np.array([[1.0 + 0j]])
    for q in range(n_q - 1, -1, -1):
        out = np.kron(out, u if q == qubit else PAULI["I"])
    return out


def embed_two_dense(u, q1, q2, n_q):
    n = 1 << n_q
    out = np.zeros((n, n), dtype=complex)
    for r in range(4):
        for c in range(4):
            if u[r, c] == 0:
                continue
            b1r, b2r = (r >> 1) & 1, r & 1
            b1c, b2c = (c >> 1) & 1, c & 1
            for b in range(n):
                if (b >> q1) & 1 == b1c and (b >> q2) & 1 == b2c:
                    nb = b & ~(1 << q1) & ~(1 << q2)
                    nb |= (b1r << q1) | (b2r << q2)
                    out[nb, b] += u[r, c]
    return out


def random_unitary(dim, rng):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def dense_native_gate(g, n_q):
    u = gs.gate_matrix(g)
    if g.axis == gs.AXIS_XX:
        return embed_two_dense(u, g.qubits[0], g.qubits[1], n_q)
    return embed_one_dense(u, g.qubits[0], n_q)


def dense_standard_gate(gate, n_q):
    n = 1 << n_q
    if isinstance(gate, gs.Hadamard):
        return embed_one_dense(HADAMARD, gate.qubit, n_q)
    if isinstance(gate, gs.Phase):
        return embed_one_dense(np.diag([1, np.exp(1j * gate.phi)]), gate.qubit, n_q)
    if isinstance(gate, gs.ControlledPhase):
        d = np.ones(n, dtype=complex)
        for b in range(n):
            if (b >> gate.q1) & 1 and (b >> gate.q2) & 1:
                d[b] = np.exp(1j * gate.phi)
        return np.diag(d)
    if isinstance(gate, gs.CNOT):
        m = np.zeros((n, n), dtype=complex)
        for b in range(n):
            nb = b ^ (((b >> gate.control) & 1) << gate.target)
            m[nb, b] = 1
        return m
    raise TypeError(gate)


def phase_free_dev(a, b) -> float:
    """Max elementwise deviation between arrays equal up to a global phase."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    k = np.argmax(np.abs(b))
    if abs(b[k]) == 0:
        return float(np.max(np.abs(a - b)))
    ph = a[k] / b[k]
    ph /= abs(ph)
    return float(np.max(np.abs(a - ph * b)))
