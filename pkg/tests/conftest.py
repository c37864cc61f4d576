"""Shared test fixtures and dense-matrix oracles.

The oracles here deliberately use explicit Kronecker products and full
matrix-vector multiplication so they stay independent of the stride-based
kernels they check.
"""

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PAULI_BY_LABEL = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def kron_chain(ops):
    """Kronecker product with the first factor on the most-significant qubit."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def embed_one(u, qubit, n_q):
    """Dense 2^n x 2^n operator applying u on `qubit` (qubit 0 = LSB)."""
    ops = [u if q == qubit else I2 for q in range(n_q - 1, -1, -1)]
    return kron_chain(ops)


def embed_two(u, q1, q2, n_q):
    """Dense operator for a 4x4 matrix indexed by 2*b(q1)+b(q2).

    Built by summing outer products of matrix units, which works for any
    (q1, q2) ordering without stride arithmetic.
    """
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
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_vec(n_q, rng):
    n = 1 << n_q
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def max_dev_up_to_phase(a, b):
    """Max elementwise deviation between arrays equal up to one global phase."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    k = np.argmax(np.abs(b))
    if abs(b[k]) == 0:
        return float(np.max(np.abs(a - b)))
    ph = a[k] / b[k]
    ph /= abs(ph)
    return float(np.max(np.abs(a - ph * b)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
