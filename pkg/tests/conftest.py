"""Shared reference constructions for the test suite.

The helpers here rebuild states and operators by explicit bitstring
enumeration and Kronecker products, independent of the package's own
contraction code, so they can serve as oracles for it.
"""

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def mps_vector_by_bitstrings(mps) -> np.ndarray:
    """Amplitude vector by explicit bitstring enumeration (site 0 = MSB)."""
    n = mps.n_sites
    out = np.empty(2 ** n, dtype=complex)
    for idx in range(2 ** n):
        mat = np.ones((1, 1), dtype=complex)
        for site in range(n):
            bit = (idx >> (n - 1 - site)) & 1
            mat = mat @ mps.tensors[site][:, bit, :]
        out[idx] = mat[0, 0]
    return out * np.exp(mps.log_norm)


def mpo_matrix_by_bitstrings(mpo) -> np.ndarray:
    """Dense operator matrix by enumerating bra/ket bitstring pairs."""
    n = mpo.n_sites
    dim = 2 ** n
    out = np.empty((dim, dim), dtype=complex)
    for row in range(dim):
        for col in range(dim):
            mat = np.ones((1, 1), dtype=complex)
            for site in range(n):
                s_out = (row >> (n - 1 - site)) & 1
                s_in = (col >> (n - 1 - site)) & 1
                mat = mat @ mpo.tensors[site][:, s_out, s_in, :]
            out[row, col] = mat[0, 0]
    return out


def kron_chain(ops) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def embed(n: int, ops: dict) -> np.ndarray:
    """Kron embedding of single-site operators given as {site: matrix}."""
    return kron_chain([ops.get(i, I2) for i in range(n)])


def tfim_1d_dense(L: int, J: float, h: float, normalized: bool = True) -> np.ndarray:
    H = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for i in range(L - 1):
        H -= J * embed(L, {i: X, i + 1: X})
    for i in range(L):
        H -= h * embed(L, {i: Z})
    if normalized:
        H /= abs(J) * (L - 1) + abs(h) * L
    return H


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
