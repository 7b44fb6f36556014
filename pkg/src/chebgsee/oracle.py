"""Dense state-vector reference implementation.

Every quantity the MPS pipeline approximates is recomputed here exactly:
ground energies and eigenspaces, Chebyshev vectors and moments via the
dense three-term recursion, moment-error profiles, and ground-state
overlaps.  Works matrix-free (bitwise Pauli application) up to the
configured capacity, with full matrices and eigendecompositions cached at
small sizes.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import CapacityError, NumericalError, ParameterError, StructuralError
from .hamiltonians import NormalizedHamiltonian, PauliSum
from .mps import Mps, to_dense

MATVEC_SITE_LIMIT = 24
MATRIX_SITE_LIMIT = 14
EIGH_SITE_LIMIT = 14


@lru_cache(maxsize=4)
def _indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _parity(v: np.ndarray) -> np.ndarray:
    """Bit parity of each entry (0 or 1), without popcount support."""
    v = v.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def _prepare_terms(ps: PauliSum):
    """Precompute (weight, flip mask, sign mask) per Pauli string.

    Site 0 maps to the most significant bit, matching ``mps.to_dense``.
    P|x> = weight_phase * (-1)^popcount(x & sign_mask) |x ^ flip_mask>.
    """
    n = ps.n_sites
    prepped = []
    for coeff, labels in ps.terms:
        flip = 0
        sign = 0
        phase = complex(coeff)
        for site, ch in enumerate(labels):
            bit = 1 << (n - 1 - site)
            if ch == "X":
                flip |= bit
            elif ch == "Y":
                flip |= bit
                sign |= bit
                phase *= 1j
            elif ch == "Z":
                sign |= bit
        prepped.append((phase, flip, sign))
    return prepped


class DenseSystem:
    """Exact reference for one normalized Hamiltonian.

    Provides a matrix-free matvec at any supported size, plus cached dense
    matrices and full eigendecompositions at small sizes.  Hermiticity and
    spectral containment in [-1, 1] are verified when the spectrum is first
    computed.
    """

    def __init__(self, ham: NormalizedHamiltonian | PauliSum,
                 matvec_limit: int = MATVEC_SITE_LIMIT,
                 matrix_limit: int = MATRIX_SITE_LIMIT,
                 eigh_limit: int = EIGH_SITE_LIMIT):
        ps = ham.pauli_sum if isinstance(ham, NormalizedHamiltonian) else ham
        self.pauli_sum = ps
        self.n_sites = ps.n_sites
        if self.n_sites > matvec_limit:
            raise CapacityError(
                f"{self.n_sites} sites exceeds the dense-oracle limit {matvec_limit}")
        self.matrix_limit = matrix_limit
        self.eigh_limit = eigh_limit
        self._terms = _prepare_terms(ps)
        self._matrix = None
        self._eig = None

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """H @ v via bitwise Pauli-string application."""
        v = np.asarray(v, dtype=np.complex128).ravel()
        if v.size != self.dim:
            raise StructuralError(f"vector length {v.size} != 2^{self.n_sites}")
        idx = _indices(self.n_sites)
        out = np.zeros_like(v)
        for phase, flip, sign in self._terms:
            src = idx ^ flip
            signs = 1.0 - 2.0 * _parity(src & sign)
            out += phase * (signs * v[src])
        return out

    def matrix(self) -> np.ndarray:
        """Dense Hamiltonian matrix (cached; small sizes only)."""
        if self._matrix is None:
            if self.n_sites > self.matrix_limit:
                raise CapacityError(
                    f"dense matrix at {self.n_sites} sites exceeds limit {self.matrix_limit}")
            mat = np.zeros((self.dim, self.dim), dtype=np.complex128)
            idx = _indices(self.n_sites)
            for phase, flip, sign in self._terms:
                src = idx ^ flip
                signs = 1.0 - 2.0 * _parity(src & sign)
                mat[idx, src] += phase * signs
            herm_gap = np.abs(mat - mat.conj().T).max()
            if herm_gap > 1e-12:
                raise NumericalError(f"Hamiltonian is not Hermitian (deviation {herm_gap:.2e})")
            self._matrix = mat
        return self._matrix

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Full spectrum and eigenvectors (cached; small sizes only)."""
        if self._eig is None:
            if self.n_sites > self.eigh_limit:
                raise CapacityError(
                    f"full diagonalization at {self.n_sites} sites exceeds limit {self.eigh_limit}")
            w, v = np.linalg.eigh(self.matrix())
            self._check_containment(w)
            self._eig = (w, v)
        return self._eig

    def _check_containment(self, w: np.ndarray) -> None:
        if w.min() < -1.0 - 1e-9 or w.max() > 1.0 + 1e-9:
            raise NumericalError(
                f"spectrum [{w.min():.6f}, {w.max():.6f}] escapes [-1, 1]; "
                "the Hamiltonian is not normalized")

    def _lowest_eigs(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """k smallest eigenpairs, iteratively when too large for eigh."""
        if self.n_sites <= self.eigh_limit:
            w, v = self.eigensystem()
            return w[:k], v[:, :k]
        from scipy.sparse.linalg import LinearOperator, eigsh

        op = LinearOperator((self.dim, self.dim), matvec=self.matvec, dtype=np.complex128)
        v0 = np.full(self.dim, 1.0 / np.sqrt(self.dim))
        w, v = eigsh(op, k=k, which="SA", v0=v0)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        self._check_containment(w)
        return w, v

    def ground_space(self, degeneracy_tol: float = 1e-10) -> tuple[float, np.ndarray]:
        """Lowest eigenvalue and an orthonormal basis of its eigenvalue cluster."""
        k = min(8, self.dim - 1) if self.n_sites > self.eigh_limit else self.dim
        w, v = self._lowest_eigs(k)
        cluster = w <= w[0] + degeneracy_tol
        return float(w[0]), v[:, cluster]

    def ground(self) -> tuple[float, np.ndarray]:
        """Smallest eigenvalue and one eigenvector."""
        w, v = self._lowest_eigs(min(2, self.dim))
        return float(w[0]), v[:, 0]

    def cheb_vectors(self, psi: np.ndarray, k_max: int):
        """Yield the dense Chebyshev vectors t_0 .. t_{k_max}."""
        t_prev2 = np.asarray(psi, dtype=np.complex128).ravel().copy()
        yield t_prev2
        if k_max == 0:
            return
        t_prev = self.matvec(t_prev2)
        yield t_prev
        for _ in range(2, k_max + 1):
            t_new = 2.0 * self.matvec(t_prev) - t_prev2
            yield t_new
            t_prev2, t_prev = t_prev, t_new

    def cheb_moments(self, psi: np.ndarray, d: int) -> np.ndarray:
        """Exact moments mu_k = <psi|T_k(H)|psi> for k = 0 .. d."""
        if d < 0:
            raise ParameterError("degree must be non-negative")
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        mu = np.empty(d + 1)
        for k, t_k in enumerate(self.cheb_vectors(psi, d)):
            mu[k] = np.vdot(psi, t_k).real
        return mu


def dense_ground(system: DenseSystem) -> tuple[float, np.ndarray]:
    """Ground energy and eigenvector of a dense system."""
    return system.ground()


def dense_cheb_moments(system: DenseSystem, psi_dense: np.ndarray, d: int) -> np.ndarray:
    """Exact Chebyshev moments of ``psi_dense`` under the system Hamiltonian."""
    return system.cheb_moments(psi_dense, d)


def moment_error_profile(dense_moments: np.ndarray, approx) -> np.ndarray:
    """Elementwise |mu_k - mu~_k| between an oracle and an approximation."""
    approx_arr = np.asarray(getattr(approx, "moments", approx), dtype=float)
    dense_arr = np.asarray(dense_moments, dtype=float)
    if dense_arr.shape != approx_arr.shape:
        raise StructuralError(
            f"moment sequences differ in length: {dense_arr.shape} vs {approx_arr.shape}")
    return np.abs(dense_arr - approx_arr)


def overlap_chi(psi, system: DenseSystem, degeneracy_tol: float = 1e-10) -> float:
    """Overlap chi = ||P_ground |psi>|| with the (possibly degenerate) ground space."""
    vec = to_dense(psi) if isinstance(psi, Mps) else np.asarray(psi, dtype=np.complex128).ravel()
    if vec.size != system.dim:
        raise StructuralError(f"state dimension {vec.size} != 2^{system.n_sites}")
    _, basis = system.ground_space(degeneracy_tol)
    return float(np.linalg.norm(basis.conj().T @ vec))
