"""Two-site variational ground-state search for guiding-state preparation.

A deliberately plain DMRG: deterministic product-state initialization,
exact dense local solves at small effective dimension, a fixed-budget
restarted Lanczos otherwise, and immediate truncation to the requested
bond dimension after every two-site update.  Per-sweep energies are
monotone by construction: a sweep that fails to improve reverts to the
best state seen and stops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .hamiltonians import NormalizedHamiltonian
from .mps import Mps, canonicalize, load_mps, mpo_expectation, truncate

_DENSE_LOCAL_DIM = 256


@dataclass(frozen=True)
class DmrgConfig:
    chi_init: int
    sweeps: int = 10
    conv_tol: float = 1e-10
    local_eig_iters: int = 40
    svd_tol: float = 1e-14

    def __post_init__(self):
        if self.chi_init < 1:
            raise ParameterError(f"chi_init must be >= 1, got {self.chi_init}")
        if self.sweeps < 1:
            raise ParameterError(f"sweeps must be >= 1, got {self.sweeps}")


@dataclass
class DmrgResult:
    mps: Mps
    energy: float
    sweep_energies: list[float]
    converged: bool


def load_guiding_state(path) -> Mps:
    """Load an externally prepared guiding state (container is validated)."""
    return load_mps(path)


def _initial_product_state(ham: NormalizedHamiltonian) -> Mps:
    """Deterministic start: the best of four simple product states."""
    n = ham.n_sites
    up = np.array([1.0, 0.0])
    down = np.array([0.0, 1.0])
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    candidates = [Mps.product_state([v] * n) for v in (up, down, plus, minus)]
    energies = [mpo_expectation(ham.mpo, psi).real for psi in candidates]
    return candidates[int(np.argmin(energies))]


def _update_left_env(env, a, w):
    tmp = np.tensordot(env, a, axes=(2, 0))             # (bra, w, s, ket')
    tmp = np.tensordot(tmp, w, axes=([1, 2], [0, 2]))   # (bra, ket', s_out, w')
    new = np.tensordot(a.conj(), tmp, axes=([0, 1], [0, 2]))  # (bra', ket', w')
    return new.transpose(0, 2, 1)


def _update_right_env(env, a, w):
    tmp = np.tensordot(a, env, axes=(2, 2))             # (ket_l, s, bra, w)
    tmp = np.tensordot(tmp, w, axes=([1, 3], [2, 3]))   # (ket_l, bra, w_l, s_out)
    new = np.tensordot(a.conj(), tmp, axes=([2, 1], [1, 3]))  # (bra_l, ket_l, w_l)
    return new.transpose(0, 2, 1)


def _effective_matvec(left, w1, w2, right):
    def matvec(theta):
        tmp = np.tensordot(left, theta, axes=(2, 0))            # (bra, w, s', t', kr)
        tmp = np.tensordot(tmp, w1, axes=([1, 2], [0, 2]))      # (bra, t', kr, s, w')
        tmp = np.tensordot(tmp, w2, axes=([4, 1], [0, 2]))      # (bra, kr, s, t, w'')
        tmp = np.tensordot(tmp, right, axes=([4, 1], [1, 2]))   # (bra, s, t, bra_r)
        return tmp
    return matvec


def _dense_effective(left, w1, w2, right):
    ham = np.tensordot(left, w1, axes=(1, 0))           # (bra, ket, s, s', w')
    ham = np.tensordot(ham, w2, axes=(4, 0))            # (bra, ket, s, s', t, t', w'')
    ham = np.tensordot(ham, right, axes=(6, 1))         # (bra, ket, s, s', t, t', bra_r, ket_r)
    ham = ham.transpose(0, 2, 4, 6, 1, 3, 5, 7)         # (bra, s, t, bra_r | ket, s', t', ket_r)
    dim = ham.shape[0] * ham.shape[1] * ham.shape[2] * ham.shape[3]
    return ham.reshape(dim, dim)


def _lanczos_smallest(matvec, guess, iters: int, restarts: int = 2):
    """Smallest Ritz pair of a Hermitian operator, fixed iteration budget."""
    shape = guess.shape
    v = guess.ravel().astype(np.complex128)
    v /= np.linalg.norm(v)
    theta, ritz = None, v
    for _ in range(restarts):
        basis = [ritz / np.linalg.norm(ritz)]
        alphas, betas = [], []
        for j in range(iters):
            w = matvec(basis[j].reshape(shape)).ravel()
            alpha = np.vdot(basis[j], w).real
            alphas.append(alpha)
            w = w - alpha * basis[j]
            if j > 0:
                w = w - betas[-1] * basis[j - 1]
            for b in basis:  # full reorthogonalization; budgets are small
                w = w - np.vdot(b, w) * b
            beta = np.linalg.norm(w)
            if beta < 1e-13:
                break
            betas.append(beta)
            basis.append(w / beta)
        tri = np.diag(alphas)
        for j, beta in enumerate(betas[:len(alphas) - 1]):
            tri[j, j + 1] = tri[j + 1, j] = beta
        evals, evecs = np.linalg.eigh(tri)
        theta = evals[0]
        ritz = np.zeros_like(basis[0])
        for coef, b in zip(evecs[:, 0], basis[:tri.shape[0]]):
            ritz += coef * b
        ritz /= np.linalg.norm(ritz)
        if len(betas) < len(alphas):  # invariant subspace reached
            break
    return theta, ritz.reshape(shape)


def _solve_local(left, w1, w2, right, guess, iters: int):
    dim = guess.size
    if dim <= _DENSE_LOCAL_DIM:
        ham = _dense_effective(left, w1, w2, right)
        evals, evecs = np.linalg.eigh(ham)
        return evals[0], evecs[:, 0].reshape(guess.shape)
    return _lanczos_smallest(_effective_matvec(left, w1, w2, right), guess, iters)


def _split_theta(theta, chi_max: int, svd_tol: float):
    bl, _, _, br = theta.shape
    u, s, vh = np.linalg.svd(theta.reshape(bl * 2, 2 * br), full_matrices=False)
    keep = s >= svd_tol * s[0] if s[0] > 0 else slice(0, 1)
    k = min(int(np.count_nonzero(keep)) if s[0] > 0 else 1, chi_max)
    k = max(k, 1)
    s_kept = s[:k] / np.linalg.norm(s[:k])
    return u[:, :k].reshape(bl, 2, k), s_kept, vh[:k].reshape(k, 2, br)


def dmrg_ground(ham: NormalizedHamiltonian, cfg: DmrgConfig) -> DmrgResult:
    """Variational ground-state search with bond dimension <= chi_init."""
    n = ham.n_sites
    w_tensors = ham.mpo.tensors
    psi = canonicalize(_initial_product_state(ham), 0)
    tensors = [t.copy() for t in psi.tensors]

    right_envs = [None] * (n + 1)
    right_envs[n] = np.ones((1, 1, 1), dtype=np.complex128)
    for i in range(n - 1, 0, -1):
        right_envs[i] = _update_right_env(right_envs[i + 1], tensors[i], w_tensors[i])
    left_envs = [None] * (n + 1)
    left_envs[0] = np.ones((1, 1, 1), dtype=np.complex128)

    def current_state() -> Mps:
        return Mps([t.copy() for t in tensors])

    best_state = current_state()
    best_energy = mpo_expectation(ham.mpo, best_state).real
    sweep_energies: list[float] = []
    converged = False
    previous = best_energy

    for _ in range(cfg.sweeps):
        # left-to-right
        for i in range(n - 1):
            theta = np.tensordot(tensors[i], tensors[i + 1], axes=(2, 0))
            _, theta = _solve_local(left_envs[i], w_tensors[i], w_tensors[i + 1],
                                    right_envs[i + 2], theta, cfg.local_eig_iters)
            a, s, b = _split_theta(theta, cfg.chi_init, cfg.svd_tol)
            tensors[i] = a
            tensors[i + 1] = np.tensordot(np.diag(s), b, axes=(1, 0))
            left_envs[i + 1] = _update_left_env(left_envs[i], tensors[i], w_tensors[i])
        # right-to-left
        for i in range(n - 2, -1, -1):
            theta = np.tensordot(tensors[i], tensors[i + 1], axes=(2, 0))
            _, theta = _solve_local(left_envs[i], w_tensors[i], w_tensors[i + 1],
                                    right_envs[i + 2], theta, cfg.local_eig_iters)
            a, s, b = _split_theta(theta, cfg.chi_init, cfg.svd_tol)
            tensors[i + 1] = b
            tensors[i] = np.tensordot(a, np.diag(s), axes=(2, 0))
            right_envs[i + 1] = _update_right_env(right_envs[i + 2], tensors[i + 1],
                                                  w_tensors[i + 1])

        state = current_state()
        energy = (mpo_expectation(ham.mpo, state).real
                  / max(state.norm() ** 2, np.finfo(float).tiny))
        if energy > best_energy + 1e-14:
            # A truncated update can fail to improve; keep the best state.
            sweep_energies.append(best_energy)
            converged = True
            break
        sweep_energies.append(energy)
        best_energy = energy
        best_state = state
        if abs(previous - energy) < cfg.conv_tol:
            converged = True
            break
        previous = energy

    norm = best_state.norm()
    normalized = Mps([t / (norm ** (1.0 / n)) for t in best_state.tensors])
    final = canonicalize(normalized, 0)
    return DmrgResult(mps=final, energy=best_energy,
                      sweep_energies=sweep_energies, converged=converged)
