"""Exact-mode Chebyshev moments versus the dense state-vector oracle.

With unbounded bond dimension the MPS recursion is exact, so its moments
must match the dense three-term recursion to round-off.  This is the
backbone of every validation in the package.
"""

import numpy as np

from chebgsee import (
    ChebRunConfig,
    DenseSystem,
    Mps,
    run_chebyshev,
    tfim_1d,
    to_dense,
)

L = 10
ham = tfim_1d(L, 1.0, 1.0)
print(f"1D transverse-field Ising chain, L={L}, J=h=1 (critical)")
print(f"normalization divisor: {ham.scale}")

system = DenseSystem(ham)
lam0, ground = system.ground()
print(f"exact ground energy (normalized units): {lam0:.12f}")
print(f"                    (raw model units):  {lam0 * ham.scale:.12f}")

# random guiding state, exact-mode run
psi = Mps.random(L, 8, rng=20240811)
cfg = ChebRunConfig(chi_mps=None, n_max=64, svd_tol=0.0)
seq = run_chebyshev(ham, psi, cfg)
mu_oracle = system.cheb_moments(to_dense(psi), 2 * cfg.n_max)

gap = np.abs(seq.moments - mu_oracle)
print(f"\nexact-mode MPS run: {len(seq.moments)} moments, "
      f"max bond reached {seq.max_bonds.max()}")
print(f"max |mu_MPS - mu_dense| = {gap.max():.3e}")
print(f"per-step truncation errors: all <= {seq.trunc_errors.max():.3e}")

# an eigenstate turns the recursion into scalar Chebyshev evaluation
w, v = system.eigensystem()
idx = 5
psi_eig = Mps.from_dense(v[:, idx])
seq_eig = run_chebyshev(ham, psi_eig, ChebRunConfig(chi_mps=None, n_max=16, svd_tol=0.0))
ks = np.arange(33)
expected = np.cos(ks * np.arccos(w[idx]))
print(f"\neigenstate input (eigenvalue {w[idx]:+.6f}):")
print(f"max |mu_k - T_k(lambda)| = {np.abs(seq_eig.moments - expected).max():.3e}")

print("\nfirst ten moments of the random state:")
for k in range(10):
    print(f"  mu_{k} = {seq.moments[k]:+.12f}   (oracle {mu_oracle[k]:+.12f})")
