"""Chebyshev vector recursion with per-step truncation and moment extraction.

Runs t~_k = truncate(2 H t~_{k-1} - t~_{k-2}) with a sliding two-vector
window, recording per-step truncation and cosine errors, and assembles the
moment sequence mu~_0 .. mu~_{2 n_max} from pairwise inner products:

    mu_{2k}   = 2 <t_k|t_k>     - mu_0
    mu_{2k+1} = 2 <t_{k+1}|t_k> - mu_1
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapacityError, ParameterError
from .hamiltonians import NormalizedHamiltonian
from .mps import Mps, Mpo, add, apply_mpo, inner, load_mps, save_mps, truncate

DEFAULT_BOND_BUDGET = 4096


@dataclass(frozen=True)
class ChebRunConfig:
    """Settings for one Chebyshev recursion run.

    ``chi_mps`` of None means unbounded bond dimension.  ``svd_tol`` of
    None disables compression entirely (formal bond accounting); 0.0 keeps
    every singular value while still capping bonds at the physical rank.
    """

    chi_mps: int | None
    n_max: int
    svd_tol: float | None = 0.0
    checkpoint_every: int = 0
    max_intermediate_bond: int = DEFAULT_BOND_BUDGET

    def __post_init__(self):
        if self.chi_mps is not None and self.chi_mps < 1:
            raise ParameterError(f"chi_mps must be >= 1, got {self.chi_mps}")
        if self.n_max < 1:
            raise ParameterError(f"n_max must be >= 1, got {self.n_max}")
        if self.checkpoint_every < 0:
            raise ParameterError("checkpoint_every must be >= 0")

    @property
    def compression_enabled(self) -> bool:
        return not (self.svd_tol is None and self.chi_mps is None)


@dataclass
class StepReport:
    """Diagnostics for one recursion step."""

    k: int
    delta_t: float
    delta_c: float
    bond_raw: int
    bond_kept: int


@dataclass
class MomentSequence:
    """Moments with per-step diagnostics.

    ``moments[k]`` approximates <psi|T_k(H)|psi>.  ``trunc_errors[k]`` and
    ``cosine_errors[k]`` belong to the step that produced Chebyshev vector
    k (index 0 is zero by convention).  ``lp_split`` is the first
    extrapolated index, or None when every entry was computed directly.
    """

    moments: np.ndarray
    trunc_errors: np.ndarray
    cosine_errors: np.ndarray
    max_bonds: np.ndarray
    lp_split: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_computed(self) -> int:
        return len(self.moments) if self.lp_split is None else self.lp_split

    def source_labels(self) -> list[str]:
        split = self.n_computed
        return ["computed" if k < split else "lp" for k in range(len(self.moments))]


def bond_growth_trace(H: NormalizedHamiltonian | Mpo | int, D0: int, k: int) -> list[int]:
    """Predicted untruncated bond dimensions D^(0..k).

    Follows D^(j) = D_H D^(j-1) + D^(j-2) with D^(0) = D0 and
    D^(1) = D_H * D0, the formal growth of exact MPO application plus
    direct-sum addition.
    """
    if k < 0:
        raise ParameterError("k must be >= 0")
    if isinstance(H, int):
        d_h = H
    elif isinstance(H, Mpo):
        d_h = H.growth_factor
    else:
        d_h = H.growth_factor
    trace = [int(D0)]
    if k >= 1:
        trace.append(d_h * D0)
    for _ in range(2, k + 1):
        trace.append(d_h * trace[-1] + trace[-2])
    return trace


def cheb_step(H: Mpo, t_prev: Mps, t_prev2: Mps, cfg: ChebRunConfig) -> tuple[Mps, StepReport]:
    """One recursion step: truncate(2 H t_prev - t_prev2).

    The linear combination is formed exactly (MPO application followed by a
    direct sum) before a single truncation, so the reported truncation
    error delta_t is the full per-step approximation error.
    """
    predicted = H.growth_factor * t_prev.max_bond + t_prev2.max_bond
    if predicted > cfg.max_intermediate_bond:
        raise CapacityError(
            f"intermediate bond {predicted} exceeds budget {cfg.max_intermediate_bond} "
            f"(D_H={H.growth_factor}, bonds {t_prev.max_bond}+{t_prev2.max_bond})")
    raw = add(apply_mpo(H, t_prev), t_prev2, 2.0, -1.0)
    if not cfg.compression_enabled:
        report = StepReport(k=-1, delta_t=0.0, delta_c=0.0,
                            bond_raw=raw.max_bond, bond_kept=raw.max_bond)
        return raw, report
    kept, trunc = truncate(raw, chi_max=cfg.chi_mps, svd_tol=cfg.svd_tol or 0.0)
    report = StepReport(
        k=-1,
        delta_t=trunc.delta_t,
        delta_c=trunc.cosine_error,
        bond_raw=raw.max_bond,
        bond_kept=kept.max_bond,
    )
    return kept, report


def moments_from_vectors(t_k: Mps, t_k_plus_1: Mps, mu0: float, mu1: float,
                         k: int) -> tuple[float, float]:
    """(mu_{2k}, mu_{2k+1}) from the stored vector pair."""
    if k < 1:
        raise ParameterError("pairwise moment formulas need k >= 1")
    mu_even = 2.0 * inner(t_k, t_k).real - mu0
    mu_odd = 2.0 * inner(t_k_plus_1, t_k).real - mu1
    return mu_even, mu_odd


def run_chebyshev(H: NormalizedHamiltonian, psi0: Mps, cfg: ChebRunConfig,
                  checkpoint_dir: str | Path | None = None,
                  resume: bool = False) -> MomentSequence:
    """Full recursion producing moments mu~_0 .. mu~_{2 n_max}.

    Only two Chebyshev vectors are held at any time.  With
    ``checkpoint_every`` > 0 and a checkpoint directory, the full restart
    state (both vectors plus partial moments) is saved periodically;
    ``resume=True`` continues from the newest checkpoint bit-identically.
    """
    norm0 = psi0.norm()
    if abs(norm0 - 1.0) > 1e-10:
        raise ParameterError(f"guiding state must be normalized, got ||psi|| = {norm0:.12f}")

    n_out = 2 * cfg.n_max + 1
    mu = np.zeros(n_out)
    delta_t = np.zeros(cfg.n_max + 1)
    delta_c = np.zeros(cfg.n_max + 1)
    bonds = np.zeros(cfg.n_max + 1, dtype=np.int64)

    start_k = 2
    state = None
    if resume:
        if checkpoint_dir is None:
            raise ParameterError("resume requires a checkpoint directory")
        state = _load_latest_checkpoint(Path(checkpoint_dir))
    if state is not None:
        start_k, t_prev2, t_prev, arrays = state
        upto = min(len(arrays["moments"]), n_out)
        mu[:upto] = arrays["moments"][:upto]
        for name, dst in (("trunc_errors", delta_t), ("cosine_errors", delta_c),
                          ("max_bonds", bonds)):
            src = arrays[name]
            dst[:min(len(src), len(dst))] = src[:min(len(src), len(dst))]
    else:
        mu[0] = inner(psi0, psi0).real
        bonds[0] = psi0.max_bond
        t_prev2 = psi0
        t1_raw = apply_mpo(H.mpo, psi0)
        if cfg.compression_enabled:
            t_prev, trunc = truncate(t1_raw, chi_max=cfg.chi_mps, svd_tol=cfg.svd_tol or 0.0)
            delta_t[1], delta_c[1] = trunc.delta_t, trunc.cosine_error
        else:
            t_prev = t1_raw
        bonds[1] = t_prev.max_bond
        mu[1] = inner(t_prev, psi0).real
        if cfg.n_max >= 1:
            mu[2] = 2.0 * inner(t_prev, t_prev).real - mu[0]

    for k in range(start_k, cfg.n_max + 1):
        t_new, report = cheb_step(H.mpo, t_prev, t_prev2, cfg)
        delta_t[k], delta_c[k] = report.delta_t, report.delta_c
        bonds[k] = report.bond_kept
        mu[2 * k - 1] = 2.0 * inner(t_new, t_prev).real - mu[1]
        mu[2 * k] = 2.0 * inner(t_new, t_new).real - mu[0]
        t_prev2, t_prev = t_prev, t_new
        if (cfg.checkpoint_every > 0 and checkpoint_dir is not None
                and (k % cfg.checkpoint_every == 0) and k < cfg.n_max):
            _write_checkpoint(Path(checkpoint_dir), k + 1, t_prev2, t_prev,
                              mu, delta_t, delta_c, bonds)

    return MomentSequence(
        moments=mu,
        trunc_errors=delta_t,
        cosine_errors=delta_c,
        max_bonds=bonds,
        meta={
            "n_max": cfg.n_max,
            "chi_mps": cfg.chi_mps,
            "svd_tol": cfg.svd_tol,
            "model": dict(H.model_meta),
            "scale": H.scale,
        },
    )


def truncation_budget(chi: float, d: int) -> float:
    """Per-step truncation bound delta <= 3 pi chi^2 / (16 d^3).

    A uniform per-step error below this budget certifies the end-to-end
    energy estimate; observed errors above it only void the a-priori
    guarantee (the bound is conservative), so callers warn and continue.
    """
    if d < 1:
        raise ParameterError("degree must be >= 1")
    return 3.0 * math.pi * chi ** 2 / (16.0 * d ** 3)


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------

def _write_checkpoint(directory: Path, next_k: int, t_prev2: Mps, t_prev: Mps,
                      mu, delta_t, delta_c, bonds) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    stamp = directory / f"ckpt_{next_k:06d}"
    stamp.mkdir(exist_ok=True)
    save_mps(t_prev2, stamp / "t_prev2.mpsc")
    save_mps(t_prev, stamp / "t_prev.mpsc")
    np.savez(stamp / "arrays.npz", moments=mu, trunc_errors=delta_t,
             cosine_errors=delta_c, max_bonds=bonds)
    (stamp / "state.json").write_text(json.dumps({"next_k": next_k}))


def _load_latest_checkpoint(directory: Path):
    if not directory.exists():
        return None
    stamps = sorted(directory.glob("ckpt_*"))
    if not stamps:
        return None
    stamp = stamps[-1]
    next_k = json.loads((stamp / "state.json").read_text())["next_k"]
    t_prev2 = load_mps(stamp / "t_prev2.mpsc")
    t_prev = load_mps(stamp / "t_prev.mpsc")
    arrays = dict(np.load(stamp / "arrays.npz"))
    return next_k, t_prev2, t_prev, arrays
