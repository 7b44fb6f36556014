"""Autoregressive extrapolation of moment sequences.

Fits mu_n ~= -sum_{j=1..n_fit} a_j mu_{n-j} by regularized least squares
over the tail window, stabilizes the model by reflecting companion-matrix
roots into the unit disk, and extends the sequence to higher degree.

The extension is evaluated through the model's root decomposition by
default: iterating the raw recurrence is mathematically identical but
numerically explosive for near-unit-circle models of high order, because
reconstructed AR coefficients grow exponentially and the recursion then
amplifies round-off.  ``method="recursion"`` selects the literal
iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .chebyshev import MomentSequence
from .errors import NumericalError, ParameterError

DEFAULT_RIDGE_RATIO = 1e-10


def _moment_array(moments) -> np.ndarray:
    return np.asarray(getattr(moments, "moments", moments), dtype=float)


@dataclass(frozen=True)
class LpModel:
    """A fitted autoregressive model of order ``n_fit``."""

    ar_coeffs: np.ndarray
    n_fit: int
    fit_window: tuple[int, int]
    ridge: float
    residual_rms: float
    stabilized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ar_coeffs", np.asarray(self.ar_coeffs, dtype=float))

    def roots(self) -> np.ndarray:
        """Companion-matrix eigenvalues z of z^p + a_1 z^{p-1} + ... + a_p."""
        return np.roots(np.concatenate(([1.0], self.ar_coeffs)))


def fit_lp(moments, n_fit: int, ridge: float | None = None) -> LpModel:
    """Least-squares AR fit over the final ``n_fit`` target indices.

    The targets are n in {M - n_fit, ..., M - 1} for a sequence ending at
    index M, each predicted from its ``n_fit`` predecessors.  ``ridge`` is
    an absolute Tikhonov weight; None selects ``1e-10 * trace`` of the
    normal matrix.  A rank-deficient system with ridge = 0 raises, since
    the bare least-squares solution is then meaningless noise.
    """
    mu = _moment_array(moments)
    if n_fit < 1:
        raise ParameterError(f"n_fit must be >= 1, got {n_fit}")
    if len(mu) < 2 * n_fit + 1:
        raise ParameterError(
            f"need at least 2*n_fit+1 = {2 * n_fit + 1} moments, got {len(mu)}")
    m_top = len(mu) - 1
    targets = np.arange(m_top - n_fit, m_top)
    design = np.stack([mu[n - n_fit:n][::-1] for n in targets])
    rhs = mu[targets]
    if ridge is None:
        ridge = DEFAULT_RIDGE_RATIO * float(np.einsum("ij,ij->", design, design))
    if ridge < 0.0:
        raise ParameterError("ridge must be >= 0")
    if ridge > 0.0:
        stacked = np.vstack([design, np.sqrt(ridge) * np.eye(n_fit)])
        target_vec = np.concatenate([-rhs, np.zeros(n_fit)])
    else:
        stacked, target_vec = design, -rhs
    coeffs, _, rank, _ = np.linalg.lstsq(stacked, target_vec, rcond=None)
    if ridge == 0.0 and rank < n_fit:
        raise NumericalError(
            f"normal equations are rank deficient ({rank} < {n_fit}); "
            "refit with ridge > 0")
    residual = float(np.sqrt(np.mean((design @ coeffs + rhs) ** 2)))
    return LpModel(
        ar_coeffs=coeffs,
        n_fit=n_fit,
        fit_window=(int(targets[0]), int(targets[-1])),
        ridge=float(ridge),
        residual_rms=residual,
    )


def stabilize(model: LpModel) -> LpModel:
    """Reflect companion roots with |z| > 1 to z / |z|^2.

    Mode frequencies are preserved; only growth is removed.  When no root
    lies outside the unit circle the coefficients are returned unchanged.
    """
    roots = model.roots()
    outside = np.abs(roots) > 1.0
    if not outside.any():
        return replace(model, stabilized=True)
    reflected = np.where(outside, roots / np.abs(roots) ** 2, roots)
    rebuilt = np.poly(reflected)
    if np.abs(rebuilt.imag).max() > 1e-8 * max(np.abs(rebuilt.real).max(), 1.0):
        raise NumericalError("stabilized coefficients are not real; conjugate pairing broke")
    return replace(model, ar_coeffs=rebuilt[1:].real, stabilized=True)


def _modal_extension(mu: np.ndarray, model: LpModel, count: int) -> np.ndarray:
    """Continue the sequence via the model's (stabilized) root decomposition."""
    roots = model.roots()
    roots = np.where(np.abs(roots) > 1.0, roots / np.abs(roots) ** 2, roots)
    m_top = len(mu) - 1
    window = np.arange(m_top - model.n_fit, m_top + 1)
    vand = roots[None, :] ** window[:, None]
    amplitudes, _, _, _ = np.linalg.lstsq(vand, mu[window].astype(complex), rcond=None)
    horizon = np.arange(m_top + 1, m_top + 1 + count)
    return (roots[None, :] ** horizon[:, None] @ amplitudes).real


def _recursive_extension(mu: np.ndarray, model: LpModel, count: int) -> np.ndarray:
    extended = np.concatenate([mu, np.zeros(count)])
    p = model.n_fit
    coeffs = model.ar_coeffs
    for n in range(len(mu), len(mu) + count):
        extended[n] = -np.dot(coeffs, extended[n - p:n][::-1])
    return extended[len(mu):]


def select_lp(moments, n_fit_candidates=None,
              ridge_ratios=(None, 1e-12, 1e-14, 0.0),
              holdout: int | None = None) -> tuple[LpModel, dict]:
    """Pick (n_fit, ridge) by scoring extrapolation onto held-out moments.

    The candidates are fitted on a prefix of the sequence and scored by the
    maximum deviation of their modal extension over the remaining computed
    entries.  High-order AR fits of near-unit-circle signals are fragile in
    a way that in-sample residuals do not reveal; a held-out horizon does.
    Returns the winning stabilized prefix-fit model (extrapolation
    re-anchors its amplitudes on the full sequence) plus a score table.

    ``ridge_ratios`` entries are multiples of the design-matrix trace; None
    selects the fit default and 0.0 an unregularized fit (skipped when rank
    deficient).
    """
    mu = _moment_array(moments)
    if holdout is None:
        holdout = max(10, len(mu) // 4)
    if holdout >= len(mu) - 4:
        raise ParameterError(f"holdout {holdout} leaves too little data to fit")
    prefix = mu[:len(mu) - holdout]
    p = len(prefix) - 1
    if n_fit_candidates is None:
        n_fit_candidates = sorted({max(2, p // frac) for frac in (2, 3, 4, 6, 8)})
    best: tuple | None = None
    table = []
    for n_fit in n_fit_candidates:
        if len(prefix) < 2 * n_fit + 1:
            continue
        targets = np.arange(p - n_fit, p)
        design = np.stack([prefix[n - n_fit:n][::-1] for n in targets])
        trace = float(np.einsum("ij,ij->", design, design))
        for ratio in ridge_ratios:
            ridge = None if ratio is None else ratio * trace
            try:
                model = stabilize(fit_lp(prefix, n_fit, ridge))
            except NumericalError:
                continue
            predicted = _modal_extension(prefix, model, holdout)
            score = float(np.abs(predicted - mu[len(prefix):]).max())
            table.append({"n_fit": n_fit, "ridge_ratio": ratio, "score": score})
            if best is None or score < best[0]:
                best = (score, model)
    if best is None:
        raise NumericalError("no linear-prediction candidate could be fitted")
    return best[1], {"holdout": holdout, "best_score": best[0], "candidates": table}


def extrapolate(moments, model: LpModel, d_target: int,
                method: str = "modal") -> MomentSequence:
    """Extend a moment sequence to index ``d_target`` with a fitted model.

    The computed prefix is copied verbatim and ``lp_split`` records where
    extrapolation starts.
    """
    mu = _moment_array(moments)
    m_top = len(mu) - 1
    if d_target <= m_top:
        raise ParameterError(
            f"d_target must exceed the last computed index {m_top}, got {d_target}")
    if method not in ("modal", "recursion"):
        raise ParameterError(f"unknown extrapolation method {method!r}")
    count = d_target - m_top
    if method == "modal":
        tail = _modal_extension(mu, model, count)
    else:
        tail = _recursive_extension(mu, model, count)
    extended = np.concatenate([mu, tail])
    if isinstance(moments, MomentSequence):
        meta = dict(moments.meta)
        meta["lp"] = {"n_fit": model.n_fit, "ridge": model.ridge,
                      "residual_rms": model.residual_rms, "method": method}
        return MomentSequence(
            moments=extended,
            trunc_errors=moments.trunc_errors,
            cosine_errors=moments.cosine_errors,
            max_bonds=moments.max_bonds,
            lp_split=m_top + 1,
            meta=meta,
        )
    return MomentSequence(
        moments=extended,
        trunc_errors=np.zeros(0),
        cosine_errors=np.zeros(0),
        max_bonds=np.zeros(0, dtype=np.int64),
        lp_split=m_top + 1,
        meta={"lp": {"n_fit": model.n_fit, "ridge": model.ridge, "method": method}},
    )
