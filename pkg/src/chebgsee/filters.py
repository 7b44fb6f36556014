"""Chebyshev filter construction for the shifted-step threshold function.

The smoothed target is f(x) = erfc(kappa (x - c)) / 2 with
kappa = (2/Delta) erfcinv(2 eta), which deviates from the hard step by at
most eta outside the gap [c - Delta/2, c + Delta/2].  Expansion
coefficients come from cosine-transform sampling at the d+1
Chebyshev-Gauss nodes, so construction is O(d log d) and stable to very
high degree.  A series is evaluated as a_0/2 + sum_k a_k T_k(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.special import erfc, erfcinv

from .errors import ParameterError

QUALITY_GRID_POINTS = 10_000


@dataclass(frozen=True)
class FilterMeta:
    c: float
    delta: float
    eta: float
    degree: int
    kappa: float
    quality_warning: bool = False
    max_plateau_error: float | None = None


@dataclass(frozen=True)
class ChebCoeffs:
    """Chebyshev coefficients a_0 .. a_d of one threshold filter."""

    coeffs: np.ndarray
    meta: FilterMeta

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))


def _validate_window(c: float, delta: float, eta: float) -> None:
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    if not (0.0 < eta < 0.5):
        raise ParameterError(f"eta must be in (0, 1/2), got {eta}")
    if not (-1.0 < c - delta / 2 and c + delta / 2 < 1.0):
        raise ParameterError(
            f"gap [{c - delta / 2}, {c + delta / 2}] must lie inside (-1, 1)")


def smoothing_rate(delta: float, eta: float) -> float:
    """kappa = (2/Delta) erfcinv(2 eta) for the erfc-smoothed step."""
    return float(2.0 * erfcinv(2.0 * eta) / delta)


def default_degree(delta: float, eta: float) -> int:
    """Degree heuristic ceil((2/Delta) ln(1/eta)); plateau error ~ eta."""
    return max(2, math.ceil((2.0 / delta) * math.log(1.0 / eta)))


def coefficient_batch(cs: np.ndarray, delta: float, eta: float, d: int) -> np.ndarray:
    """Coefficient rows for many thresholds at once (shape (len(cs), d+1))."""
    cs = np.atleast_1d(np.asarray(cs, dtype=float))
    kappa = smoothing_rate(delta, eta)
    n = d + 1
    nodes = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    samples = 0.5 * erfc(kappa * (nodes[None, :] - cs[:, None]))
    return dct(samples, type=2, axis=1) / n


def shifted_sign_cheb(c: float, delta: float, eta: float, d: int,
                      check_quality: bool = True) -> ChebCoeffs:
    """Degree-d Chebyshev interpolant of the smoothed shifted step at c.

    When ``check_quality`` is set, the interpolant is compared against the
    hard step on a dense grid outside the gap; a deviation above 2 eta
    marks the result with a quality warning (degree too small for the
    requested Delta, eta).
    """
    _validate_window(c, delta, eta)
    if d < 2:
        raise ParameterError(f"degree must be >= 2, got {d}")
    coeffs = coefficient_batch(np.array([c]), delta, eta, d)[0]
    kappa = smoothing_rate(delta, eta)
    warning = False
    plateau_err = None
    if check_quality:
        grid = np.linspace(-1.0, 1.0, QUALITY_GRID_POINTS)
        outside = np.abs(grid - c) >= delta / 2
        step = (grid < c).astype(float)
        values = eval_cheb_on(coeffs, grid[outside])
        plateau_err = float(np.abs(values - step[outside]).max())
        warning = plateau_err > 2.0 * eta + 1e-12
    meta = FilterMeta(c=c, delta=delta, eta=eta, degree=d, kappa=kappa,
                      quality_warning=warning, max_plateau_error=plateau_err)
    return ChebCoeffs(coeffs=coeffs, meta=meta)


def eval_cheb_on(coeffs: np.ndarray, x) -> np.ndarray:
    """Clenshaw evaluation of a_0/2 + sum_k a_k T_k at points in [-1, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ParameterError("evaluation points must lie in [-1, 1]")
    series = np.asarray(coeffs, dtype=float).copy()
    series[0] *= 0.5
    return np.polynomial.chebyshev.chebval(np.clip(x, -1.0, 1.0), series)


def eval_cheb(filt: ChebCoeffs, x):
    """Evaluate a filter at a scalar or array of points."""
    out = eval_cheb_on(filt.coeffs, x)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def cheb_family(delta: float, eta: float, d: int, grid,
                check_quality: bool = False) -> list[ChebCoeffs]:
    """One filter per grid threshold, sharing (Delta, eta, d).

    Quality checking is off by default here: scan grids contain thousands
    of thresholds and the check costs O(d) per grid point.
    """
    grid = np.asarray(grid, dtype=float)
    for c in grid:
        _validate_window(float(c), delta, eta)
    if d < 2:
        raise ParameterError(f"degree must be >= 2, got {d}")
    if check_quality:
        return [shifted_sign_cheb(float(c), delta, eta, d, check_quality=True) for c in grid]
    rows = coefficient_batch(grid, delta, eta, d)
    kappa = smoothing_rate(delta, eta)
    return [
        ChebCoeffs(coeffs=row,
                   meta=FilterMeta(c=float(c), delta=delta, eta=eta, degree=d, kappa=kappa))
        for c, row in zip(grid, rows)
    ]
