"""Ground-state energy estimation from moment sequences.

The cumulative function C(x) = a_0(x)/2 + sum_k a_k(x) mu_k rises by
|c_i|^2 at each eigenvalue; comparing it against the threshold chi^2/2
locates the ground energy.  Two drivers share this machinery: a grid scan
over thresholds spaced by the gap width, and the interval-shrinking binary
search that tests one threshold per iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ParameterError, ThresholdNotBracketedError
from .filters import ChebCoeffs, coefficient_batch, default_degree

ETA_FRACTION = 0.125  # filter error target eta = chi^2 * ETA_FRACTION
_TRACE_MAX_POINTS = 4001
_BATCH_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class GseeResult:
    """An energy interval in normalized units plus the evidence behind it.

    ``interval`` has width ``delta`` and midpoint ``c_star``.  ``c_trace``
    is a sampled (x, C(x)) record suitable for plotting.  Multiply
    normalized energies by ``scale_back`` to recover raw model units.
    """

    interval: tuple[float, float]
    c_star: float
    c_trace: np.ndarray
    chi_used: float
    delta: float
    degree: int
    threshold: float
    threshold_value: float
    scale_back: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def midpoint(self) -> float:
        return self.c_star

    @property
    def interval_raw(self) -> tuple[float, float]:
        lo, hi = self.interval
        return lo * self.scale_back, hi * self.scale_back

    def to_dict(self) -> dict:
        return {
            "interval": list(self.interval),
            "c_star": self.c_star,
            "chi_used": self.chi_used,
            "delta": self.delta,
            "degree": self.degree,
            "threshold": self.threshold,
            "threshold_value": self.threshold_value,
            "scale_back": self.scale_back,
            "meta": self.meta,
        }


def _moment_array(moments) -> np.ndarray:
    return np.asarray(getattr(moments, "moments", moments), dtype=float)


def cumulative(moments, family: list[ChebCoeffs]) -> list[tuple[float, float]]:
    """C(x) for each filter in a family, as (x, C) pairs."""
    mu = _moment_array(moments)
    out = []
    for filt in family:
        d = filt.degree
        if d > len(mu) - 1:
            raise ParameterError(
                f"filter degree {d} exceeds available moment degree {len(mu) - 1}")
        value = 0.5 * filt.coeffs[0] + float(filt.coeffs[1:] @ mu[1:d + 1])
        out.append((filt.meta.c, value))
    return out


def _scan_grid(delta: float) -> np.ndarray:
    count = int(round(2.0 / delta)) - 1
    if count < 1:
        raise ParameterError(f"gap width {delta} leaves no interior grid points")
    return -1.0 + delta * np.arange(1, count + 1)


def cumulative_scan(moments, delta: float, d: int, eta: float) -> tuple[np.ndarray, np.ndarray]:
    """C(x) on the grid {-1+delta, ..., 1-delta}, batched over thresholds."""
    mu = _moment_array(moments)
    if d > len(mu) - 1:
        raise ParameterError(f"degree {d} exceeds available moment degree {len(mu) - 1}")
    grid = _scan_grid(delta)
    values = np.empty_like(grid)
    chunk = max(1, _BATCH_ELEMENTS // (d + 1))
    for lo in range(0, len(grid), chunk):
        block = grid[lo:lo + chunk]
        coeffs = coefficient_batch(block, delta, eta, d)
        values[lo:lo + len(block)] = 0.5 * coeffs[:, 0] + coeffs[:, 1:] @ mu[1:d + 1]
    return grid, values


def _sample_trace(grid: np.ndarray, values: np.ndarray, keep_index: int) -> np.ndarray:
    stride = max(1, math.ceil(len(grid) / (_TRACE_MAX_POINTS - 1)))
    idx = np.arange(0, len(grid), stride)
    if keep_index not in idx:
        idx = np.sort(np.append(idx, keep_index))
    return np.column_stack([grid[idx], values[idx]])


def estimate_energy(moments, chi: float, delta: float, d: int,
                    eta: float | None = None, scale_back: float = 1.0) -> GseeResult:
    """Grid-scan estimate: the threshold where C(x) is nearest chi^2/2.

    Returns the interval [x - delta/2, x + delta/2] around the selected
    grid point.  Raises when C never crosses the threshold anywhere on the
    scanned window.
    """
    if not (0.0 < chi <= 1.0):
        raise ParameterError(f"chi must be in (0, 1], got {chi}")
    if eta is None:
        eta = ETA_FRACTION * chi ** 2
    grid, values = cumulative_scan(moments, delta, d, eta)
    threshold = 0.5 * chi ** 2
    signs = values - threshold
    if np.all(signs > 0.0) or np.all(signs < 0.0):
        raise ThresholdNotBracketedError(
            f"C(x) stays on one side of the threshold {threshold:.3e}: "
            "ground state outside scanned window")
    best = int(np.argmin(np.abs(signs)))
    c_star = float(grid[best])
    return GseeResult(
        interval=(c_star - delta / 2, c_star + delta / 2),
        c_star=c_star,
        c_trace=_sample_trace(grid, values, best),
        chi_used=chi,
        delta=delta,
        degree=d,
        threshold=threshold,
        threshold_value=float(values[best]),
        scale_back=scale_back,
        meta={"eta": eta, "grid_points": len(grid), "driver": "scan"},
    )


def filter_value(moments, c: float, delta: float, eta: float, d: int) -> float:
    """<psi|P_{eta,delta,c}(H)|psi> evaluated from moments."""
    mu = _moment_array(moments)
    if d > len(mu) - 1:
        raise ParameterError(f"degree {d} exceeds available moment degree {len(mu) - 1}")
    coeffs = coefficient_batch(np.array([c]), delta, eta, d)[0]
    return float(0.5 * coeffs[0] + coeffs[1:] @ mu[1:d + 1])


def binary_search_energy(moment_provider, chi: float, eps: float,
                         eta: float | None = None, scale_back: float = 1.0) -> GseeResult:
    """Interval-shrinking search on [-1, 1] down to width 2*eps.

    Each iteration tests the midpoint threshold with gap (r - l)/3 and a
    degree sized for that gap; the interval keeps the side the test
    selects, shrinking by 2/3 per step.  ``moment_provider(d)`` must return
    a moment sequence of degree at least d.
    """
    if not (0.0 < chi <= 1.0):
        raise ParameterError(f"chi must be in (0, 1], got {chi}")
    if eps <= 0.0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if eta is None:
        eta = ETA_FRACTION * chi ** 2
    threshold = 0.5 * chi ** 2
    lo, hi = -1.0, 1.0
    tested = []
    degree = 0
    while hi - lo > 2.0 * eps:
        c = 0.5 * (lo + hi)
        gap = (hi - lo) / 3.0
        degree = default_degree(gap, eta)
        mu = _moment_array(moment_provider(degree))
        if len(mu) - 1 < degree:
            raise CapacityError(
                f"moment provider returned degree {len(mu) - 1}, needed {degree}")
        value = filter_value(mu, c, gap, eta, degree)
        tested.append((c, value))
        if value >= threshold:
            hi = (lo + 2.0 * hi) / 3.0
        else:
            lo = (2.0 * lo + hi) / 3.0
    width = hi - lo
    return GseeResult(
        interval=(lo, hi),
        c_star=0.5 * (lo + hi),
        c_trace=np.array(tested) if tested else np.zeros((0, 2)),
        chi_used=chi,
        delta=width,
        degree=degree,
        threshold=threshold,
        threshold_value=tested[-1][1] if tested else math.nan,
        scale_back=scale_back,
        meta={"eta": eta, "iterations": len(tested), "driver": "binary-search"},
    )
