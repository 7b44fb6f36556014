"""Tests for the threshold-filter construction and Chebyshev evaluation."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfc

from chebgsee import (
    ParameterError,
    cheb_family,
    default_degree,
    eval_cheb,
    shifted_sign_cheb,
    smoothing_rate,
)
from chebgsee.filters import ChebCoeffs, FilterMeta, eval_cheb_on


def _pure(degree_index, length):
    coeffs = np.zeros(length)
    coeffs[degree_index] = 1.0
    return ChebCoeffs(coeffs=coeffs,
                      meta=FilterMeta(c=0.0, delta=0.5, eta=0.1, degree=length - 1, kappa=1.0))


def test_eval_pure_t3():
    filt = _pure(3, 5)
    assert eval_cheb(filt, 0.5) == pytest.approx(-1.0, abs=1e-14)


def test_eval_at_one_sums_coefficients(rng):
    coeffs = rng.standard_normal(8)
    filt = ChebCoeffs(coeffs=coeffs,
                      meta=FilterMeta(c=0.0, delta=0.5, eta=0.1, degree=7, kappa=1.0))
    assert eval_cheb(filt, 1.0) == pytest.approx(coeffs[0] / 2 + coeffs[1:].sum(), abs=1e-12)


def test_eval_domain_error():
    with pytest.raises(ParameterError):
        eval_cheb(_pure(1, 3), 1.5)


def test_midpoint_value_half():
    for c in (-0.4, 0.0, 0.3):
        filt = shifted_sign_cheb(c, 0.2, 0.05, 200)
        assert eval_cheb(filt, c) == pytest.approx(0.5, abs=1e-6)


def test_zero_threshold_parity():
    filt = shifted_sign_cheb(0.0, 0.2, 0.05, 151)
    even = filt.coeffs[2::2]
    assert np.abs(even).max() < 1e-12
    assert filt.coeffs[0] == pytest.approx(1.0, abs=1e-12)


def test_coefficient_bounds_uniform():
    cases = [(-0.5, 0.3, 0.1, 80), (0.0, 0.1, 0.01, 200), (-0.2, 0.5, 0.25, 40),
             (-0.8, 0.15, 0.05, 150)]
    for c, delta, eta, d in cases:
        filt = shifted_sign_cheb(c, delta, eta, d, check_quality=False)
        assert abs(filt.coeffs[0]) <= 1.0 + 1e-9
        assert np.abs(filt.coeffs[1:]).max() <= 4.0 / math.pi + 1e-9


def test_geometric_tail_small_kappa():
    # The 1e-8 tail level is reached near 7*kappa for large kappa; beyond
    # 2*kappa + 20 it requires the additive margin to dominate, i.e. the
    # wide-gap regime kappa <~ 3.
    for c, delta, eta in [(-0.3, 0.5, 0.2), (0.0, 0.6, 0.1), (-0.5, 0.4, 0.25)]:
        kappa = smoothing_rate(delta, eta)
        assert kappa <= 3.3
        filt = shifted_sign_cheb(c, delta, eta, 400, check_quality=False)
        cutoff = int(math.floor(2 * kappa + 20))
        assert np.abs(filt.coeffs[cutoff + 1:]).max() < 1e-8


def test_interpolation_reproduces_target_at_nodes():
    c, delta, eta, d = -0.3, 0.2, 0.05, 120
    filt = shifted_sign_cheb(c, delta, eta, d, check_quality=False)
    kappa = smoothing_rate(delta, eta)
    nodes = np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1))
    target = 0.5 * erfc(kappa * (nodes - c))
    np.testing.assert_allclose(eval_cheb(filt, nodes), target, atol=1e-12)


def test_coefficients_match_quadrature_oracle():
    # a_k = (2/pi) * integral f(cos t) cos(k t) dt, the projection the DCT
    # sampling approximates; at degree >> kappa they agree to aliasing level.
    c, delta, eta = -0.2, 0.4, 0.1
    kappa = smoothing_rate(delta, eta)
    filt = shifted_sign_cheb(c, delta, eta, 200, check_quality=False)
    for k in (0, 1, 2, 5, 11):
        val, _ = quad(lambda t: erfc(kappa * (math.cos(t) - c)) / 2 * math.cos(k * t),
                      0.0, math.pi, limit=200)
        assert filt.coeffs[k] == pytest.approx(2.0 / math.pi * val, abs=1e-10)


def test_coefficients_match_numpy_chebinterpolate():
    c, delta, eta, d = -0.4, 0.3, 0.1, 60
    kappa = smoothing_rate(delta, eta)
    ours = shifted_sign_cheb(c, delta, eta, d, check_quality=False).coeffs
    ref = np.polynomial.chebyshev.chebinterpolate(
        lambda x: 0.5 * erfc(kappa * (x - c)), d)
    np.testing.assert_allclose(ours[1:], ref[1:], atol=1e-12)
    assert ours[0] == pytest.approx(2.0 * ref[0], abs=1e-12)


def test_plateau_residuals_at_default_degree():
    delta, eta = 0.1, 0.01
    d = default_degree(delta, eta)
    assert d == math.ceil((2.0 / delta) * math.log(1.0 / eta))
    filt = shifted_sign_cheb(-0.1, delta, eta, d, check_quality=False)
    grid = np.linspace(-1.0, 1.0, 10_000)
    values = eval_cheb(filt, grid)
    left = grid <= -0.1 - delta / 2
    right = grid >= -0.1 + delta / 2
    assert np.all(values[left] >= 1.0 - 2 * eta)
    assert np.all(values[left] <= 1.0 + 2 * eta)
    assert np.abs(values[right]).max() <= 2 * eta


def test_quality_warning_for_small_degree():
    good = shifted_sign_cheb(-0.2, 0.1, 0.01, default_degree(0.1, 0.01))
    assert not good.meta.quality_warning
    bad = shifted_sign_cheb(-0.2, 0.1, 0.01, 12)
    assert bad.meta.quality_warning
    assert bad.meta.max_plateau_error > 2 * 0.01


def test_family_shares_parameters():
    family = cheb_family(0.3, 0.1, 50, [-0.5, 0.0, 0.5])
    assert len(family) == 3
    assert {f.meta.delta for f in family} == {0.3}
    assert {f.meta.degree for f in family} == {50}


def test_family_monotone_in_threshold():
    delta, eta, d = 0.2, 0.05, 120
    family = cheb_family(delta, eta, d, [-0.4, -0.1, 0.2])
    grid = np.linspace(-0.95, 0.95, 500)
    for lower, upper in zip(family, family[1:]):
        lo = eval_cheb_on(lower.coeffs, grid)
        hi = eval_cheb_on(upper.coeffs, grid)
        assert np.all(lo <= hi + 4 * eta)


def test_family_grid_size_arithmetic():
    delta = 0.125
    grid = np.arange(-1.0 + delta, 1.0 - delta + delta / 2, delta)
    assert len(grid) == math.floor((2.0 - 2.0 * delta) / delta) + 1
    family = cheb_family(delta, 0.1, 30, grid)
    assert len(family) == len(grid)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        shifted_sign_cheb(0.95, 0.2, 0.1, 50)  # gap leaves (-1, 1)
    with pytest.raises(ParameterError):
        shifted_sign_cheb(0.0, 0.2, 0.6, 50)  # eta out of range
    with pytest.raises(ParameterError):
        shifted_sign_cheb(0.0, 1.5, 0.1, 50)  # delta out of range
    with pytest.raises(ParameterError):
        shifted_sign_cheb(0.0, 0.2, 0.1, 1)  # degree too small
    with pytest.raises(ParameterError):
        cheb_family(0.2, 0.1, 50, [0.0, 0.97])
