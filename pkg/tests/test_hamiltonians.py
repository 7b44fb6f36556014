"""Tests for model construction: TFIM MPOs, Pauli sums, normalization."""

import numpy as np
import pytest

from chebgsee import (
    DenseSystem,
    Mps,
    ParameterError,
    PauliSum,
    StructuralError,
    apply_mpo,
    normalize_pauli_sum,
    paulisum_to_mpo,
    tfim_1d,
    tfim_2d,
    to_dense,
)
from conftest import X, Z, embed, mpo_matrix_by_bitstrings, tfim_1d_dense


def test_tfim_1d_pure_coupling_spectrum():
    ham = tfim_1d(2, 1.0, 0.0)
    assert ham.scale == pytest.approx(1.0)
    eigs = np.linalg.eigvalsh(mpo_matrix_by_bitstrings(ham.mpo))
    np.testing.assert_allclose(eigs, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)


def test_tfim_1d_pure_field_spectrum():
    ham = tfim_1d(2, 0.0, 1.0)
    assert ham.scale == pytest.approx(2.0)
    eigs = np.linalg.eigvalsh(mpo_matrix_by_bitstrings(ham.mpo))
    np.testing.assert_allclose(eigs, [-1.0, 0.0, 0.0, 1.0], atol=1e-12)


@pytest.mark.parametrize("L", [2, 3, 5, 9])
def test_tfim_1d_bond_dimension(L):
    ham = tfim_1d(L, 1.0, 1.0)
    assert ham.growth_factor == 3
    assert max(ham.mpo.bond_dims) <= 3


@pytest.mark.parametrize("L,J,h", [(2, 1.0, 1.0), (4, 1.3, 0.4), (6, 0.5, 2.0)])
def test_tfim_1d_matches_kron_reference(L, J, h):
    ham = tfim_1d(L, J, h)
    np.testing.assert_allclose(
        mpo_matrix_by_bitstrings(ham.mpo), tfim_1d_dense(L, J, h), atol=1e-12)


def test_tfim_1d_needs_two_sites():
    with pytest.raises(ParameterError):
        tfim_1d(1, 1.0, 1.0)


def _tfim_2d_dense(L, J, h):
    """Independent 2D reference built straight from the lattice definition."""
    n = L * L

    def snake(r, c):
        return r * L + (c if r % 2 == 0 else L - 1 - c)

    H = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for r in range(L):
        for c in range(L):
            if c + 1 < L:
                H -= J * embed(n, {snake(r, c): X, snake(r, c + 1): X})
            if r + 1 < L:
                H -= J * embed(n, {snake(r, c): X, snake(r + 1, c): X})
    for p in range(n):
        H -= h * embed(n, {p: Z})
    return H / (J * 2 * L * (L - 1) + h * n)


def test_tfim_2d_l2_matches_brute_force():
    ham = tfim_2d(2, 1.0, 1.0)
    np.testing.assert_allclose(
        mpo_matrix_by_bitstrings(ham.mpo), _tfim_2d_dense(2, 1.0, 1.0), atol=1e-12)


def test_tfim_2d_l3_ground_energy():
    ham = tfim_2d(3, 1.0, 3.0)
    reference = np.linalg.eigvalsh(_tfim_2d_dense(3, 1.0, 3.0))[0]
    lam0, _ = DenseSystem(ham).ground()
    assert lam0 == pytest.approx(reference, abs=1e-10)


def test_tfim_2d_edge_counts():
    assert len([t for t in tfim_2d(2, 1.0, 1.0).pauli_sum.terms if "X" in t[1]]) == 4
    assert len([t for t in tfim_2d(3, 1.0, 1.0).pauli_sum.terms if "X" in t[1]]) == 12


@pytest.mark.parametrize("L", [2, 3, 4])
def test_tfim_2d_bond_dimension(L):
    assert tfim_2d(L, 1.0, 3.0).growth_factor <= L + 2


def test_single_string_mpo_bond_one():
    ps = PauliSum.from_terms([(1.0, "ZII")], 3)
    mpo = paulisum_to_mpo(ps)
    assert mpo.growth_factor == 1
    np.testing.assert_allclose(
        mpo_matrix_by_bitstrings(mpo), embed(3, {0: Z}), atol=1e-14)


def test_paulisum_bond_grows_with_terms(rng):
    terms = [(1.0, "XZI"), (0.5, "IYZ"), (-0.25, "ZZZ"), (2.0, "XIX")]
    mpo = paulisum_to_mpo(PauliSum.from_terms(terms, 3))
    assert mpo.growth_factor <= len(terms)


def test_paulisum_tfim_agrees_with_direct_construction(rng):
    L = 6
    ham = tfim_1d(L, 1.0, 1.0)
    mpo = paulisum_to_mpo(ham.pauli_sum, compress_tol=1e-12)
    assert mpo.growth_factor == 3  # compression recovers the automaton rank
    psi = Mps.random(L, 4, rng=rng)
    np.testing.assert_allclose(
        to_dense(apply_mpo(mpo, psi)), to_dense(apply_mpo(ham.mpo, psi)), atol=1e-10)


def test_paulisum_dense_action(rng):
    from conftest import PAULI, kron_chain

    terms = [(0.7, "XYZIZ"), (-1.2, "ZZIII"), (0.3, "IIXXI"), (0.9, "YIYIY")]
    mpo = paulisum_to_mpo(PauliSum.from_terms(terms, 5), compress_tol=1e-13)
    reference = np.zeros((32, 32), dtype=complex)
    for coeff, labels in terms:
        reference += coeff * kron_chain([PAULI[ch] for ch in labels])
    vec = to_dense(Mps.random(5, 4, rng=rng))
    np.testing.assert_allclose(mpo_matrix_by_bitstrings(mpo) @ vec, reference @ vec, atol=1e-10)


def test_spectrum_contained_after_normalization():
    for ham in (tfim_1d(8, 1.0, 1.0), tfim_1d(6, 2.0, 0.3), tfim_2d(2, 1.0, 3.0)):
        eigs = np.linalg.eigvalsh(DenseSystem(ham).matrix())
        assert eigs.min() >= -1.0 - 1e-12
        assert eigs.max() <= 1.0 + 1e-12


def test_scale_monotonicity():
    assert tfim_1d(10, 1.0, 1.0).scale > tfim_1d(8, 1.0, 1.0).scale
    assert tfim_1d(8, 2.0, 1.0).scale > tfim_1d(8, 1.0, 1.0).scale
    assert tfim_1d(8, 1.0, 2.0).scale > tfim_1d(8, 1.0, 1.0).scale


def test_pauli_text_roundtrip():
    ps = PauliSum.from_terms([(0.5, "XYZ"), (-1.25, "ZIZ")], 3)
    again = PauliSum.from_text(ps.to_text())
    assert again == ps


def test_pauli_text_rejects_garbage():
    with pytest.raises(ParameterError):
        PauliSum.from_text("0.5 XY extra\n")
    with pytest.raises(ParameterError):
        PauliSum.from_text("notanumber XY\n")
    with pytest.raises(ParameterError):
        PauliSum.from_text("# only a comment\n")


def test_pauli_validation():
    with pytest.raises(StructuralError):
        PauliSum.from_terms([(1.0, "XY")], 3)
    with pytest.raises(ParameterError):
        PauliSum.from_terms([(0.0, "XYZ")], 3)
    with pytest.raises(ParameterError):
        PauliSum.from_terms([(1.0, "XQZ")], 3)
    with pytest.raises(ParameterError):
        PauliSum.from_terms([], 3)


def test_normalize_pauli_sum_contains_spectrum():
    ps = PauliSum.from_terms([(3.0, "ZZ"), (-2.0, "XI"), (1.0, "IY")], 2)
    ham = normalize_pauli_sum(ps)
    assert ham.scale == pytest.approx(6.0)
    eigs = np.linalg.eigvalsh(DenseSystem(ham).matrix())
    assert np.all(np.abs(eigs) <= 1.0 + 1e-12)


def test_empty_sum_rejected():
    with pytest.raises(ParameterError):
        PauliSum(tuple(), 3)
