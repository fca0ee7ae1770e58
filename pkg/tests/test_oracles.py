"""The frozen reference values are reproducible from the independent oracles."""

import numpy as np
import pytest

import oracles as O
from primekron.decomp import REFERENCE_MATRICES


def test_fold_value_matches_loops():
    np.testing.assert_allclose(O.block_fold_loops(O.PARTIAL_DIAG, 2), O.FOLD_PARTIAL_DIAG, atol=1e-15)


@pytest.mark.parametrize("A, frozen", [
    (O.PARTIALLY_ORTH, O.ALPHA_PARTIALLY_ORTH),
    (O.TOTALLY_ORTH, O.ALPHA_TOTALLY_ORTH),
])
def test_alpha_values_match_dense_spectrum(A, frozen):
    np.testing.assert_allclose(O.dense_spectrum(A), frozen, atol=1e-12)
    assert np.isclose(sum(frozen), np.trace(A))


def test_coefficients_reproduce_matrix():
    c1 = np.array([1, -1]) / np.sqrt(2)
    c2 = np.array([1, 1]) / np.sqrt(2)
    B1, B2 = O.COEFF_PARTIALLY_ORTH
    recon = np.kron(B1, np.outer(c1, c1)) + np.kron(B2, np.outer(c2, c2))
    np.testing.assert_allclose(recon, O.PARTIALLY_ORTH, atol=1e-15)


def test_commutator_counterexample():
    XY, YX = O.commutator_2x2([[1, .5], [.5, 1]], [[.2, .1], [.5, .2]])
    np.testing.assert_allclose(XY, [[.45, .2], [.6, .25]])
    np.testing.assert_allclose(YX, [[.25, .2], [.6, .45]])


@pytest.mark.parametrize("key, A", [
    ("partial-diagonalization", O.PARTIAL_DIAG),
    ("partially-orthogonal", O.PARTIALLY_ORTH),
    ("totally-orthogonal", O.TOTALLY_ORTH),
])
def test_package_reference_matrices_agree(key, A):
    np.testing.assert_array_equal(REFERENCE_MATRICES[key], A)


def test_goldbach_brute():
    assert O.goldbach_brute(10) == [(3, 7), (5, 5)]
    assert O.sieve(20) == [2, 3, 5, 7, 11, 13, 17, 19]
