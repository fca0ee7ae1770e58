import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from primekron.decomp import DecompClass, classify, gen_structured
from primekron.errors import IndivisibleError
from primekron.rectdecomp import classify_rect


def test_kron_of_rectangular_factors(rng):
    B, C = rng.normal(size=(2, 3)), rng.normal(size=(3, 2))
    rep = classify_rect(np.kron(B, C), 3, 2)
    assert rep.cls == DecompClass.T3
    assert rep.residual <= 1e-9
    np.testing.assert_allclose(np.kron(rep.factor_B, rep.factor_C), np.kron(B, C), atol=1e-9)


def test_non_bicommuting_diagonal_blocks():
    A = np.zeros((4, 4))
    A[:2, :2] = [[1, 0], [0, 0]]
    A[2:, 2:] = [[0, 1], [0, 0]]
    rep = classify_rect(A, 2, 2)
    assert rep.cls == DecompClass.NONE and rep.trail == [0]
    assert rep.failure.pair == ((0, 0), (1, 1))


@pytest.mark.parametrize("key", ["partial_diag", "partially_orth", "totally_orth"])
def test_reference_matrices_agree_with_hermitian_route(request, key):
    A = request.getfixturevalue(key)
    assert classify_rect(A, 2, 2).cls == classify(A, 2, 2).cls


def test_rect_indivisible():
    with pytest.raises(IndivisibleError):
        classify_rect(np.ones((6, 4)), 4, 2)


def test_rect_diag_singulars(rng):
    B, C = rng.normal(size=(2, 2)), rng.normal(size=(3, 2))
    rep = classify_rect(np.kron(B, C), 3, 2)
    assert rep.diag_singulars().shape == (2, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3), st.integers(2, 3), st.integers(2, 3))
def test_random_kron_is_t3(seed, m1, n1, m2, n2):
    rng = np.random.default_rng(seed)
    B, C = rng.normal(size=(m1, n1)), rng.normal(size=(m2, n2))
    rep = classify_rect(np.kron(B, C), m2, n2)
    assert rep.cls == DecompClass.T3
    assert rep.residual <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["T1", "T1HALF", "T2", "T3"]), st.integers(0, 10**6))
def test_consistency_with_hermitian_route(cls, seed):
    A = gen_structured(cls, 2, 2, seed)
    assert classify_rect(A, 2, 2).cls == classify(A, 2, 2).cls
