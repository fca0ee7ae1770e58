import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from primekron.decomp import DecompClass, classify, gen_structured
from primekron.errors import DimensionMismatchError, InvalidArgumentError, TermExplosionError
from primekron.fastmul import (
    Dense,
    KronSum,
    elimination_rank,
    kron_multiply,
    materialize,
    naive_multiply,
    pipeline_cost_audit,
    predicted_stage_costs,
)
from primekron.opcount import OpCount, commute_check_cost, matmul_cost


@pytest.mark.parametrize("n, mults, adds", [(4, 64, 48), (1, 1, 0), (2, 8, 4), (3, 27, 18)])
def test_naive_counts(rng, n, mults, adds):
    A, B = rng.normal(size=(n, n)), rng.normal(size=(n, n))
    P, c = naive_multiply(A, B)
    assert c == OpCount(mults, adds)
    np.testing.assert_allclose(P, A @ B, atol=1e-12)


def test_naive_rectangular_and_mismatch(rng):
    A, B = rng.normal(size=(2, 3)), rng.normal(size=(3, 4))
    P, c = naive_multiply(A, B)
    assert c == matmul_cost(2, 3, 4)
    with pytest.raises(DimensionMismatchError):
        naive_multiply(A, A)


def test_kron_multiply_order_16(rng):
    ops = []
    for _ in range(2):
        B, C = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
        ops.append(KronSum([(1.0, B, C)]))
    P, c = kron_multiply(*ops)
    assert c.mults == 2 * 4**3 == 128
    _, naive = naive_multiply(materialize(ops[0]), materialize(ops[1]))
    assert naive.mults == 4096
    np.testing.assert_allclose(materialize(P), materialize(ops[0]) @ materialize(ops[1]), atol=1e-10)


def test_kron_multiply_dense_fallback(rng):
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    P, c = kron_multiply(Dense(A), Dense(B))
    Q, c2 = naive_multiply(A, B)
    assert c == c2
    np.testing.assert_array_equal(P.matrix, Q)


def test_kron_multiply_identity():
    I = KronSum([(1.0, np.eye(2), np.eye(2))])
    P, c = kron_multiply(I, I)
    np.testing.assert_array_equal(materialize(P), np.eye(4))
    assert c.mults == 16


def test_kron_multiply_guards():
    big = KronSum([(1.0, np.eye(2), np.eye(2))] * 9)
    with pytest.raises(TermExplosionError):
        kron_multiply(big, big)
    with pytest.raises(DimensionMismatchError):
        KronSum([(1.0, np.eye(2), np.eye(2)), (1.0, np.eye(3), np.eye(3))])
    with pytest.raises(InvalidArgumentError):
        KronSum([])


def test_cost_model():
    assert commute_check_cost(2) == OpCount(16, 8)
    assert OpCount(1, 2) + OpCount(3, 4) == OpCount(4, 6)
    assert 3 * OpCount(1, 2) == OpCount(3, 6)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_elimination_counts_full_rank(rng, n):
    r, c = elimination_rank(rng.normal(size=(n, n)))
    assert r == n
    assert c == OpCount(n**3 - n**2, n**3 - 2 * n**2 + n)


def test_elimination_rank_deficient():
    r, _ = elimination_rank(np.outer([1, 2, 3], [1, 1, 1]))
    assert r == 1


@pytest.mark.parametrize("n, stage1, stage4", [(2, 16, 4), (3, 162, 18)])
def test_audit_exact_rows(n, stage1, stage4):
    audit = pipeline_cost_audit(n)
    rows = {r["stage"]: r for r in audit["rows"]}
    assert rows["stage1"]["measured"]["mults"] == rows["stage1"]["predicted"]["mults"] == stage1
    assert rows["stage4"]["measured"]["mults"] == rows["stage4"]["predicted"]["mults"] == stage4
    assert rows["stage1"]["measured"] == rows["stage1"]["predicted"]
    assert rows["stage4"]["measured"] == rows["stage4"]["predicted"]
    assert audit["alpha_rank"] == {"elimination": n, "svd": n}


def test_audit_flags_stage2_literal_family():
    rows = {r["stage"]: r for r in pipeline_cost_audit(2)["rows"]}
    assert rows["stage2"]["discrepancy"] and not rows["stage2"]["asserted"]
    assert rows["stage2"]["measured"]["mults"] == 48
    assert predicted_stage_costs(2)["stage2"].mults == 24
    with pytest.raises(InvalidArgumentError):
        pipeline_cost_audit(1)


def test_structured_path_from_generated_operands():
    A = gen_structured(DecompClass.T3, 4, 4, seed=1)
    B = gen_structured(DecompClass.T3, 4, 4, seed=2)
    ops = []
    for M in (A, B):
        t3 = classify(M, 4, 4).t3
        ops.append(KronSum([(1.0, t3.factor_B, t3.factor_C)]))
    P, c = kron_multiply(*ops)
    assert c.mults == 128
    np.testing.assert_allclose(materialize(P), A @ B, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 10**6))
def test_naive_count_formula(m, k, n, seed):
    rng = np.random.default_rng(seed)
    _, c = naive_multiply(rng.normal(size=(m, k)), rng.normal(size=(k, n)))
    assert c == matmul_cost(m, k, n)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 3), st.integers(2, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_kron_multiply_matches_dense(p, q, t1, t2, seed):
    rng = np.random.default_rng(seed)
    A = KronSum([(rng.normal(), rng.normal(size=(p, p)), rng.normal(size=(q, q))) for _ in range(t1)])
    B = KronSum([(rng.normal(), rng.normal(size=(p, p)), rng.normal(size=(q, q))) for _ in range(t2)])
    P, c = kron_multiply(A, B)
    np.testing.assert_allclose(materialize(P), materialize(A) @ materialize(B), atol=1e-9)
    assert c == t1 * t2 * (matmul_cost(p, p, p) + matmul_cost(q, q, q))
