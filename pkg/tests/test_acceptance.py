"""Acceptance criteria AC1-AC11; a PASS/FAIL line per criterion is printed in the
terminal summary (see conftest.py).
"""

import numpy as np
import pytest

import oracles as O
from primekron.blocking import rearrange
from primekron.decomp import DecompClass, classify, gen_structured, recursive_decompose
from primekron.densecore import commutes, dagger, offdiag_norm, rank, simultaneous_diag
from primekron.fastmul import KronSum, kron_multiply, naive_multiply, pipeline_cost_audit
from primekron.numtheory import is_prime
from primekron.quasiprime import goldbach_split, orthogonality_residuals
from primekron.rectdecomp import classify_rect

CLASSES = [DecompClass.T1, DecompClass.T1HALF, DecompClass.T2, DecompClass.T3]
SHAPES = [(2, 2), (2, 3), (3, 3)]


def match_up_to_order(found, expected, atol):
    left = list(range(len(found)))
    for E in expected:
        hit = [i for i in left if np.allclose(found[i], E, atol=atol, rtol=0)]
        assert hit, f"no coefficient matches {E}"
        left.remove(hit[0])


@pytest.mark.criterion(1, "partial-diagonalization example is T1, fails at blocks (1,1)/(1,2)")
def test_ac1_partial_diagonalization():
    A = O.PARTIAL_DIAG
    A11, A12 = A[:2, :2], A[:2, 2:]
    XY, YX = O.commutator_2x2(A11, A12)
    np.testing.assert_allclose(XY, [[.45, .2], [.6, .25]], atol=1e-15)
    np.testing.assert_allclose(YX, [[.25, .2], [.6, .45]], atol=1e-15)
    assert not commutes(A11, A12)

    rep = classify(A, 2, 2)
    assert rep.cls == DecompClass.T1
    assert rep.trail == [1, 0]
    assert np.linalg.norm(A - rep.reconstruction()) / np.linalg.norm(A) <= 1e-10
    assert rep.residual <= 1e-10
    assert rep.failure.stage == DecompClass.T1HALF
    assert rep.failure.pair == ((0, 0), (0, 1))
    assert "blocks (1,1) and (1,2)" in str(rep.failure)


@pytest.mark.criterion(2, "partially-orthogonal example is T2 with the expected coefficient matrices")
def test_ac2_partially_orthogonal():
    A = O.PARTIALLY_ORTH
    rep = classify(A, 2, 2)
    assert rep.cls == DecompClass.T2
    coeff = rep.t1half.coeff
    np.testing.assert_allclose(coeff.imag, 0, atol=1e-10)
    match_up_to_order(coeff.real, O.COEFF_PARTIALLY_ORTH, atol=1e-10)
    alpha = np.sort(rep.t2.alpha.ravel())
    np.testing.assert_allclose(alpha, O.ALPHA_PARTIALLY_ORTH, atol=1e-10, rtol=0)
    np.testing.assert_allclose(alpha, O.dense_spectrum(A), atol=1e-10, rtol=0)
    assert abs(alpha.sum() - np.trace(A)) <= 1e-10
    assert abs(alpha.sum() - 4.0) <= 1e-10


@pytest.mark.criterion(3, "totally-orthogonal example is T2 (not T3) with a discrepancy note")
def test_ac3_totally_orthogonal():
    A = O.TOTALLY_ORTH
    rep = classify(A, 2, 2)
    assert rep.cls == DecompClass.T2
    assert rep.cls != DecompClass.T3
    alpha = np.sort(rep.t2.alpha.ravel())
    np.testing.assert_allclose(alpha, O.ALPHA_TOTALLY_ORTH, atol=1e-10, rtol=0)
    np.testing.assert_allclose(alpha, O.dense_spectrum(A), atol=1e-10, rtol=0)
    notes = " ".join(rep.notes)
    assert "totally orthogonal" in notes and "T3" in notes and "rank 2" in notes


@pytest.mark.criterion(4, "the 4x4 example is not a single Kronecker product of 2x2 factors")
def test_ac4_not_single_kronecker():
    A = O.PARTIAL_DIAG
    R = rearrange(A, 2, 2)
    np.testing.assert_array_equal(R, O.rearrange_loops(A, 2, 2))
    assert rank(R) >= 2
    assert np.linalg.svd(R, compute_uv=False)[1] > 1e-3
    rep = classify(A, 2, 2)
    assert rep.cls < DecompClass.T3 and rep.t3 is None


@pytest.mark.criterion(5, "identity of order 4 is T3 and factors back exactly")
def test_ac5_identity():
    rep = classify(np.eye(4), 2, 2)
    assert rep.cls == DecompClass.T3
    np.testing.assert_allclose(np.kron(rep.t3.factor_B, rep.t3.factor_C), np.eye(4), atol=1e-12, rtol=0)


@pytest.mark.criterion(6, "generator round-trip over 4 classes x 3 shapes x 100 seeds")
@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: f"{s[0]}x{s[1]}")
@pytest.mark.parametrize("cls", CLASSES, ids=lambda c: c.name)
def test_ac6_generator_roundtrip(cls, shape):
    a, b = shape
    bad = []
    for seed in range(100):
        rep = classify(gen_structured(cls, a, b, seed), a, b)
        if rep.cls < cls or rep.residual > 1e-9:
            bad.append((seed, rep.cls.name, rep.residual))
    assert not bad


@pytest.mark.criterion(7, "exact op counts: naive multiply, stage 1 and 4 audit, order-16 structured multiply")
def test_ac7_op_counts():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        _, c = naive_multiply(rng.normal(size=(n, n)), rng.normal(size=(n, n)))
        assert (c.mults, c.adds) == (n**3, n**3 - n**2)
    for n in (2, 3):
        rows = {r["stage"]: r for r in pipeline_cost_audit(n)["rows"]}
        assert rows["stage1"]["measured"]["mults"] == n**5 - n**4
        assert rows["stage4"]["measured"]["mults"] == n**3 - n**2
    ops = []
    for seed in (1, 2):
        rep = classify(gen_structured(DecompClass.T3, 4, 4, seed), 4, 4)
        assert rep.cls == DecompClass.T3
        ops.append(KronSum([(1.0, rep.t3.factor_B, rep.t3.factor_C)]))
    _, structured = kron_multiply(*ops)
    _, naive = naive_multiply(np.kron(ops[0].terms[0][1], ops[0].terms[0][2]),
                              np.kron(ops[1].terms[0][1], ops[1].terms[0][2]))
    assert structured.mults == 128
    assert naive.mults == 4096


@pytest.mark.criterion(8, "Goldbach split of random full-rank orders 6, 10, 16")
@pytest.mark.parametrize("n", [6, 10, 16])
def test_ac8_goldbach_split(n):
    rng = np.random.default_rng(n)
    A = rng.normal(size=(n, n))
    assert rank(A) == n
    s = goldbach_split(A)
    assert np.linalg.norm(A - s.part1 - s.part2) <= 1e-12 * np.linalg.norm(A)
    r1, r2 = orthogonality_residuals(s.part1, s.part2)
    assert r1 <= 1e-10 and r2 <= 1e-10
    assert s.ranks == (s.p, s.q)
    assert is_prime(s.p) and is_prime(s.q) and s.p + s.q == n
    if n == 10:
        assert (s.p, s.q) == (3, 7)


@pytest.mark.criterion(9, "triple Kronecker product of order 8 gives a depth-3 all-T3 tree")
def test_ac9_recursion():
    rng = np.random.default_rng(9)
    H = [O.random_hermitian(2, rng) for _ in range(3)]
    tree = recursive_decompose(np.kron(np.kron(H[0], H[1]), H[2]))
    assert tree.depth() == 3
    internal = [node for node in tree.nodes() if node.report is not None]
    assert [node.order for node in internal] == [8, 4]
    assert all(node.report.cls == DecompClass.T3 for node in internal)
    assert all(node.report.residual <= 1e-9 for node in internal)
    assert {leaf.order for leaf in tree.leaves()} == {2}
    # exponent 3: the order is 2^3 and every level peels one factor of order 2
    assert 2 ** (tree.depth()) == 8


@pytest.mark.criterion(10, "rectangular route agrees with the Hermitian route; 2x3 (x) 3x2 is T3")
def test_ac10_rect_consistency():
    disagree = []
    for i in range(100):
        cls = CLASSES[i % 4]
        a, b = SHAPES[(i // 4) % 3]
        A = gen_structured(cls, a, b, seed=1000 + i)
        h, r = classify(A, a, b).cls, classify_rect(A, b, b).cls
        if h != r:
            disagree.append((i, h.name, r.name))
    assert not disagree
    rng = np.random.default_rng(10)
    B, C = rng.normal(size=(2, 3)), rng.normal(size=(3, 2))
    rep = classify_rect(np.kron(B, C), 3, 2)
    assert rep.cls == DecompClass.T3 and rep.residual <= 1e-9


@pytest.mark.criterion(11, "joint diagonalization of 100 commuting families leaks <= 1e-9")
def test_ac11_simultaneous_diag():
    rng = np.random.default_rng(11)
    worst = 0.0
    for trial in range(100):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(1, 5))
        U = O.random_unitary(n, rng)
        levels = rng.normal(size=3)
        fam = []
        for _ in range(k):
            d = levels[rng.integers(0, 3, size=n)]  # repeated eigenvalues
            M = (U * d) @ dagger(U)
            fam.append((M + dagger(M)) / 2)
        C = simultaneous_diag(fam, seed=trial)
        np.testing.assert_allclose(dagger(C) @ C, np.eye(n), atol=1e-12)
        worst = max(worst, max(offdiag_norm(dagger(C) @ M @ C) for M in fam))
    assert worst <= 1e-9
