"""Dense complex kernels: eigen/singular decompositions, rank, commutativity
tests and joint diagonalization of commuting families.

All matrices are plain 2-D numpy arrays. Inputs are promoted to ``complex128``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegeneracyError,
    DimensionMismatchError,
    InvalidArgumentError,
    NotCommutingError,
    NotHermitianError,
)

PROBE_RETRIES = 8
_MAX_SPLIT_DEPTH = 6
_ROUND_DIGITS = 12


@dataclass(frozen=True)
class Tolerance:
    """Relative and absolute thresholds used by every numerical predicate."""

    rel: float = 1e-10
    abs: float = 1e-12

    def __post_init__(self):
        for name in ("rel", "abs"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidArgumentError(f"tolerance {name} must be finite and >= 0, got {v}")

    @classmethod
    def from_rel(cls, rel: float) -> "Tolerance":
        return cls(rel=rel, abs=rel * 1e-2)

    def small(self, value: float, scale: float) -> bool:
        return value <= self.rel * scale + self.abs


DEFAULT_TOL = Tolerance()


class HermEig(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


class Svd(NamedTuple):
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray


def as_matrix(A) -> np.ndarray:
    M = np.array(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidArgumentError(f"expected a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return M


def fro(A) -> float:
    return float(np.linalg.norm(A))


def dagger(A) -> np.ndarray:
    return np.conj(A).T


def is_hermitian(A, tol: Tolerance = DEFAULT_TOL) -> bool:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    return tol.small(fro(A - dagger(A)), fro(A))


def require_hermitian(A, tol: Tolerance = DEFAULT_TOL, what="matrix"):
    if not is_hermitian(A, tol):
        raise NotHermitianError(f"{what} is not Hermitian")


def offdiag_norm(M) -> float:
    """Frobenius norm of everything off the (rectangular) main diagonal."""
    M = np.asarray(M)
    k = min(M.shape)
    d = np.zeros(M.shape, dtype=M.dtype)
    idx = np.arange(k)
    d[idx, idx] = M[idx, idx]
    return fro(M - d)


def _phase_anchor(v) -> int:
    """Index of the first entry whose magnitude is within rounding of the maximum."""
    mag = np.abs(v)
    top = mag.max()
    return int(np.flatnonzero(mag >= top * (1 - 1e-9))[0])


def column_phases(V) -> np.ndarray:
    """Unit phases ``z`` such that ``V * z`` has each column's largest entry real positive."""
    z = np.ones(V.shape[1], dtype=np.complex128)
    for j in range(V.shape[1]):
        v = V[:, j]
        if not np.any(v):
            continue
        x = v[_phase_anchor(v)]
        z[j] = np.conj(x) / abs(x)
    return z


def fix_phase(V) -> np.ndarray:
    return V * column_phases(V)


def herm_eig(A, tol: Tolerance = DEFAULT_TOL) -> HermEig:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    Eigenvectors are phase-fixed so their largest-magnitude entry is real
    and positive.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"herm_eig needs a square matrix, got {A.shape}")
    require_hermitian(A, tol)
    A = (A + dagger(A)) / 2
    w, V = np.linalg.eigh(A)
    return HermEig(w, fix_phase(V))


def svd(A) -> Svd:
    """Full SVD ``A = U diag(s) V*`` with ``s`` descending and phase-fixed pairs."""
    A = as_matrix(A)
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    U, V = _fix_pair_phases(U, dagger(Vh), len(s))
    return Svd(U, s, V)


def _fix_pair_phases(U, V, k):
    """Phase-fix left columns; paired right columns get the same phase."""
    zu = column_phases(U)
    zv = column_phases(V)
    zv[:k] = zu[:k]
    return U * zu, V * zv


def singular_values(A) -> np.ndarray:
    return np.linalg.svd(np.asarray(A, dtype=np.complex128), compute_uv=False)


def rank(A, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above ``rel * sigma_max + abs``."""
    s = singular_values(A)
    if s.size == 0:
        return 0
    return int(np.sum(s > tol.rel * s[0] + tol.abs))


def _square_pair(A, B):
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise DimensionMismatchError(f"need square matrices of equal order, got {A.shape} and {B.shape}")
    return A, B


def commutator_norm(A, B) -> float:
    A, B = _square_pair(A, B)
    return fro(A @ B - B @ A)


def commutes(A, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``||AB - BA||_F <= rel ||A||_F ||B||_F + abs``."""
    A, B = _square_pair(A, B)
    return tol.small(fro(A @ B - B @ A), fro(A) * fro(B))


def bicommutes(A, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Both ``A B* = B A*`` and ``A* B = B* A`` hold within tolerance."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"need equal shapes, got {A.shape} and {B.shape}")
    scale = fro(A) * fro(B)
    left = fro(A @ dagger(B) - B @ dagger(A))
    right = fro(dagger(A) @ B - dagger(B) @ A)
    return tol.small(left, scale) and tol.small(right, scale)


def first_failing_pair(family, predicate, tol: Tolerance = DEFAULT_TOL):
    """First pair ``(i, j)``, ``i < j``, in lexicographic order failing ``predicate``."""
    for i, j in combinations(range(len(family)), 2):
        if not predicate(family[i], family[j], tol):
            return i, j
    return None


def _leakage_ok(mats, L, R, tol):
    for A in mats:
        if not tol.small(offdiag_norm(dagger(L) @ A @ R), 10 * fro(A)):
            return False
    return True


def _clusters(values, thr):
    """Split ascending- or descending-sorted ``values`` into runs with gaps <= thr."""
    groups = [[0]]
    for i in range(1, len(values)):
        if abs(values[i] - values[i - 1]) <= thr:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _validate_family(family):
    mats = [as_matrix(A) for A in family]
    if not mats:
        raise InvalidArgumentError("empty family")
    shape = mats[0].shape
    for k, A in enumerate(mats):
        if A.shape != shape:
            raise DimensionMismatchError(f"family member {k} has shape {A.shape}, expected {shape}")
    return mats


def _joint_eigvecs(mats, tol, rng, depth):
    n = mats[0].shape[0]
    I = np.eye(n, dtype=np.complex128)
    if n == 1 or all(offdiag_norm(A) == 0 for A in mats):
        return I, None
    for _ in range(1 + PROBE_RETRIES):
        r = rng.uniform(1.0, 2.0, len(mats))
        M = sum(rk * A for rk, A in zip(r, mats))
        w, V = np.linalg.eigh((M + dagger(M)) / 2)
        if _leakage_ok(mats, V, V, tol):
            return V, r
    if depth >= _MAX_SPLIT_DEPTH:
        raise DegeneracyError("joint eigenbasis not found within the split depth budget")
    groups = _clusters(w, 1e-6 * max(abs(w[0]), abs(w[-1])) + tol.abs)
    if len(groups) == n:
        raise DegeneracyError("probe spectrum is simple but the family is not diagonalized")
    for g in groups:
        if len(g) == 1:
            continue
        Q = V[:, g]
        sub = [dagger(Q) @ A @ Q for A in mats]
        sub = [(S + dagger(S)) / 2 for S in sub]
        W, _ = _joint_eigvecs(sub, tol, rng, depth + 1)
        V[:, g] = Q @ W
    if not _leakage_ok(mats, V, V, tol):
        raise DegeneracyError("joint eigenbasis failed verification after subspace splitting")
    return V, r


def _order_columns(V, keyvals):
    """Ascending by ``keyvals``; near-ties broken by descending
    lexicographic order of the rounded entries."""
    n = V.shape[1]
    order = sorted(range(n), key=lambda i: keyvals[i])
    scale = max(1.0, float(np.max(np.abs(keyvals)))) if n else 1.0
    out = []
    for run in _clusters([keyvals[i] for i in order], 1e-9 * scale):
        idx = [order[i] for i in run]
        # descending, so ties among unit vectors come out as the identity
        idx.sort(key=lambda i: tuple(
            (-round(float(z.real), _ROUND_DIGITS), -round(float(z.imag), _ROUND_DIGITS))
            for z in V[:, i]))
        out.extend(idx)
    return out


def simultaneous_diag(family: Sequence, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> np.ndarray:
    """Unitary ``C`` with ``C* A_k C`` diagonal for every member of a commuting
    Hermitian family.

    A random positive combination ``sum r_k A_k`` (``r_k`` uniform on [1, 2],
    seeded) is diagonalized and checked against every member. Degenerate
    draws are retried, then shared eigenspaces are split recursively.
    Columns are phase-fixed and ordered by ascending eigenvalue of the probe
    combination.
    """
    mats = _validate_family(family)
    if mats[0].shape[0] != mats[0].shape[1]:
        raise DimensionMismatchError("simultaneous_diag needs square matrices")
    for k, A in enumerate(mats):
        require_hermitian(A, tol, what=f"family member {k}")
    mats = [(A + dagger(A)) / 2 for A in mats]
    pair = first_failing_pair(mats, commutes, tol)
    if pair is not None:
        raise NotCommutingError(f"family members {pair[0]} and {pair[1]} do not commute", pair)
    rng = np.random.default_rng(seed)
    V, r = _joint_eigvecs(mats, tol, rng, 0)
    V = fix_phase(V)
    if r is None:
        r = np.ones(len(mats))
    M = sum(rk * A for rk, A in zip(r, mats))
    keys = np.real(np.einsum("ij,ik,kj->j", np.conj(V), M, V))
    return V[:, _order_columns(V, keys)]


def _joint_svd(mats, tol, rng, depth):
    p, q = mats[0].shape
    if all(offdiag_norm(A) == 0 for A in mats):
        return np.eye(p, dtype=np.complex128), np.eye(q, dtype=np.complex128)
    for _ in range(1 + PROBE_RETRIES):
        r = rng.uniform(1.0, 2.0, len(mats))
        M = sum(rk * A for rk, A in zip(r, mats))
        U, s, Vh = np.linalg.svd(M, full_matrices=True)
        V = dagger(Vh)
        if _leakage_ok(mats, U, V, tol):
            return U, V
    if depth >= _MAX_SPLIT_DEPTH:
        raise DegeneracyError("joint singular bases not found within the split depth budget")
    k = len(s)
    thr = 1e-6 * float(s[0]) + tol.abs
    groups = _clusters(list(s), thr)
    # the null block absorbs the rows/columns beyond min(p, q)
    pieces = [(list(g), list(g)) for g in groups]
    if s[-1] <= thr:
        pieces[-1][0].extend(range(k, p))
        pieces[-1][1].extend(range(k, q))
    else:
        pieces.append((list(range(k, p)), list(range(k, q))))
    pieces = [(lf, rt) for lf, rt in pieces if lf and rt and (len(lf) > 1 or len(rt) > 1)]
    if not pieces:
        raise DegeneracyError("probe singular values are simple but the family is not diagonalized")
    for left, right in pieces:
        QL, QR = U[:, left], V[:, right]
        sub = [dagger(QL) @ A @ QR for A in mats]
        L, R = _joint_svd(sub, tol, rng, depth + 1)
        U[:, left] = QL @ L
        V[:, right] = QR @ R
    if not _leakage_ok(mats, U, V, tol):
        raise DegeneracyError("joint singular bases failed verification after subspace splitting")
    return U, V


def simultaneous_svd(family: Sequence, tol: Tolerance = DEFAULT_TOL, seed: int = 0):
    """Unitary pair ``(C_L, C_R)`` with ``C_L* A_k C_R`` rectangular-diagonal
    for every member of a bicommuting family.
    """
    mats = _validate_family(family)
    pair = first_failing_pair(mats, bicommutes, tol)
    if pair is not None:
        raise NotCommutingError(f"family members {pair[0]} and {pair[1]} do not bicommute", pair)
    rng = np.random.default_rng(seed)
    U, V = _joint_svd(mats, tol, rng, 0)
    return _fix_pair_phases(U, V, min(U.shape[0], V.shape[0]))
