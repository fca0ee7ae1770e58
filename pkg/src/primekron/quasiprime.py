"""Semi-prime / quasi-prime predicates, pairwise orthogonality and the
Goldbach split of an even-order matrix into two orthogonal summands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .densecore import DEFAULT_TOL, Tolerance, as_matrix, dagger, fro, rank, svd
from .errors import DimensionMismatchError, InvalidArgumentError
from .numtheory import GoldbachPair, goldbach_pairs, is_prime

Strategy = Union[str, tuple]


def is_semi_prime_shape(m: int, n: int) -> bool:
    if m < 1 or n < 1:
        raise InvalidArgumentError(f"dimensions must be positive, got {m}x{n}")
    return is_prime(min(m, n))


def is_quasi_invertible(A, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Non-square and of full rank on the smaller dimension (one-sided inverse only)."""
    A = as_matrix(A)
    m, n = A.shape
    return m != n and rank(A, tol) == min(m, n)


def is_quasi_prime(A, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Prime rank, the checkable characterization of a quasi-prime matrix."""
    r = rank(as_matrix(A), tol)
    return r >= 2 and is_prime(r)


def orthogonality_residuals(A, B) -> tuple[float, float]:
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"need equal shapes, got {A.shape} and {B.shape}")
    return fro(A @ dagger(B)), fro(dagger(A) @ B)


def orthogonal_pair(A, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``A B* = O`` and ``A* B = O`` within tolerance."""
    r1, r2 = orthogonality_residuals(A, B)
    scale = fro(A) * fro(B)
    return tol.small(r1, scale) and tol.small(r2, scale)


@dataclass
class GoldbachSplit:
    p: int
    q: int
    part1: np.ndarray
    part2: np.ndarray
    svd_factors: tuple  # (U1, L1, V1, U2, L2, V2)
    ranks: tuple
    notes: list = field(default_factory=list)


def select_pair(n: int, strategy: Strategy = "first-pair") -> GoldbachPair:
    """Pick a Goldbach pair for ``n``: ``"first-pair"``, ``"balanced"`` or an explicit ``(p, q)``."""
    if isinstance(strategy, str):
        pairs = goldbach_pairs(n)
        if strategy in ("first", "first-pair"):
            return pairs[0]
        if strategy == "balanced":
            return min(pairs, key=lambda pq: abs(pq.p - n / 2))
        raise InvalidArgumentError(f"unknown strategy {strategy!r}")
    p, q = (int(x) for x in strategy)
    if n % 2 or n <= 2:
        raise InvalidArgumentError(f"n must be even and > 2, got {n}")
    if p + q != n or not (is_prime(p) and is_prime(q)):
        raise InvalidArgumentError(f"({p}, {q}) is not a pair of primes summing to {n}")
    return GoldbachPair(p, q)


def goldbach_split(A, strategy: Strategy = "first-pair", tol: Tolerance = DEFAULT_TOL) -> GoldbachSplit:
    """Split a square even-order matrix into two orthogonal summands.

    The ``p`` largest singular triplets go to ``part1`` and the remaining
    ``q`` to ``part2``, where ``p + q`` is the order and both are prime.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[1] != n:
        raise DimensionMismatchError(f"goldbach_split needs a square matrix, got {A.shape}")
    if n % 2 or n <= 2:
        raise InvalidArgumentError(f"order must be even and > 2, got {n}")
    p, q = select_pair(n, strategy)
    U, s, V = svd(A)
    U1, U2 = U[:, :p], U[:, p:]
    V1, V2 = V[:, :p], V[:, p:]
    L1, L2 = np.diag(s[:p]), np.diag(s[p:])
    part1 = U1 @ L1 @ dagger(V1)
    part2 = U2 @ L2 @ dagger(V2)
    ranks = (rank(part1, tol), rank(part2, tol))
    out = GoldbachSplit(p, q, part1, part2, (U1, L1, V1, U2, L2, V2), ranks)
    if ranks != (p, q):
        out.notes.append(f"rank-deficient input: part ranks {ranks} fall short of ({p}, {q})")
    return out
