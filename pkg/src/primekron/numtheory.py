"""Primality, factorization and Goldbach pairs by trial division."""

from __future__ import annotations

import operator
from math import isqrt
from typing import NamedTuple

from .errors import InvalidArgumentError, NoPairFoundError


class GoldbachPair(NamedTuple):
    p: int
    q: int


def _check_positive(n):
    if isinstance(n, bool):
        raise InvalidArgumentError(f"expected an integer, got {n!r}")
    try:
        n = operator.index(n)
    except TypeError:
        raise InvalidArgumentError(f"expected an integer, got {n!r}") from None
    if n < 1:
        raise InvalidArgumentError(f"expected n >= 1, got {n}")
    return n


def is_prime(n: int) -> bool:
    n = _check_positive(n)
    if n < 4:
        return n > 1
    if n % 2 == 0 or n % 3 == 0:
        return False
    i = 5
    while i * i <= n:
        if n % i == 0 or n % (i + 2) == 0:
            return False
        i += 6
    return True


def factorize(n: int) -> list[tuple[int, int]]:
    """Return the prime factorization of ``n`` as ``[(prime, exponent), ...]``.

    Primes are strictly increasing; ``factorize(1) == []``.
    """
    n = _check_positive(n)
    out = []
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def prime_factors(n: int) -> list[int]:
    """Prime factors of ``n`` repeated by multiplicity, ascending."""
    return [p for p, e in factorize(n) for _ in range(e)]


def smallest_prime_factor(n: int) -> int:
    fs = factorize(n)
    if not fs:
        raise InvalidArgumentError("1 has no prime factor")
    return fs[0][0]


def goldbach_pairs(n: int) -> list[GoldbachPair]:
    """All ``(p, q)`` with ``p <= q`` prime and ``p + q == n``, ascending in ``p``."""
    n = _check_positive(n)
    if n % 2 or n <= 2:
        raise InvalidArgumentError(f"n must be even and > 2, got {n}")
    pairs = [GoldbachPair(p, n - p) for p in range(2, n // 2 + 1)
             if is_prime(p) and is_prime(n - p)]
    if not pairs:
        raise NoPairFoundError(f"no Goldbach pair found for {n}")
    return pairs


def balanced_divisors(n: int) -> list[tuple[int, int]]:
    """Factor pairs ``(a, b)`` with ``a * b == n`` and ``a, b >= 2``, most balanced first."""
    pairs = [(n // b, b) for b in range(2, isqrt(n) + 1) if n % b == 0]
    pairs.sort(key=lambda ab: ab[0] - ab[1])
    return pairs
