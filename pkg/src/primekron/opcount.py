"""Scalar operation tallies and the commutativity-check cost model."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class OpCount:
    mults: int = 0
    adds: int = 0

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(self.mults + other.mults, self.adds + other.adds)

    def __mul__(self, k: int) -> "OpCount":
        return OpCount(self.mults * k, self.adds * k)

    __rmul__ = __mul__

    def as_dict(self):
        return {"mults": self.mults, "adds": self.adds}


def matmul_cost(m: int, k: int, n: int) -> OpCount:
    """Cost of a naive ``(m x k) @ (k x n)`` product."""
    if m * k * n == 0:
        return OpCount()
    return OpCount(m * k * n, m * n * (k - 1))


def commute_check_cost(k: int) -> OpCount:
    # two order-k products; the comparison is free
    return 2 * matmul_cost(k, k, k)
