"""Uniform block partitions, Kronecker products and block contractions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densecore import as_matrix
from .errors import IndivisibleError


@dataclass(frozen=True)
class BlockPartition:
    """A grid of ``grid_rows x grid_cols`` cells, each ``p x q``."""

    p: int
    q: int
    grid_rows: int
    grid_cols: int

    @property
    def shape(self):
        return self.p * self.grid_rows, self.q * self.grid_cols


@dataclass
class BlockGrid:
    partition: BlockPartition
    blocks: list  # blocks[i][j] is a p x q copy of cell (i, j)

    def __getitem__(self, ij):
        i, j = ij
        return self.blocks[i][j]

    def unblock(self) -> np.ndarray:
        return np.block(self.blocks)


def _divides(size, d, axis):
    if d < 1 or size % d:
        raise IndivisibleError(f"{d} does not divide the {axis} dimension {size}", axis=axis)


def block(A, p: int, q: int) -> BlockGrid:
    A = as_matrix(A)
    m, n = A.shape
    _divides(m, p, "row")
    _divides(n, q, "column")
    part = BlockPartition(p, q, m // p, n // q)
    blocks = [[A[i * p:(i + 1) * p, j * q:(j + 1) * q].copy() for j in range(part.grid_cols)]
              for i in range(part.grid_rows)]
    return BlockGrid(part, blocks)


def unblock(grid: BlockGrid) -> np.ndarray:
    return grid.unblock()


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


def block_contract(A, B, a: int) -> np.ndarray:
    """Sum of Kronecker products of matched blocks: ``sum_i A_i (x) B_i``.

    ``A`` (m x a*s) is cut into ``a`` column blocks and ``B`` (a*t x l) into
    ``a`` row blocks; the result is ``(m*t) x (s*l)``.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    _divides(A.shape[1], a, "column")
    _divides(B.shape[0], a, "row")
    s = A.shape[1] // a
    t = B.shape[0] // a
    out = np.zeros((A.shape[0] * t, s * B.shape[1]), dtype=np.complex128)
    for i in range(a):
        out += np.kron(A[:, i * s:(i + 1) * s], B[i * t:(i + 1) * t, :])
    return out


def block_fold(A, a: int) -> np.ndarray:
    """Entrywise sum of all ``a x a`` blocks of ``A``."""
    A = as_matrix(A)
    _divides(A.shape[0], a, "row")
    _divides(A.shape[1], a, "column")
    r, s = A.shape[0] // a, A.shape[1] // a
    return A.reshape(r, a, s, a).sum(axis=(0, 2))


def rearrange(A, p: int, q: int) -> np.ndarray:
    """Rearrangement whose rank is 1 exactly when ``A`` is a single Kronecker product.

    Row ``i * grid_cols + j`` is block ``A_ij`` vectorized column-major.
    """
    grid = block(A, p, q)
    rows = [grid[i, j].reshape(-1, order="F")
            for i in range(grid.partition.grid_rows)
            for j in range(grid.partition.grid_cols)]
    return np.array(rows)
