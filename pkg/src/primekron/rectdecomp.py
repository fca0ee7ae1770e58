"""Kronecker-sum classification of rectangular matrices.

Same four stages as :mod:`primekron.decomp`, with commutativity replaced by
bicommutativity (``A B* = B A*`` and ``A* B = B* A``) and shared eigenbases
replaced by shared left/right singular bases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .blocking import BlockPartition
from .decomp import DecompClass, StageFailed, _scan_pairs
from .densecore import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    bicommutes,
    dagger,
    fro,
    rank,
    simultaneous_svd,
)
from .errors import DegeneracyError, IndivisibleError, NotCommutingError


@dataclass
class RectBases:
    left: np.ndarray   # p1 x p1, columns c^L
    right: np.ndarray  # q1 x q1, columns c^R


@dataclass
class RectReport:
    cls: DecompClass
    trail: list
    partition: BlockPartition
    bases: Optional[RectBases] = None
    coeff_grid: Optional[np.ndarray] = None   # (p1, q1, m', n')
    coeff: Optional[np.ndarray] = None        # (min(p1, q1), m', n')
    row_bases: Optional[RectBases] = None     # b^L (m' x m'), b^R (n' x n')
    alpha: Optional[np.ndarray] = None        # min(m', n') x min(p1, q1)
    beta: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    factor_B: Optional[np.ndarray] = None
    factor_C: Optional[np.ndarray] = None
    residual: float = 0.0
    notes: list = field(default_factory=list)
    failure: Optional[StageFailed] = None

    def diag_singulars(self) -> np.ndarray:
        """Coefficients ``c^L_i* A_kk c^R_i`` of the diagonal blocks, shape (min(p1,q1), min(m',n'))."""
        g = self.coeff_grid
        r = min(g.shape[0], g.shape[1])
        kk = min(g.shape[2], g.shape[3])
        return np.array([[g[i, i, k, k] for k in range(kk)] for i in range(r)])

    def reconstruction(self) -> Optional[np.ndarray]:
        if self.factor_B is not None:
            return np.kron(self.factor_B, self.factor_C)
        if self.alpha is not None:
            bL, bR = self.row_bases.left, self.row_bases.right
            cL, cR = self.bases.left, self.bases.right
            return sum(self.alpha[i, j] * np.kron(np.outer(bL[:, i], np.conj(bR[:, i])),
                                                  np.outer(cL[:, j], np.conj(cR[:, j])))
                       for i in range(self.alpha.shape[0]) for j in range(self.alpha.shape[1]))
        if self.coeff is not None:
            cL, cR = self.bases.left, self.bases.right
            return sum(np.kron(self.coeff[i], np.outer(cL[:, i], np.conj(cR[:, i])))
                       for i in range(len(self.coeff)))
        if self.coeff_grid is not None:
            cL, cR = self.bases.left, self.bases.right
            g = self.coeff_grid
            return sum(np.kron(g[i, j], np.outer(cL[:, i], np.conj(cR[:, j])))
                       for i in range(g.shape[0]) for j in range(g.shape[1]))
        return None


def _joint(family, stage, tol, seed):
    try:
        return simultaneous_svd(family, tol, seed)
    except (NotCommutingError, DegeneracyError) as exc:
        raise StageFailed(stage, f"no shared singular bases: {exc}") from exc


def _rank_one(alpha, tol):
    U, s, Vh = np.linalg.svd(alpha)
    r = rank(alpha, tol)
    if r > 1:
        raise StageFailed(DecompClass.T3, f"alpha has rank {r}", rank=r, singulars=s)
    if r == 0:
        beta = np.zeros(alpha.shape[0])
        gamma = np.zeros(alpha.shape[1])
        gamma[0] = 1.0
        return beta, gamma
    beta, gamma = s[0] * U[:, 0], Vh[0].copy()
    nz = np.flatnonzero(np.abs(beta) > tol.rel * np.abs(beta).max())
    if beta[nz[0]] < 0:
        beta, gamma = -beta, -gamma
    return beta, gamma


def classify_rect(A, p1: int, q1: int, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> RectReport:
    """Classify ``A`` blocked into ``p1 x q1`` cells."""
    A = as_matrix(A)
    m, n = A.shape
    for size, d, axis in ((m, p1, "row"), (n, q1, "column")):
        if d < 1 or size % d:
            raise IndivisibleError(f"{d} does not divide the {axis} dimension {size}", axis=axis)
    mg, ng = m // p1, n // q1
    report = RectReport(DecompClass.NONE, [], BlockPartition(p1, q1, mg, ng))
    A4 = A.reshape(mg, p1, ng, q1)  # A4[k, r, l, s] = block (k, l) entry (r, s)
    scale = fro(A)
    try:
        diag = [A4[k, :, k, :] for k in range(min(mg, ng))]
        pair, _ = _scan_pairs(diag, bicommutes, tol)
        if pair is not None:
            k, l = pair
            raise StageFailed(DecompClass.T1, f"diagonal blocks ({k + 1},{k + 1}) and ({l + 1},{l + 1}) "
                              "do not bicommute", pair=((k, k), (l, l)))
        cL, cR = _joint(diag, DecompClass.T1, tol, seed)
        grid = np.einsum("ri,krls,sj->ijkl", np.conj(cL), A4, cR)
        kk = min(mg, ng)
        off = np.array([[grid[i, j, k, k] for k in range(kk)]
                        for i in range(p1) for j in range(q1) if i != j])
        if off.size and not tol.small(float(np.abs(off).max()), 10 * scale):
            raise StageFailed(DecompClass.T1, "off-diagonal coefficients do not vanish on the diagonal")
        report.bases = RectBases(cL, cR)
        report.coeff_grid = grid
        report.trail.append(1)
        report.cls = DecompClass.T1

        index = [(k, l) for k in range(mg) for l in range(ng)]
        family = [A4[k, :, l, :] for k, l in index]
        pair, _ = _scan_pairs(family, bicommutes, tol)
        if pair is not None:
            p, q = index[pair[0]], index[pair[1]]
            raise StageFailed(DecompClass.T1HALF, f"blocks ({p[0] + 1},{p[1] + 1}) and "
                              f"({q[0] + 1},{q[1] + 1}) do not bicommute", pair=(p, q))
        cL, cR = _joint(family, DecompClass.T1HALF, tol, seed)
        grid = np.einsum("ri,krls,sj->ijkl", np.conj(cL), A4, cR)
        mask = ~np.eye(p1, q1, dtype=bool)
        if not tol.small(float(np.sqrt(np.sum(np.abs(grid[mask]) ** 2))), 10 * scale):
            raise StageFailed(DecompClass.T1HALF, "off-diagonal coefficient matrices do not vanish")
        report.bases = RectBases(cL, cR)
        report.coeff_grid = grid
        report.coeff = np.array([grid[i, i] for i in range(min(p1, q1))])
        report.trail.append(2)
        report.cls = DecompClass.T1HALF

        coeff = list(report.coeff)
        pair, _ = _scan_pairs(coeff, bicommutes, tol)
        if pair is not None:
            raise StageFailed(DecompClass.T2, f"coefficient matrices B_{pair[0] + 1} and B_{pair[1] + 1} "
                              "do not bicommute", pair=pair)
        bL, bR = _joint(coeff, DecompClass.T2, tol, seed)
        r = min(mg, ng)
        alpha_c = np.array([[np.vdot(bL[:, i], B @ bR[:, i]) for B in coeff] for i in range(r)])
        if not tol.small(float(np.abs(alpha_c.imag).max()), 10 * scale):
            raise StageFailed(DecompClass.T2, "spectrum matrix alpha is not real")
        report.row_bases = RectBases(bL, bR)
        report.alpha = alpha_c.real.copy()
        if not tol.small(fro(A - report.reconstruction()), 10 * scale):
            report.alpha = report.row_bases = None
            raise StageFailed(DecompClass.T2, "row-column expansion does not reproduce the input")
        report.trail.append(3)
        report.cls = DecompClass.T2

        beta, gamma = _rank_one(report.alpha, tol)
        kb = len(beta)
        kc = len(gamma)
        report.factor_B = (bL[:, :kb] * beta) @ dagger(bR[:, :kb])
        report.factor_C = (cL[:, :kc] * gamma) @ dagger(cR[:, :kc])
        report.beta, report.gamma = beta, gamma
        report.trail.append(4)
        report.cls = DecompClass.T3
    except StageFailed as f:
        report.trail.append(0)
        report.failure = f
        report.notes.append(f"{f.stage.name} failed: {f}")

    recon = report.reconstruction()
    if recon is not None:
        report.residual = fro(A - recon) / scale if scale > 0 else fro(recon)
    return report
