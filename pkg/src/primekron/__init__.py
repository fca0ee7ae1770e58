"""Kronecker-sum structure detection for blocked Hermitian and rectangular matrices."""

__version__ = "0.1.0"

from .blocking import BlockGrid, BlockPartition, block, block_contract, block_fold, kron, rearrange, unblock
from .decomp import (
    DecompClass,
    DecompReport,
    DecompTree,
    StageFailed,
    classify,
    gen_structured,
    recursive_decompose,
    t1_check,
    t1half_check,
    t2_check,
    t3_check,
)
from .densecore import DEFAULT_TOL, Tolerance, herm_eig, simultaneous_diag, simultaneous_svd, svd
from .fastmul import Dense, KronSum, kron_multiply, naive_multiply, pipeline_cost_audit
from .numtheory import factorize, goldbach_pairs, is_prime
from .opcount import OpCount
from .quasiprime import GoldbachSplit, goldbach_split, is_quasi_prime, orthogonal_pair
from .rectdecomp import RectReport, classify_rect

__all__ = [
    "BlockGrid", "BlockPartition", "block", "block_contract", "block_fold", "kron", "rearrange",
    "unblock", "DecompClass", "DecompReport", "DecompTree", "StageFailed", "classify",
    "gen_structured", "recursive_decompose", "t1_check", "t1half_check", "t2_check", "t3_check",
    "DEFAULT_TOL", "Tolerance", "herm_eig", "simultaneous_diag", "simultaneous_svd", "svd",
    "Dense", "KronSum", "kron_multiply", "naive_multiply", "pipeline_cost_audit", "factorize",
    "goldbach_pairs", "is_prime", "OpCount", "GoldbachSplit", "goldbach_split", "is_quasi_prime",
    "orthogonal_pair", "RectReport", "classify_rect",
]
