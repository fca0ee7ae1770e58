"""``primekron`` command-line front end.

Exit codes: 0 success (class >= T1 for classifiers), 1 class NONE,
2 I/O or parse error, 3 invalid dimensions, flags or input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .decomp import (
    DecompClass,
    DecompReport,
    DecompTree,
    classify,
    gen_structured,
    random_hermitian,
    recursive_decompose,
)
from .densecore import DEFAULT_TOL, Tolerance, fro, is_hermitian
from .errors import (
    DimensionMismatchError,
    IndivisibleError,
    InvalidArgumentError,
    NoPairFoundError,
    NotHermitianError,
    PrimeOrderError,
)
from .fastmul import KronSum, kron_multiply, materialize, naive_multiply, pipeline_cost_audit
from .matrixio import MatrixFormatError, dumps, encode_array, format_mtxjson, load_matrix, save_matrix
from .numtheory import balanced_divisors, is_prime, smallest_prime_factor
from .quasiprime import goldbach_split, orthogonality_residuals
from .rectdecomp import RectReport, classify_rect

SCHEMA = 1
EXIT_OK, EXIT_NONE, EXIT_IO, EXIT_INVALID = 0, 1, 2, 3


class UsageError(Exception):
    """Invalid flags or dimensions; maps to exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _int_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers 'x,y', got {text!r}") from None
    return a, b


def _tol(args) -> Tolerance:
    return DEFAULT_TOL if args.tol is None else Tolerance.from_rel(args.tol)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- report encoding ---------------------------------------------------------

def _failure(f) -> Optional[dict]:
    if f is None:
        return None
    pair = None
    if f.pair is not None:
        pair = [int(x) + 1 if np.isscalar(x) else [int(v) + 1 for v in x] for x in f.pair]
    return {"stage": f.stage.name, "message": str(f), "pair": pair}


def report_dict(A: np.ndarray, rep: DecompReport) -> dict:
    t1half, t2, t3 = rep.t1half, rep.t2, rep.t3
    bases = {}
    if rep.t1 is not None:
        bases["c"] = encode_array(rep.t1.basis)
    if t2 is not None:
        bases["b"] = encode_array(t2.row_basis)
    return {
        "schema": SCHEMA,
        "input": {"order": int(A.shape[0]), "hermitian": True},
        "partition": {"a": rep.a, "b": rep.b},
        "class": rep.cls.name,
        "trail": list(rep.trail),
        "residual": float(rep.residual),
        "alpha": encode_array(None if t2 is None else t2.alpha),
        "beta": encode_array(None if t3 is None else t3.beta),
        "gamma": encode_array(None if t3 is None else t3.gamma),
        "coefficients": encode_array(None if t1half is None else t1half.coeff),
        "factors": None if t3 is None else {"B": encode_array(t3.factor_B),
                                             "C": encode_array(t3.factor_C)},
        "bases": bases,
        "canonical_forms": {k: encode_array(v) for k, v in rep.canonical.items()},
        "failure": _failure(rep.failure),
        "notes": list(rep.notes),
        "opcounts": {k: v.as_dict() for k, v in rep.opcounts.items()},
    }


def rect_report_dict(A: np.ndarray, rep: RectReport) -> dict:
    bases = {}
    if rep.bases is not None:
        bases["c_left"] = encode_array(rep.bases.left)
        bases["c_right"] = encode_array(rep.bases.right)
    if rep.row_bases is not None:
        bases["b_left"] = encode_array(rep.row_bases.left)
        bases["b_right"] = encode_array(rep.row_bases.right)
    return {
        "schema": SCHEMA,
        "input": {"order": list(A.shape), "hermitian": bool(A.shape[0] == A.shape[1] and is_hermitian(A))},
        "partition": {"p1": rep.partition.p, "q1": rep.partition.q},
        "class": rep.cls.name,
        "trail": list(rep.trail),
        "residual": float(rep.residual),
        "alpha": encode_array(rep.alpha),
        "beta": encode_array(rep.beta),
        "gamma": encode_array(rep.gamma),
        "coefficients": encode_array(rep.coeff),
        "factors": None if rep.factor_B is None else {"B": encode_array(rep.factor_B),
                                                      "C": encode_array(rep.factor_C)},
        "bases": bases,
        "canonical_forms": {},
        "failure": _failure(rep.failure),
        "notes": list(rep.notes),
        "opcounts": {},
    }


def tree_dict(node: DecompTree) -> dict:
    out = {
        "order": node.order,
        "role": node.role,
        "class": "LEAF" if node.report is None else node.report.cls.name,
        "attempts": [{"b": int(p), "class": c.name} for p, c in node.attempts],
        "children": [tree_dict(c) for c in node.children],
    }
    if node.report is not None:
        out.update(partition={"a": node.report.a, "b": node.report.b},
                   trail=list(node.report.trail), residual=float(node.report.residual),
                   notes=list(node.report.notes))
    return out


# -- subcommands -------------------------------------------------------------

def _square(A, what="input"):
    if A.shape[0] != A.shape[1]:
        raise UsageError(f"{what} must be square, got {A.shape[0]}x{A.shape[1]}")
    return A.shape[0]


def cmd_analyze(args) -> int:
    A = load_matrix(args.file)
    tol = _tol(args)
    m, n = A.shape
    if args.rect is not None or m != n:
        if args.factors is not None:
            raise UsageError("--factors applies to square input; use --rect p1,q1")
        if args.rect is not None:
            p1, q1 = args.rect
        else:
            if is_prime(m) or is_prime(n) or min(m, n) < 4:
                raise UsageError(f"--auto needs composite dimensions, got {m}x{n}")
            p1, q1 = smallest_prime_factor(m), smallest_prime_factor(n)
        rep = classify_rect(A, p1, q1, tol, seed=args.seed)
        doc = rect_report_dict(A, rep)
    else:
        if args.factors is not None:
            a, b = args.factors
        else:
            if n < 4 or is_prime(n):
                raise UsageError(f"--auto needs a composite order, got {n}")
            b = smallest_prime_factor(n)
            a = n // b
        if a * b != n:
            raise UsageError(f"factors {a}x{b} do not match order {n}")
        rep = classify(A, a, b, tol, seed=args.seed)
        doc = report_dict(A, rep)
    _emit(dumps(doc), args.out)
    return EXIT_OK if rep.cls >= DecompClass.T1 else EXIT_NONE


def cmd_recursive(args) -> int:
    A = load_matrix(args.file)
    _square(A)
    tree = recursive_decompose(A, _tol(args), seed=args.seed)
    doc = {
        "schema": SCHEMA,
        "input": {"order": int(A.shape[0]), "hermitian": True},
        "depth": tree.depth(),
        "leaf_orders": [leaf.order for leaf in tree.leaves()],
        "tree": tree_dict(tree),
    }
    _emit(dumps(doc), args.out)
    return EXIT_OK if tree.report.cls >= DecompClass.T1 else EXIT_NONE


def cmd_split(args) -> int:
    A = load_matrix(args.file)
    n = _square(A)
    if n % 2 or n <= 2:
        raise UsageError(f"split needs an even order > 2, got {n}")
    tol = _tol(args)
    res = goldbach_split(A, args.strategy, tol)
    r1, r2 = orthogonality_residuals(res.part1, res.part2)
    nA = fro(A)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "part1.mtxjson").write_text(format_mtxjson(res.part1))
    (out_dir / "part2.mtxjson").write_text(format_mtxjson(res.part2))
    doc = {
        "schema": SCHEMA,
        "input": {"order": n, "hermitian": bool(is_hermitian(A, tol))},
        "p": res.p,
        "q": res.q,
        "ranks": list(res.ranks),
        "sum_residual": fro(A - res.part1 - res.part2) / nA if nA > 0 else 0.0,
        "orthogonality_residuals": {"A1_A2H": r1, "A1H_A2": r2},
        "parts": ["part1.mtxjson", "part2.mtxjson"],
        "notes": list(res.notes),
    }
    text = dumps(doc)
    (out_dir / "split.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _strategy(text: str):
    if text in ("first", "balanced"):
        return text
    try:
        return _int_pair(text)
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(f"strategy must be first, balanced or p,q; got {text!r}") from None


def cmd_gen(args) -> int:
    cls = DecompClass[args.cls]
    if args.a < 2 or args.b < 2:
        raise UsageError(f"--a and --b must be >= 2, got {args.a}, {args.b}")
    if cls == DecompClass.NONE:
        M = random_hermitian(args.a * args.b, np.random.default_rng(args.seed), args.complex)
    else:
        M = gen_structured(cls, args.a, args.b, args.seed, complex_=args.complex)
    if args.out is None:
        sys.stdout.write(format_mtxjson(M))
    else:
        save_matrix(M, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    sys.stdout.write(dumps(pipeline_cost_audit(args.n, _tol(args), seed=args.seed)))
    return EXIT_OK


def _as_kron(M, tol, seed) -> Optional[tuple[int, int, KronSum]]:
    """A certified single-Kronecker form of ``M`` on the most balanced split, if any."""
    n = M.shape[0]
    if M.shape[1] != n or n < 4 or is_prime(n) or not is_hermitian(M, tol):
        return None
    for a, b in balanced_divisors(n):
        if a < 2 or b < 2:
            continue
        rep = classify(M, a, b, tol, seed)
        if rep.cls == DecompClass.T3:
            return a, b, KronSum([(1.0, rep.t3.factor_B, rep.t3.factor_C)])
    return None


def cmd_multiply(args) -> int:
    A = load_matrix(args.file_a)
    B = load_matrix(args.file_b)
    if A.shape[1] != B.shape[0]:
        raise UsageError(f"cannot multiply {A.shape[0]}x{A.shape[1]} by {B.shape[0]}x{B.shape[1]}")
    tol = _tol(args)
    naive, naive_cost = naive_multiply(A, B)
    doc = {"schema": SCHEMA, "shape": [A.shape[0], B.shape[1]], "path": "naive",
           "naive": naive_cost.as_dict(), "notes": []}
    product, cost = naive, naive_cost
    if args.structured:
        ka, kb = _as_kron(A, tol, args.seed), _as_kron(B, tol, args.seed)
        if ka is not None and kb is not None and ka[:2] == kb[:2]:
            P, cost = kron_multiply(ka[2], kb[2])
            product = materialize(P)
            doc["path"] = "structured"
            doc["partition"] = {"a": ka[0], "b": ka[1]}
            doc["notes"].append("factor products only; the product is kept as a Kronecker "
                                "product, so expanding it is not counted")
        else:
            doc["notes"].append("an operand is not certified T3 on a shared split; naive fallback")
    doc["used"] = cost.as_dict()
    doc["max_abs_diff_vs_naive"] = float(np.abs(product - naive).max(initial=0.0))
    if args.out is not None:
        save_matrix(product, args.out)
    sys.stdout.write(dumps(doc))
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="primekron", description="Kronecker-sum structure of blocked matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--tol", type=float, default=None, help="relative tolerance (abs = rel*1e-2)")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
        if out:
            sp.add_argument("--out", default=None, help="write the result here instead of stdout")

    sp = sub.add_parser("analyze", help="classify one blocking of a matrix")
    sp.add_argument("file")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--factors", type=_int_pair, help="a,b: a x a grid of b x b blocks")
    g.add_argument("--auto", action="store_true", help="b = smallest prime factor (default)")
    g.add_argument("--rect", type=_int_pair, help="p1,q1: rectangular blocks of size p1 x q1")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("recursive", help="recursive decomposition tree")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(func=cmd_recursive)

    sp = sub.add_parser("split", help="split into two orthogonal parts of prime rank")
    sp.add_argument("file")
    sp.add_argument("--strategy", type=_strategy, default="first", help="first | balanced | p,q")
    sp.add_argument("--out-dir", default=".", help="directory for part1/part2 and split.json")
    common(sp, out=False)
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("gen", help="generate a structured test matrix")
    sp.add_argument("--class", dest="cls", required=True, choices=[c.name for c in DecompClass])
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--complex", action="store_true", help="complex Hermitian data")
    sp.add_argument("--out", default=None, help=".csv or .mtxjson path (stdout mtxjson if omitted)")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="predicted vs measured op counts of the pipeline")
    sp.add_argument("--n", type=int, required=True)
    common(sp, out=False)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("multiply", help="multiply two matrices with op counting")
    sp.add_argument("file_a")
    sp.add_argument("file_b")
    sp.add_argument("--structured", action="store_true", help="use certified Kronecker factors")
    common(sp)
    sp.set_defaults(func=cmd_multiply)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        return args.func(args)
    except (OSError, MatrixFormatError) as exc:
        print(f"primekron: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, InvalidArgumentError, DimensionMismatchError, IndivisibleError,
            NotHermitianError, PrimeOrderError, NoPairFoundError) as exc:
        print(f"primekron: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
