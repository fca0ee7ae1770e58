"""Matrix files (csv and mtxjson) and JSON-safe encoding of numeric results.

csv
    one row per line, comma-separated tokens; a token is a real ``1.5`` or a
    complex ``1.5+0.5i`` / ``-2i``.
mtxjson
    ``{"rows": m, "cols": n, "entries": [[re, im], ...]}`` in row-major order.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

FORMATS = ("csv", "mtxjson")


class MatrixFormatError(ValueError):
    """A matrix file could not be parsed."""


def detect_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".json", ".mtxjson"):
        return "mtxjson"
    raise MatrixFormatError(f"cannot infer matrix format from {str(path)!r}; use .csv or .mtxjson")


def _parse_token(tok: str) -> complex:
    t = tok.strip().replace(" ", "")
    if not t:
        raise MatrixFormatError("empty entry")
    try:
        if t.endswith("i"):
            body = t[:-1]
            if body in ("", "+", "-"):
                body += "1"
            return complex(body + "j")
        return complex(float(t), 0.0)
    except ValueError:
        raise MatrixFormatError(f"bad entry {tok!r}") from None


def _format_real(x: float) -> str:
    return repr(float(x))


def _format_token(z: complex) -> str:
    if z.imag == 0 and not math.copysign(1.0, z.imag) < 0:
        return _format_real(z.real)
    im = _format_real(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{_format_real(z.real)}{sign}{im}i"


def _finish(rows: list[list[complex]]) -> np.ndarray:
    if not rows:
        raise MatrixFormatError("no rows")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise MatrixFormatError(f"ragged rows: lengths {sorted(width)}")
    M = np.array(rows, dtype=np.complex128)
    if not np.all(np.isfinite(M)):
        raise MatrixFormatError("non-finite entries")
    return M


def parse_csv(text: str) -> np.ndarray:
    rows = [[_parse_token(t) for t in line.split(",")]
            for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    return _finish(rows)


def format_csv(M) -> str:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise MatrixFormatError(f"expected a 2-D matrix, got shape {M.shape}")
    return "".join(",".join(_format_token(z) for z in row) + "\n" for row in M)


def parse_mtxjson(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
        m, n = int(obj["rows"]), int(obj["cols"])
        entries = obj["entries"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"invalid mtxjson: {exc}") from None
    if m < 1 or n < 1 or len(entries) != m * n:
        raise MatrixFormatError(f"mtxjson declares {m}x{n} but holds {len(entries)} entries")
    try:
        flat = [complex(float(re), float(im)) for re, im in entries]
    except (TypeError, ValueError):
        raise MatrixFormatError("mtxjson entries must be [re, im] pairs") from None
    return _finish([flat[i * n:(i + 1) * n] for i in range(m)])


def format_mtxjson(M) -> str:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise MatrixFormatError(f"expected a 2-D matrix, got shape {M.shape}")
    entries = [[float(z.real), float(z.imag)] for z in M.reshape(-1)]
    return json.dumps({"rows": M.shape[0], "cols": M.shape[1], "entries": entries}) + "\n"


def load_matrix(path, fmt: str | None = None) -> np.ndarray:
    """Read a matrix file; ``OSError`` and :class:`MatrixFormatError` propagate."""
    fmt = fmt or detect_format(path)
    text = Path(path).read_text()
    return parse_csv(text) if fmt == "csv" else parse_mtxjson(text)


def save_matrix(M, path, fmt: str | None = None) -> None:
    fmt = fmt or detect_format(path)
    text = format_csv(M) if fmt == "csv" else format_mtxjson(M)
    Path(path).write_text(text)


def encode_array(x):
    """JSON-safe nested lists; complex data with a non-negligible imaginary part
    becomes ``{"re": ..., "im": ...}``.
    """
    if x is None:
        return None
    x = np.asarray(x)
    if np.iscomplexobj(x):
        scale = max(1.0, float(np.abs(x).max(initial=0.0)))
        if float(np.abs(x.imag).max(initial=0.0)) <= 1e-14 * scale:
            x = x.real
        else:
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
    return x.astype(float).tolist()


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, NaN rejected)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
