"""Matrix file I/O and deterministic report serialization.

Matrix files are JSON documents ``{"n": int, "<name>": [[[re, im], ...]], ...}``
holding one or more n-by-n complex matrices as row-major nested arrays of
[real, imag] pairs, plus an optional "labels" object with free-form strings.
A pencil file carries the matrices "A", "B", "C"; application inputs reuse the
same layout under their own names (for example "L0".."L2" and "M").

Serialization is canonical: object keys sorted, floats rendered with repr
(shortest form that parses back to the identical double), a fixed indentation
scheme, and a trailing newline. Identical data therefore produces identical
bytes, which the command-line layer relies on.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .pencil import BivariatePencil
from .points import CriticalPoint, PipelineReport, RejectedCandidate

__all__ = [
    "PencilFormatError",
    "dumps_canonical",
    "load_matrices",
    "load_pencil",
    "matrix_from_lists",
    "matrix_to_lists",
    "point_to_dict",
    "report_to_dict",
    "save_matrices",
    "save_pencil",
]


class PencilFormatError(ValueError):
    """Raised when a matrix file does not match the documented layout."""


# ---------------------------------------------------------------------------
# canonical JSON text

def _float_token(x: float) -> str:
    # JSON has no literals for non-finite values; encode them as strings so
    # the output stays parseable by any strict reader
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return repr(float(x))


def _is_number(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) \
        and not isinstance(x, (bool, np.bool_))


def _inline(obj) -> bool:
    # flat numeric lists and matrix rows (lists of [re, im] pairs) stay on
    # one line; everything else expands
    if not isinstance(obj, (list, tuple)):
        return False
    return all(_is_number(e)
               or (isinstance(e, (list, tuple)) and all(_is_number(v) for v in e))
               for e in obj)


def _emit(obj, level: int, out: list) -> None:
    pad = "  " * level
    inner = "  " * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            if not isinstance(k, str):
                raise TypeError(f"non-string key {k!r}")
            out.append(inner + json.dumps(k) + ": ")
            _emit(obj[k], level + 1, out)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        if _inline(obj):
            parts = []
            for e in obj:
                if _is_number(e):
                    parts.append(_scalar_token(e))
                else:
                    parts.append("[" + ", ".join(_scalar_token(v) for v in e) + "]")
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, e in enumerate(obj):
            out.append(inner)
            _emit(e, level + 1, out)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(pad + "]")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif _is_number(obj):
        out.append(_scalar_token(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _scalar_token(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return _float_token(float(x))


def dumps_canonical(obj) -> str:
    """Deterministic JSON text: sorted keys, repr floats, trailing newline."""
    out: list = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out)


# ---------------------------------------------------------------------------
# matrices

def matrix_to_lists(M: np.ndarray) -> list:
    """Row-major nested lists of [real, imag] pairs."""
    M = np.asarray(M)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def matrix_from_lists(rows, n: int, name: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n:
        raise PencilFormatError(f"matrix {name!r} must be a list of {n} rows")
    M = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise PencilFormatError(f"matrix {name!r} row {i} must have {n} entries")
        for j, entry in enumerate(row):
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(_is_number(v) for v in entry)):
                raise PencilFormatError(
                    f"matrix {name!r} entry ({i},{j}) must be a [re, im] pair")
            re, im = float(entry[0]), float(entry[1])
            if not (math.isfinite(re) and math.isfinite(im)):
                raise PencilFormatError(
                    f"matrix {name!r} entry ({i},{j}) is not finite")
            M[i, j] = complex(re, im)
    return M


def save_matrices(path, matrices: dict, labels: dict | None = None) -> None:
    """Write named square matrices of a common size to a JSON file."""
    sizes = {name: np.asarray(M).shape for name, M in matrices.items()}
    for name, shape in sizes.items():
        if len(shape) != 2 or shape[0] != shape[1]:
            raise PencilFormatError(f"matrix {name!r} is not square: {shape}")
    ns = {s[0] for s in sizes.values()}
    if len(ns) != 1:
        raise PencilFormatError(f"matrices differ in size: {sizes}")
    doc = {"n": int(ns.pop())}
    for name, M in matrices.items():
        doc[name] = matrix_to_lists(M)
    if labels:
        doc["labels"] = {str(k): str(v) for k, v in labels.items()}
    Path(path).write_text(dumps_canonical(doc))


def load_matrices(path, names: tuple) -> list[np.ndarray]:
    """Read the named matrices from a JSON file, in the order given."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PencilFormatError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PencilFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise PencilFormatError(f"{path}: top level must be an object")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise PencilFormatError(f"{path}: field 'n' must be a positive integer")
    out = []
    for name in names:
        if name not in doc:
            raise PencilFormatError(f"{path}: missing matrix {name!r}")
        out.append(matrix_from_lists(doc[name], n, name))
    return out


def save_pencil(path, P: BivariatePencil, labels: dict | None = None) -> None:
    save_matrices(path, {"A": P.A, "B": P.B, "C": P.C}, labels)


def load_pencil(path) -> BivariatePencil:
    A, B, C = load_matrices(path, ("A", "B", "C"))
    return BivariatePencil(A, B, C)


# ---------------------------------------------------------------------------
# reports

def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def point_to_dict(p: CriticalPoint) -> dict:
    return {
        "lambda": _pair(p.lam),
        "mu": _pair(p.mu),
        "kind": p.kind,
        "residuals": {
            "right": float(p.res_right),
            "left": float(p.res_left),
            "constraint": float(p.yBx),
            "transversality": float(p.yCx),
        },
        "multiplicities": {
            "lambda": {"algebraic": int(p.mult_lambda.algebraic),
                       "geometric": int(p.mult_lambda.geometric)},
            "mu": {"algebraic": int(p.mult_mu.algebraic),
                   "geometric": int(p.mult_mu.geometric)},
        },
    }


def _rejected_to_dict(r: RejectedCandidate) -> dict:
    return {
        "lambda": _pair(r.lam),
        "mu": None if r.mu is None else _pair(r.mu),
        "reason": r.reason,
    }


def report_to_dict(rep: PipelineReport) -> dict:
    return {
        "method": rep.method,
        "mode": rep.mode,
        "seed": int(rep.seed),
        "thresholds": {str(k): float(v) for k, v in rep.thresholds.items()},
        "nrank": None if rep.nrank is None else int(rep.nrank),
        "candidates": len(rep.candidates),
        "notes": list(rep.notes),
        "points": [point_to_dict(p) for p in rep.points],
        "rejected": [_rejected_to_dict(r) for r in rep.rejected],
    }
