"""Matrix files and JSON reports.

A matrix file is JSON::

    {"format": "povm-duel-matrix", "version": 1, "dim": 2,
     "entries": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
     "metadata": {"name": "identity"}}

Each entry is a ``[re, im]`` pair. Floats are always written with 17
significant digits so a write/read cycle is exact.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import MatrixFileError

MATRIX_FORMAT = "povm-duel-matrix"
VECTOR_FORMAT = "povm-duel-vector"
REPORT_FORMAT = "povm-duel-report"
FORMAT_VERSION = 1


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite float {x!r}")
    if x == 0.0:
        return "0.0" if math.copysign(1.0, x) > 0 else "-0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_jsonable(obj):
    """Convert numpy values to plain lists/scalars; complex numbers become ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _encode(obj, indent, level, out):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl if indent else ", "
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        # numeric leaves stay on one line
        if not obj or all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            out.append("[" + ", ".join(format_float(v) if isinstance(v, float) else str(v) for v in obj) + "]")
            return
        out.append("[" + nl)
        for k, v in enumerate(obj):
            out.append(pad)
            _encode(v, indent, level + 1, out)
            if k + 1 < len(obj):
                out.append(sep)
        out.append(nl + end + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        items = list(obj.items())
        for k, (key, v) in enumerate(items):
            out.append(pad + json.dumps(key) + ": ")
            _encode(v, indent, level + 1, out)
            if k + 1 < len(items):
                out.append(sep)
        out.append(nl + end + "}")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent=2) -> str:
    out: list[str] = []
    _encode(to_jsonable(obj), indent, 0, out)
    return "".join(out) + "\n"


def _reject_constant(name):
    raise ValueError(f"non-finite constant {name}")


def loads(text: str, source="<string>"):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(exc.msg, f"{source}: line {exc.lineno} column {exc.colno}") from None
    except ValueError as exc:
        raise MatrixFileError(str(exc), source) from None


def _number(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MatrixFileError(f"expected a number, got {type(v).__name__}", where)
    x = float(v)
    if not math.isfinite(x):
        raise MatrixFileError("entry is not finite", where)
    return x


def _pair(v, where) -> complex:
    if not isinstance(v, list) or len(v) != 2:
        raise MatrixFileError("expected a [re, im] pair", where)
    return complex(_number(v[0], where + "[0]"), _number(v[1], where + "[1]"))


def matrix_from_json(doc, source="<matrix>") -> np.ndarray:
    if not isinstance(doc, dict):
        raise MatrixFileError("top level must be an object", source)
    fmt = doc.get("format", MATRIX_FORMAT)
    if fmt != MATRIX_FORMAT:
        raise MatrixFileError(f"unexpected format {fmt!r}", f"{source}: format")
    if "entries" not in doc:
        raise MatrixFileError("missing field", f"{source}: entries")
    rows = doc["entries"]
    if not isinstance(rows, list) or not rows:
        raise MatrixFileError("expected a non-empty list of rows", f"{source}: entries")
    d = len(rows)
    if "dim" in doc:
        dim = doc["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise MatrixFileError("dim must be a positive integer", f"{source}: dim")
        if dim != d:
            raise MatrixFileError(f"dim is {dim} but entries has {d} rows", f"{source}: dim")
    out = np.empty((d, d), dtype=np.complex128)
    for i, row in enumerate(rows):
        where = f"{source}: entries[{i}]"
        if not isinstance(row, list):
            raise MatrixFileError("row must be a list", where)
        if len(row) != d:
            raise MatrixFileError(f"row has {len(row)} entries, matrix is not square ({d} rows)", where)
        for j, v in enumerate(row):
            out[i, j] = _pair(v, f"{where}[{j}]")
    return out


def vector_from_json(doc, source="<vector>") -> np.ndarray:
    if not isinstance(doc, dict):
        raise MatrixFileError("top level must be an object", source)
    if "entries" not in doc:
        raise MatrixFileError("missing field", f"{source}: entries")
    vals = doc["entries"]
    if not isinstance(vals, list) or not vals:
        raise MatrixFileError("expected a non-empty list", f"{source}: entries")
    return np.array([_pair(v, f"{source}: entries[{i}]") for i, v in enumerate(vals)], dtype=np.complex128)


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixFileError(exc.strerror or str(exc), str(path)) from None
    except UnicodeDecodeError:
        raise MatrixFileError("file is not UTF-8 text", str(path)) from None
    return loads(text, str(path))


def parse_matrix(path) -> np.ndarray:
    return matrix_from_json(read_json(path), str(path))


def parse_vector(path) -> np.ndarray:
    return vector_from_json(read_json(path), str(path))


def matrix_document(m, metadata=None) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    doc = {"format": MATRIX_FORMAT, "version": FORMAT_VERSION, "dim": int(m.shape[0]), "entries": m}
    if metadata:
        doc["metadata"] = metadata
    return doc


def vector_document(v, metadata=None) -> dict:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    doc = {"format": VECTOR_FORMAT, "version": FORMAT_VERSION, "dim": int(v.size), "entries": v}
    if metadata:
        doc["metadata"] = metadata
    return doc


def write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8")


def write_matrix(path, m, metadata=None):
    write_text(path, dumps(matrix_document(m, metadata)))


def digest(m) -> str:
    """SHA-256 of the 17-digit serialisation of a complex matrix."""
    return "sha256:" + hashlib.sha256(dumps(np.asarray(m, dtype=np.complex128), indent=0).encode()).hexdigest()


def complex_array(data, where="value") -> np.ndarray:
    """Inverse of ``to_jsonable`` for complex arrays (innermost axis ``[re, im]``)."""
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise MatrixFileError("expected nested [re, im] pairs", where) from None
    if a.ndim < 1 or a.shape[-1] != 2:
        raise MatrixFileError("expected nested [re, im] pairs", where)
    return a[..., 0] + 1j * a[..., 1]
