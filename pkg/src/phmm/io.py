"""JSON documents for systems, generators and certificates.

A document is a JSON object::

    {"name": "...", "kind": "ph", "matrices": {"J": [[...], ...], ...},
     "flags": {"r_psd": true, "q_pd": true}}

Matrix entries are numbers or ``[re, im]`` pairs.  In generator documents a
matrix may be given as ``{"jordan": {"eig": x, "size": k}}`` (upper block for
``S``, lower block for ``Qc``).  Numbers are written with 17 significant
digits, so parse/write round-trips every finite double exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DimensionError, SchemaError
from .linalg import jordan_block
from .reduction import CERTIFICATE_KINDS, MatchCertificate
from .systems import DescriptorModel, GeneratorLeft, GeneratorRight, LtiSystem, PortHamiltonianSystem

__all__ = [
    "KINDS",
    "parse_document",
    "write_document",
    "load_document",
    "save_document",
    "atomic_write_text",
    "format_number",
    "dumps",
    "parse_matrix",
]

_LAYOUT: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    # kind: (required matrices, flags)
    "ph": (("J", "R", "Q", "B"), ("r_psd", "q_pd")),
    "lti": (("A", "B", "C"), ()),
    "descriptor": (("E", "F", "G", "H"), ("input_derivative", "output_derivative")),
    "generator_right": (("S", "L"), ()),
    "generator_left": (("Qc", "Rc"), ()),
    "certificate": (("P",), ()),
}
KINDS = tuple(_LAYOUT)
_CERT_MATRICES = ("S", "L", "Qc", "Rc", "target")


def format_number(v: float) -> str:
    if not np.isfinite(v):
        raise SchemaError("documents hold finite numbers only")
    if v == 0 and np.signbit(v):
        return "-0.0"  # a bare "-0" would parse back as the integer 0
    return format(float(v), ".17g")


def _scalar(v: Any, where: str) -> complex | float:
    if isinstance(v, bool):
        raise SchemaError(f"{where}: expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(float(v[0]), float(v[1]))
    raise SchemaError(f"{where}: expected a number or an [re, im] pair")


def _matrix(v: Any, where: str) -> np.ndarray:
    if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
        raise SchemaError(f"{where}: a matrix is a list of rows")
    widths = {len(r) for r in v}
    if len(widths) > 1:
        raise DimensionError(f"{where}: rows have different lengths {sorted(widths)}")
    rows = [[_scalar(x, f"{where}[{i}]") for x in r] for i, r in enumerate(v)]
    cplx = any(isinstance(x, complex) for r in rows for x in r)
    out = np.array(rows, dtype=complex if cplx else float)
    if out.ndim != 2:
        out = out.reshape(len(rows), 0)
    return out


def _expand(v: Any, where: str, lower: bool) -> np.ndarray:
    if isinstance(v, dict):
        spec = v.get("jordan")
        if not isinstance(spec, dict) or set(spec) - {"eig", "size"} or "size" not in spec:
            raise SchemaError(f"{where}: shorthand must be {{'jordan': {{'eig': x, 'size': k}}}}")
        size = spec["size"]
        if not isinstance(size, int) or isinstance(size, bool) or size < 1:
            raise SchemaError(f"{where}: jordan size must be a positive integer")
        eig = _scalar(spec.get("eig", 0.0), f"{where}.eig")
        return jordan_block(eig, size, lower=lower)
    return _matrix(v, where)


def parse_document(text: str) -> Any:
    """Parse a JSON document into its domain object.

    Raises
    ------
    SchemaError
        Malformed JSON, unknown kind or missing matrix.
    InvariantError, DimensionError
        Raised by the domain constructors.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("a document is a JSON object")
    kind = doc.get("kind")
    if kind not in _LAYOUT:
        raise SchemaError(f"unknown kind {kind!r}; expected one of {KINDS}")
    mats = doc.get("matrices", {})
    if not isinstance(mats, dict):
        raise SchemaError("'matrices' must be an object")
    flags = doc.get("flags", {}) or {}
    need, allowed = _LAYOUT[kind]
    if not isinstance(flags, dict) or set(flags) - set(allowed) or not all(isinstance(f, bool) for f in flags.values()):
        raise SchemaError(f"kind {kind!r} accepts boolean flags {allowed}")

    if kind == "generator_right":
        if "S" not in mats:
            raise SchemaError("missing matrix 'S'")
        S = _expand(mats["S"], "S", lower=False)
        if "L" in mats:
            return GeneratorRight(S, _matrix(mats["L"], "L"))
        if not isinstance(mats["S"], dict):
            raise SchemaError("missing matrix 'L'")
        return GeneratorRight(S, np.eye(1, S.shape[0]))
    if kind == "generator_left":
        if "Qc" not in mats:
            raise SchemaError("missing matrix 'Qc'")
        Qc = _expand(mats["Qc"], "Qc", lower=True)
        if "Rc" in mats:
            return GeneratorLeft(Qc, _matrix(mats["Rc"], "Rc"))
        if not isinstance(mats["Qc"], dict):
            raise SchemaError("missing matrix 'Rc'")
        return GeneratorLeft(Qc, np.eye(Qc.shape[0], 1))

    missing = [k for k in need if k not in mats]
    if missing:
        raise SchemaError(f"kind {kind!r} is missing matrices {missing}")
    M = {k: _matrix(v, k) for k, v in mats.items()}
    if kind == "ph":
        extra = set(M) - set(need)
        if extra:
            raise SchemaError(f"unexpected matrices {sorted(extra)}")
        return PortHamiltonianSystem(M["J"], M["R"], M["Q"], M["B"], **flags)
    if kind == "lti":
        return LtiSystem(M["A"], M["B"], M["C"])
    if kind == "descriptor":
        return DescriptorModel(M["E"], M["F"], M["G"], M["H"], **flags)
    ck = doc.get("certificate_kind")
    if ck not in CERTIFICATE_KINDS:
        raise SchemaError(f"unknown certificate_kind {ck!r}")
    data: dict[str, Any] = {k: M[k] for k in _CERT_MATRICES if k in M}
    scalars = doc.get("scalars", {}) or {}
    if not isinstance(scalars, dict):
        raise SchemaError("'scalars' must be an object")
    data.update({k: _scalar(v, k) for k, v in scalars.items()})
    return MatchCertificate(M["P"], ck, data)


def _fmt_entry(x) -> str:
    if isinstance(x, complex) or np.iscomplexobj(x):
        x = complex(x)
        return f"[{format_number(x.real)}, {format_number(x.imag)}]"
    return format_number(x)


def _fmt_matrix(M: np.ndarray, indent: str) -> str:
    M = np.atleast_2d(np.asarray(M))
    if np.iscomplexobj(M) and not np.any(M.imag):
        M = M.real
    if M.shape[0] == 0:
        return "[]"
    rows = [indent + "  [" + ", ".join(_fmt_entry(x) for x in r) + "]" for r in M]
    return "[\n" + ",\n".join(rows) + "\n" + indent + "]"


def _identify(obj) -> tuple[str, dict[str, np.ndarray], dict[str, bool]]:
    if isinstance(obj, PortHamiltonianSystem):
        return "ph", {"J": obj.J, "R": obj.R, "Q": obj.Q, "B": obj.B}, {"r_psd": obj.r_psd, "q_pd": obj.q_pd}
    if isinstance(obj, LtiSystem):
        return "lti", {"A": obj.A, "B": obj.B, "C": obj.C}, {}
    if isinstance(obj, DescriptorModel):
        return "descriptor", {"E": obj.E, "F": obj.F, "G": obj.G, "H": obj.H}, \
            {"input_derivative": obj.input_derivative, "output_derivative": obj.output_derivative}
    if isinstance(obj, GeneratorRight):
        return "generator_right", {"S": obj.S, "L": obj.L}, {}
    if isinstance(obj, GeneratorLeft):
        return "generator_left", {"Qc": obj.Qc, "Rc": obj.Rc}, {}
    if isinstance(obj, MatchCertificate):
        mats = {"P": obj.P}
        mats.update({k: np.asarray(obj.data[k]) for k in _CERT_MATRICES if k in obj.data})
        return "certificate", mats, {}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_document(obj, name: str = "") -> str:
    """Serialize a domain object; output is deterministic and ends in ``\\n``."""
    kind, mats, flags = _identify(obj)
    lines = ["{", f'  "name": {json.dumps(name)},', f'  "kind": {json.dumps(kind)},']
    if isinstance(obj, MatchCertificate):
        lines.append(f'  "certificate_kind": {json.dumps(obj.kind)},')
        scalars = {k: v for k, v in obj.data.items() if k not in _CERT_MATRICES and np.isscalar(v)}
        if scalars:
            body = ", ".join(f"{json.dumps(k)}: {_fmt_entry(v)}" for k, v in sorted(scalars.items()))
            lines.append(f'  "scalars": {{{body}}},')
    body = ",\n".join(f'    {json.dumps(k)}: {_fmt_matrix(v, "    ")}' for k, v in mats.items())
    tail = "\n  }"
    if flags:
        fl = ", ".join(f"{json.dumps(k)}: {json.dumps(bool(v))}" for k, v in flags.items())
        tail += f',\n  "flags": {{{fl}}}'
    lines.append('  "matrices": {\n' + body + tail)
    return "\n".join(lines) + "\n}\n"


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_document(path: str | os.PathLike) -> Any:
    return parse_document(Path(path).read_text(encoding="utf-8"))


def save_document(obj, path: str | os.PathLike, name: str = "") -> None:
    atomic_write_text(path, write_document(obj, name))


def parse_matrix(text: str) -> np.ndarray:
    """Matrix from JSON text: a list of rows or ``{"matrix": rows}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict):
        if "matrix" not in doc:
            raise SchemaError("expected a list of rows or an object with 'matrix'")
        doc = doc["matrix"]
    return _matrix(doc, "matrix")


def dumps(value: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON text with 17-significant-digit numbers.

    Arrays become nested lists, complex numbers ``[re, im]`` pairs.
    """
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value) and not np.any(value.imag):
            value = value.real
        value = value.tolist()
    if value is None or isinstance(value, (bool, np.bool_)):
        return json.dumps(None if value is None else bool(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    if isinstance(value, (complex, np.complexfloating)):
        return _fmt_entry(complex(value))
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in value):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in value) + "]"
        items = [inner + dumps(v, indent, _level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot encode {type(value).__name__}")
