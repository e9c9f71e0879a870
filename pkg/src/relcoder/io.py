"""JSON instance and report files.

Exact scalars are integers or "p/q" strings.  Canonical text is
``json.dumps(..., sort_keys=True, indent=2)`` plus a newline, so parsing and
re-serialising a canonical file gives the same bytes.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .cones import PolyCone
from .errors import DimensionMismatch, EmptyGraph, InstanceError
from .multifunction import PolyMultimap
from .polyhedra import Polyhedron
from .rational import frac_str

FORMAT_VERSION = 1
KINDS = ("multimap", "chain", "sum", "linear-operator", "extremal")
_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")

_FIELDS = {
    "multimap": {"required": {"S", "base"}, "optional": {"Omega", "Theta"}},
    "chain": {"required": {"S1", "base"}, "optional": {"S2", "inner", "Omega"}},
    "sum": {"required": {"S1", "S2", "base"}, "optional": {"Omega"}},
    "linear-operator": {"required": {"A"}, "optional": {"base"}},
    "extremal": {"required": {"L1", "L2", "base", "eps"}, "optional": {"Omega", "gamma", "dual"}},
}
_COMMON = {"version", "kind", "name", "oracle"}
_BASE_KEYS = {
    "multimap": ({"x", "y"}, set()),
    "chain": ({"x", "z"}, {"y"}),
    "sum": ({"x", "y", "y1", "y2"}, set()),
    "linear-operator": ({"x"}, set()),
    "extremal": ({"x", "y"}, set()),
}


@dataclass(frozen=True)
class OracleSettings:
    seed: int = 0
    radii: tuple[float, ...] = tuple(2.0 ** -k for k in range(3, 8))
    samples: int = 400
    tolerance: float = 1e-9


@dataclass(frozen=True)
class InstanceFile:
    kind: str
    data: dict  # parsed objects keyed by field name
    name: str = ""
    oracle: OracleSettings = field(default_factory=OracleSettings)
    version: int = FORMAT_VERSION

    def __getitem__(self, key):
        return self.data[key]

    def get(self, key, default=None):
        return self.data.get(key, default)


# --------------------------------------------------------------------------
# parsing


def _rational(v, path: str) -> Fraction:
    if isinstance(v, bool):
        raise InstanceError("expected an integer or a 'p/q' string", path)
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        mt = _RATIONAL.match(v)
        if mt:
            num, den = int(mt.group(1)), int(mt.group(2) or 1)
            if den == 0:
                raise InstanceError(f"zero denominator in {v!r}", path)
            return Fraction(num, den)
    raise InstanceError(f"expected an integer or a 'p/q' string, got {v!r}", path)


def _vector(v, path: str, dim: int | None = None) -> tuple[Fraction, ...]:
    if not isinstance(v, list):
        raise InstanceError("expected a list of rationals", path)
    out = tuple(_rational(t, f"{path}[{i}]") for i, t in enumerate(v))
    if dim is not None and len(out) != dim:
        raise InstanceError(f"length {len(out)} does not match dimension {dim}", path)
    return out


def _keys(obj, path: str, required: set, optional: set = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise InstanceError("expected an object", path)
    missing = sorted(required - obj.keys())
    if missing:
        raise InstanceError(f"missing field {missing[0]!r}", path)
    extra = sorted(obj.keys() - required - set(optional))
    if extra:
        raise InstanceError(f"unknown field {extra[0]!r}", f"{path}.{extra[0]}")


def _count(v, path: str, lo: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise InstanceError(f"expected an integer >= {lo}", path)
    return v


def _polyhedron(obj, path: str, dim: int | None = None) -> Polyhedron:
    _keys(obj, path, {"dim"}, {"ineqs", "eqs"})
    d = _count(obj["dim"], f"{path}.dim")
    if dim is not None and d != dim:
        raise InstanceError(f"dimension {d} does not match expected {dim}", f"{path}.dim")
    rows = {}
    for key in ("ineqs", "eqs"):
        lst = obj.get(key, [])
        if not isinstance(lst, list):
            raise InstanceError("expected a list of rows", f"{path}.{key}")
        rows[key] = []
        for i, r in enumerate(lst):
            rp = f"{path}.{key}[{i}]"
            _keys(r, rp, {"a", "b"})
            rows[key].append((_vector(r["a"], f"{rp}.a", d), _rational(r["b"], f"{rp}.b")))
    return Polyhedron.make(d, rows["ineqs"], rows["eqs"])


def _multimap(obj, path: str) -> PolyMultimap:
    _keys(obj, path, {"n", "m", "pieces"})
    n, m = _count(obj["n"], f"{path}.n"), _count(obj["m"], f"{path}.m")
    if not isinstance(obj["pieces"], list) or not obj["pieces"]:
        raise InstanceError("expected a non-empty list of graph pieces", f"{path}.pieces")
    pieces = [_polyhedron(p, f"{path}.pieces[{i}]", n + m) for i, p in enumerate(obj["pieces"])]
    try:
        return PolyMultimap.make(n, m, pieces)
    except EmptyGraph as exc:
        raise InstanceError(str(exc), f"{path}.pieces") from exc


def _union(obj, path: str, dim: int | None = None) -> tuple[Polyhedron, ...]:
    if not isinstance(obj, list) or not obj:
        raise InstanceError("expected a non-empty list of polyhedra", path)
    return tuple(_polyhedron(p, f"{path}[{i}]", dim) for i, p in enumerate(obj))


def _matrix(obj, path: str) -> tuple[tuple[Fraction, ...], ...]:
    if not isinstance(obj, list) or not obj:
        raise InstanceError("expected a non-empty list of rows", path)
    rows = [_vector(r, f"{path}[{i}]") for i, r in enumerate(obj)]
    if not rows[0] or any(len(r) != len(rows[0]) for r in rows):
        raise InstanceError("rows must be non-empty and of equal length", path)
    return tuple(rows)


def _oracle(obj, path: str) -> OracleSettings:
    _keys(obj, path, set(), {"seed", "radii", "samples", "tolerance"})
    d = OracleSettings()
    seed = obj.get("seed", d.seed)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise InstanceError("seed must be an unsigned 64-bit integer", f"{path}.seed")
    radii = obj.get("radii", list(d.radii))
    if (not isinstance(radii, list) or not radii
            or any(isinstance(r, bool) or not isinstance(r, (int, float)) or r <= 0 for r in radii)
            or any(a <= b for a, b in zip(radii, radii[1:]))):
        raise InstanceError("radii must be positive and strictly decreasing", f"{path}.radii")
    samples = _count(obj.get("samples", d.samples), f"{path}.samples", 1)
    tol = obj.get("tolerance", d.tolerance)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol < 0:
        raise InstanceError("tolerance must be a non-negative number", f"{path}.tolerance")
    return OracleSettings(seed, tuple(float(r) for r in radii), samples, float(tol))


def parse_instance(doc: Any) -> InstanceFile:
    if not isinstance(doc, dict):
        raise InstanceError("instance must be a JSON object", "$")
    if "version" not in doc:
        raise InstanceError("missing field 'version'", "$")
    if isinstance(doc["version"], bool) or doc["version"] != FORMAT_VERSION:
        raise InstanceError(f"unsupported version {doc['version']!r}, expected {FORMAT_VERSION}", "$.version")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InstanceError(f"kind must be one of {', '.join(KINDS)}", "$.kind")
    fields = _FIELDS[kind]
    _keys(doc, "$", fields["required"] | {"version", "kind"}, fields["optional"] | _COMMON)
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise InstanceError("name must be a string", "$.name")
    oracle = _oracle(doc["oracle"], "$.oracle") if "oracle" in doc else OracleSettings()
    data: dict = {}
    try:
        if kind == "multimap":
            S = _multimap(doc["S"], "$.S")
            data["S"] = S
            n, m = S.n, S.m
        elif kind in ("chain", "sum"):
            S1 = _multimap(doc["S1"], "$.S1")
            data["S1"] = S1
            n = S1.n
            if kind == "chain":
                has2, hasA = "S2" in doc, "inner" in doc
                if has2 == hasA:
                    raise InstanceError("give exactly one of 'S2' and 'inner'", "$")
                if has2:
                    S2 = _multimap(doc["S2"], "$.S2")
                    if S2.n != S1.m:
                        raise InstanceError(f"S2 takes inputs of dimension {S2.n}, S1 produces {S1.m}", "$.S2.n")
                    data["S2"] = S2
                    m = S2.m
                else:
                    _keys(doc["inner"], "$.inner", {"A"}, {"offset"})
                    A = _matrix(doc["inner"]["A"], "$.inner.A")
                    if len(A[0]) != S1.m:
                        raise InstanceError(f"inner matrix has {len(A[0])} columns, S1 produces {S1.m}", "$.inner.A")
                    off = doc["inner"].get("offset")
                    data["inner"] = {"A": A, "offset": _vector(off, "$.inner.offset", len(A)) if off is not None else None}
                    m = len(A)
            else:
                S2 = _multimap(doc["S2"], "$.S2")
                if (S2.n, S2.m) != (S1.n, S1.m):
                    raise InstanceError("S1 and S2 must have the same dimensions", "$.S2")
                data["S2"] = S2
                m = S1.m
        elif kind == "linear-operator":
            A = _matrix(doc["A"], "$.A")
            data["A"] = A
            n, m = len(A[0]), len(A)
        else:
            first = doc["L1"][0] if isinstance(doc["L1"], list) and doc["L1"] else None
            if not isinstance(first, dict) or "dim" not in first:
                raise InstanceError("expected a non-empty list of polyhedra", "$.L1")
            dim = _count(first["dim"], "$.L1[0].dim")
            data["L1"] = _union(doc["L1"], "$.L1", dim)
            data["L2"] = _union(doc["L2"], "$.L2", dim)
            base = doc["base"]
            if not isinstance(base, dict) or not isinstance(base.get("x"), list):
                raise InstanceError("expected an object with 'x' and 'y'", "$.base")
            n = len(base["x"])
            m = dim - n
            data["eps"] = _rational(doc["eps"], "$.eps")
            if data["eps"] < 0:
                raise InstanceError("eps must be nonnegative", "$.eps")
            if "gamma" in doc:
                data["gamma"] = _rational(doc["gamma"], "$.gamma")
                if data["gamma"] <= 0:
                    raise InstanceError("gamma must be positive", "$.gamma")
            if "dual" in doc:
                _keys(doc["dual"], "$.dual", {"x", "y"})
                data["dual"] = (_vector(doc["dual"]["x"], "$.dual.x", n), _vector(doc["dual"]["y"], "$.dual.y", m))
        if "Omega" in fields["optional"]:
            data["Omega"] = None if doc.get("Omega") is None else _polyhedron(doc["Omega"], "$.Omega", n)
        if "Theta" in fields["optional"]:
            data["Theta"] = None if doc.get("Theta") is None else _polyhedron(doc["Theta"], "$.Theta", m)
        req, opt = _BASE_KEYS[kind]
        if "base" in doc:
            _keys(doc["base"], "$.base", req, opt)
            dims = {"x": n, "y": m, "y1": m, "y2": m, "z": m}
            if kind == "chain":
                dims["y"] = data["S1"].m
            data["base"] = {k: _vector(v, f"$.base.{k}", dims[k]) for k, v in doc["base"].items()}
        else:
            data["base"] = {"x": (Fraction(0),) * n}
    except DimensionMismatch as exc:
        raise InstanceError(str(exc), "$") from exc
    return InstanceFile(kind, data, name, oracle)


def loads_instance(text: str) -> InstanceFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc.msg}", "", exc.lineno, exc.colno) from exc
    return parse_instance(doc)


def load_instance(path: str | Path) -> InstanceFile:
    return loads_instance(Path(path).read_text())


# --------------------------------------------------------------------------
# serialisation


def _q(v) -> int | str:
    f = Fraction(v)
    return f.numerator if f.denominator == 1 else frac_str(f)


def polyhedron_doc(P: Polyhedron) -> dict:
    return {"dim": P.dim,
            "ineqs": [{"a": [_q(t) for t in a], "b": _q(b)} for a, b in P.ineqs],
            "eqs": [{"a": [_q(t) for t in a], "b": _q(b)} for a, b in P.eqs]}


def multimap_doc(S: PolyMultimap) -> dict:
    return {"n": S.n, "m": S.m, "pieces": [polyhedron_doc(P) for P in S.pieces]}


def _num(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}") + 0.0  # folds -0.0 into 0.0


def instance_doc(inst: InstanceFile) -> dict:
    d = inst.data
    doc: dict = {"version": inst.version, "kind": inst.kind}
    if inst.name:
        doc["name"] = inst.name
    o = inst.oracle
    doc["oracle"] = {"seed": o.seed, "radii": [_num(r) for r in o.radii], "samples": o.samples,
                     "tolerance": _num(o.tolerance)}
    for key in ("S", "S1", "S2"):
        if key in d:
            doc[key] = multimap_doc(d[key])
    for key in ("L1", "L2"):
        if key in d:
            doc[key] = [polyhedron_doc(P) for P in d[key]]
    for key in ("Omega", "Theta"):
        if key in d:
            doc[key] = None if d[key] is None else polyhedron_doc(d[key])
    if "inner" in d:
        inner = {"A": [[_q(t) for t in r] for r in d["inner"]["A"]]}
        if d["inner"]["offset"] is not None:
            inner["offset"] = [_q(t) for t in d["inner"]["offset"]]
        doc["inner"] = inner
    if "A" in d:
        doc["A"] = [[_q(t) for t in r] for r in d["A"]]
    for key in ("eps", "gamma"):
        if key in d:
            doc[key] = _q(d[key])
    if "dual" in d:
        doc["dual"] = {"x": [_q(t) for t in d["dual"][0]], "y": [_q(t) for t in d["dual"][1]]}
    doc["base"] = {k: [_q(t) for t in v] for k, v in d["base"].items()}
    return doc


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def dumps_instance(inst: InstanceFile) -> str:
    return canonical_json(instance_doc(inst))


def save_instance(inst: InstanceFile, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst))


def digest(inst: InstanceFile) -> str:
    return hashlib.sha256(dumps_instance(inst).encode()).hexdigest()


# --------------------------------------------------------------------------
# reports


def cone_doc(c: PolyCone) -> dict:
    return {"rays": [[_q(t) for t in g] for g in c.gens], "lineality": [[_q(t) for t in l] for l in c.lin]}


def to_jsonable(obj: Any) -> Any:
    """Report values: rationals as strings, floats at 12 significant digits, stable ordering."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return _q(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, PolyCone):
        return cone_doc(obj)
    if isinstance(obj, Polyhedron):
        return polyhedron_doc(obj)
    if isinstance(obj, PolyMultimap):
        return multimap_doc(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if not f.name.startswith("_")}
        for name in ("holds", "hypothesesVerified", "converged"):
            if hasattr(type(obj), name) and isinstance(getattr(type(obj), name), property):
                out[name] = bool(getattr(obj, name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def make_report(inst: InstanceFile | None, operation: str, result: Any, seed: int, config: dict) -> dict:
    from . import __version__

    return {
        "instanceDigest": digest(inst) if inst is not None else None,
        "operation": operation,
        "result": to_jsonable(result),
        "toolkitVersion": __version__,
        "seed": seed,
        "config": to_jsonable(config),
    }


def emit_report(report: dict, path: str | Path | None = None) -> str:
    text = canonical_json(report)
    if path is not None:
        Path(path).write_text(text)
    return text
