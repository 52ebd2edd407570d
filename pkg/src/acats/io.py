"""Versioned JSON documents for every structure kind.

Top level: ``{"version": 1, "kind": ..., "tolerance": ..., "payload": {...}}``.
Tables are dense (a missing entry is an error) and infinity is the string
``"inf"``. Object and arrow ids must be strings or integers.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import Any

import numpy as np

from .core import ACStructure, Arrow
from .geometry import PLPath, PLPathSet, TwoMetric
from .metcat import MetrizedCategory
from .metcor import Correspondence, FiniteMetricSpace
from .report import DEFAULT_TOLERANCE, ACError

FORMAT_VERSION = 1
KINDS = ("ac", "metcat", "metcor-space", "correspondence", "two-metric", "plpath")


class DocumentError(ACError, ValueError):
    """Unreadable or schema-invalid document; the message names the location."""

    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


# -- scalars ---------------------------------------------------------------


def _num_out(x: float) -> Any:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        raise ValueError("cannot serialize NaN")
    return x


def _num_in(v, where: str) -> float:
    if isinstance(v, str):
        if v in ("inf", "-inf"):
            return float(v)
        try:
            return float(v)
        except ValueError:
            raise DocumentError(where, f"not a number: {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DocumentError(where, f"not a number: {v!r}")
    return float(v)


def _id_out(a, where: str = "id"):
    if isinstance(a, bool) or not isinstance(a, (str, int)):
        raise DocumentError(where, f"id {a!r} is not a string or integer")
    return a


def _id_in(v, where: str):
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise DocumentError(where, f"id {v!r} is not a string or integer")
    return v


def _get(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise DocumentError(where, "expected an object")
    if key not in d:
        raise DocumentError(where, f"missing field {key!r}")
    return d[key]


def _list(v, where: str) -> list:
    if not isinstance(v, list):
        raise DocumentError(where, "expected a list")
    return v


def _matrix_out(M) -> list:
    return [[_num_out(x) for x in row] for row in np.asarray(M)]


def _matrix_in(v, shape: tuple, where: str) -> np.ndarray:
    rows = _list(v, where)
    if len(rows) != shape[0]:
        raise DocumentError(where, f"expected {shape[0]} rows, got {len(rows)}")
    out = np.zeros(shape)
    for i, r in enumerate(rows):
        r = _list(r, f"{where}[{i}]")
        if len(r) != shape[1]:
            raise DocumentError(f"{where}[{i}]", f"expected {shape[1]} entries, got {len(r)}")
        for j, x in enumerate(r):
            out[i, j] = _num_in(x, f"{where}[{i}][{j}]")
    return out


# -- graph pieces ----------------------------------------------------------


def _graph_out(objects, arrows, identities) -> dict:
    out = {
        "objects": [_id_out(x, "objects") for x in objects],
        "arrows": [{"id": _id_out(a.id, "arrows"), "src": a.src, "dst": a.dst} for a in arrows],
    }
    if identities is not None:
        out["identities"] = {str(x): _id_out(identities[x], "identities") for x in objects}
    return out


def _graph_in(p: dict, where: str):
    objects = [_id_in(x, f"{where}.objects[{i}]") for i, x in enumerate(_list(_get(p, "objects", where), f"{where}.objects"))]
    by_name = {str(x): x for x in objects}
    if len(by_name) != len(objects):
        raise DocumentError(f"{where}.objects", "object ids collide as strings")
    arrows = []
    for i, a in enumerate(_list(_get(p, "arrows", where), f"{where}.arrows")):
        w = f"{where}.arrows[{i}]"
        src, dst = _id_in(_get(a, "src", w), w), _id_in(_get(a, "dst", w), w)
        for end in (src, dst):
            if end not in objects:
                raise DocumentError(w, f"unknown object {end!r}")
        arrows.append(Arrow(_id_in(_get(a, "id", w), w), src, dst))
    ids = {a.id for a in arrows}
    if len(ids) != len(arrows):
        raise DocumentError(f"{where}.arrows", "duplicate arrow id")
    identities = None
    if "identities" in p:
        identities = {}
        if not isinstance(p["identities"], dict):
            raise DocumentError(f"{where}.identities", "expected an object")
        for k, e in p["identities"].items():
            w = f"{where}.identities.{k}"
            if k not in by_name:
                raise DocumentError(w, "unknown object")
            if e not in ids:
                raise DocumentError(w, f"unknown arrow {e!r}")
            identities[by_name[k]] = e
    return objects, arrows, identities, ids


# -- per kind --------------------------------------------------------------


def _ac_out(ac: ACStructure, amplitude=None) -> dict:
    p = _graph_out(ac.objects, ac.arrows, ac.identities)
    p["triples"] = [{"f": f, "g": g, "h": h, "value": _num_out(v)} for f, g, h, v in ac.triples()]
    if amplitude is not None:
        p["amplitude"] = {str(a.id): _num_out(amplitude[a.id]) for a in ac.arrows}
    return p


def _ac_in(p: dict, tol: float):
    objects, arrows, identities, ids = _graph_in(p, "payload")
    table = {}
    for i, t in enumerate(_list(_get(p, "triples", "payload"), "payload.triples")):
        w = f"payload.triples[{i}]"
        key = tuple(_id_in(_get(t, k, w), w) for k in ("f", "g", "h"))
        for a in key:
            if a not in ids:
                raise DocumentError(w, f"unknown arrow {a!r}")
        if key in table:
            raise DocumentError(w, "duplicate triple")
        table[key] = _num_in(_get(t, "value", w), f"{w}.value")
    try:
        ac = ACStructure(objects, arrows, identities, table, tol)
    except ACError as e:
        raise DocumentError("payload.triples", str(e)) from None
    expected = sum(b.size for b in ac._blocks.values())
    if len(table) != expected:
        raise DocumentError("payload.triples", f"{len(table) - expected} entries are not composable triples")
    amplitude = None
    if "amplitude" in p:
        by_name = {str(a.id): a.id for a in arrows}
        amp = p["amplitude"]
        if not isinstance(amp, dict):
            raise DocumentError("payload.amplitude", "expected an object")
        amplitude = {}
        for a in arrows:
            if str(a.id) not in amp:
                raise DocumentError("payload.amplitude", f"missing arrow {a.id!r}")
            amplitude[a.id] = _num_in(amp[str(a.id)], f"payload.amplitude.{a.id}")
        extra = set(amp) - set(by_name)
        if extra:
            raise DocumentError("payload.amplitude", f"unknown arrows {sorted(extra)}")
    return ac, amplitude


def _metcat_out(mc: MetrizedCategory) -> dict:
    p = _graph_out(mc.objects, mc.arrows, mc.identities)
    p["compose"] = [{"f": f, "g": g, "result": h} for (f, g), h in mc.composition.items()]
    p["phi"] = []
    for x, y in itertools.product(mc.objects, repeat=2):
        A = mc.hom(x, y)
        if not A:
            continue
        P = mc.phi_matrix(x, y)
        p["phi"].append({"hom": [x, y], "entries": [{"a": a, "b": b, "value": _num_out(P[i, j])}
                                                    for (i, a), (j, b) in itertools.product(enumerate(A), repeat=2)]})
    if mc.partial:
        p["partial"] = True
    return p


def _metcat_in(p: dict, tol: float) -> MetrizedCategory:
    objects, arrows, identities, ids = _graph_in(p, "payload")
    if identities is None:
        raise DocumentError("payload", "missing field 'identities'")
    compose = {}
    for i, c in enumerate(_list(_get(p, "compose", "payload"), "payload.compose")):
        w = f"payload.compose[{i}]"
        f, g, h = (_id_in(_get(c, k, w), w) for k in ("f", "g", "result"))
        for a in (f, g, h):
            if a not in ids:
                raise DocumentError(w, f"unknown arrow {a!r}")
        compose[f, g] = h
    hom = {}
    for a in arrows:
        hom.setdefault((a.src, a.dst), []).append(a.id)
    mats = {(x, y): np.zeros((len(hom.get((x, y), [])),) * 2) for x, y in itertools.product(objects, repeat=2)}
    seen = set()
    for i, block in enumerate(_list(_get(p, "phi", "payload"), "payload.phi")):
        w = f"payload.phi[{i}]"
        xy = [_id_in(v, f"{w}.hom") for v in _list(_get(block, "hom", w), f"{w}.hom")]
        if len(xy) != 2 or tuple(xy) not in mats:
            raise DocumentError(f"{w}.hom", f"unknown hom {xy!r}")
        A = hom.get(tuple(xy), [])
        pos = {a: k for k, a in enumerate(A)}
        M = mats[tuple(xy)]
        filled = np.zeros(M.shape, dtype=bool)
        for j, e in enumerate(_list(_get(block, "entries", w), f"{w}.entries")):
            we = f"{w}.entries[{j}]"
            a, b = _id_in(_get(e, "a", we), we), _id_in(_get(e, "b", we), we)
            if a not in pos or b not in pos:
                raise DocumentError(we, "arrow not in this hom set")
            M[pos[a], pos[b]] = _num_in(_get(e, "value", we), f"{we}.value")
            filled[pos[a], pos[b]] = True
        if not filled.all():
            raise DocumentError(w, "phi table is not dense")
        seen.add(tuple(xy))
    for key, A in hom.items():
        if A and key not in seen:
            raise DocumentError("payload.phi", f"no entries for hom {list(key)!r}")
    partial = bool(p.get("partial", False))
    try:
        return MetrizedCategory.from_matrices(objects, arrows, identities, compose, mats, tol, partial=partial)
    except ACError as e:
        raise DocumentError("payload.compose", str(e)) from None


def _space_out(X: FiniteMetricSpace) -> dict:
    return {"points": [_id_out(x, "points") for x in X.points], "dist": _matrix_out(X.dist)}


def _space_in(p: dict, tol: float, where: str) -> FiniteMetricSpace:
    pts = [_id_in(x, f"{where}.points") for x in _list(_get(p, "points", where), f"{where}.points")]
    D = _matrix_in(_get(p, "dist", where), (len(pts), len(pts)), f"{where}.dist")
    # axioms are checked by the validate command, not at load time
    return FiniteMetricSpace(pts, D, tol, check=False)


def _corr_out(c: Correspondence) -> dict:
    return {"source": _space_out(c.source), "target": _space_out(c.target), "values": _matrix_out(c.values)}


def _corr_in(p: dict, tol: float) -> Correspondence:
    X = _space_in(_get(p, "source", "payload"), tol, "payload.source")
    Y = _space_in(_get(p, "target", "payload"), tol, "payload.target")
    return Correspondence(X, Y, _matrix_in(_get(p, "values", "payload"), (len(X), len(Y)), "payload.values"))


def _two_metric_out(tm: TwoMetric) -> dict:
    n = len(tm)
    p = {"points": list(tm.labels),
         "table": [{"p": list(map(tm.labels.__getitem__, t)), "value": _num_out(tm.table[t])}
                   for t in itertools.combinations_with_replacement(range(n), 3)]}
    if tm.coords is not None:
        p["coords"] = _matrix_out(tm.coords)
    return p


def _two_metric_in(p: dict, tol: float) -> TwoMetric:
    labels = [_id_in(x, "payload.points") for x in _list(_get(p, "points", "payload"), "payload.points")]
    pos = {x: i for i, x in enumerate(labels)}
    n = len(labels)
    T = np.zeros((n, n, n))
    filled = set()
    for i, e in enumerate(_list(_get(p, "table", "payload"), "payload.table")):
        w = f"payload.table[{i}]"
        tri = _list(_get(e, "p", w), f"{w}.p")
        if len(tri) != 3 or any(t not in pos for t in tri):
            raise DocumentError(f"{w}.p", f"bad point triple {tri!r}")
        idx = tuple(pos[t] for t in tri)
        v = _num_in(_get(e, "value", w), f"{w}.value")
        for perm in itertools.permutations(idx):
            T[perm] = v
        filled.add(tuple(sorted(idx)))
    missing = [t for t in itertools.combinations_with_replacement(range(n), 3) if t not in filled]
    if missing:
        raise DocumentError("payload.table", f"missing entry for {[labels[i] for i in missing[0]]!r}")
    coords = None
    if "coords" in p:
        rows = _list(p["coords"], "payload.coords")
        dim = len(rows[0]) if rows else 0
        coords = _matrix_in(rows, (n, dim), "payload.coords")
    return TwoMetric(labels, T, tol, coords)


def _plpath_out(ps: PLPathSet) -> dict:
    dim = ps.paths[0].dimension if ps.paths else 0
    return {"dimension": dim,
            "paths": [[list(v) for v in p.vertices] for p in ps.paths],
            "extra_points": [list(v) for v in ps.extra_points]}


def _plpath_in(p: dict) -> PLPathSet:
    dim = _get(p, "dimension", "payload")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise DocumentError("payload.dimension", "expected a positive integer")
    paths = []
    for i, vs in enumerate(_list(_get(p, "paths", "payload"), "payload.paths")):
        w = f"payload.paths[{i}]"
        rows = _list(vs, w)
        if not rows:
            raise DocumentError(w, "a path needs at least one vertex")
        paths.append(PLPath(tuple(map(tuple, _matrix_in(rows, (len(rows), dim), w)))))
    extra = _list(p.get("extra_points", []), "payload.extra_points")
    extra = tuple(map(tuple, _matrix_in(extra, (len(extra), dim), "payload.extra_points"))) if extra else ()
    return PLPathSet(tuple(paths), extra)


# -- public API ------------------------------------------------------------


def kind_of(obj) -> str:
    if isinstance(obj, ACStructure):
        return "ac"
    if isinstance(obj, MetrizedCategory):
        return "metcat"
    if isinstance(obj, FiniteMetricSpace):
        return "metcor-space"
    if isinstance(obj, Correspondence):
        return "correspondence"
    if isinstance(obj, TwoMetric):
        return "two-metric"
    if isinstance(obj, PLPathSet):
        return "plpath"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_document(obj, tolerance: float | None = None, amplitude=None) -> dict:
    kind = kind_of(obj)
    if tolerance is None:
        tolerance = getattr(obj, "tolerance", DEFAULT_TOLERANCE)
    if kind == "ac":
        payload = _ac_out(obj, amplitude)
    elif kind == "metcat":
        payload = _metcat_out(obj)
    elif kind == "metcor-space":
        payload = _space_out(obj)
    elif kind == "correspondence":
        payload = _corr_out(obj)
    elif kind == "two-metric":
        payload = _two_metric_out(obj)
    else:
        payload = _plpath_out(obj)
    return {"version": FORMAT_VERSION, "kind": kind, "tolerance": _num_out(tolerance), "payload": payload}


def from_document(doc: dict, tolerance: float | None = None):
    """Parse a document dict; returns ``(kind, obj, extras)``.

    ``extras`` holds optional parts such as an AC amplitude. ``tolerance``
    overrides the document's own value.
    """
    if not isinstance(doc, dict):
        raise DocumentError("$", "expected an object")
    version = _get(doc, "version", "$")
    if version != FORMAT_VERSION:
        raise DocumentError("$.version", f"unsupported version {version!r}")
    kind = _get(doc, "kind", "$")
    if kind not in KINDS:
        raise DocumentError("$.kind", f"unknown kind {kind!r}")
    tol = _num_in(doc.get("tolerance", DEFAULT_TOLERANCE), "$.tolerance") if tolerance is None else float(tolerance)
    p = _get(doc, "payload", "$")
    extras: dict = {}
    if kind == "ac":
        obj, amp = _ac_in(p, tol)
        if amp is not None:
            extras["amplitude"] = amp
    elif kind == "metcat":
        obj = _metcat_in(p, tol)
    elif kind == "metcor-space":
        obj = _space_in(p, tol, "payload")
    elif kind == "correspondence":
        obj = _corr_in(p, tol)
    elif kind == "two-metric":
        obj = _two_metric_in(p, tol)
    else:
        obj = _plpath_in(p)
    return kind, obj, extras


def dumps(obj, tolerance: float | None = None, amplitude=None) -> str:
    return json.dumps(to_document(obj, tolerance, amplitude), indent=1, sort_keys=False) + "\n"


def loads(text: str, tolerance: float | None = None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"line {e.lineno} column {e.colno}", e.msg) from None
    return from_document(doc, tolerance)


def load(path, tolerance: float | None = None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise DocumentError(str(path), e.strerror or str(e)) from None
    return loads(text, tolerance)
