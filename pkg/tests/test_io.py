import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acats import io
from acats.core import ACStructure, Arrow
from acats.generators import (
    finite_example,
    planar_2metric,
    plpath_pair,
    random_correspondence,
    random_metcat,
    random_metric_space,
)
from acats.geometry import PLPath, PLPathSet
from acats.metcat import induce_ac
from acats.io import DocumentError


def round_trips(obj, **kw):
    text = io.dumps(obj, **kw)
    kind, back, extras = io.loads(text)
    assert kind == io.kind_of(obj)
    assert io.dumps(back, amplitude=extras.get("amplitude")) == text
    return back, extras


def test_ac_round_trip():
    ac = finite_example(1, 2)
    back, _ = round_trips(ac)
    assert back == ac


def test_ac_with_amplitude():
    ac = finite_example(0.5, 1)
    amp = {1: 0.0, "e": 0.75}
    back, extras = round_trips(ac, amplitude=amp)
    assert extras["amplitude"] == amp


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_random_round_trips(seed):
    mc = random_metcat(seed)
    back, _ = round_trips(mc)
    assert back.composition == mc.composition
    ac, _ = round_trips(induce_ac(mc))
    assert ac == induce_ac(mc)
    rng = np.random.default_rng(seed)
    X = random_metric_space(rng, int(rng.integers(1, 5)), "x")
    Y = random_metric_space(rng, int(rng.integers(1, 5)), "y")
    round_trips(X)
    c, _ = round_trips(random_correspondence(rng, X, Y))
    assert c.values.shape == (len(X.points), len(Y.points))
    tm, _ = round_trips(planar_2metric(seed, 4))
    assert np.array_equal(tm.table, planar_2metric(seed, 4).table)


def test_plpath_round_trip():
    a, b = plpath_pair("square")
    ps = PLPathSet((PLPath(tuple(map(tuple, a))), PLPath(tuple(map(tuple, b)))), ((0.5, 0.5),))
    back, _ = round_trips(ps)
    assert back == ps


def test_infinity_token():
    arrows = [Arrow("1", "x", "x"), Arrow("f", "x", "x")]
    d = {(a, b, c): (math.inf if (a, b, c) == ("f", "f", "1") else 0.0)
         for a in ("1", "f") for b in ("1", "f") for c in ("1", "f")}
    ac = ACStructure(["x"], arrows, {"x": "1"}, d)
    text = io.dumps(ac)
    assert '"inf"' in text
    _, back, _ = io.loads(text)
    assert back.d("f", "f", "1") == math.inf


def test_integer_and_string_ids_kept_distinct():
    _, back, _ = io.loads(io.dumps(finite_example(1, 1)))
    assert back.identities["*"] == 1
    assert back.arrow("e").id == "e"


def doc_of(obj):
    return json.loads(io.dumps(obj))


def expect_error(doc, where=None):
    with pytest.raises(DocumentError) as ei:
        io.from_document(doc)
    if where is not None:
        assert ei.value.where.startswith(where)
    return ei.value


def test_missing_triple():
    doc = doc_of(finite_example(1, 2))
    del doc["payload"]["triples"][3]
    expect_error(doc, "payload.triples")


def test_duplicate_triple():
    doc = doc_of(finite_example(1, 2))
    doc["payload"]["triples"].append(dict(doc["payload"]["triples"][0]))
    expect_error(doc, "payload.triples[8]")


def test_extra_non_composable_triple():
    doc = doc_of(induce_ac(random_metcat(2)))
    arrows = doc["payload"]["arrows"]
    f, g = next((a, b) for a in arrows for b in arrows if a["dst"] != b["src"])
    doc["payload"]["triples"].append({"f": f["id"], "g": g["id"], "h": f["id"], "value": 0})
    expect_error(doc, "payload.triples")


@pytest.mark.parametrize("mutate,where", [
    (lambda d: d.update(version=2), "$.version"),
    (lambda d: d.update(kind="graph"), "$.kind"),
    (lambda d: d.pop("payload"), "$"),
    (lambda d: d["payload"]["triples"][0].update(value="abc"), "payload.triples[0].value"),
    (lambda d: d["payload"]["triples"][0].update(value=None), "payload.triples[0].value"),
    (lambda d: d["payload"]["triples"][0].update(f="zz"), "payload.triples[0]"),
    (lambda d: d["payload"]["arrows"][0].update(src="nowhere"), "payload.arrows[0]"),
    (lambda d: d["payload"]["arrows"][0].update(id=[1]), "payload.arrows[0]"),
    (lambda d: d["payload"].update(identities=[]), "payload.identities"),
    (lambda d: d["payload"].update(triples={}), "payload.triples"),
    (lambda d: d["payload"].update(amplitude={"e": 1}), "payload.amplitude"),
])
def test_malformed_ac(mutate, where):
    doc = doc_of(finite_example(1, 2))
    mutate(doc)
    expect_error(doc, where)


def test_not_json():
    with pytest.raises(DocumentError, match="line 1"):
        io.loads("{nope")
    with pytest.raises(DocumentError):
        io.loads("[]")


def test_missing_file(tmp_path):
    with pytest.raises(DocumentError):
        io.load(tmp_path / "absent.json")


def test_two_metric_missing_entry():
    doc = doc_of(planar_2metric(1, 4))
    doc["payload"]["table"].pop()
    expect_error(doc, "payload.table")


def test_metcat_sparse_phi():
    doc = doc_of(random_metcat(4))
    doc["payload"]["phi"][0]["entries"].pop()
    expect_error(doc, "payload.phi[0]")


def test_metcat_missing_composite():
    doc = doc_of(random_metcat(4))
    doc["payload"]["compose"].pop()
    expect_error(doc, "payload.compose")


def test_correspondence_shape():
    rng = np.random.default_rng(0)
    X, Y = random_metric_space(rng, 2, "x"), random_metric_space(rng, 3, "y")
    doc = doc_of(random_correspondence(rng, X, Y))
    text = json.dumps(doc)
    doc["payload"]["values"] = doc["payload"]["values"][:1]
    expect_error(doc, "payload")
    assert io.loads(text)[0] == "correspondence"


def test_invalid_space_loads_unchecked():
    doc = doc_of(random_metric_space(np.random.default_rng(1), 3, "p"))
    doc["payload"]["dist"][0][2] = doc["payload"]["dist"][2][0] = 100.0
    kind, X, _ = io.from_document(doc)
    assert kind == "metcor-space"
    assert X.dist[0][2] == 100.0


def test_tolerance_override():
    text = io.dumps(finite_example(1, 1), tolerance=1e-3)
    assert io.loads(text)[1].tolerance == 1e-3
    assert io.loads(text, tolerance=0.5)[1].tolerance == 0.5


def test_unknown_object_type():
    with pytest.raises(TypeError):
        io.dumps(object())
