import io as stdio
import json
import subprocess
import sys

from acats import io, separate
from acats.cli import main
from acats.core import ACStructure, Arrow
from acats.generators import finite_example, planar_2metric, random_metcat
from acats.metcat import induce_ac


def run(*argv):
    out, err = stdio.StringIO(), stdio.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return [line.split("\t") for line in text.splitlines()]


def write(tmp_path, obj, name="doc.json", **kw):
    p = tmp_path / name
    p.write_text(io.dumps(obj, **kw))
    return p


def gen_file(tmp_path, *argv, name="gen.json"):
    code, text, _ = run("gen", *argv)
    assert code == 0
    p = tmp_path / name
    p.write_text(text)
    return p


def test_validate_finite_example(tmp_path):
    p = gen_file(tmp_path, "finite-example", 0, 1)
    code, text, _ = run("validate", p)
    assert code == 0
    assert ["kind", "ac"] in records(text)
    assert records(text)[1][0] == "status" and records(text)[1][1] == "PASS"


def test_validate_failure_witness(tmp_path):
    p = gen_file(tmp_path, "finite-example", 1, 2.01)
    code, text, _ = run("validate", p)
    assert code == 1
    rows = records(text)
    assert any(r[0] == "violation" and "associativity" in r[1] for r in rows)


def test_malformed_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, text, err = run("validate", p)
    assert code == 2 and text == ""
    assert "line 1" in err
    assert run("validate", tmp_path / "missing.json")[0] == 2


def test_usage_errors(tmp_path):
    assert run()[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("gen", "finite-example", "1")[0] == 2
    assert run("gen", "finite-example", "a", "b")[0] == 2
    assert run("gen", "random-metcat", "--size", "0")[0] == 2
    assert run("gen", "plpath-pair", "hexagon")[0] == 2
    assert run("region", "--step", "0")[0] == 2


def test_kind_mismatch(tmp_path):
    p = gen_file(tmp_path, "planar-2metric", "--seed", 7, "--size", 5)
    assert run("validate", p, "--kind", "ac")[0] == 2
    code, text, _ = run("validate", p, "--kind", "two-metric")
    assert code == 0


def test_gen_deterministic(tmp_path):
    for argv in (("random-metcat", "--seed", 3), ("planar-2metric", "--seed", 7, "--size", 5),
                 ("finite-example", 1, 0), ("plpath-pair", "square")):
        assert run("gen", *argv)[1] == run("gen", *argv)[1]
    assert run("gen", "random-metcat", "--seed", 3)[1] != run("gen", "random-metcat", "--seed", 4)[1]


def test_gen_documents_validate(tmp_path):
    for argv in (("random-metcat", "--seed", 11), ("planar-2metric", "--seed", 7, "--size", 5),
                 ("finite-example", 1, 0), ("plpath-pair", "triangle")):
        p = gen_file(tmp_path, *argv)
        assert run("validate", p)[0] == 0, argv


def test_reports_deterministic(tmp_path):
    p = gen_file(tmp_path, "finite-example", 2, 0)
    first = run("validate", p)
    assert first[0] == 1
    assert first == run("validate", p)
    assert run("validate", p, "--json") == run("validate", p, "--json")


def test_json_report(tmp_path):
    p = gen_file(tmp_path, "finite-example", 1, 2.01)
    code, text, _ = run("validate", p, "--json", "--witness-cap", 1)
    data = json.loads(text)
    assert code == 1
    assert data["report"]["passed"] is False
    assert len(data["report"]["violations"]) == 1


def test_tolerance_env_and_flag(tmp_path, monkeypatch):
    p = gen_file(tmp_path, "finite-example", 1, 2.01)
    assert run("validate", p)[0] == 1
    monkeypatch.setenv("ACATS_TOLERANCE", "0.1")
    assert run("validate", p)[0] == 0
    assert run("validate", p, "--tolerance", "1e-9")[0] == 1
    monkeypatch.setenv("ACATS_TOLERANCE", "lots")
    assert run("validate", p)[0] == 2


def test_dmax_words(tmp_path):
    p = write(tmp_path, finite_example(1, 2))
    code, text, _ = run("dmax", p, "--from", "e,e", "--to", "(e)", "--max-len", 3)
    rows = dict((r[0], r[1]) for r in records(text))
    assert code == 0 and float(rows["dmax"]) == 1.0
    assert rows["kind"] == "upper-bound-at-L"
    code, text, _ = run("dmax", p, "--from", "(e,e)", "--to", "()_*", "--max-len", 3)
    assert float(dict((r[0], r[1]) for r in records(text))["dmax"]) == 2.0
    code, text, _ = run("dmax", p, "--from", "e", "--to", "e")
    assert dict((r[0], r[1]) for r in records(text))["dmax"] == "0.0"


def test_dmax_induced_equals_d(tmp_path):
    mc = random_metcat(5)
    ac = induce_ac(mc)
    p = write(tmp_path, ac)
    f, g, h, d = next((f, g, h, d) for f, g, h, d in ac.triples() if d > 0)
    code, text, _ = run("dmax", p, "--from", f"{f},{g}", "--to", h, "--json")
    assert code == 0
    assert abs(json.loads(text)["dmax"] - d) <= 1e-6
    code, text, _ = run("dmax", p, "--verify")
    assert code == 0


def test_dmax_infinite(tmp_path):
    objs = ["a", "b", "b2", "c"]
    ids = {x: f"1{x}" for x in objs}
    arrows = [Arrow(e, x, x) for x, e in ids.items()]
    arrows += [Arrow("f", "a", "b"), Arrow("g", "b", "c"), Arrow("f2", "a", "b2"), Arrow("g2", "b2", "c")]
    p = write(tmp_path, ACStructure(objs, arrows, ids, lambda *_: 0.0))
    code, text, _ = run("dmax", p, "--from", "f,g", "--to", "f2,g2")
    assert code == 0
    assert ["dmax", "inf"] in records(text)
    assert json.loads(run("dmax", p, "--from", "f,g", "--to", "f2,g2", "--json")[1])["dmax"] == "inf"


def test_dmax_errors(tmp_path):
    p = write(tmp_path, induce_ac(random_metcat(2)))
    assert run("dmax", p)[0] == 2
    assert run("dmax", p, "--from", "nope", "--to", "nope")[0] == 2
    assert run("dmax", p, "--verify", "--max-len", 0)[0] == 2
    ac = induce_ac(random_metcat(2))
    a = next(x for x in ac.arrows if x.src != x.dst)
    assert run("dmax", p, "--from", a.id, "--to", f"()_{a.src}")[0] == 2


def test_dmax_plpath(tmp_path):
    p = gen_file(tmp_path, "plpath-pair", "square")
    code, text, _ = run("dmax", p, "--max-len", 3)
    assert code == 0
    assert abs(float(dict((r[0], r[1]) for r in records(text))["dmax"]) - 1.0) <= 1e-9


def test_compose(tmp_path):
    mc = random_metcat(1)
    p = write(tmp_path, mc)
    code, text, _ = run("compose", p)
    assert code == 0
    got = {(r[1], r[2]): r[3] for r in records(text) if r[0] == "compose"}
    assert got == {(str(f), str(g)): str(h) for (f, g), h in mc.composition.items()}
    q = gen_file(tmp_path, "finite-example", 1, 2)
    code, text, _ = run("compose", q)
    assert code == 1 and ["status", "FAIL"] in records(text)


def test_quotient(tmp_path):
    p = gen_file(tmp_path, "random-metcat", "--seed", 2)
    code, text, _ = run("quotient", p)
    assert code == 0
    assert ["separated", "True"] in records(text)
    assert all(r[1] == r[2] for r in records(text) if r[0] == "class")
    zero = finite_example(0, 0, phi=0.0)
    z = write(tmp_path, zero, "zero.json")
    out = tmp_path / "q.json"
    code, text, _ = run("quotient", z, "--out", out)
    assert code == 0 and ["class", "e", "1"] in records(text)
    _, back, _ = io.load(out)
    assert back == separate(zero)[0]


def test_yoneda_coarse(tmp_path):
    p = write(tmp_path, planar_2metric(3, 4, scale=0.3))
    code, text, _ = run("yoneda", p, "--base", "p0")
    arrows = [r for r in records(text) if r[0] == "arrow"]
    assert len(arrows) == 16 and all(r[2] == "1x1" for r in arrows)
    assert code in (0, 1)
    assert run("yoneda", p, "--base", "p9")[0] == 2
    assert run("yoneda", p, "--base", "p0", "--co")[0] in (0, 1)


def test_yoneda_induced_passes(tmp_path):
    p = write(tmp_path, random_metcat(6))
    mc = random_metcat(6)
    assert run("yoneda", p, "--base", str(mc.objects[0]))[0] == 0


def test_transitivity(tmp_path):
    p = write(tmp_path, random_metcat(3))
    assert run("transitivity", p)[0] == 0
    big = write(tmp_path, planar_2metric(0, 4, scale=10), "big.json")
    assert run("transitivity", big, "--alpha", "amplitude")[0] == 1
    small = write(tmp_path, planar_2metric(0, 4, scale=0.3), "small.json")
    assert run("transitivity", small, "--alpha", "amplitude/2")[0] == 0
    assert run("transitivity", p, "--alpha", "amplitude")[0] == 2
    assert run("transitivity", p, "--alpha", "x")[0] == 2
    assert run("transitivity", p, "--alpha", "0", "--side", "left")[0] == 0


def test_region(tmp_path):
    png = tmp_path / "region.png"
    code, text, _ = run("region", "--plot", png)
    assert code == 0
    assert ["mismatches", "0"] in records(text)
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    code, text, _ = run("region", "--max", 1, "--step", 0.5, "--points")
    pts = [r for r in records(text) if r[0] == "point"]
    assert len(pts) == 9
    assert ["point", "0.0", "0.0", "0"] in pts and ["point", "1.0", "0.0", "1"] in pts


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "acats.cli", "gen", "finite-example", "1", "0"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["kind"] == "ac"
    assert subprocess.run([sys.executable, "-m", "acats.cli", "bogus"], capture_output=True).returncode == 2
