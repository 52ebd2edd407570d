import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acats import (
    ACStructure,
    Arrow,
    DomainError,
    PreconditionError,
    PrefunctorialMap,
    SeparationError,
    StructureError,
    check_amplitude,
    check_functor,
    check_graphcomp,
    check_knatural,
    check_transitivity,
    cone_combine,
    epsilon_categoric,
    extract_composition,
    induce_ac,
    is_separated,
    phi,
    phi_matrix,
    separate,
    two_metric_to_ac,
    validate,
)
from acats.generators import finite_example, planar_2metric, random_metcat, remetrize
from acats.report import ValidationReport

import oracles

coords = st.floats(0, 2.5, allow_nan=False)


def trivial():
    return ACStructure(["x"], [Arrow("1", "x", "x")], {"x": "1"}, {("1", "1", "1"): 0.0})


def clone(ac, f, name):
    """Copy of ``ac`` with an extra arrow ``name`` that behaves exactly like ``f``."""
    F = ac.arrow(f)
    arrows = list(ac.arrows) + [Arrow(name, F.src, F.dst)]
    table = ac.triple_table()

    def d(a, b, c):
        a, b, c = (f if t == name else t for t in (a, b, c))
        return table[a, b, c]

    return ACStructure(ac.objects, arrows, ac.identities, d, ac.tolerance)


# -- validate -------------------------------------------------------------


def test_trivial_structure_passes():
    assert validate(trivial()).passed


def test_finite_example_involution_passes():
    assert validate(finite_example(1, 0)).passed


def test_finite_example_outside_region_fails_associativity():
    rep = validate(finite_example(0.3, 0.3))
    assert not rep.passed
    assert any("associativity" in a for a in rep.axioms_failed())
    v = rep.worst[rep.axioms_failed()[0]]
    assert len(v.witness) == 6 and v.gap > 1e-9


def test_missing_triple_is_construction_error():
    with pytest.raises(StructureError):
        ACStructure(["x"], [Arrow("1", "x", "x")], {"x": "1"}, {})


def test_dangling_arrow_is_construction_error():
    with pytest.raises(StructureError):
        ACStructure(["x"], [Arrow("1", "x", "y")], {"x": "1"}, {})


def test_nan_entry_rejected():
    with pytest.raises(StructureError):
        ACStructure(["x"], [Arrow("1", "x", "x")], {"x": "1"}, {("1", "1", "1"): float("nan")})


def test_identity_must_be_loop():
    with pytest.raises(StructureError):
        ACStructure(["x", "y"], [Arrow("1", "x", "y")], {"x": "1", "y": "1"}, lambda *a: 0.0)


@settings(max_examples=60, deadline=None)
@given(coords, coords, st.floats(0, 2, allow_nan=False))
def test_validate_matches_loop_oracle_on_finite_example(u, v, p):
    ac = finite_example(u, v, p)
    rep = validate(ac)
    assert set(rep.axioms_failed()) == oracles.brute_failures(ac)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000),
       st.one_of(st.floats(-0.5, -1e-6), st.floats(1e-6, 0.5)))
def test_validate_matches_loop_oracle_on_perturbed_instances(seed, pick, delta):
    ac = induce_ac(random_metcat(seed, max_objects=3))
    table = ac.triple_table()
    key = sorted(table, key=str)[pick % len(table)]
    table[key] += delta
    bad = ACStructure(ac.objects, ac.arrows, ac.identities, table)
    assert set(validate(bad).axioms_failed()) == oracles.brute_failures(bad)


def test_semicategorical_skips_identity_axioms():
    ac = ACStructure(["x"], [Arrow("a", "x", "x")], None, {("a", "a", "a"): 0.5})
    rep = validate(ac)
    assert rep.passed
    assert "left_identity" not in rep.checked


def test_witness_cap_keeps_worst():
    rep = validate(finite_example(2.4, 0.0), witness_cap=1)
    assert len(rep.violations) == 1
    assert sum(rep.counts.values()) > 1
    for v in rep.violations:
        assert rep.worst[v.axiom].gap >= v.gap


# -- phi ----------------------------------------------------------------


def test_phi_examples():
    ac = finite_example(1, 0)
    assert phi(ac, 1, "e") == 1.0
    assert phi(ac, "e", "e") == 0.0
    ac2 = finite_example(1, 0, 0.7)
    assert phi(ac2, 1, "e") == 0.7


def test_phi_non_parallel():
    ac = induce_ac(random_metcat(1))
    arrows = ac.arrows
    pair = next((a, b) for a in arrows for b in arrows if (a.src, a.dst) != (b.src, b.dst))
    with pytest.raises(DomainError):
        phi(ac, pair[0].id, pair[1].id)


@pytest.mark.parametrize("seed", range(15))
def test_phi_is_pseudometric_and_continuity_bound(seed):
    ac = induce_ac(random_metcat(seed))
    tol = 1e-9
    for x, y in itertools.product(ac.objects, repeat=2):
        P = phi_matrix(ac, x, y)
        if not P.size:
            continue
        assert np.all(np.abs(np.diag(P)) <= tol)
        assert np.all(np.abs(P - P.T) <= tol)
        assert np.all(P[:, None, :] <= P[:, :, None] + P[None, :, :] + tol)
    for x, y, z in itertools.product(ac.objects, repeat=3):
        blk = ac.block(x, y, z)
        if not blk.size:
            continue
        PA, PB, PC = phi_matrix(ac, x, y), phi_matrix(ac, y, z), phi_matrix(ac, x, z)
        rhs = (blk[None, None, None]
               + PA[:, None, None, :, None, None]
               + PB[None, :, None, None, :, None]
               + PC[None, None, :, None, None, :])
        assert np.all(blk[:, :, :, None, None, None] <= rhs + 3 * tol)


# -- separate ------------------------------------------------------------------


def test_separate_identity_on_separated():
    ac = induce_ac(random_metcat(2))
    assert is_separated(ac)
    q, m = separate(ac)
    assert q == ac
    assert all(k == v for k, v in m.items())


def test_separate_merges_clone():
    ac = clone(finite_example(1, 0), "e", "e2")
    assert validate(ac).passed
    assert not is_separated(ac)
    q, m = separate(ac)
    assert m == {1: 1, "e": "e", "e2": "e"}
    assert is_separated(q)
    assert q == finite_example(1, 0)


def test_separate_merges_identity_clone_into_smallest_id():
    ac = clone(finite_example(0, 1), 1, 0)
    q, m = separate(ac)
    assert m[1] == 0 and q.identities == {"*": 0}
    assert validate(q).passed


# -- epsilon / composition ------------------------------------------------------


def test_epsilon_examples():
    assert epsilon_categoric(induce_ac(random_metcat(4))) == 0.0
    assert epsilon_categoric(finite_example(1, 2)) == 1.0
    ac = ACStructure(["x", "y", "z"],
                     [Arrow(f"1{o}", o, o) for o in "xyz"] + [Arrow("f", "x", "y"), Arrow("g", "y", "z")],
                     {o: f"1{o}" for o in "xyz"}, lambda a, b, c: 0.0)
    assert epsilon_categoric(ac) == math.inf


@settings(max_examples=40, deadline=None)
@given(coords, coords)
def test_epsilon_matches_oracle(u, v):
    ac = finite_example(u, v)
    assert epsilon_categoric(ac) == oracles.brute_epsilon(ac)


def test_extract_composition_finite_examples():
    assert extract_composition(finite_example(0, 1))[("e", "e")] == "e"
    assert extract_composition(finite_example(1, 0))[("e", "e")] == 1
    t = extract_composition(finite_example(0, 1))
    assert t[("e", 1)] == "e" and t[(1, "e")] == "e"


def test_extract_composition_refuses_non_zero_categoric():
    with pytest.raises(PreconditionError, match="epsilon"):
        extract_composition(finite_example(1, 2))


def test_extract_composition_ambiguous():
    with pytest.raises(SeparationError):
        extract_composition(clone(finite_example(0, 1), "e", "e2"))


@pytest.mark.parametrize("seed", range(10))
def test_extract_composition_round_trip(seed):
    mc = random_metcat(seed)
    assert extract_composition(induce_ac(mc)) == mc.composition


# -- amplitude / transitivity ----------------------------------------------


def test_amplitude_zero_on_flat_structure():
    ac = ACStructure(["x"], [Arrow("1", "x", "x"), Arrow("e", "x", "x")], {"x": "1"}, lambda *a: 0.0)
    assert check_amplitude(ac, {"1": 0.0, "e": 0.0}).passed


def test_amplitude_reflexivity_violation():
    ac = finite_example(1, 0)
    rep = check_amplitude(ac, {1: 0.5, "e": 0.5})
    assert "reflexivity" in rep.axioms_failed()


@pytest.mark.parametrize("seed", range(10))
def test_two_metric_amplitude_passes(seed):
    ac, alpha = two_metric_to_ac(planar_2metric(seed, 5))
    assert check_amplitude(ac, alpha).passed


@pytest.mark.parametrize("seed", range(10))
def test_zero_categoric_is_absolutely_transitive(seed):
    ac = induce_ac(random_metcat(seed, max_objects=3))
    rep = check_transitivity(ac)
    assert rep.passed


@pytest.mark.parametrize("seed", range(6))
def test_transitivity_gap_matches_oracle(seed):
    ac, alpha = two_metric_to_ac(planar_2metric(seed, 4))
    rep = check_transitivity(ac)
    assert rep.notes["max_gap"] == pytest.approx(oracles.brute_transitivity_gap(ac), abs=1e-12)
    half = {k: v / 2 for k, v in alpha.items()}
    rep = check_transitivity(ac, half)
    assert rep.notes["max_gap"] == pytest.approx(oracles.brute_transitivity_gap(ac, half), abs=1e-12)


def test_generic_planar_coarse_ac_not_absolutely_transitive():
    fails = [not check_transitivity(two_metric_to_ac(planar_2metric(s, 4, scale=10.0))[0]).passed
             for s in range(10)]
    assert any(fails)


def test_transitivity_empty_inf_convention():
    # x -> y -> z -> w chain with A(x, z) empty: the inf is +inf, multiplied by alpha(k)
    objs = "xyzw"
    arrows = [Arrow(f"1{o}", o, o) for o in objs] + [
        Arrow("f", "x", "y"), Arrow("g", "y", "z"), Arrow("h", "z", "w"), Arrow("k", "y", "w"), Arrow("l", "x", "w")]
    ac = ACStructure(objs, arrows, {o: f"1{o}" for o in objs}, lambda *a: 0.0)
    assert not check_graphcomp(ac)
    zero = {a.id: 0.0 for a in arrows}
    assert check_transitivity(ac, zero, side="left").passed
    assert not check_transitivity(ac, side="left").passed


def test_graphcomp_examples():
    assert check_graphcomp(two_metric_to_ac(planar_2metric(0, 4))[0])
    assert check_graphcomp(finite_example(1, 0))
    ac = ACStructure("xyz", [Arrow(f"1{o}", o, o) for o in "xyz"] + [Arrow("f", "x", "y"), Arrow("g", "y", "z")],
                     {o: f"1{o}" for o in "xyz"}, lambda *a: 0.0)
    assert not check_graphcomp(ac)


# -- functors -------------------------------------------------------------------


def test_identity_functor():
    ac = induce_ac(random_metcat(5))
    F = PrefunctorialMap.identity(ac)
    assert check_functor(F, ac, ac, 1.0).passed
    assert check_knatural(F, F, {a.id: a.id for a in ac.arrows}, ac, ac, 1.0).passed


def test_constant_functor_k_zero():
    src = induce_ac(random_metcat(6))
    dst = trivial()
    F = PrefunctorialMap({x: "x" for x in src.objects}, {a.id: "1" for a in src.arrows})
    assert check_functor(F, src, dst, 0.0).passed


def test_perturbed_functor_fails():
    ac = finite_example(0, 1)
    F = PrefunctorialMap({"*": "*"}, {1: 1, "e": "e"})
    assert check_functor(F, ac, ac).passed
    # the involution e*e = 1 does not map 1-functorially onto the idempotent e*e = e
    rep = check_functor(F, finite_example(1, 0), ac)
    assert not rep.passed and "functoriality" in rep.axioms_failed()


def test_ill_typed_functor():
    ac = finite_example(0, 1)
    with pytest.raises(DomainError):
        check_functor(PrefunctorialMap({"*": "*"}, {1: 1}), ac, ac)


def test_knatural_eta_equals_functor():
    src = induce_ac(random_metcat(7))
    F = PrefunctorialMap.identity(src)
    assert check_functor(F, src, src, 1.0).passed
    assert check_knatural(F, F, dict(F.arrows), src, src, 1.0).passed


def test_knatural_perturbed_fails():
    ac = finite_example(1, 0)
    F = PrefunctorialMap.identity(ac)
    rep = check_knatural(F, F, {1: "e", "e": "e"}, ac, ac, 1.0)
    assert not rep.passed


def test_knatural_ill_typed():
    ac = finite_example(0, 1)
    F = PrefunctorialMap.identity(ac)
    with pytest.raises(DomainError):
        check_knatural(F, F, {1: "nope", "e": "e"}, ac, ac)


# -- cone / restriction ---------------------------------------------------------


def test_cone_examples():
    a, b = finite_example(1, 0), finite_example(0, 1)
    assert cone_combine(a, b, 1.0, 0.0) == a
    half = cone_combine(a, b, 0.5, 0.5)
    assert half == finite_example(0.5, 0.5)
    assert validate(half).passed


def test_cone_graph_mismatch():
    with pytest.raises(DomainError):
        cone_combine(finite_example(1, 0), trivial(), 1, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 5), st.floats(0.01, 5))
def test_cone_of_valid_structures_validates(seed, c1, c2):
    mc = random_metcat(seed, max_objects=3)
    a, b = induce_ac(mc), induce_ac(remetrize(mc, seed + 1))
    assert a.same_graph(b) and validate(b).passed
    assert validate(cone_combine(a, b, c1, c2)).passed


@pytest.mark.parametrize("seed", range(10))
def test_restriction_validates(seed):
    ac = induce_ac(random_metcat(seed))
    rng = np.random.default_rng(seed)
    keep = set(ac.identities.values()) | {a.id for a in ac.arrows if rng.random() < 0.5}
    assert validate(ac.restrict(keep)).passed


def test_restriction_must_keep_identities():
    with pytest.raises(DomainError):
        finite_example(1, 0).restrict({"e"})


@st.composite
def thin_structures(draw):
    n = draw(st.integers(3, 5))
    objs = [f"o{i}" for i in range(n)]
    with_ids = draw(st.booleans())
    arrows = []
    for x in objs:
        for y in objs:
            if (with_ids and x == y) or draw(st.booleans()):
                arrows.append(Arrow(f"{x}>{y}", x, y))
    ids = {x: f"{x}>{x}" for x in objs} if with_ids else None
    values = st.sampled_from([0.0, 0.0, 0.5, 1.0, 2.0, -0.5, math.inf])
    table = {}
    ac_hom = {(a.src, a.dst): a.id for a in arrows}
    for x, y, z in itertools.product(objs, repeat=3):
        if (x, y) in ac_hom and (y, z) in ac_hom and (x, z) in ac_hom:
            table[ac_hom[x, y], ac_hom[y, z], ac_hom[x, z]] = draw(values)
    return ACStructure(objs, arrows, ids, table)


@settings(max_examples=150, deadline=None)
@given(thin_structures(), st.integers(1, 30))
def test_thin_fast_path_matches_generic(ac, cap):
    from acats.core import _generic_validate, _is_thin

    assert _is_thin(ac)
    fast = validate(ac, witness_cap=cap)
    slow = ValidationReport(witness_cap=cap)
    _generic_validate(ac, slow, ac.tolerance)
    assert fast.violations == slow.violations
    assert fast.as_dict() == slow.as_dict()
