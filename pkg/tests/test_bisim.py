import random

import pytest
from hypothesis import given, settings, strategies as st

from fo2e.bisim import (
    BisimilarError,
    BisimRelation,
    Refinement,
    bounded_game,
    check_bisim_certificate,
    distinguishing_formula,
    greatest_bisim,
    pointed_bisimilar,
)
from fo2e.modelcheck import evaluate
from fo2e.sampling import random_pair, random_signature
from fo2e.structures import Structure, disjoint_union, partial_iso_check
from fo2e.syntax import FO2, GF2, Signature, check_guarded, signature_of

from oracles import brute_greatest_bisim

RHO = Signature(frozenset({"P"}), frozenset({"R"}))


def identity(S, logic=FO2, rho=RHO):
    return BisimRelation(frozenset((d, d) for d in S.domain), logic, rho)


def triangle():
    return Structure(("a", "b", "c"), {"P": {"a"}}, {"R": {("a", "b"), ("b", "c"), ("c", "a")}})


def hexagon():
    d = [f"h{i}" for i in range(6)]
    return Structure(tuple(d), {"P": {"h0", "h3"}}, {"R": {(d[i], d[(i + 1) % 6]) for i in range(6)}})


@pytest.mark.parametrize("logic", [FO2, GF2])
def test_identity_is_bisimulation(logic):
    A = triangle()
    assert check_bisim_certificate(A, A, RHO, logic, identity(A, logic))
    g = greatest_bisim(A, A, RHO, logic)
    assert g.pairs >= identity(A).pairs


def test_singletons():
    A, B = Structure(("a",), {"P": {"a"}}), Structure(("b",), {"P": {"b"}})
    assert greatest_bisim(A, B, RHO).pairs == {("a", "b")}


def test_empty_relation_violates_globality():
    A = triangle()
    v = check_bisim_certificate(A, A, RHO, FO2, BisimRelation(frozenset(), FO2, RHO))
    assert not v and v.clause == "globality"


def test_certificate_clauses():
    A = triangle()
    bad = BisimRelation(frozenset({("a", "b"), ("b", "c"), ("c", "a")}), FO2, RHO)
    assert not check_bisim_certificate(A, A, RHO, FO2, bad)
    unknown = BisimRelation(frozenset({("a", "zz")}), FO2, RHO)
    assert check_bisim_certificate(A, A, RHO, FO2, unknown).clause == "domain"


def test_cover_needs_two_copies():
    # (h0, h2) are not R-adjacent, but any two points of one triangle are
    assert not pointed_bisimilar(triangle(), ("a",), hexagon(), ("h0",), RHO)
    A, ma, mb = disjoint_union(triangle(), triangle())
    B = hexagon()
    assert pointed_bisimilar(A, (ma["a"],), B, ("h0",), RHO)
    assert not pointed_bisimilar(A, (ma["a"],), B, ("h1",), RHO)
    assert pointed_bisimilar(A, (ma["a"], mb["c"]), B, ("h0", "h2"), RHO)
    assert not pointed_bisimilar(A, (ma["a"], ma["c"]), B, ("h0", "h2"), RHO)
    # the guarded game only follows edges, so one triangle is enough there
    assert pointed_bisimilar(triangle(), ("a",), B, ("h0",), RHO, GF2)


def test_unary_difference_gives_atom():
    A, B = Structure(("a",), {"P": {"a"}}), Structure(("b",))
    assert not pointed_bisimilar(A, ("a",), B, ("b",), RHO)
    assert str(distinguishing_formula(A, "a", B, "b", RHO)) == "P(x)"


def test_distinct_successor_in_e1():
    rho = Signature(frozenset({"Q"}), frozenset({"E1"}))
    A = Structure(("a", "a2"), {"Q": {"a2"}}, {"E1": {(x, y) for x in ("a", "a2") for y in ("a", "a2")}})
    B = Structure(("b", "b2"), {"Q": {"b2"}})
    for logic in (FO2, GF2):
        chi = distinguishing_formula(A, "a", B, "b", rho, logic)
        assert evaluate(A, chi, {"x": "a"}) and not evaluate(B, chi, {"x": "b"})
        assert signature_of(chi) <= rho


@pytest.mark.parametrize("logic", [FO2, GF2])
def test_global_failure(logic):
    # B has an extra isolated P-point; both games are global
    A = Structure(("a",))
    B = Structure(("b", "c"), {"P": {"c"}})
    assert partial_iso_check(A, ("a",), B, ("b",), RHO)
    assert not pointed_bisimilar(A, ("a",), B, ("b",), RHO, logic)
    chi = distinguishing_formula(A, "a", B, "b", RHO, logic)
    assert evaluate(A, chi, {"x": "a"}) and not evaluate(B, chi, {"x": "b"})


def test_bisimilar_raises():
    A = triangle()
    with pytest.raises(BisimilarError):
        distinguishing_formula(A, "a", A, "a", RHO)


def test_constants_seed_requirement():
    rho = Signature(frozenset({"P"}), frozenset(), frozenset({"c"}))
    A = Structure(("a", "b"), {"P": {"a"}}, constants={"c": "a"})
    B = Structure(("d", "e"), {"P": {"d", "e"}}, constants={"c": "e"})
    assert greatest_bisim(A, B, rho, GF2) is None


def test_zero_rounds_is_partial_iso():
    A, B = triangle(), hexagon()
    for a in A.domain:
        for b in B.domain:
            assert bounded_game(A, (a,), B, (b,), RHO, FO2, 0) == partial_iso_check(A, (a,), B, (b,), RHO)


def samples(seed, n):
    rng = random.Random(seed)
    for _ in range(n):
        sig = random_signature(rng, 3)
        A, B = random_pair(rng, sig)
        yield A, B, sig


@pytest.mark.parametrize("logic", [FO2, GF2])
def test_matches_brute_force(logic):
    for A, B, sig in samples(1, 60):
        g = greatest_bisim(A, B, sig, logic)
        assert (None if g is None else g.pairs) == brute_greatest_bisim(A, B, sig, logic)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_greatest_is_accepted_and_contains_fo(s):
    (A, B, sig), = samples(s, 1)
    fo, gf = greatest_bisim(A, B, sig, FO2), greatest_bisim(A, B, sig, GF2)
    for rel, logic in ((fo, FO2), (gf, GF2)):
        if rel is not None:
            assert check_bisim_certificate(A, B, sig, logic, rel)
    if fo is not None:
        assert gf is not None and gf.pairs >= fo.pairs
        assert check_bisim_certificate(A, B, sig, GF2, BisimRelation(fo.pairs, GF2, sig))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([FO2, GF2]))
def test_distinguishers_and_monotonicity(s, logic):
    (A, B, sig), = samples(s, 1)
    ref = Refinement(A, B, sig, logic)
    for a in A.domain:
        for b in B.domain:
            games = [bounded_game(A, (a,), B, (b,), sig, logic, k, ref) for k in range(8)]
            assert all(x >= y for x, y in zip(games, games[1:]))
            if pointed_bisimilar(A, (a,), B, (b,), sig, logic, ref):
                assert all(games)
                continue
            chi = distinguishing_formula(A, a, B, b, sig, logic, ref)
            assert evaluate(A, chi, {"x": a}) and not evaluate(B, chi, {"x": b})
            assert signature_of(chi) <= sig
            if logic == GF2:
                assert check_guarded(chi)


def test_certificate_soundness():
    for A, B, sig in samples(7, 40):
        g = greatest_bisim(A, B, sig)
        if g is None:
            continue
        # any sub-relation that still passes must stay inside the greatest
        sub = BisimRelation(frozenset(sorted(g.pairs)[1:]), FO2, sig)
        if check_bisim_certificate(A, B, sig, FO2, sub):
            assert sub.pairs <= g.pairs


def test_relation_json_round_trip():
    A = triangle()
    rel = greatest_bisim(A, A, RHO)
    assert BisimRelation.from_json(rel.to_json()) == rel
