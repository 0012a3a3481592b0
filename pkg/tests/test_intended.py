import pytest

from fo2e.bisim import bounded_game, pointed_bisimilar
from fo2e.intended import (
    IntendedError,
    SolutionSpec,
    TruncationParams,
    build_intended_A,
    build_intended_B,
    build_intended_B_chains,
    chain_words,
    mutate_letter,
    verify_intended,
)
from fo2e.modelcheck import evaluate
from fo2e.reduction import build_phi, rho_of, validate_pcp
from fo2e.structures import load_structure
from fo2e.syntax import FO2

AA = validate_pcp({"alphabet": ["a", "b"], "pairs": [["a", "aa"]]})
ABA = validate_pcp({"alphabet": ["a", "b"], "pairs": [["a", "ab"], ["ba", "a"]]})
ONE, ONE_TWO = SolutionSpec((), (1,)), SolutionSpec((), (1, 2))
PARAMS = TruncationParams(12, 2, 4)


def expand(P, sol, u, n):
    s, idx = "", list(sol.prefix) + list(sol.period) * n
    for j in idx:
        s += "".join(P.word(u, j))
    return s[:n]


def test_solution_validation():
    ONE_TWO.validate(ABA, 40)
    with pytest.raises(IntendedError, match="differ"):
        SolutionSpec((), (2,)).validate(ABA, 5)
    with pytest.raises(IntendedError):
        SolutionSpec((), (3,)).validate(ABA, 5)
    with pytest.raises(IntendedError):
        SolutionSpec((1,), ())
    assert SolutionSpec.from_json({"period": [1, 2]}) == ONE_TWO


def test_params_validation():
    with pytest.raises(IntendedError):
        TruncationParams(1, 2, 1).check(ABA)
    with pytest.raises(IntendedError):
        TruncationParams(6, 3, 2).check(AA)
    with pytest.raises(IntendedError):
        TruncationParams(6, 2, 7).check(AA)


def test_A_shape():
    pA = build_intended_A(AA, ONE, TruncationParams(6, 2, 2))
    A = pA.structure
    assert len(A) == 18
    assert all(A.holds("a", d) for d in A.domain if ".s" in d)
    assert evaluate(A, build_phi(AA), {"x": pA.points[0]})
    # the unlabelled copy is isomorphic to the first on rho
    c1 = [d for d in A.domain if d.startswith("A1")]
    c2 = [d.replace("A1", "A2") for d in c1]
    for r in ("R", "S"):
        assert {(x.replace("A1", "A2"), y.replace("A1", "A2")) for x, y in A.binary[r] if x in c1} == \
            {(x, y) for x, y in A.binary[r] if x in c2}


def test_B_shape_and_validation():
    pB = build_intended_B(AA, ONE, TruncationParams(4, 2, 2))
    B = pB.structure
    assert len(B) == 6 + 2 * 4
    load_structure(B.to_json())
    assert B.holds("Zv1", pB.points[0]) and B.holds("Zw1", "B.r03")
    # R-points share one E1 class
    assert all(B.holds("E1", "B.r00", f"B.r{i:02d}") for i in range(6))


@pytest.mark.parametrize("P,sol", [(AA, ONE), (ABA, ONE_TWO)])
def test_chain_words_and_agreement(P, sol):
    pB, chains = build_intended_B_chains(P, sol, PARAMS)
    v, w = chain_words(pB, P, chains.v), chain_words(pB, P, chains.w)
    assert v == [expand(P, sol, "v", 12)] and w == [expand(P, sol, "w", 12)]
    for i in range(PARAMS.s_depth - PARAMS.interior_radius):
        assert v[0][i] == w[0][i]


@pytest.mark.parametrize("P,sol", [(AA, ONE), (ABA, ONE_TWO)])
def test_sections_phi_and_games_pass(P, sol):
    r = verify_intended(P, sol, PARAMS, 4)
    assert r["phi"]["pass"]
    assert r["games"]["pass"] and set(r["games"]["rounds"]) == {"1", "2", "3", "4"}


@pytest.mark.parametrize("P,sol", [(AA, ONE), (ABA, ONE_TWO)])
def test_only_uniqueness_conjuncts_fail(P, sol):
    # the marker-uniqueness axioms clash with segments sharing a class;
    # every other group holds at all interior points
    r = verify_intended(P, sol, PARAMS, 4)
    assert r["neg_psi"]["failed_groups"] == ["uniqueness"]
    for row in r["neg_psi"]["conjuncts"]:
        assert row["pass"] or row["group"] == "uniqueness"
        assert row["checked"] > 0


def test_uniqueness_clash_is_inside_the_interior():
    r = verify_intended(AA, ONE, PARAMS, 4)
    first = next(row for row in r["neg_psi"]["conjuncts"]
                 if row["formula"] == "forall x . forall y . ((Pv1_1(x) & (Pv1_1(y) & E2(x,y))) -> x=y)")
    assert ["B.v0.01", "B.v0.02"] in first["failures"]


def test_skipped_points_are_reported():
    r = verify_intended(AA, ONE, PARAMS, 2)
    row = next(row for row in r["neg_psi"]["conjuncts"] if row["instantiated"] == ["x"])
    assert "B.v0.12" in row["skipped"] and "B.r00" not in row["skipped"]


@pytest.mark.parametrize("P,sol", [(AA, ONE), (ABA, ONE_TWO)])
def test_letter_mutation_detected(P, sol):
    pB, chains = build_intended_B_chains(P, sol, PARAMS)
    for e in chains.w[0][:6]:
        cur = next(a for a in P.alphabet if pB.structure.holds(a, e))
        new = next(a for a in P.alphabet if a != cur)
        bad = mutate_letter(pB, e, new, P.alphabet)
        r = verify_intended(P, sol, PARAMS, 4, B_override=bad)
        assert not r["pass"]
        groups = set(r["neg_psi"]["failed_groups"]) - {"uniqueness"}
        assert groups or not r["games"]["pass"]


def test_mutation_near_the_root_breaks_the_game():
    pA = build_intended_A(AA, ONE, PARAMS)
    pB, chains = build_intended_B_chains(AA, ONE, PARAMS)
    bad = mutate_letter(pB, chains.w[0][0], "b", AA.alphabet)
    assert not bounded_game(pA.structure, pA.points, bad.structure, bad.points, rho_of(AA), FO2, 1)


@pytest.mark.parametrize("P,sol", [(AA, ONE), (ABA, ONE_TWO)])
def test_monotone_in_depth(P, sol):
    # an instance checked (and passing) in a shallow build never fails in
    # a deeper one; deeper builds only expose more instances
    runs = [verify_intended(P, sol, TruncationParams(d, 2, 4), 3) for d in (8, 12, 16)]
    assert all(r["games"]["pass"] and r["phi"]["pass"] for r in runs)
    for small, big in zip(runs, runs[1:]):
        dom = set(build_intended_B(P, sol, TruncationParams(small["params"]["s_depth"], 2, 4)).structure.domain)
        for rs, rb in zip(small["neg_psi"]["conjuncts"], big["neg_psi"]["conjuncts"]):
            assert rs["formula"] == rb["formula"]
            clipped = set(rs["skipped"]) | (set().union(*map(set, rb["failures"])) - dom)
            for inst in rb["failures"]:
                assert inst in rs["failures"] or set(inst) & clipped, (rb["formula"], inst)


def test_wider_window_glues_chain_pairs():
    # all R-points share one E1 class, so with two v/w chain pairs the
    # first segment ends of different pairs meet in it as well
    r = verify_intended(ABA, ONE_TWO, TruncationParams(12, 4, 4), 3)
    assert r["games"]["pass"] and r["phi"]["pass"]
    bad = {row["formula"] for row in r["neg_psi"]["conjuncts"] if row["group"] == "coordination" and not row["pass"]}
    assert bad == {"forall x . forall y . ((E1(x,y) & (Zv2(x) & Zw2(y))) -> E2(x,y))"}


@pytest.mark.parametrize("P,sol", [(AA, ONE), (ABA, ONE_TWO)])
def test_truncations_are_fully_bisimilar(P, sol):
    # the R-cycle has no open end and both sides clip S-chains at the same
    # depth, so nothing separates the points even with unbounded rounds
    pA, pB = build_intended_A(P, sol, PARAMS), build_intended_B(P, sol, PARAMS)
    assert pointed_bisimilar(pA.structure, pA.points, pB.structure, pB.points, rho_of(P), FO2)
