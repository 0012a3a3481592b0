import random

import pytest
from hypothesis import given, settings, strategies as st

from fo2e.sampling import random_formula, random_signature
from fo2e.syntax import (
    FO2,
    GF2,
    TRUE,
    And,
    ArityError,
    Atom,
    ConstantError,
    Eq,
    Exists,
    Forall,
    FormulaSyntaxError,
    Implies,
    Not,
    Signature,
    VariableError,
    check_guarded,
    conj,
    conjuncts,
    free_vars,
    parse_formula,
    print_formula,
    quantifier_depth,
    signature_of,
    swap_vars,
)


def test_precedence_and_printing():
    f = parse_formula("P(x) & Q(x) | ~R(x,y) -> S(y,x)")
    assert f == Implies(Or_(And(Atom("P", ("x",)), Atom("Q", ("x",))), Not(Atom("R", ("x", "y")))), Atom("S", ("y", "x")))
    assert parse_formula(print_formula(f)) == f


def Or_(a, b):
    from fo2e.syntax import Or

    return Or(a, b)


def test_quantifier_scope_extends_right():
    f = parse_formula("forall x . P(x) -> exists y . R(x,y)")
    assert isinstance(f, Forall) and isinstance(f.body, Implies)
    assert free_vars(f) == frozenset()
    assert quantifier_depth(f) == 2


def test_quantified_left_operand_is_bracketed():
    f = And(Exists("y", Atom("R", ("x", "y"))), Atom("P", ("x",)))
    text = print_formula(f)
    assert parse_formula(text) == f


def test_third_variable_rejected_with_position():
    with pytest.raises(VariableError) as e:
        parse_formula("exists z . P(z)")
    assert e.value.pos == 7


def test_constants_only_in_gf_mode():
    with pytest.raises(ConstantError):
        parse_formula("R(x,c1)")
    f = parse_formula("R(x,c1)", GF2)
    assert signature_of(f).constants == frozenset({"c1"})


def test_arity_clash():
    with pytest.raises(ArityError):
        parse_formula("P(x) & P(x,y)")


@pytest.mark.parametrize("text", ["P(x", "P(x) &", "forall . P(x)", "x", "(P(x)))", ""])
def test_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


def test_equivalences_are_binary():
    with pytest.raises(ArityError):
        parse_formula("E1(x)")
    assert signature_of(parse_formula("E1(x,y) & E2(y,y)")).equivalences == {"E1", "E2"}


def test_guardedness():
    assert check_guarded(parse_formula("exists y . (R(x,y) & P(y))"))
    assert check_guarded(parse_formula("forall y . (R(x,y) -> P(y))"))
    assert check_guarded(parse_formula("exists y . R(x,y)"))
    v = check_guarded(parse_formula("exists y . (P(y) & R(x,y))"))
    assert not v and isinstance(v.offending, Exists)
    # the guard has to cover the free x of the body
    assert not check_guarded(parse_formula("exists y . (P(y) & R(x,y))"))
    assert not check_guarded(parse_formula("forall y . (P(y) -> R(x,y))"))
    assert check_guarded(parse_formula("P(x)"))


def test_outermost_offender_reported():
    f = parse_formula("exists y . (P(x) & forall x . Q(x))")
    assert check_guarded(f).offending == f
    # a unary guard is fine when the body has no other free variable
    assert check_guarded(parse_formula("exists y . (P(y) & Q(y))"))


def test_signature_algebra():
    a = Signature(frozenset({"P"}), frozenset({"R"}))
    b = Signature(frozenset({"P", "Q"}), frozenset())
    assert (a & b) == Signature(frozenset({"P"}), frozenset())
    assert a & b <= a
    assert len(a | b) == 3
    assert Signature.from_json((a | b).to_json()) == a | b
    with pytest.raises(ValueError):
        Signature(frozenset({"P"}), frozenset({"P"}))
    with pytest.raises(ValueError):
        Signature(frozenset({"E1"}), frozenset())


def test_conj_and_conjuncts():
    parts = [Atom(p, ("x",)) for p in "PQU"]
    assert conjuncts(conj(*parts)) == parts
    assert conj() == TRUE


def test_swap_vars_is_involution():
    f = parse_formula("exists y . (R(x,y) & forall x . (R(y,x) -> P(x)))")
    assert swap_vars(swap_vars(f)) == f
    assert free_vars(swap_vars(f)) == {"y"}


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([FO2, GF2]), st.integers(0, 3))
def test_print_parse_round_trip(s, logic, depth):
    rng = random.Random(s)
    sig = random_signature(rng, 3)
    if logic == GF2:
        sig = Signature(sig.unary, sig.binary, frozenset({"c"}))
    f = random_formula(rng, sig, depth, logic)
    g = parse_formula(print_formula(f), logic)
    assert g == f
    assert print_formula(g) == print_formula(f)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_sampled_gf_formulas_are_guarded(s):
    rng = random.Random(s)
    sig = random_signature(rng, 3)
    assert check_guarded(random_formula(rng, sig, 3, GF2))


def test_deep_nesting_parses():
    f = conj(*(Atom(f"P{i}", ("x",)) for i in range(2000)))
    assert parse_formula(print_formula(f)) == f
