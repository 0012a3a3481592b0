"""Interpolant non-existence certificates and bounded search oracles.

A certificate is a pair of pointed structures (A, a), (B, b) with
A |= phi(a), B |= ~psi(b) and a bisimulation over the shared signature
relating the points; when it checks out, no interpolant exists.  The
searches here are testing oracles: they refute, but outside the
propositional fragment they never prove an entailment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterator

from pysat.solvers import Solver

from .bisim import BisimRelation, Verdict, check_bisim_certificate
from .grounding import SOLVER, Grounder
from .modelcheck import evaluate
from .structures import PointedStructure, Structure, load_structure, partial_iso_check
from .syntax import (
    FALSE,
    FO2,
    GF2,
    MODES,
    TRUE,
    And,
    Atom,
    Bottom,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Signature,
    Top,
    free_vars,
    mode_of,
    parse_formula,
    print_formula,
    quantifier_depth,
    signature_of,
)
from .reduction import shared_signature


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class WitnessCertificate:
    phi: Formula
    psi: Formula
    pointedA: PointedStructure
    pointedB: PointedStructure
    beta: BisimRelation
    logic: str = FO2


def _read_formula(path: Path) -> Formula:
    text = path.read_text()
    mode = GF2 if "gf2" in path.suffixes or path.suffix == ".gf2" else None
    try:
        return parse_formula(text, mode or FO2)
    except Exception:
        if mode is None:
            return parse_formula(text, GF2)
        raise


def load_certificate(path: str | Path) -> WitnessCertificate:
    path = Path(path)
    doc = json.loads(path.read_text())
    base = path.parent
    try:
        logic = doc.get("logic", FO2)
        if logic not in MODES:
            raise CertificateError(f"unknown logic {logic!r}")
        phi = _read_formula(base / doc["phi"])
        psi = _read_formula(base / doc["psi"])
        A = load_structure(base / doc["A"])
        B = load_structure(base / doc["B"])
        beta = BisimRelation(
            frozenset((str(a), str(b)) for a, b in doc.get("beta", [])),
            logic,
            shared_signature(phi, psi),
        )
        return WitnessCertificate(
            phi,
            psi,
            PointedStructure(A, tuple(doc["pointsA"])),
            PointedStructure(B, tuple(doc["pointsB"])),
            beta,
            logic,
        )
    except KeyError as e:
        raise CertificateError(f"certificate is missing {e}") from None


@dataclass(frozen=True)
class WitnessVerdict:
    accepted: bool
    clause: str | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "verdict": "accept" if self.accepted else "reject",
            "failed_clause": self.clause,
            "detail": self.detail,
        }


def check_nonexistence_witness(cert: WitnessCertificate) -> WitnessVerdict:
    """Accept iff A |= phi(a), B |= ~psi(b) and (A, a) ~ (B, b) over the
    shared signature, with the given relation re-verified from scratch."""
    fv = sorted(free_vars(cert.phi) | free_vars(cert.psi))
    A, ta = cert.pointedA.structure, cert.pointedA.points
    B, tb = cert.pointedB.structure, cert.pointedB.points
    if len(ta) != len(tb) or len(ta) != max(1, len(fv)):
        raise CertificateError(
            f"point tuples of length {len(ta)}/{len(tb)} for free variables {fv}"
        )
    rho = shared_signature(cert.phi, cert.psi)
    asg_a, asg_b = dict(zip(fv, ta)), dict(zip(fv, tb))
    if not evaluate(A, cert.phi, asg_a):
        return WitnessVerdict(False, "phi", "A does not satisfy phi at the points")
    if evaluate(B, cert.psi, asg_b):
        return WitnessVerdict(False, "neg_psi", "B does not satisfy ~psi at the points")
    if not partial_iso_check(A, ta, B, tb, rho):
        return WitnessVerdict(False, "partial_iso", "points are not partially isomorphic")
    v: Verdict = check_bisim_certificate(A, B, rho, cert.logic, cert.beta)
    if not v:
        return WitnessVerdict(False, v.clause, v.detail)
    for a, b in zip(ta, tb):
        if (a, b) not in cert.beta.pairs:
            return WitnessVerdict(False, "points_related", f"({a}, {b}) is not in beta")
    return WitnessVerdict(True)


# ---------------------------------------------------------------- countermodels


class EntailmentOracle:
    """Refutes ``premise |= conclusion`` by finite countermodels.

    Groundings of the premise are kept per domain size and the solvers are
    incremental, so many conclusions can be tried against one premise.
    """

    def __init__(self, premise: Formula, max_domain: int, extra_sig: Signature = Signature()):
        if not free_vars(premise) <= {"x"}:
            raise ValueError("premise may only have x free")
        self.premise = premise
        self.max_domain = max_domain
        self.extra_sig = extra_sig
        self._ground: dict[tuple[int, Signature], tuple[Grounder, Solver, list]] = {}

    def close(self) -> None:
        for _, s, _ in self._ground.values():
            s.delete()
        self._ground.clear()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _get(self, n: int, sig: Signature):
        key = (n, sig)
        if key not in self._ground:
            g = Grounder(n, sig)
            s = Solver(name=SOLVER)
            p = g.lit(self.premise, {"x": 0, "y": 0})
            self._ground[key] = (g, s, [p, 0])
        g, s, state = self._ground[key]
        return g, s, state

    def refute(self, conclusion: Formula) -> tuple[Structure, str] | None:
        if not free_vars(conclusion) <= {"x"}:
            raise ValueError("conclusion may only have x free")
        sig = signature_of(self.premise) | signature_of(conclusion) | self.extra_sig
        for n in range(1, self.max_domain + 1):
            g, s, state = self._get(n, sig)
            c = g.lit(conclusion, {"x": 0, "y": 0})
            s.append_formula(g.clauses[state[1]:])
            state[1] = len(g.clauses)
            if s.solve(assumptions=[state[0], -c]):
                S = g.decode(s.get_model())
                if not (evaluate(S, self.premise, {"x": "e0"}) and not evaluate(S, conclusion, {"x": "e0"})):
                    raise AssertionError("countermodel failed re-validation")
                return S, "e0"
        return None


def countermodel_search(
    premise: Formula, conclusion: Formula, bound: int
) -> tuple[Structure, str] | None:
    """A structure of size <= bound and point e with premise true and
    conclusion false at e, or None.  None is not a proof of entailment."""
    if not (free_vars(premise) | free_vars(conclusion)) <= {"x"}:
        raise ValueError("premise and conclusion may only share the free variable x")
    with EntailmentOracle(premise, bound) as oracle:
        return oracle.refute(conclusion)


# ---------------------------------------------------------------- candidates


def _key(f: Formula) -> str:
    return print_formula(f)


def _is_literal(f: Formula) -> bool:
    return isinstance(f, (Atom, Eq, Top, Bottom)) or (
        isinstance(f, Not) and isinstance(f.arg, (Atom, Eq))
    )


def _complement(f: Formula) -> Formula:
    return f.arg if isinstance(f, Not) else Not(f)


def _rebuild(op, items: list[Formula]) -> Formula:
    out = items[-1]
    for f in reversed(items[:-1]):
        out = op(f, out)
    return out


def canonical(f: Formula, neg: bool = False) -> Formula:
    """Negation normal form with flattened, sorted, deduplicated operands
    and trivial tautologies/contradictions pruned."""
    if isinstance(f, Top):
        return FALSE if neg else TRUE
    if isinstance(f, Bottom):
        return TRUE if neg else FALSE
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Eq):
        if f.left == f.right:
            return FALSE if neg else TRUE
        e = Eq(*sorted((f.left, f.right)))
        return Not(e) if neg else e
    if isinstance(f, Not):
        return canonical(f.arg, not neg)
    if isinstance(f, Implies):
        return canonical(Or(Not(f.left), f.right), neg)
    if isinstance(f, (And, Or)):
        is_and = isinstance(f, And) != neg
        op = And if is_and else Or
        unit, zero = (TRUE, FALSE) if is_and else (FALSE, TRUE)
        items: dict[str, Formula] = {}
        for part in (f.left, f.right):
            c = canonical(part, neg)
            for g in _flatten(c, op):
                if g == zero:
                    return zero
                if g != unit:
                    items[_key(g)] = g
        for g in items.values():
            if _is_literal(g) and _key(_complement(g)) in items:
                return zero
        if not items:
            return unit
        return _rebuild(op, [items[k] for k in sorted(items)])
    if isinstance(f, (Forall, Exists)):
        is_forall = isinstance(f, Forall) != neg
        body = canonical(f.body, neg)
        if f.var not in free_vars(body):
            return body
        return (Forall if is_forall else Exists)(f.var, body)
    raise TypeError(f"not a formula: {f!r}")


def _flatten(f: Formula, op) -> list[Formula]:
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, op):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def canonical_size(f: Formula) -> int:
    if _is_literal(f):
        return 1
    if isinstance(f, (And, Or, Implies)):
        return 1 + canonical_size(f.left) + canonical_size(f.right)
    if isinstance(f, Not):
        return 1 + canonical_size(f.arg)
    return 1 + canonical_size(f.body)


def literals_over(rho: Signature) -> list[Formula]:
    """Quantifier-free building blocks over rho (no constants)."""
    atoms: list[Formula] = [Eq("x", "y")]
    for p in sorted(rho.unary):
        atoms += [Atom(p, ("x",)), Atom(p, ("y",))]
    for r in sorted(rho.binary):
        atoms += [Atom(r, args) for args in product("xy", repeat=2)]
    return [TRUE, FALSE] + atoms + [Not(a) for a in atoms]


def enumerate_candidates(rho: Signature, max_depth: int, max_size: int) -> list[Formula]:
    """All canonical rho-formulas with free variables among {x}, up to the
    given quantifier depth and canonical size, ordered by (size, text)."""
    seen: dict[str, tuple[Formula, int]] = {}
    levels: dict[int, list[tuple[Formula, int]]] = {s: [] for s in range(1, max_size + 1)}

    def add(f: Formula) -> None:
        c = canonical(f)
        k = _key(c)
        if k in seen:
            return
        s, d = canonical_size(c), quantifier_depth(c)
        if s > max_size or d > max_depth:
            return
        seen[k] = (c, s)
        levels[s].append((c, d))

    for lit in literals_over(rho):
        add(lit)
    for s in range(2, max_size + 1):
        for body, d in list(levels[s - 1]):
            if d < max_depth:
                for v in "xy":
                    add(Forall(v, body))
                    add(Exists(v, body))
        for s1 in range(1, s - 1):
            s2 = s - 1 - s1
            if s1 > s2:
                break
            for f1, _ in list(levels[s1]):
                for f2, _ in list(levels[s2]):
                    add(And(f1, f2))
                    add(Or(f1, f2))
    out = [(s, k, c) for k, (c, s) in seen.items() if free_vars(c) <= {"x"}]
    return [c for _, _, c in sorted(out)]


# ---------------------------------------------------------------- interpolants


@dataclass(frozen=True)
class SearchBounds:
    max_quantifier_depth: int = 1
    max_size: int = 3
    countermodel_max_domain: int = 3

    def __post_init__(self):
        if min(self.max_quantifier_depth, self.max_size, self.countermodel_max_domain) < 0:
            raise ValueError("search bounds must be non-negative")


EXACT = "exact"
BOUNDED = "bounded"


@dataclass
class InterpolantResult:
    found: Formula | None
    regime: str | None
    report: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.found is not None

    def to_json(self) -> dict:
        return {
            "status": "found" if self.found is not None else "none_within_bounds",
            "interpolant": None if self.found is None else print_formula(self.found),
            "regime": self.regime,
            **self.report,
        }


def in_exact_fragment(f: Formula) -> bool:
    """Quantifier-free, equality-free, unary atoms over x only."""
    if isinstance(f, (Top, Bottom)):
        return True
    if isinstance(f, Atom):
        return f.args == ("x",)
    if isinstance(f, Not):
        return in_exact_fragment(f.arg)
    if isinstance(f, (And, Or, Implies)):
        return in_exact_fragment(f.left) and in_exact_fragment(f.right)
    return False


def _truth(f: Formula, val: dict[str, bool]) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return val[f.pred]
    if isinstance(f, Not):
        return not _truth(f.arg, val)
    if isinstance(f, And):
        return _truth(f.left, val) and _truth(f.right, val)
    if isinstance(f, Or):
        return _truth(f.left, val) or _truth(f.right, val)
    if isinstance(f, Implies):
        return (not _truth(f.left, val)) or _truth(f.right, val)
    raise TypeError(f)


def entails_exact(premise: Formula, conclusion: Formula) -> bool:
    preds = sorted((signature_of(premise) | signature_of(conclusion)).unary)
    for bits in product((False, True), repeat=len(preds)):
        val = dict(zip(preds, bits))
        if _truth(premise, val) and not _truth(conclusion, val):
            return False
    return True


def interpolant_search(
    phi: Formula, psi: Formula, bounds: SearchBounds = SearchBounds()
) -> InterpolantResult:
    """Look for a rho-interpolant among enumerated candidates.

    A candidate in the propositional unary fragment (together with phi and
    psi) is decided exactly by truth tables; anything else is accepted only
    if neither entailment is refuted by a countermodel within the domain
    bound, which is bounded confidence rather than a proof.
    """
    if not (free_vars(phi) | free_vars(psi)) <= {"x"}:
        raise ValueError("phi and psi may only share the free variable x")
    rho = shared_signature(phi, psi)
    rho_fo = Signature(rho.unary, rho.binary)
    cands = enumerate_candidates(rho_fo, bounds.max_quantifier_depth, bounds.max_size)
    exact_inputs = in_exact_fragment(phi) and in_exact_fragment(psi)
    report = {
        "rho": rho.to_json(),
        "bounds": {
            "max_quantifier_depth": bounds.max_quantifier_depth,
            "max_size": bounds.max_size,
            "countermodel_max_domain": bounds.countermodel_max_domain,
        },
        "candidates": len(cands),
        "checked": {EXACT: 0, BOUNDED: 0},
    }
    left = EntailmentOracle(phi, bounds.countermodel_max_domain)
    try:
        right_cache: dict[str, bool] = {}
        for iota in cands:
            if exact_inputs and in_exact_fragment(iota):
                report["checked"][EXACT] += 1
                if entails_exact(phi, iota) and entails_exact(iota, psi):
                    return InterpolantResult(iota, EXACT, report)
                continue
            report["checked"][BOUNDED] += 1
            if left.refute(iota) is not None:
                continue
            k = _key(iota)
            if k not in right_cache:
                right_cache[k] = countermodel_search(iota, psi, bounds.countermodel_max_domain) is None
            if right_cache[k]:
                return InterpolantResult(iota, BOUNDED, report)
    finally:
        left.close()
    regimes = [EXACT] if exact_inputs and report["checked"][BOUNDED] == 0 else [BOUNDED] if not exact_inputs else [EXACT, BOUNDED]
    report["regimes"] = regimes
    return InterpolantResult(None, None, report)
