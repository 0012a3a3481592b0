"""Grounding of formulas over a fixed finite domain into CNF.

Used for bounded countermodel search: for a domain {0..n-1} every unary
atom, binary atom and constant choice becomes a propositional variable,
each subformula instance gets a Tseitin variable, and E1/E2 are forced to
be equivalence relations by explicit clauses.
"""

from __future__ import annotations

from itertools import product

from pysat.formula import IDPool
from pysat.solvers import Solver

from .structures import Structure
from .syntax import (
    EQUIVALENCES,
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
)

SOLVER = "cadical153"


class Grounder:
    def __init__(self, n: int, sig: Signature):
        self.n = n
        self.sig = sig
        self.pool = IDPool()
        self.clauses: list[list[int]] = []
        self._true = self.pool.id(("true",))
        self.clauses.append([self._true])
        self._memo: dict[tuple[int, int, int], int] = {}
        self._keep: list[Formula] = []
        self._axioms()

    def atom(self, pred: str, *elems: int) -> int:
        return self.pool.id(("atom", pred, elems))

    def const(self, c: str, e: int) -> int:
        return self.pool.id(("const", c, e))

    def _axioms(self) -> None:
        n = self.n
        for c in sorted(self.sig.constants):
            self.clauses.append([self.const(c, e) for e in range(n)])
            for e, f in product(range(n), repeat=2):
                if e < f:
                    self.clauses.append([-self.const(c, e), -self.const(c, f)])
        for E in EQUIVALENCES:
            for a in range(n):
                self.clauses.append([self.atom(E, a, a)])
            for a, b in product(range(n), repeat=2):
                self.clauses.append([-self.atom(E, a, b), self.atom(E, b, a)])
            for a, b, c in product(range(n), repeat=3):
                self.clauses.append(
                    [-self.atom(E, a, b), -self.atom(E, b, c), self.atom(E, a, c)]
                )

    def _gate(self, kind: str, lits: list[int]) -> int:
        if kind == "and":
            if not lits:
                return self._true
            if len(lits) == 1:
                return lits[0]
            g = self.pool.id()
            for l in lits:
                self.clauses.append([-g, l])
            self.clauses.append([g] + [-l for l in lits])
            return g
        if not lits:
            return -self._true
        if len(lits) == 1:
            return lits[0]
        g = self.pool.id()
        for l in lits:
            self.clauses.append([g, -l])
        self.clauses.append([-g] + lits)
        return g

    def _term(self, t: str, env: dict[str, int]) -> list[tuple[int, int]]:
        """Possible (element, condition literal) values of a term."""
        if t in env:
            return [(env[t], self._true)]
        return [(e, self.const(t, e)) for e in range(self.n)]

    def lit(self, f: Formula, env: dict[str, int]) -> int:
        key = (id(f), env.get("x", -1), env.get("y", -1))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        self._keep.append(f)
        out = self._lit(f, env)
        self._memo[key] = out
        return out

    def _lit(self, f: Formula, env: dict[str, int]) -> int:
        if isinstance(f, Top):
            return self._true
        if isinstance(f, Bottom):
            return -self._true
        if isinstance(f, Atom):
            opts = [self._term(t, env) for t in f.args]
            cases = []
            for combo in product(*opts):
                elems = tuple(e for e, _ in combo)
                conds = [c for _, c in combo if c != self._true]
                cases.append(self._gate("and", conds + [self.atom(f.pred, *elems)]))
            return self._gate("or", cases)
        if isinstance(f, Eq):
            cases = []
            for (e1, c1), (e2, c2) in product(self._term(f.left, env), self._term(f.right, env)):
                if e1 == e2:
                    cases.append(self._gate("and", [c for c in (c1, c2) if c != self._true]))
            return self._gate("or", cases)
        if isinstance(f, Not):
            return -self.lit(f.arg, env)
        if isinstance(f, And):
            return self._gate("and", [self.lit(f.left, env), self.lit(f.right, env)])
        if isinstance(f, Or):
            return self._gate("or", [self.lit(f.left, env), self.lit(f.right, env)])
        if isinstance(f, Implies):
            return self._gate("or", [-self.lit(f.left, env), self.lit(f.right, env)])
        if isinstance(f, (Forall, Exists)):
            lits = [self.lit(f.body, {**env, f.var: e}) for e in range(self.n)]
            return self._gate("and" if isinstance(f, Forall) else "or", lits)
        raise TypeError(f"not a formula: {f!r}")

    def solve(self, assumptions: list[int]) -> list[int] | None:
        with Solver(name=SOLVER, bootstrap_with=self.clauses) as s:
            if s.solve(assumptions=assumptions):
                return s.get_model()
        return None

    def decode(self, model: list[int]) -> Structure:
        true = {v for v in model if v > 0}
        dom = [f"e{i}" for i in range(self.n)]
        unary = {
            p: {dom[e] for e in range(self.n) if self.atom(p, e) in true}
            for p in sorted(self.sig.unary)
        }
        binary = {
            r: {
                (dom[a], dom[b])
                for a, b in product(range(self.n), repeat=2)
                if self.atom(r, a, b) in true
            }
            for r in sorted(self.sig.binary | set(EQUIVALENCES))
        }
        constants = {
            c: dom[next(e for e in range(self.n) if self.const(c, e) in true)]
            for c in sorted(self.sig.constants)
        }
        return Structure(tuple(dom), unary, binary, constants)


def find_model(
    formulas_at_point: list[Formula], sig: Signature, n: int
) -> tuple[Structure, str] | None:
    """A structure of size ``n`` and a point satisfying all the given
    formulas (free variable x at the point), or None.  The point is
    element ``e0`` without loss of generality."""
    g = Grounder(n, sig)
    lits = [g.lit(f, {"x": 0, "y": 0}) for f in formulas_at_point]
    model = g.solve(lits)
    if model is None:
        return None
    return g.decode(model), "e0"
