"""Model checking over finite structures.

Every subformula is evaluated once to an ``n x n`` boolean matrix indexed
by the values of ``x`` (rows) and ``y`` (columns), so evaluation costs
O(|f| * |dom|^2) regardless of quantifier nesting.
"""

from __future__ import annotations

from itertools import product
from typing import Mapping

import numpy as np

from .structures import Structure
from .syntax import (
    Atom,
    Bottom,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    And,
    Not,
    Or,
    Top,
    free_vars,
    terms_of,
    is_var,
)


class EvaluationError(ValueError):
    pass


class UnassignedVariableError(EvaluationError):
    pass


class UninterpretedConstantError(EvaluationError):
    pass


class Evaluator:
    """Evaluates formulas on one structure, caching subformula tables.

    The cache is keyed on object identity, so shared subformula objects
    (as produced by the reduction builders) are evaluated once.
    """

    def __init__(self, structure: Structure):
        self.s = structure
        self.n = len(structure)
        self._cache: dict[int, tuple[Formula, np.ndarray]] = {}
        n = self.n
        self._rows = np.broadcast_to(np.arange(n)[:, None], (n, n))
        self._cols = np.broadcast_to(np.arange(n)[None, :], (n, n))

    def _const(self, name: str) -> int:
        try:
            return self.s.index[self.s.constants[name]]
        except KeyError:
            raise UninterpretedConstantError(
                f"constant {name!r} is not interpreted in the structure"
            ) from None

    def _term_index(self, t: str) -> np.ndarray | int:
        # integer index array broadcastable to (n, n)
        if t == "x":
            return self._rows
        if t == "y":
            return self._cols
        return self._const(t)

    def table(self, f: Formula) -> np.ndarray:
        hit = self._cache.get(id(f))
        if hit is not None and hit[0] is f:
            return hit[1]
        out = self._compute(f)
        self._cache[id(f)] = (f, out)
        return out

    def _compute(self, f: Formula) -> np.ndarray:
        n = self.n
        if isinstance(f, Top):
            return np.ones((n, n), dtype=bool)
        if isinstance(f, Bottom):
            return np.zeros((n, n), dtype=bool)
        if isinstance(f, Atom):
            idx = [self._term_index(t) for t in f.args]
            if len(idx) == 1:
                v = self.s.unary_vector(f.pred)
                return np.broadcast_to(v[idx[0]], (n, n))
            m = self.s.binary_matrix(f.pred)
            return np.broadcast_to(m[idx[0], idx[1]], (n, n))
        if isinstance(f, Eq):
            a, b = self._term_index(f.left), self._term_index(f.right)
            return np.broadcast_to(np.equal(a, b), (n, n))
        if isinstance(f, Not):
            return ~self.table(f.arg)
        if isinstance(f, And):
            return self.table(f.left) & self.table(f.right)
        if isinstance(f, Or):
            return self.table(f.left) | self.table(f.right)
        if isinstance(f, Implies):
            return ~self.table(f.left) | self.table(f.right)
        if isinstance(f, (Forall, Exists)):
            body = self.table(f.body)
            red = np.all if isinstance(f, Forall) else np.any
            if f.var == "x":
                return np.broadcast_to(red(body, axis=0)[None, :], (n, n))
            return np.broadcast_to(red(body, axis=1)[:, None], (n, n))
        raise TypeError(f"not a formula: {f!r}")

    def check_terms(self, f: Formula) -> None:
        from .syntax import subformulas

        for g in subformulas(f):
            for t in terms_of(g):
                if not is_var(t):
                    self._const(t)

    def evaluate(self, f: Formula, asg: Mapping[str, str] | None = None) -> bool:
        asg = dict(asg or {})
        missing = free_vars(f) - set(asg)
        if missing:
            raise UnassignedVariableError(f"unassigned free variables {sorted(missing)}")
        for v, e in asg.items():
            if e not in self.s.index:
                raise EvaluationError(f"{v} is assigned {e!r}, not in the domain")
        self.check_terms(f)
        i = self.s.index[asg["x"]] if "x" in asg else 0
        j = self.s.index[asg["y"]] if "y" in asg else 0
        return bool(self.table(f)[i, j])


def evaluate(S: Structure, f: Formula, asg: Mapping[str, str] | None = None) -> bool:
    """Truth value of ``f`` in ``S`` under the assignment ``asg``."""
    return Evaluator(S).evaluate(f, asg)


def satisfying_assignments(S: Structure, f: Formula) -> list[dict[str, str]]:
    """All assignments to the free variables of ``f`` that make it true,
    in lexicographic order of (x, y)."""
    fv = sorted(free_vars(f))
    ev = Evaluator(S)
    ev.check_terms(f)
    t = ev.table(f)
    out = []
    for values in product(S.domain, repeat=len(fv)):
        asg = dict(zip(fv, values))
        i = S.index[asg["x"]] if "x" in asg else 0
        j = S.index[asg["y"]] if "y" in asg else 0
        if t[i, j]:
            out.append(asg)
    return out
