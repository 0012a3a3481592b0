"""FO2 and GF2 bisimulations between finite structures.

The greatest bisimulation is computed by refinement.  Starting from the
pairs whose singleton map is a partial isomorphism, round ``r + 1`` keeps a
pair only if every admissible move from it can be answered inside round
``r`` (and, as a position-independent condition, round ``r`` is global and
relates the named elements in the guarded logic).  Round ``k`` is exactly
the set of positions from which Duplicator survives ``k`` rounds, which
makes bounded games and distinguishing formulas fall out of the same table.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .structures import Structure, partial_iso_check
from .syntax import (
    FO2,
    GF2,
    MODES,
    And,
    Atom,
    Eq,
    Exists,
    Formula,
    Not,
    Signature,
    conj,
    swap_vars,
)


@dataclass(frozen=True)
class BisimRelation:
    pairs: frozenset[tuple[str, str]]
    logic: str
    rho: Signature

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def to_json(self) -> dict:
        return {
            "pairs": [list(p) for p in sorted(self.pairs)],
            "logic": self.logic,
            "rho": self.rho.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> BisimRelation:
        return cls(
            frozenset((str(a), str(b)) for a, b in doc["pairs"]),
            doc.get("logic", FO2),
            Signature.from_json(doc.get("rho", {})),
        )


@dataclass(frozen=True)
class Verdict:
    ok: bool
    clause: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _check_logic(logic: str) -> None:
    if logic not in MODES:
        raise ValueError(f"logic must be one of {MODES}, got {logic!r}")


def pair_type(S: Structure, a: str, a2: str, rho: Signature) -> tuple:
    """Atomic rho-type of the ordered pair (a, a2); two pairs have the same
    type iff mapping one onto the other is a partial rho-isomorphism."""
    return (
        a == a2,
        tuple(S.holds(p, a) for p in sorted(rho.unary)),
        tuple(S.holds(p, a2) for p in sorted(rho.unary)),
        tuple(
            (S.holds(r, a, a), S.holds(r, a, a2), S.holds(r, a2, a), S.holds(r, a2, a2))
            for r in sorted(rho.binary)
        ),
        tuple((a == S.constant(c), a2 == S.constant(c)) for c in sorted(rho.constants)),
    )


def moves(S: Structure, a: str, rho: Signature, logic: str) -> list[str]:
    """Admissible successors of ``a``: all elements for FO2, the point
    itself and its rho-successors for GF2."""
    if logic == FO2:
        return list(S.domain)
    return [
        a2 for a2 in S.domain if a2 == a or any(S.holds(r, a, a2) for r in rho.binary)
    ]


class Refinement:
    """Round-indexed refinement table for one (A, B, rho, logic)."""

    def __init__(self, A: Structure, B: Structure, rho: Signature, logic: str):
        _check_logic(logic)
        self.A, self.B, self.rho, self.logic = A, B, rho, logic
        ids: dict[tuple, int] = {}

        def table(S: Structure) -> np.ndarray:
            n = len(S)
            t = np.empty((n, n), dtype=np.int64)
            for i, a in enumerate(S.domain):
                for j, a2 in enumerate(S.domain):
                    t[i, j] = ids.setdefault(pair_type(S, a, a2, rho), len(ids))
            return t

        self.TA, self.TB = table(A), table(B)
        self.movA = self._moves(A)
        self.movB = self._moves(B)
        self.consts = [
            (A.index[A.constant(c)], B.index[B.constant(c)], c)
            for c in sorted(rho.constants)
        ] if logic == GF2 else []
        self.rounds: list[np.ndarray] = []
        self._run()

    def _moves(self, S: Structure) -> np.ndarray:
        n = len(S)
        if self.logic == FO2:
            return np.ones((n, n), dtype=bool)
        m = np.eye(n, dtype=bool)
        for r in self.rho.binary:
            m |= S.binary_matrix(r)
        return m

    def _run(self) -> None:
        TA, TB = self.TA, self.TB
        match = TA[:, None, :, None] == TB[None, :, None, :]  # (a, b, a', b')
        W = np.diagonal(TA)[:, None] == np.diagonal(TB)[None, :]
        self.rounds.append(W)
        while True:
            if not self.is_global(W):
                Wn = np.zeros_like(W)
            else:
                live = match & W[None, None, :, :]
                forth = (live.any(axis=3) | ~self.movA[:, None, :]).all(axis=2)
                back = (live.any(axis=2) | ~self.movB[None, :, :]).all(axis=2)
                Wn = W & forth & back
            if np.array_equal(Wn, W):
                break
            self.rounds.append(Wn)
            W = Wn
        self.final = W

    def is_global(self, W: np.ndarray) -> bool:
        if not (W.any(axis=1).all() and W.any(axis=0).all()):
            return False
        return all(W[i, j] for i, j, _ in self.consts)

    def at(self, k: int) -> np.ndarray:
        return self.rounds[min(k, len(self.rounds) - 1)]

    @cached_property
    def elimination(self) -> np.ndarray:
        """Round at which each pair leaves the table (-1: never)."""
        out = np.full(self.final.shape, -1, dtype=np.int64)
        out[~self.rounds[0]] = 0
        for r in range(1, len(self.rounds)):
            out[self.rounds[r - 1] & ~self.rounds[r]] = r
        return out

    def greatest(self) -> BisimRelation | None:
        if not self.is_global(self.final):
            return None
        A, B = self.A, self.B
        pairs = frozenset(
            (A.domain[i], B.domain[j]) for i, j in zip(*np.nonzero(self.final))
        )
        return BisimRelation(pairs, self.logic, self.rho)


def greatest_bisim(
    A: Structure, B: Structure, rho: Signature, logic: str = FO2
) -> BisimRelation | None:
    """The inclusion-greatest L(rho)-bisimulation, or None if none exists."""
    return Refinement(A, B, rho, logic).greatest()


def check_bisim_certificate(
    A: Structure, B: Structure, rho: Signature, logic: str, rel: BisimRelation | Iterable
) -> Verdict:
    """Check ``rel`` clause by clause; reports the first violated clause
    (``domain``, ``globality``, ``constants``, ``forth`` or ``back``)."""
    _check_logic(logic)
    pairs = set(rel.pairs if isinstance(rel, BisimRelation) else map(tuple, rel))
    for a, b in sorted(pairs):
        if a not in A.index or b not in B.index:
            return Verdict(False, "domain", f"({a}, {b}) is not in dom(A) x dom(B)")
    left = {a for a, _ in pairs}
    right = {b for _, b in pairs}
    for a in A.domain:
        if a not in left:
            return Verdict(False, "globality", f"{a} of A is unrelated")
    for b in B.domain:
        if b not in right:
            return Verdict(False, "globality", f"{b} of B is unrelated")
    if logic == GF2:
        for c in sorted(rho.constants):
            if (A.constant(c), B.constant(c)) not in pairs:
                return Verdict(False, "constants", f"({c}^A, {c}^B) is not related")
    for a, b in sorted(pairs):
        for a2 in moves(A, a, rho, logic):
            if not any(
                (a2, b2) in pairs and partial_iso_check(A, (a, a2), B, (b, b2), rho)
                for b2 in B.domain
            ):
                return Verdict(False, "forth", f"from ({a}, {b}) the move to {a2} of A")
        for b2 in moves(B, b, rho, logic):
            if not any(
                (a2, b2) in pairs and partial_iso_check(A, (a, a2), B, (b, b2), rho)
                for a2 in A.domain
            ):
                return Verdict(False, "back", f"from ({a}, {b}) the move to {b2} of B")
    return Verdict(True)


def _check_tuples(ta: Sequence[str], tb: Sequence[str]) -> tuple[tuple, tuple]:
    ta, tb = tuple(ta), tuple(tb)
    if len(ta) != len(tb) or not 1 <= len(ta) <= 2:
        raise ValueError("point tuples must have equal length 1 or 2")
    return ta, tb


def pointed_bisimilar(
    A: Structure,
    ta: Sequence[str],
    B: Structure,
    tb: Sequence[str],
    rho: Signature,
    logic: str = FO2,
    refinement: Refinement | None = None,
) -> bool:
    ta, tb = _check_tuples(ta, tb)
    if not partial_iso_check(A, ta, B, tb, rho):
        return False
    ref = refinement or Refinement(A, B, rho, logic)
    if ref.greatest() is None:
        return False
    return all(ref.final[A.index[a], B.index[b]] for a, b in zip(ta, tb))


def bounded_game(
    A: Structure,
    ta: Sequence[str],
    B: Structure,
    tb: Sequence[str],
    rho: Signature,
    logic: str,
    k: int,
    refinement: Refinement | None = None,
) -> bool:
    """Does Duplicator survive ``k`` rounds from ``ta -> tb``?"""
    if k < 0:
        raise ValueError("k must be non-negative")
    ta, tb = _check_tuples(ta, tb)
    if not partial_iso_check(A, ta, B, tb, rho):
        return False
    ref = refinement or Refinement(A, B, rho, logic)
    W = ref.at(k)
    return all(W[A.index[a], B.index[b]] for a, b in zip(ta, tb))


class BisimilarError(ValueError):
    pass


class _Distinguisher:
    def __init__(self, ref: Refinement):
        self.ref = ref
        self.memo: dict[tuple[int, int], Formula] = {}

    def literals(self, S: Structure, a: str, a2: str) -> list[Formula]:
        """Atomic type of (a, a2) over rho minus what depends on a alone."""
        rho = self.ref.rho
        out: list[Formula] = []

        def lit(f: Formula, val: bool) -> None:
            out.append(f if val else Not(f))

        lit(Eq("x", "y"), a == a2)
        for p in sorted(rho.unary):
            lit(Atom(p, ("y",)), S.holds(p, a2))
        for r in sorted(rho.binary):
            lit(Atom(r, ("x", "y")), S.holds(r, a, a2))
            lit(Atom(r, ("y", "x")), S.holds(r, a2, a))
            lit(Atom(r, ("y", "y")), S.holds(r, a2, a2))
        if self.ref.logic == GF2:
            for c in sorted(rho.constants):
                lit(Eq("y", c), a2 == S.constant(c))
        return out

    def step(self, S: Structure, a: str, a2: str, rest: list[Formula]) -> Formula:
        """exists y (guard & type(x, y) & rest)."""
        lits = self.literals(S, a, a2)
        if self.ref.logic == FO2:
            parts = lits + rest
        else:
            guard = next(
                Atom(r, ("x", "y")) for r in sorted(self.ref.rho.binary) if S.holds(r, a, a2)
            )
            parts = [guard] + [f for f in lits if f != guard] + rest
        return Exists("y", conj(*_dedup(parts)))

    def sentence(self, rest: list[Formula]) -> Formula:
        body = _dedup(rest)
        if self.ref.logic == GF2:
            return Exists("y", conj(Eq("y", "y"), *body))
        return Exists("y", conj(*body))

    def __call__(self, i: int, j: int) -> Formula:
        key = (i, j)
        if key not in self.memo:
            self.memo[key] = self._build(i, j)
        return self.memo[key]

    def _build(self, i: int, j: int) -> Formula:
        ref = self.ref
        A, B, rho = ref.A, ref.B, ref.rho
        a, b = A.domain[i], B.domain[j]
        r = int(ref.elimination[i, j])
        if r < 0:
            raise BisimilarError(f"({a}, {b}) is never eliminated")
        if r == 0:
            for p in sorted(rho.unary):
                if A.holds(p, a) != B.holds(p, b):
                    f = Atom(p, ("x",))
                    return f if A.holds(p, a) else Not(f)
            for q in sorted(rho.binary):
                if A.holds(q, a, a) != B.holds(q, b, b):
                    f = Atom(q, ("x", "x"))
                    return f if A.holds(q, a, a) else Not(f)
            for c in sorted(rho.constants):
                if (a == A.constant(c)) != (b == B.constant(c)):
                    f = Eq("x", c)
                    return f if a == A.constant(c) else Not(f)
            raise AssertionError("pair eliminated at round 0 without a differing atom")
        W = ref.at(r - 1)
        if not ref.is_global(W):
            return self._global_failure(W)
        TA, TB = ref.TA, ref.TB
        for i2 in np.nonzero(ref.movA[i])[0]:
            partners = np.nonzero(TB[j] == TA[i, i2])[0]
            if not W[i2, partners].any():
                rest = [swap_vars(self(i2, j2)) for j2 in partners]
                return self.step(A, a, A.domain[i2], rest)
        for j2 in np.nonzero(ref.movB[j])[0]:
            partners = np.nonzero(TA[i] == TB[j, j2])[0]
            if not W[partners, j2].any():
                rest = [swap_vars(Not(self(i2, j2))) for i2 in partners]
                return Not(self.step(B, b, B.domain[j2], rest))
        raise AssertionError("pair eliminated without a failing move")

    def _global_failure(self, W: np.ndarray) -> Formula:
        ref = self.ref
        nA, nB = W.shape
        for i2 in range(nA):
            if not W[i2].any():
                return self.sentence([swap_vars(self(i2, j2)) for j2 in range(nB)])
        for j2 in range(nB):
            if not W[:, j2].any():
                return Not(
                    self.sentence([swap_vars(Not(self(i2, j2))) for i2 in range(nA)])
                )
        for i2, j2, c in ref.consts:
            if not W[i2, j2]:
                return Exists("y", conj(Eq("y", c), swap_vars(self(i2, j2))))
        raise AssertionError("no global failure found")


def _dedup(fs: list[Formula]) -> list[Formula]:
    seen, out = set(), []
    for f in fs:
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def distinguishing_formula(
    A: Structure,
    a: str,
    B: Structure,
    b: str,
    rho: Signature,
    logic: str = FO2,
    refinement: Refinement | None = None,
) -> Formula:
    """A formula over rho with free variable x, true at a in A and false at
    b in B.  Raises BisimilarError if the pointed structures are bisimilar."""
    ref = refinement or Refinement(A, B, rho, logic)
    i, j = A.index[a], B.index[b]
    if ref.elimination[i, j] < 0:
        if ref.greatest() is not None:
            raise BisimilarError(f"({a}, {b}) are {logic}-bisimilar")
        # the final table is not global, so every pair dies one round later
        return _Distinguisher(ref)._global_failure(ref.final)
    return _Distinguisher(ref)(i, j)
