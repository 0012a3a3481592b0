"""Compilation of infinite PCP instances into the FO2 formulas phi, ~psi.

Auxiliary predicate names are fixed: ``X0 X1 X2`` (the R-cycle in phi),
``Y1 Y2`` (the R-chain in psi), ``Zv Zw Zv1 Zv2 Zw1 Zw2`` (chain and
segment markers) and ``Pv{j}_{l}`` / ``Pw{j}_{l}`` (position ``l`` of the
``j``-th v- or w-word, both 1-based).  Alphabet letters are unary
predicates named as given.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .syntax import (
    EQUIVALENCES,
    FALSE,
    KEYWORDS,
    VARIABLES,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Signature,
    conj,
    disj,
    forall,
    other,
    signature_of,
)


class PcpError(ValueError):
    pass


AUX_FIXED = ("X0", "X1", "X2", "Y1", "Y2", "Zv", "Zw", "Zv1", "Zv2", "Zw1", "Zw2")
CONSTANTS = ("c1", "c2")


@dataclass(frozen=True)
class PcpInstance:
    alphabet: tuple[str, ...]
    pairs: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    @property
    def k(self) -> int:
        return len(self.pairs)

    def v(self, j: int) -> tuple[str, ...]:
        return self.pairs[j - 1][0]

    def w(self, j: int) -> tuple[str, ...]:
        return self.pairs[j - 1][1]

    def word(self, u: str, j: int) -> tuple[str, ...]:
        return self.v(j) if u == "v" else self.w(j)

    def to_json(self) -> dict:
        single = all(len(a) == 1 for a in self.alphabet)
        enc = (lambda w: "".join(w)) if single else list
        return {
            "alphabet": list(self.alphabet),
            "pairs": [{"v": enc(v), "w": enc(w)} for v, w in self.pairs],
        }


def _split_word(word, alphabet: Sequence[str]) -> tuple[str, ...]:
    if isinstance(word, str):
        if all(len(a) == 1 for a in alphabet):
            letters = tuple(word)
        else:
            letters = tuple(word.split())
    else:
        letters = tuple(str(a) for a in word)
    if not letters:
        raise PcpError("words must be nonempty")
    unknown = sorted(set(letters) - set(alphabet))
    if unknown:
        raise PcpError(f"unknown letters {unknown} in word {word!r}")
    return letters


def validate_pcp(doc: dict | str | Path) -> PcpInstance:
    if isinstance(doc, (str, Path)):
        doc = json.loads(Path(doc).read_text())
    alphabet = [str(a) for a in doc.get("alphabet", [])]
    if len(alphabet) < 2:
        raise PcpError("the alphabet needs at least two letters")
    if len(set(alphabet)) != len(alphabet):
        raise PcpError("duplicate letters in the alphabet")
    reserved = set(VARIABLES) | KEYWORDS | set(EQUIVALENCES) | set(AUX_FIXED) | set(CONSTANTS) | {"R", "S"}
    for a in alphabet:
        if a in reserved or a.startswith(("Pv", "Pw")) or not a[0].isalpha() or not a.replace("_", "").isalnum():
            raise PcpError(f"letter {a!r} clashes with a reserved or invalid name")
    pairs = []
    for p in doc.get("pairs", []):
        if isinstance(p, dict):
            v, w = p.get("v"), p.get("w")
        else:
            v, w = p
        if v is None or w is None:
            raise PcpError(f"pair {p!r} needs both v and w")
        pairs.append((_split_word(v, alphabet), _split_word(w, alphabet)))
    if not pairs:
        raise PcpError("at least one pair is required")
    return PcpInstance(tuple(alphabet), tuple(pairs))


def marker(u: str, j: int, l: int) -> str:
    return f"P{u}{j}_{l}"


def markers(P: PcpInstance) -> list[tuple[str, int, int]]:
    """All position markers (u, j, l): v-markers first, then w-markers."""
    out = []
    for u in ("v", "w"):
        for j in range(1, P.k + 1):
            out.extend((u, j, l) for l in range(1, len(P.word(u, j)) + 1))
    return out


def _u(pred: str, var: str) -> Atom:
    return Atom(pred, (var,))


def _b(pred: str, s: str, t: str) -> Atom:
    return Atom(pred, (s, t))


def _bar(i: int) -> int:
    return 3 - i


def _tautology(P: PcpInstance, var: str) -> Formula:
    return conj(*(Implies(_u(a, var), _u(a, var)) for a in P.alphabet))


def build_phi(P: PcpInstance) -> Formula:
    """phi(x): an R-cycle through three points plus an S-successor."""
    return conj(
        _u("X0", "x"),
        Exists("y", conj(_b("R", "x", "y"), _u("X1", "y"))),
        Forall("x", Implies(_u("X1", "x"), Exists("y", conj(_b("R", "x", "y"), _u("X2", "y"))))),
        Forall("x", Implies(_u("X2", "x"), Exists("y", conj(_b("R", "x", "y"), _u("X0", "y"))))),
        forall("xy", Implies(conj(_u("X0", "x"), _u("X0", "y")), Eq("x", "y"))),
        Exists("y", conj(_b("S", "x", "y"), _tautology(P, "y"))),
    )


def build_phi_guarded(P: PcpInstance) -> Formula:
    """phi'(x): the R-cycle is closed through the constants c1, c2."""
    c1, c2 = CONSTANTS
    return conj(
        _b("R", "x", c1),
        _b("R", c1, c2),
        _b("R", c2, "x"),
        Exists("y", conj(_b("S", "x", "y"), _tautology(P, "y"))),
    )


class _Words:
    """Builds the word generators nu/omega with shared subformula objects.

    Step ``l`` (0-based) of the generator for word ``u_j`` moves along S
    inside the E_i-class to a point carrying letter ``l + 1`` and marker
    ``P{u}{j}_{l+1}``; the last letter point carries ``Z{u}{bar i}``.
    """

    def __init__(self, P: PcpInstance):
        self.P = P
        self.cache: dict[tuple, Formula] = {}

    def _step(self, kind: str, u: str, i: int, j: int, l: int, var: str) -> Formula:
        key = (kind, u, i, j, l, var)
        if key in self.cache:
            return self.cache[key]
        word = self.P.word(u, j)
        nxt = other(var)
        if l + 1 < len(word):
            tail = self._step(kind, u, i, j, l + 1, nxt)
        else:
            tail = _u(f"Z{u}{_bar(i)}", nxt)
        inner = conj(
            _b(f"E{i}", var, nxt),
            _u(word[l], nxt),
            _u(marker(u, j, l + 1), nxt),
            tail,
        )
        if kind == "alpha":
            f = Exists(nxt, conj(_b("S", var, nxt), inner))
        else:
            f = Forall(nxt, Implies(_b("S", var, nxt), inner))
        self.cache[key] = f
        return f

    def generator(self, u: str, i: int, j: int, var: str = "x") -> Formula:
        key = ("gen", u, i, j, var)
        if key not in self.cache:
            self.cache[key] = conj(
                self._step("alpha", u, i, j, 0, var), self._step("beta", u, i, j, 0, var)
            )
        return self.cache[key]


@dataclass
class NegPsi:
    """The four groups of ~psi, each an ordered list of conjuncts."""

    generation: list[Formula] = field(default_factory=list)
    disjointness: list[Formula] = field(default_factory=list)
    coordination: list[Formula] = field(default_factory=list)
    uniqueness: list[Formula] = field(default_factory=list)

    GROUPS = ("generation", "disjointness", "coordination", "uniqueness")

    def items(self) -> list[tuple[str, Formula]]:
        return [(g, f) for g in self.GROUPS for f in getattr(self, g)]

    def formula(self) -> Formula:
        return conj(*(f for _, f in self.items()))


def neg_psi_groups(P: PcpInstance) -> NegPsi:
    words = _Words(P)
    nu = words.generator
    k = P.k
    out = NegPsi()

    g = out.generation
    g.append(conj(_u("Zv1", "x"), _u("Zv", "x")))
    for u in ("v", "w"):
        g.append(forall("xy", Implies(conj(_u(f"Z{u}", "x"), _b("S", "x", "y")), _u(f"Z{u}", "y"))))
    for u in ("v", "w"):
        for i in (1, 2):
            g.append(
                Forall("x", Implies(_u(f"Z{u}{i}", "x"), disj(*(nu(u, i, j) for j in range(1, k + 1)))))
            )
    g.append(Forall("y", Implies(_b("R", "x", "y"), _u("Y1", "y"))))
    g.append(forall("xy", Implies(conj(_u("Y1", "x"), _b("R", "x", "y")), _u("Y2", "y"))))
    g.append(
        forall("xy", Implies(conj(_u("Y2", "x"), _b("R", "x", "y")), conj(_u("Zw1", "y"), _u("Zw", "y"))))
    )

    def apart(p: str, q: str) -> Formula:
        return Forall("x", Implies(_u(p, "x"), Not(_u(q, "x"))))

    d = out.disjointness
    gamma = list(P.alphabet)
    d.extend(apart(p, q) for n, p in enumerate(gamma) for q in gamma[n + 1 :])
    ms = [marker(*m) for m in markers(P)]
    d.extend(apart(p, q) for n, p in enumerate(ms) for q in ms[n + 1 :])
    d.extend([apart("Zv1", "Zv2"), apart("Zw1", "Zw2"), apart("Zv", "Zw")])

    c = out.coordination
    c.append(forall("xy", Implies(_b("R", "x", "y"), _b("E1", "x", "y"))))
    for j in range(1, k + 1):
        for i in (1, 2):
            c.append(
                Forall(
                    "x",
                    Implies(
                        conj(_u(f"Zv{i}", "x"), nu("v", i, j, "x")),
                        Forall(
                            "y",
                            Implies(
                                conj(_b(f"E{i}", "x", "y"), _u(f"Zw{i}", "y")),
                                nu("w", i, j, "y"),
                            ),
                        ),
                    ),
                )
            )
    for i in (1, 2):
        ib = _bar(i)
        c.append(
            forall(
                "xy",
                Implies(
                    conj(_b(f"E{i}", "x", "y"), _u(f"Zv{ib}", "x"), _u(f"Zw{ib}", "y")),
                    _b(f"E{ib}", "x", "y"),
                ),
            )
        )

    q = out.uniqueness
    for p in ms:
        for i in (1, 2):
            q.append(
                forall("xy", Implies(conj(_u(p, "x"), _u(p, "y"), _b(f"E{i}", "x", "y")), Eq("x", "y")))
            )
    mk = markers(P)
    for n, m1 in enumerate(mk):
        for m2 in mk[n + 1 :]:
            if m1[2] == m2[2]:
                continue
            for i in (1, 2):
                q.append(
                    forall(
                        "xy",
                        Implies(
                            conj(_u(marker(*m1), "x"), _u(marker(*m2), "y"), _b(f"E{i}", "x", "y")),
                            FALSE,
                        ),
                    )
                )
    return out


def build_neg_psi(P: PcpInstance) -> Formula:
    return neg_psi_groups(P).formula()


def build_psi(P: PcpInstance) -> Formula:
    return Not(build_neg_psi(P))


def shared_signature(f: Formula, g: Formula) -> Signature:
    return signature_of(f) & signature_of(g)


def rho_of(P: PcpInstance) -> Signature:
    return Signature(frozenset(P.alphabet), frozenset({"R", "S"}))


@dataclass
class GeneratedBundle:
    instance: PcpInstance
    phi: Formula
    neg_psi: Formula
    psi: Formula
    phi_guarded: Formula
    groups: NegPsi
    rho: Signature
    names: dict[str, list[str]]


def build_bundle(P: PcpInstance) -> GeneratedBundle:
    groups = neg_psi_groups(P)
    neg = groups.formula()
    phi = build_phi(P)
    psi = Not(neg)
    names = {
        "X": ["X0", "X1", "X2"],
        "Y": ["Y1", "Y2"],
        "Z": ["Zv", "Zw", "Zv1", "Zv2", "Zw1", "Zw2"],
        "P": [marker(*m) for m in markers(P)],
    }
    return GeneratedBundle(
        P, phi, neg, psi, build_phi_guarded(P), groups, shared_signature(phi, psi), names
    )
