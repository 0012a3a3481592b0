"""Seeded random structures and formulas for property checks."""

from __future__ import annotations

import os
import random

from .structures import Structure, disjoint_union, equivalence_closure
from .syntax import (
    FO2,
    GF2,
    FALSE,
    TRUE,
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Signature,
    other,
)

SEED_ENV = "FO2_SEED"


def seed(default: int = 0) -> int:
    """The RNG seed from FO2_SEED, or ``default``."""
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def random_signature(rng: random.Random, max_symbols: int = 3) -> Signature:
    n = rng.randint(1, max_symbols)
    names = rng.sample(["P", "Q", "U", "R", "T", "K"], n)
    unary = {s for s in names if s in "PQU"}
    binary = set(names) - unary
    return Signature(frozenset(unary), frozenset(binary))


def random_structure(
    rng: random.Random,
    sig: Signature,
    max_size: int = 4,
    density: float = 0.4,
    tag: str = "",
) -> Structure:
    n = rng.randint(1, max_size)
    dom = [f"{tag}{i}" for i in range(n)]
    unary = {p: {d for d in dom if rng.random() < density} for p in sorted(sig.unary)}
    binary = {
        r: {(a, b) for a in dom for b in dom if rng.random() < density}
        for r in sorted(sig.binary)
    }
    for e in ("E1", "E2"):
        pairs = [(a, b) for a in dom for b in dom if a < b and rng.random() < density / 2]
        binary[e] = equivalence_closure(dom, pairs)
    constants = {c: rng.choice(dom) for c in sorted(sig.constants)}
    return Structure(tuple(dom), unary, binary, constants)


def _atoms(sig: Signature, var_set: tuple[str, ...], logic: str) -> list[Formula]:
    out: list[Formula] = []
    for p in sorted(sig.unary):
        out += [Atom(p, (v,)) for v in var_set]
    for r in sorted(sig.binary):
        out += [Atom(r, (s, t)) for s in var_set for t in var_set]
    if len(var_set) == 2:
        out.append(Eq("x", "y"))
    if logic == GF2:
        out += [Eq(v, c) for v in var_set for c in sorted(sig.constants)]
    return out


def random_formula(
    rng: random.Random,
    sig: Signature,
    depth: int,
    logic: str = FO2,
    free: tuple[str, ...] = ("x",),
    size: int = 6,
) -> Formula:
    """A random formula over sig with free variables among ``free``.

    GF formulas use forward guards R(v, u) (from the free variable to the
    quantified one) or u = v, matching the successor moves of the game.
    """
    if size <= 1 or (depth == 0 and rng.random() < 0.5):
        atoms = _atoms(sig, free, logic)
        if not atoms or rng.random() < 0.05:
            return rng.choice([TRUE, FALSE])
        f = rng.choice(atoms)
        return Not(f) if rng.random() < 0.5 else f
    roll = rng.random()
    if roll < 0.1:
        return Not(random_formula(rng, sig, depth, logic, free, size - 1))
    if roll < 0.55 or depth == 0:
        a = random_formula(rng, sig, depth, logic, free, size // 2)
        b = random_formula(rng, sig, depth, logic, free, size - size // 2)
        return rng.choice([And, Or, Implies])(a, b)
    v = rng.choice(tuple(free))
    u = other(v)
    body = random_formula(rng, sig, depth - 1, logic, (v, u), size - 1)
    universal = rng.random() < 0.5
    if logic == FO2:
        return (Forall if universal else Exists)(u, body)
    guards: list[Formula] = [Atom(r, (v, u)) for r in sorted(sig.binary)] + [Eq(v, u)]
    g = rng.choice(guards)
    return Forall(u, Implies(g, body)) if universal else Exists(u, And(g, body))


def perturb(rng: random.Random, S: Structure, sig: Signature) -> Structure:
    """Copy of S with one randomly chosen unary or binary bit flipped."""
    unary = {p: set(S.unary.get(p, ())) for p in sig.unary}
    binary = {r: set(S.binary.get(r, ())) for r in sig.binary}
    choices = [("u", p) for p in sorted(sig.unary)] + [("b", r) for r in sorted(sig.binary)]
    kind, name = rng.choice(choices)
    if kind == "u":
        unary[name] ^= {rng.choice(S.domain)}
    else:
        binary[name] ^= {(rng.choice(S.domain), rng.choice(S.domain))}
    return Structure(
        S.domain, {**S.unary, **unary}, {**S.binary, **binary}, S.constants
    )


def random_pair(rng: random.Random, sig: Signature, max_size: int = 4) -> tuple[Structure, Structure]:
    """Two structures over sig, in equal proportion: independent, a
    relabelled copy, a copy with one bit flipped, or two disjoint copies
    (when that fits within max_size)."""
    mode = rng.randrange(4)
    A = random_structure(rng, sig, max_size // 2 if mode == 3 else max_size, tag="a")
    if mode == 0:
        return A, random_structure(rng, sig, max_size, tag="b")
    if mode == 3:
        U = disjoint_union(A, A)[0]
        return A, U.relabel({d: f"b{i}" for i, d in enumerate(U.domain)})
    B = A.relabel({d: "b" + d[1:] for d in A.domain})
    if mode == 2:
        B = perturb(rng, B, sig)
    return A, B
