"""Slow, definition-level reference implementations used only by tests."""

from itertools import combinations, product

from fo2e.structures import Structure, equivalence_closure, partial_iso_check
from fo2e.syntax import (
    FALSE,
    TRUE,
    And,
    Eq,
    Exists,
    Forall,
    GF2,
    Not,
    Or,
    Signature,
    free_vars,
    quantifier_depth,
)
from fo2e.witness import canonical, canonical_size, literals_over


def _moves(S, a, rho, logic):
    if logic != GF2:
        return list(S.domain)
    return [x for x in S.domain if x == a or any(S.holds(r, a, x) for r in rho.binary)]


def is_bisimulation(A, B, rho, logic, Z):
    if not Z:
        return False
    if {a for a, _ in Z} != set(A.domain) or {b for _, b in Z} != set(B.domain):
        return False
    if logic == GF2:
        for c in rho.constants:
            if (A.constant(c), B.constant(c)) not in Z:
                return False
    for a, b in Z:
        if not partial_iso_check(A, (a,), B, (b,), rho):
            return False
        for a2 in _moves(A, a, rho, logic):
            if not any(
                (a2, b2) in Z and partial_iso_check(A, (a, a2), B, (b, b2), rho)
                for b2 in B.domain
            ):
                return False
        for b2 in _moves(B, b, rho, logic):
            if not any(
                (a2, b2) in Z and partial_iso_check(A, (a, a2), B, (b, b2), rho)
                for a2 in A.domain
            ):
                return False
    return True


def _prune(A, B, rho, logic, pool):
    # drop pairs that fail forth/back even against the whole pool
    while True:
        keep = set()
        for a, b in pool:
            ok = all(
                any((a2, b2) in pool and partial_iso_check(A, (a, a2), B, (b, b2), rho) for b2 in B.domain)
                for a2 in _moves(A, a, rho, logic)
            ) and all(
                any((a2, b2) in pool and partial_iso_check(A, (a, a2), B, (b, b2), rho) for a2 in A.domain)
                for b2 in _moves(B, b, rho, logic)
            )
            if ok:
                keep.add((a, b))
        if keep == pool:
            return pool
        pool = keep


def brute_greatest_bisim(A, B, rho, logic):
    """Largest relation satisfying the definition, by subset enumeration in
    decreasing cardinality over the pruned pool of candidate pairs."""
    pool = {
        (a, b)
        for a in A.domain
        for b in B.domain
        if partial_iso_check(A, (a,), B, (b,), rho)
    }
    pool = _prune(A, B, rho, logic, pool)
    items = sorted(pool)
    for size in range(len(items), 0, -1):
        for combo in combinations(items, size):
            Z = set(combo)
            if is_bisimulation(A, B, rho, logic, Z):
                return frozenset(Z)
    return None


def all_structures(sig: Signature, n: int):
    """Every structure over sig with domain e0..e{n-1} (no constants)."""
    dom = [f"e{i}" for i in range(n)]
    pairs = list(product(dom, repeat=2))
    partitions = _partitions(dom)
    for ubits in product(range(1 << n), repeat=len(sig.unary)):
        unary = {
            p: {dom[i] for i in range(n) if bits >> i & 1}
            for p, bits in zip(sorted(sig.unary), ubits)
        }
        for bbits in product(range(1 << len(pairs)), repeat=len(sig.binary)):
            binary = {
                r: {pairs[i] for i in range(len(pairs)) if bits >> i & 1}
                for r, bits in zip(sorted(sig.binary), bbits)
            }
            for e1, e2 in product(partitions, repeat=2):
                yield Structure(tuple(dom), unary, {**binary, "E1": e1, "E2": e2})


def _partitions(dom):
    out = []

    def go(i, blocks):
        if i == len(dom):
            rel = [(a, b) for blk in blocks for a in blk for b in blk]
            out.append(equivalence_closure(dom, rel))
            return
        for blk in blocks:
            blk.append(dom[i])
            go(i + 1, blocks)
            blk.pop()
        blocks.append([dom[i]])
        go(i + 1, blocks)
        blocks.pop()

    go(0, [])
    return out


def brute_candidates(rho: Signature, max_depth: int, max_size: int):
    """Canonical forms of every raw formula tree up to the bounds."""
    leaves = literals_over(rho)
    by_size = {1: [(f, 0) for f in leaves]}
    for s in range(2, max_size + 1):
        level = []
        for f, d in by_size[s - 1]:
            if d < max_depth:
                for v in "xy":
                    level += [(Forall(v, f), d + 1), (Exists(v, f), d + 1)]
        for s1 in range(1, s - 1):
            s2 = s - 1 - s1
            for f1, d1 in by_size[s1]:
                for f2, d2 in by_size[s2]:
                    level += [(And(f1, f2), max(d1, d2)), (Or(f1, f2), max(d1, d2))]
        by_size[s] = level
    out = {}
    for level in by_size.values():
        for f, _ in level:
            c = canonical(f)
            if free_vars(c) <= {"x"} and canonical_size(c) <= max_size and quantifier_depth(c) <= max_depth:
                out[str(c)] = c
    return out
