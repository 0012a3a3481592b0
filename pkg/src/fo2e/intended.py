"""Finite truncations of the intended models for a solved PCP instance.

A has two disjoint copies of a 3-point R-cycle, each with an S-chain
spelling the solution word.  B has an R-cycle of length 3 * r_window with
a v-chain at every position 6m and a w-chain at every position 6m + 3;
chain points carry letters, position markers and segment markers, and
word segments alternate between E1- and E2-classes.

Universal conjuncts of ~psi are checked only at points that are more
than ``interior_radius`` R/S-steps from a clipped chain end, and whose
E1/E2-classes are; everything else is reported as skipped.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bisim import Refinement, bounded_game
from .modelcheck import Evaluator
from .reduction import PcpInstance, build_phi, marker, neg_psi_groups, rho_of
from .structures import PointedStructure, Structure, equivalence_closure
from .syntax import FO2, Forall, Formula, free_vars, print_formula


class IntendedError(ValueError):
    pass


@dataclass(frozen=True)
class SolutionSpec:
    prefix: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(i) for i in self.prefix))
        object.__setattr__(self, "period", tuple(int(i) for i in self.period))
        if not self.period:
            raise IntendedError("the period must be nonempty")

    def indices(self):
        yield from self.prefix
        while True:
            yield from self.period

    def expand(self, P: PcpInstance, u: str, length: int) -> tuple[str, ...]:
        """First ``length`` letters of u_{i1} u_{i2} ..."""
        out: list[str] = []
        for j in self.indices():
            if len(out) >= length:
                break
            out.extend(P.word(u, j))
        return tuple(out[:length])

    def validate(self, P: PcpInstance, length: int) -> None:
        for i in self.prefix + self.period:
            if not 1 <= i <= P.k:
                raise IntendedError(f"index {i} is outside 1..{P.k}")
        v, w = self.expand(P, "v", length), self.expand(P, "w", length)
        for n, (a, b) in enumerate(zip(v, w)):
            if a != b:
                raise IntendedError(f"the v- and w-words differ at position {n + 1}: {a} vs {b}")

    @classmethod
    def from_json(cls, doc: dict | str | Path) -> SolutionSpec:
        if isinstance(doc, (str, Path)):
            doc = json.loads(Path(doc).read_text())
        return cls(tuple(doc.get("prefix", [])), tuple(doc["period"]))

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "period": list(self.period)}


@dataclass(frozen=True)
class TruncationParams:
    s_depth: int = 12
    r_window: int = 2
    interior_radius: int = 4

    def check(self, P: PcpInstance) -> None:
        longest = max(max(len(v), len(w)) for v, w in P.pairs)
        if self.s_depth < longest:
            raise IntendedError(f"s_depth {self.s_depth} is below the longest word ({longest})")
        if not 0 <= self.interior_radius <= self.s_depth:
            raise IntendedError("interior_radius must lie in 0..s_depth")
        if self.r_window < 2 or self.r_window % 2:
            raise IntendedError("r_window must be even and at least 2")


def build_intended_A(P: PcpInstance, sol: SolutionSpec, params: TruncationParams) -> PointedStructure:
    params.check(P)
    sol.validate(P, params.s_depth)
    word = sol.expand(P, "v", params.s_depth)
    dom: list[str] = []
    unary: dict[str, set[str]] = {a: set() for a in P.alphabet}
    unary.update({"X0": set(), "X1": set(), "X2": set()})
    R, S = set(), set()
    for c in (1, 2):
        cyc = [f"A{c}.r{i}" for i in range(3)]
        dom += cyc
        R |= {(cyc[i], cyc[(i + 1) % 3]) for i in range(3)}
        if c == 1:
            # labels only on the first copy: phi makes X0 unique
            for i in range(3):
                unary[f"X{i}"].add(cyc[i])
        prev = cyc[0]
        for t in range(1, params.s_depth + 1):
            e = f"A{c}.s{t:02d}"
            dom.append(e)
            unary[word[t - 1]].add(e)
            S.add((prev, e))
            prev = e
    A = Structure(tuple(dom), unary, {"R": R, "S": S})
    return PointedStructure(A, ("A1.r0",))


@dataclass
class Chains:
    """Bookkeeping for B: chain element lists and clipped frontier."""

    v: list[list[str]]
    w: list[list[str]]
    frontier: set[str]


def _segments(P: PcpInstance, sol: SolutionSpec, u: str, length: int):
    """(t, j, l, first, last) per chain position 1..length."""
    pos, t = 0, 0
    out = []
    for j in sol.indices():
        t += 1
        word = P.word(u, j)
        for l in range(1, len(word) + 1):
            pos += 1
            if pos > length:
                return out
            out.append((t, j, l, l == 1, l == len(word)))


def build_intended_B(P: PcpInstance, sol: SolutionSpec, params: TruncationParams) -> PointedStructure:
    return build_intended_B_chains(P, sol, params)[0]


def build_intended_B_chains(P: PcpInstance, sol: SolutionSpec, params: TruncationParams):
    params.check(P)
    n = params.s_depth
    sol.validate(P, n)
    width = 3 * params.r_window
    cyc = [f"B.r{i:02d}" for i in range(width)]
    dom = list(cyc)
    unary: dict[str, set[str]] = {}

    def put(p: str, e: str) -> None:
        unary.setdefault(p, set()).add(e)

    R = {(cyc[i], cyc[(i + 1) % width]) for i in range(width)}
    S: set[tuple[str, str]] = set()
    e1: list[tuple[str, str]] = [(cyc[0], c) for c in cyc]
    e2: list[tuple[str, str]] = []
    put("Zv1", cyc[0])
    put("Y1", cyc[1])
    put("Y2", cyc[2])
    put("Zw1", cyc[3])
    put("Zv", cyc[0])
    put("Zw", cyc[3])
    chains = Chains([], [], set())
    word = sol.expand(P, "v", n)
    starts: dict[tuple[int, int], str] = {}
    for m in range(width // 6):
        for u, base in (("v", 6 * m), ("w", 6 * m + 3)):
            root = cyc[base]
            put(f"Z{u}", root)
            seg_start: dict[int, str] = {1: root}
            elems = []
            prev = root
            for pos, (t, j, l, first, last) in enumerate(_segments(P, sol, u, n), 1):
                e = f"B.{u}{m}.{pos:02d}"
                dom.append(e)
                elems.append(e)
                S.add((prev, e))
                put(word[pos - 1], e)
                put(marker(u, j, l), e)
                put(f"Z{u}", e)
                cls = e1 if t % 2 else e2
                cls.append((prev, e))
                if last:
                    put(f"Z{u}{2 if t % 2 else 1}", e)
                    seg_start[t + 1] = e
                prev = e
            chains.frontier.add(prev)
            (chains.v if u == "v" else chains.w).append(elems)
            # start of segment t of both chains lives in one class
            for t, s in seg_start.items():
                other = starts.setdefault((m, t), s)
                if other != s:
                    (e1 if t % 2 else e2).append((other, s))
    B = Structure(
        tuple(dom),
        unary,
        {"R": R, "S": S, "E1": equivalence_closure(dom, e1), "E2": equivalence_closure(dom, e2)},
    )
    return PointedStructure(B, (cyc[0],)), chains


def mutate_letter(B: PointedStructure, element: str, letter: str, alphabet) -> PointedStructure:
    """Copy of B with ``element`` relabelled to ``letter``."""
    S = B.structure
    unary = {p: set(es) for p, es in S.unary.items()}
    for a in alphabet:
        unary.get(a, set()).discard(element)
    unary.setdefault(letter, set()).add(element)
    return PointedStructure(Structure(S.domain, unary, S.binary, S.constants), B.points)


def distances(S: Structure, sources: set[str], rels=("R", "S")) -> dict[str, float]:
    """Undirected distance from the nearest source along ``rels``."""
    adj: dict[str, set[str]] = {d: set() for d in S.domain}
    for r in rels:
        for a, b in S.binary.get(r, ()):
            adj[a].add(b)
            adj[b].add(a)
    dist: dict[str, float] = {d: float("inf") for d in S.domain}
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if dist[b] > dist[a] + 1:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def interior_mask(B: Structure, frontier: set[str], radius: int) -> np.ndarray:
    """Points more than ``radius`` R/S-steps from the frontier whose
    E1/E2-classes are too."""
    dist = distances(B, frontier)
    far = np.array([dist[d] > radius for d in B.domain])
    out = far.copy()
    for e in ("E1", "E2"):
        m = B.binary_matrix(e)
        out &= ~(m & ~far[None, :]).any(axis=1)
    return out


CONVENTIONS = [
    "A: E1 and E2 are the identity; only the first R-cycle copy carries X0/X1/X2",
    "B: the R-chain is closed into a cycle of length 3*r_window instead of a two-sided infinite chain",
    "B: cycle points other than b0..b3 carry no Y/Z markers; all cycle points share one E1-class and have singleton E2-classes",
    "B: segment t of every v-chain and of the matching w-chain share one E1-class (t odd) or E2-class (t even); segment boundaries lie in both",
    "interior: a point is interior iff it and every E1/E2-related point lie more than interior_radius R/S-steps from a clipped chain end; a pair is interior iff both points are",
]


def _instantiate(f: Formula):
    """Split a conjunct into its universally quantified variables and body."""
    vs: list[str] = []
    while isinstance(f, Forall) and f.var not in vs and free_vars(f) <= set(vs):
        vs.append(f.var)
        f = f.body
    return tuple(vs), f


def _check_conjunct(ev: Evaluator, S: Structure, f: Formula, point: str, interior: np.ndarray) -> dict:
    vs, body = _instantiate(f)
    out: dict = {"instantiated": list(vs)}
    i0 = S.index[point]
    if not vs:
        ok = bool(ev.table(body)[i0, 0])
        out.update(checked=1, failures=[] if ok else [[point]], skipped=[])
        return out
    t = ev.table(body)
    dom = S.domain
    if len(vs) == 1:
        vals = t[:, 0] if vs[0] == "x" else t[0, :]
        bad = [[dom[i]] for i in np.nonzero(~vals & interior)[0]]
        skipped = [dom[i] for i in np.nonzero(~interior)[0]]
        out.update(checked=int(interior.sum()), failures=bad, skipped=skipped)
        return out
    # both variables bound: x indexes rows, y columns
    mask = interior[:, None] & interior[None, :]
    bad = [[dom[i], dom[j]] for i, j in zip(*np.nonzero(~t & mask))]
    skipped = [dom[i] for i in np.nonzero(~interior)[0]]
    out.update(checked=int(mask.sum()), failures=bad, skipped=skipped)
    return out


def verify_intended(
    P: PcpInstance,
    sol: SolutionSpec,
    params: TruncationParams,
    k: int,
    *,
    B_override: PointedStructure | None = None,
) -> dict:
    """Check phi on A, the interior conjuncts of ~psi on B and k-round
    games between the points.  Returns a JSON-ready report."""
    pA = build_intended_A(P, sol, params)
    pB, chains = build_intended_B_chains(P, sol, params)
    if B_override is not None:
        pB = B_override
    A, B = pA.structure, pB.structure
    a0, b0 = pA.points[0], pB.points[0]

    phi_ok = Evaluator(A).evaluate(build_phi(P), {"x": a0})

    interior = interior_mask(B, chains.frontier, params.interior_radius)
    ev = Evaluator(B)
    groups = neg_psi_groups(P)
    rows = []
    for idx, (group, f) in enumerate(groups.items()):
        row = {"group": group, "index": idx, "formula": print_formula(f)}
        row.update(_check_conjunct(ev, B, f, b0, interior))
        row["pass"] = not row["failures"]
        rows.append(row)
    neg_ok = all(r["pass"] for r in rows)

    rho = rho_of(P)
    ref = Refinement(A, B, rho, FO2)
    games = {str(r): bounded_game(A, (a0,), B, (b0,), rho, FO2, r, ref) for r in range(1, k + 1)}
    games_ok = all(games.values())

    failed_groups = sorted({r["group"] for r in rows if not r["pass"]})
    return {
        "pass": bool(phi_ok and neg_ok and games_ok),
        "params": {
            "s_depth": params.s_depth,
            "r_window": params.r_window,
            "interior_radius": params.interior_radius,
            "rounds": k,
        },
        "solution": sol.to_json(),
        "sizes": {"A": len(A), "B": len(B)},
        "points": {"A": a0, "B": b0},
        "phi": {"pass": bool(phi_ok)},
        "neg_psi": {
            "pass": neg_ok,
            "failed_groups": failed_groups,
            "conjuncts": rows,
        },
        "games": {"pass": games_ok, "rounds": games},
        "conventions": CONVENTIONS,
    }


def chain_words(B: PointedStructure, P: PcpInstance, chains: list[list[str]]) -> list[str]:
    S = B.structure
    return [
        "".join(next(a for a in P.alphabet if S.holds(a, e)) for e in chain) for chain in chains
    ]


__all__ = [
    "IntendedError",
    "SolutionSpec",
    "TruncationParams",
    "build_intended_A",
    "build_intended_B",
    "verify_intended",
    "mutate_letter",
]
