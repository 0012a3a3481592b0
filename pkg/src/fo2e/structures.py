"""Finite structures with E1/E2 interpreted as equivalence relations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .syntax import EQUIVALENCES, Signature


class StructureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Structure:
    """A finite structure over string element ids.

    The domain is kept in lexicographic order.  Predicates that are not
    listed are read as empty.  If E1 or E2 is missing it is interpreted
    as the identity; :func:`load_structure` is stricter and insists on
    both being present in the document.
    """

    domain: tuple[str, ...]
    unary: Mapping[str, frozenset[str]] = field(default_factory=dict)
    binary: Mapping[str, frozenset[tuple[str, str]]] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        dom = list(self.domain)
        if not dom:
            raise StructureError("the domain must be nonempty")
        if len(set(dom)) != len(dom):
            dup = sorted({d for d in dom if dom.count(d) > 1})
            raise StructureError(f"duplicate element ids: {dup}")
        domset = set(dom)
        unary = {p: frozenset(es) for p, es in self.unary.items()}
        binary = {r: frozenset(tuple(e) for e in ps) for r, ps in self.binary.items()}
        for e in EQUIVALENCES:
            if e not in binary:
                binary[e] = frozenset((d, d) for d in dom)
        clash = (set(unary) & set(binary)) | (
            set(self.constants) & (set(unary) | set(binary))
        )
        if clash:
            raise StructureError(f"duplicate symbol names: {sorted(clash)}")
        for p, es in unary.items():
            bad = es - domset
            if bad:
                raise StructureError(f"{p} mentions unknown elements {sorted(bad)}")
        for r, ps in binary.items():
            for pair in ps:
                if len(pair) != 2 or not set(pair) <= domset:
                    raise StructureError(f"{r} mentions unknown pair {list(pair)}")
        for c, e in self.constants.items():
            if e not in domset:
                raise StructureError(f"constant {c} names unknown element {e!r}")
        for e in EQUIVALENCES:
            check_equivalence(e, dom, binary[e])
        object.__setattr__(self, "domain", tuple(sorted(dom)))
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "binary", binary)
        object.__setattr__(self, "constants", dict(self.constants))

    def __len__(self) -> int:
        return len(self.domain)

    @cached_property
    def index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.domain)}

    def unary_vector(self, pred: str) -> np.ndarray:
        return self._unary_vectors.get(pred, self._empty_vec)

    def binary_matrix(self, pred: str) -> np.ndarray:
        return self._binary_matrices.get(pred, self._empty_mat)

    @cached_property
    def _empty_vec(self) -> np.ndarray:
        return np.zeros(len(self), dtype=bool)

    @cached_property
    def _empty_mat(self) -> np.ndarray:
        return np.zeros((len(self), len(self)), dtype=bool)

    @cached_property
    def _unary_vectors(self) -> dict[str, np.ndarray]:
        out = {}
        for p, es in self.unary.items():
            v = np.zeros(len(self), dtype=bool)
            v[[self.index[e] for e in es]] = True
            out[p] = v
        return out

    @cached_property
    def _binary_matrices(self) -> dict[str, np.ndarray]:
        out = {}
        for r, ps in self.binary.items():
            m = np.zeros((len(self), len(self)), dtype=bool)
            for a, b in ps:
                m[self.index[a], self.index[b]] = True
            out[r] = m
        return out

    def holds(self, pred: str, *elems: str) -> bool:
        if len(elems) == 1:
            return elems[0] in self.unary.get(pred, ())
        return tuple(elems) in self.binary.get(pred, ())

    def constant(self, name: str) -> str:
        try:
            return self.constants[name]
        except KeyError:
            raise StructureError(f"constant {name!r} is not interpreted") from None

    def classes(self, pred: str) -> list[frozenset[str]]:
        """Equivalence classes of E1 or E2, in domain order."""
        seen, out = set(), []
        rel = self.binary[pred]
        for d in self.domain:
            if d in seen:
                continue
            cls = frozenset(e for e in self.domain if (d, e) in rel)
            seen |= cls
            out.append(cls)
        return out

    def signature(self) -> Signature:
        return Signature(
            frozenset(self.unary), frozenset(self.binary), frozenset(self.constants)
        )

    def to_json(self) -> dict:
        return {
            "domain": list(self.domain),
            "unary": {p: sorted(es) for p, es in sorted(self.unary.items())},
            "binary": {
                r: [list(p) for p in sorted(ps)] for r, ps in sorted(self.binary.items())
            },
            "constants": dict(sorted(self.constants.items())),
        }

    def relabel(self, mapping: Mapping[str, str]) -> Structure:
        return Structure(
            tuple(mapping[d] for d in self.domain),
            {p: {mapping[e] for e in es} for p, es in self.unary.items()},
            {
                r: {(mapping[a], mapping[b]) for a, b in ps}
                for r, ps in self.binary.items()
            },
            {c: mapping[e] for c, e in self.constants.items()},
        )


@dataclass(frozen=True)
class PointedStructure:
    structure: Structure
    points: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not 1 <= len(self.points) <= 2:
            raise StructureError("a pointed structure has one or two points")
        for p in self.points:
            if p not in self.structure.index:
                raise StructureError(f"point {p!r} is not in the domain")


def check_equivalence(name: str, domain: Sequence[str], rel: frozenset) -> None:
    """Raise with a witness if ``rel`` is not an equivalence on ``domain``."""
    for d in domain:
        if (d, d) not in rel:
            raise StructureError(f"{name} is not reflexive: missing ({d}, {d})")
    for a, b in sorted(rel):
        if (b, a) not in rel:
            raise StructureError(f"{name} is not symmetric: ({a}, {b}) without ({b}, {a})")
    succ: dict[str, set[str]] = {}
    for a, b in rel:
        succ.setdefault(a, set()).add(b)
    for a, b in sorted(rel):
        for c in sorted(succ.get(b, ())):
            if (a, c) not in rel:
                raise StructureError(
                    f"{name} is not transitive: ({a}, {b}), ({b}, {c}) without ({a}, {c})"
                )


def equivalence_closure(domain: Iterable[str], pairs: Iterable) -> frozenset:
    parent = {d: d for d in domain}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[str, list[str]] = {}
    for d in parent:
        groups.setdefault(find(d), []).append(d)
    return frozenset(p for g in groups.values() for p in product(g, repeat=2))


def load_structure(doc: dict | str | Path, *, close_equivalences: bool = False) -> Structure:
    """Build a structure from its JSON document (or a path to one)."""
    if isinstance(doc, (str, Path)):
        doc = json.loads(Path(doc).read_text())
    if not isinstance(doc, dict) or "domain" not in doc:
        raise StructureError("structure document needs a 'domain' list")
    domain = [str(d) for d in doc["domain"]]
    if len(set(domain)) != len(domain):
        dup = sorted({d for d in domain if domain.count(d) > 1})
        raise StructureError(f"duplicate element ids: {dup}")
    binary_doc = doc.get("binary", {})
    missing = [e for e in EQUIVALENCES if e not in binary_doc]
    if missing and not close_equivalences:
        raise StructureError(f"{' and '.join(missing)} must appear under 'binary'")
    unary = {p: frozenset(map(str, es)) for p, es in doc.get("unary", {}).items()}
    binary = {}
    for r, pairs in binary_doc.items():
        ps = set()
        for pair in pairs:
            if len(pair) != 2:
                raise StructureError(f"{r}: pairs must have two entries, got {pair}")
            ps.add((str(pair[0]), str(pair[1])))
        binary[r] = frozenset(ps)
    if close_equivalences:
        known = set(domain)
        for e in EQUIVALENCES:
            ps = binary.get(e, frozenset())
            dangling = {x for p in ps for x in p} - known
            if dangling:
                raise StructureError(f"{e} mentions unknown elements {sorted(dangling)}")
            binary[e] = equivalence_closure(domain, ps)
    constants = {str(c): str(e) for c, e in doc.get("constants", {}).items()}
    return Structure(tuple(domain), unary, binary, constants)


def dump_structure(s: Structure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(s.to_json(), indent=2, sort_keys=True) + "\n")


def partial_iso_check(
    A: Structure, ta: Sequence[str], B: Structure, tb: Sequence[str], rho: Signature
) -> bool:
    """Is the coordinate map ``ta -> tb`` a partial rho-isomorphism?"""
    ta, tb = tuple(ta), tuple(tb)
    if len(ta) != len(tb) or not 1 <= len(ta) <= 2:
        raise ValueError("tuples must have the same length, 1 or 2")
    n = len(ta)
    for i in range(n):
        for j in range(n):
            if (ta[i] == ta[j]) != (tb[i] == tb[j]):
                return False
    for p in rho.unary:
        for i in range(n):
            if A.holds(p, ta[i]) != B.holds(p, tb[i]):
                return False
    for r in rho.binary:
        for i in range(n):
            for j in range(n):
                if A.holds(r, ta[i], ta[j]) != B.holds(r, tb[i], tb[j]):
                    return False
    for c in rho.constants:
        ca, cb = A.constant(c), B.constant(c)
        for i in range(n):
            if (ta[i] == ca) != (tb[i] == cb):
                return False
    return True


def disjoint_union(
    A: Structure, B: Structure, tags: tuple[str, str] = ("A", "B")
) -> tuple[Structure, dict[str, str], dict[str, str]]:
    """Tagged disjoint union; constants keep the left interpretation.

    Returns the union and the renaming maps for both sides.
    """
    ma = {d: f"{tags[0]}/{d}" for d in A.domain}
    mb = {d: f"{tags[1]}/{d}" for d in B.domain}
    unary = {}
    for p in set(A.unary) | set(B.unary):
        unary[p] = {ma[e] for e in A.unary.get(p, ())} | {mb[e] for e in B.unary.get(p, ())}
    binary = {}
    for r in set(A.binary) | set(B.binary):
        binary[r] = {(ma[a], ma[b]) for a, b in A.binary.get(r, ())} | {
            (mb[a], mb[b]) for a, b in B.binary.get(r, ())
        }
    constants = {c: mb[e] for c, e in B.constants.items()}
    constants.update({c: ma[e] for c, e in A.constants.items()})
    union = Structure(tuple(ma.values()) + tuple(mb.values()), unary, binary, constants)
    return union, ma, mb
