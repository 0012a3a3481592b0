"""Formulas of FO2 with two equivalence predicates and its guarded variant.

Terms are plain strings: ``"x"`` and ``"y"`` are the only variables, any
other identifier in term position is an individual constant (allowed only
in guarded mode).  Formula nodes are immutable dataclasses and compare
structurally.

Concrete syntax (ASCII)::

    formula := 'true' | 'false' | atom | '~' formula
             | '(' formula ('&' | '|' | '->') formula ')'
             | ('forall' | 'exists') var '.' formula
    atom    := ident '(' term (',' term)? ')' | term '=' term

The parser is a little more liberal than the grammar: outer parentheses of
binary formulas may be dropped (``~`` binds strongest, then ``&``, ``|``,
and right-associative ``->``; quantifier bodies extend as far right as
possible) and ``(f)`` may be used for grouping.  ``forall x,y . f`` expands
to nested quantifiers.  The printer always emits the canonical fully
parenthesised form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

VARIABLES = ("x", "y")
EQUIVALENCES = ("E1", "E2")

FO2 = "fo2"
GF2 = "gf2"
MODES = (FO2, GF2)

KEYWORDS = frozenset({"forall", "exists", "true", "false"})


def other(var: str) -> str:
    """The variable swap used by the two-variable recursions."""
    return "y" if var == "x" else "x"


def is_var(term: str) -> bool:
    return term in VARIABLES


class FormulaError(ValueError):
    """Base class for malformed formulas."""


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class VariableError(FormulaSyntaxError):
    pass


class ArityError(FormulaError):
    pass


class ConstantError(FormulaSyntaxError):
    pass


# ---------------------------------------------------------------- AST


class Formula:
    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __rshift__(self, other: Formula) -> Formula:
        return Implies(self, other)

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bottom(Formula):
    pass


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    pred: str
    args: tuple[str, ...]

    def __post_init__(self):
        if len(self.args) not in (1, 2):
            raise ArityError(f"{self.pred}: atoms take one or two terms")
        if self.pred in EQUIVALENCES and len(self.args) != 2:
            raise ArityError(f"{self.pred} is a binary equivalence predicate")


@dataclass(frozen=True, slots=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: str
    body: Formula


Binary = (And, Or, Implies)
Quantifier = (Forall, Exists)


def P(pred: str, *args: str) -> Atom:
    """Shorthand atom constructor, ``P("R", "x", "y")``."""
    return Atom(pred, tuple(args))


def _nest(op, fs: list[Formula]) -> Formula:
    # first operand stays leftmost (guards rely on it); the rest is
    # balanced so long chains keep the tree shallow
    if len(fs) <= 2:
        return fs[0] if len(fs) == 1 else op(fs[0], fs[1])
    return op(fs[0], _balance(op, fs[1:]))


def _balance(op, fs: list[Formula]) -> Formula:
    if len(fs) <= 2:
        return _nest(op, fs)
    mid = len(fs) // 2
    return op(_balance(op, fs[:mid]), _balance(op, fs[mid:]))


def conj(*fs: Formula) -> Formula:
    """Conjunction of ``fs`` with ``fs[0]`` as the left operand of the
    top node; ``conj()`` is ``true``."""
    return _nest(And, list(fs)) if fs else TRUE


def disj(*fs: Formula) -> Formula:
    return _nest(Or, list(fs)) if fs else FALSE


def forall(vars_: str, body: Formula) -> Formula:
    """``forall("xy", f)`` is ``forall x . forall y . f``."""
    for v in reversed(vars_):
        body = Forall(v, body)
    return body


def exists(vars_: str, body: Formula) -> Formula:
    for v in reversed(vars_):
        body = Exists(v, body)
    return body


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten a tree of conjunctions into its top-level conjuncts."""
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, And):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def disjuncts(f: Formula) -> list[Formula]:
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Or):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Binary):
        return (f.left, f.right)
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, Quantifier):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal (each occurrence once)."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def terms_of(f: Formula) -> tuple[str, ...]:
    if isinstance(f, Atom):
        return f.args
    if isinstance(f, Eq):
        return (f.left, f.right)
    return ()


def free_vars(f: Formula) -> frozenset[str]:
    memo: dict[int, frozenset[str]] = {}

    def go(g: Formula) -> frozenset[str]:
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, (Atom, Eq)):
            r = frozenset(t for t in terms_of(g) if is_var(t))
        elif isinstance(g, Quantifier):
            r = go(g.body) - {g.var}
        else:
            r = frozenset().union(*(go(c) for c in children(g)))
        memo[key] = r
        return r

    return go(f)


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, Quantifier):
        return 1 + quantifier_depth(f.body)
    return max((quantifier_depth(c) for c in children(f)), default=0)


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def constants_of(f: Formula) -> frozenset[str]:
    return frozenset(t for g in subformulas(f) for t in terms_of(g) if not is_var(t))


def mode_of(f: Formula) -> str:
    """Guarded mode iff the formula mentions a constant."""
    return GF2 if constants_of(f) else FO2


def rename(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename free variables; used to swap x and y in subformulas."""

    def term(t: str, bound: frozenset[str]) -> str:
        return t if t in bound else mapping.get(t, t)

    def go(g: Formula, bound: frozenset[str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(term(t, bound) for t in g.args))
        if isinstance(g, Eq):
            return Eq(term(g.left, bound), term(g.right, bound))
        if isinstance(g, Not):
            return Not(go(g.arg, bound))
        if isinstance(g, Binary):
            return type(g)(go(g.left, bound), go(g.right, bound))
        if isinstance(g, Quantifier):
            return type(g)(g.var, go(g.body, bound | {g.var}))
        return g

    return go(f, frozenset())


def swap_vars(f: Formula) -> Formula:
    """Simultaneously rename every x to y and y to x (bound ones included)."""
    sw = {"x": "y", "y": "x"}

    def go(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(sw.get(t, t) for t in g.args))
        if isinstance(g, Eq):
            return Eq(sw.get(g.left, g.left), sw.get(g.right, g.right))
        if isinstance(g, Not):
            return Not(go(g.arg))
        if isinstance(g, Binary):
            return type(g)(go(g.left), go(g.right))
        if isinstance(g, Quantifier):
            return type(g)(sw[g.var], go(g.body))
        return g

    return go(f)


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class Signature:
    """Non-logical symbols, split by kind.  E1/E2 count as binary."""

    unary: frozenset[str] = frozenset()
    binary: frozenset[str] = frozenset()
    constants: frozenset[str] = frozenset()

    def __post_init__(self):
        for name in ("unary", "binary", "constants"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        clash = (
            (self.unary & self.binary)
            | (self.unary & self.constants)
            | (self.binary & self.constants)
        )
        if clash:
            raise ArityError(f"symbols used with two kinds: {sorted(clash)}")
        bad = (self.unary | self.constants) & set(EQUIVALENCES)
        if bad:
            raise ArityError(f"{sorted(bad)} must be binary")

    @property
    def equivalences(self) -> frozenset[str]:
        return self.binary & frozenset(EQUIVALENCES)

    @property
    def symbols(self) -> frozenset[str]:
        return self.unary | self.binary | self.constants

    def __and__(self, other: Signature) -> Signature:
        return Signature(
            self.unary & other.unary,
            self.binary & other.binary,
            self.constants & other.constants,
        )

    def __or__(self, other: Signature) -> Signature:
        return Signature(
            self.unary | other.unary,
            self.binary | other.binary,
            self.constants | other.constants,
        )

    def __le__(self, other: Signature) -> bool:
        return (
            self.unary <= other.unary
            and self.binary <= other.binary
            and self.constants <= other.constants
        )

    def __len__(self) -> int:
        return len(self.symbols)

    def to_json(self) -> dict:
        return {
            "unary": sorted(self.unary),
            "binary": sorted(self.binary),
            "constants": sorted(self.constants),
        }

    @classmethod
    def from_json(cls, doc: dict) -> Signature:
        return cls(
            frozenset(doc.get("unary", ())),
            frozenset(doc.get("binary", ())),
            frozenset(doc.get("constants", ())),
        )


def signature_of(f: Formula) -> Signature:
    """Exactly the predicate and constant symbols occurring in ``f``."""
    unary, binary = set(), set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            (unary if len(g.args) == 1 else binary).add(g.pred)
    return Signature(frozenset(unary), frozenset(binary), constants_of(f))


# ---------------------------------------------------------------- guardedness


@dataclass(frozen=True)
class GuardVerdict:
    guarded: bool
    offending: Formula | None = None

    def __bool__(self) -> bool:
        return self.guarded


def _is_guard(alpha: Formula, qvar: str, body: Formula) -> bool:
    if not isinstance(alpha, (Atom, Eq)):
        return False
    gvars = {t for t in terms_of(alpha) if is_var(t)}
    return qvar in gvars and free_vars(body) <= gvars


def check_guarded(f: Formula) -> GuardVerdict:
    """Every quantifier must have the shape forall v (guard -> ...) or
    exists v (guard & ...), where the guard atom mentions v and every free
    variable of the quantified body.  A bare atom body counts as
    ``guard & true``.  Reports the outermost offending quantifier."""
    for g in subformulas(f):
        if isinstance(g, Forall):
            b = g.body
            if isinstance(b, Implies) and _is_guard(b.left, g.var, b):
                continue
            return GuardVerdict(False, g)
        if isinstance(g, Exists):
            b = g.body
            if isinstance(b, And) and _is_guard(b.left, g.var, b):
                continue
            if isinstance(b, (Atom, Eq)) and _is_guard(b, g.var, b):
                continue
            return GuardVerdict(False, g)
    return GuardVerdict(True)


# ---------------------------------------------------------------- printing


def _open_right(f: Formula) -> bool:
    # a quantifier body would swallow a following binary operator
    while isinstance(f, Not):
        f = f.arg
    return isinstance(f, Quantifier)


_OPS = {And: "&", Or: "|", Implies: "->"}


def print_formula(f: Formula) -> str:
    out: list[str] = []

    def go(g: Formula) -> None:
        if isinstance(g, Top):
            out.append("true")
        elif isinstance(g, Bottom):
            out.append("false")
        elif isinstance(g, Atom):
            out.append(f"{g.pred}({','.join(g.args)})")
        elif isinstance(g, Eq):
            out.append(f"{g.left}={g.right}")
        elif isinstance(g, Not):
            out.append("~")
            go(g.arg)
        elif isinstance(g, Binary):
            out.append("(")
            if _open_right(g.left):
                out.append("(")
                go(g.left)
                out.append(")")
            else:
                go(g.left)
            out.append(f" {_OPS[type(g)]} ")
            go(g.right)
            out.append(")")
        elif isinstance(g, Quantifier):
            out.append("forall " if isinstance(g, Forall) else "exists ")
            out.append(g.var)
            out.append(" . ")
            go(g.body)
        else:
            raise TypeError(f"not a formula: {g!r}")

    go(f)
    return "".join(out)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>->|[~&|().,=]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = "ident" if m.group("ident") else "op"
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, mode: str):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.text = text
        self.mode = mode
        self.tokens = _tokenize(text)
        self.i = 0
        self.arity: dict[str, int] = {}
        self.constants: set[str] = set()

    # helpers
    def peek(self, k: int = 0) -> tuple[str, str, int]:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok=None, cls=FormulaSyntaxError):
        tok = tok or self.peek()
        raise cls(msg, tok[2], self.text)

    def expect(self, value: str) -> None:
        tok = self.next()
        if tok[1] != value or tok[0] == "ident" and value in "().,=~&|":
            self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)

    def at(self, value: str) -> bool:
        kind, v, _ = self.peek()
        return kind == "op" and v == value

    # grammar
    def parse(self) -> Formula:
        f = self.implication()
        if self.peek()[0] != "eof":
            self.error(f"unexpected {self.peek()[1]!r}")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.next()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.at("|"):
            self.next()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.at("&"):
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, v, pos = self.peek()
        if kind == "op" and v == "~":
            self.next()
            return Not(self.unary())
        if kind == "ident" and v in ("forall", "exists"):
            self.next()
            vars_ = [self.variable()]
            while self.at(","):
                self.next()
                vars_.append(self.variable())
            self.expect(".")
            body = self.implication()
            q = Forall if v == "forall" else Exists
            for var in reversed(vars_):
                body = q(var, body)
            return body
        if kind == "op" and v == "(":
            self.next()
            inner = self.implication()
            self.expect(")")
            return inner
        return self.atom()

    def variable(self) -> str:
        tok = self.next()
        if tok[0] != "ident" or tok[1] in KEYWORDS:
            self.error("expected a variable", tok)
        if tok[1] not in VARIABLES:
            self.error(
                f"only the variables x and y are allowed, found {tok[1]!r}",
                tok,
                VariableError,
            )
        return tok[1]

    def term(self) -> str:
        tok = self.next()
        if tok[0] != "ident" or tok[1] in KEYWORDS:
            self.error("expected a term", tok)
        name = tok[1]
        if name in VARIABLES:
            return name
        if self.mode == FO2:
            self.error(
                f"{name!r} is not a variable; constants need guarded mode",
                tok,
                ConstantError,
            )
        self.constants.add(name)
        return name

    def declare(self, pred: str, arity: int, tok) -> None:
        known = self.arity.setdefault(pred, arity)
        if known != arity:
            raise ArityError(
                f"{pred} used with arity {known} and {arity} (position {tok[2]})"
            )

    def atom(self) -> Formula:
        kind, v, pos = self.peek()
        if kind == "ident" and v == "true":
            self.next()
            return TRUE
        if kind == "ident" and v == "false":
            self.next()
            return FALSE
        if kind != "ident":
            self.error(f"unexpected {v or 'end of input'!r}")
        # predicate application or equality between terms
        nxt = self.peek(1)
        if nxt[0] == "op" and nxt[1] == "(":
            tok = self.next()
            pred = tok[1]
            if pred in VARIABLES or pred in KEYWORDS:
                self.error(f"{pred!r} cannot be a predicate", tok)
            self.expect("(")
            args = [self.term()]
            if self.at(","):
                self.next()
                args.append(self.term())
            self.expect(")")
            if pred in EQUIVALENCES and len(args) != 2:
                raise ArityError(f"{pred} is binary (position {tok[2]})")
            self.declare(pred, len(args), tok)
            return Atom(pred, tuple(args))
        left = self.term()
        self.expect("=")
        right = self.term()
        return Eq(left, right)


def parse_formula(text: str, mode: str = FO2) -> Formula:
    """Parse ``text``; raises a ``FormulaError`` subclass on bad input."""
    p = _Parser(text, mode)
    f = p.parse()
    clash = set(p.arity) & p.constants
    if clash:
        raise ArityError(f"names used as predicate and constant: {sorted(clash)}")
    return f


def parse_many(lines: Iterable[str], mode: str = FO2) -> list[Formula]:
    return [parse_formula(s, mode) for s in lines if s.strip()]
