"""Boolean expressions over event and proposition symbols.

Expressions are immutable trees built from :class:`Const`, :class:`Sym`,
:class:`Not`, :class:`And` and :class:`Or`. Equality is syntactic.

Concrete syntax: ``!`` binds tighter than ``&``, which binds tighter than
``|``; ``true``/``false`` are constants.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping, Union

from .errors import CescError, ParseError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
DEFAULT_SAT_CAP = 16


class SymbolKind(enum.Enum):
    EVENT = "event"
    PROP = "prop"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: SymbolKind

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise CescError(f"bad symbol name {self.name!r}", code="E_BAD_NAME")


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Not:
    arg: Expr


@dataclass(frozen=True)
class And:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or:
    left: Expr
    right: Expr


Expr = Union[Const, Sym, Not, And, Or]

TRUE = Const(True)
FALSE = Const(False)


def conj(parts: Iterable[Expr]) -> Expr:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    parts = list(parts)
    if not parts:
        return TRUE
    return reduce(And, parts)


def disj(parts: Iterable[Expr]) -> Expr:
    parts = list(parts)
    if not parts:
        return FALSE
    return reduce(Or, parts)


def evaluate(e: Expr, v: Mapping[str, bool]) -> bool:
    """Evaluate ``e`` under valuation ``v``.

    Raises ``E_UNDECLARED_SYMBOL`` when a leaf is outside the valuation's
    domain.
    """
    if isinstance(e, Sym):
        try:
            return bool(v[e.name])
        except KeyError:
            raise CescError(f"symbol {e.name!r} not in valuation",
                            code="E_UNDECLARED_SYMBOL") from None
    if isinstance(e, And):
        return evaluate(e.left, v) and evaluate(e.right, v)
    if isinstance(e, Or):
        return evaluate(e.left, v) or evaluate(e.right, v)
    if isinstance(e, Not):
        return not evaluate(e.arg, v)
    if isinstance(e, Const):
        return e.value
    raise TypeError(f"not an expression: {e!r}")


# Kept under the short name too; ``eval`` itself is a builtin.
eval_expr = evaluate


def support(e: Expr) -> frozenset[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Sym):
            out.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Or)):
            stack.append(node.left)
            stack.append(node.right)
    return frozenset(out)


def valuations(universe: Iterable[str]) -> Iterator[dict[str, bool]]:
    """All ``2**len(universe)`` valuations, in a fixed order (sorted names, binary count)."""
    names = sorted(universe)
    for bits in itertools.product((False, True), repeat=len(names)):
        yield dict(zip(names, bits))


def satisfiable(e: Expr, universe: Iterable[str], cap: int = DEFAULT_SAT_CAP) -> bool:
    universe = frozenset(universe)
    if len(universe) > cap:
        raise CescError(f"universe of {len(universe)} symbols exceeds cap {cap}",
                        code="E_UNIVERSE_TOO_LARGE")
    missing = support(e) - universe
    if missing:
        raise CescError(f"symbols {sorted(missing)} outside universe",
                        code="E_UNDECLARED_SYMBOL")
    return any(evaluate(e, v) for v in valuations(universe))


# -- concrete syntax ---------------------------------------------------------

_PREC = {Or: 1, And: 2}


def format_expr(e: Expr) -> str:
    """Print with the minimum parentheses that still re-parse to the same tree."""
    if isinstance(e, Const):
        return "true" if e.value else "false"
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Not):
        inner = format_expr(e.arg)
        if isinstance(e.arg, (And, Or)):
            inner = f"({inner})"
        return f"!{inner}"
    op = " & " if isinstance(e, And) else " | "
    prec = _PREC[type(e)]
    left = format_expr(e.left)
    if isinstance(e.left, (And, Or)) and _PREC[type(e.left)] < prec:
        left = f"({left})"
    right = format_expr(e.right)
    # operators are left-associative, so an equal-precedence right child needs parens
    if isinstance(e.right, (And, Or)) and _PREC[type(e.right)] <= prec:
        right = f"({right})"
    return left + op + right


_TOKEN_RE = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


class _ExprParser:
    def __init__(self, text: str, line: int | None = None, col0: int = 0):
        self.toks: list[tuple[str, int]] = []
        for m in _TOKEN_RE.finditer(text):
            if m.group(1):
                self.toks.append((m.group(1), m.start(1)))
            elif m.group(2) and not m.group(2).isspace():
                self.toks.append((m.group(2), m.start(2)))
        self.pos = 0
        self.line = line
        self.col0 = col0

    def error(self, msg: str) -> ParseError:
        col = self.toks[self.pos][1] if self.pos < len(self.toks) else None
        return ParseError(msg, line=self.line,
                          col=None if col is None else self.col0 + col + 1)

    def peek(self) -> str | None:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self) -> Expr:
        e = self.parse_or()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek()!r} in expression")
        return e

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.peek() == "|":
            self.take()
            e = Or(e, self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_not()
        while self.peek() == "&":
            self.take()
            e = And(e, self.parse_not())
        return e

    def parse_not(self) -> Expr:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.parse_not())
        if tok == "(":
            self.take()
            e = self.parse_or()
            if self.take() != ")":
                self.pos -= 1
                raise self.error("expected ')'")
            return e
        tok = self.take()
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if IDENT_RE.match(tok):
            return Sym(tok)
        self.pos -= 1
        raise self.error(f"unexpected {tok!r} in expression")


def parse_expr(text: str, line: int | None = None, col0: int = 0) -> Expr:
    return _ExprParser(text, line, col0).parse()
