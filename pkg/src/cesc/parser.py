"""Textual ``.cesc`` syntax: tokenizer, recursive-descent parser, printer.

Example::

    events req, ack;
    props busy;
    chart H on c1 ticks 2 {
      @0 master!req;
      @1 [!busy]: slave!ack;
      arrow req -> ack;
    }

See ``docs/dsl.md`` for the full grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .chart import (
    Alt,
    AsyncPar,
    CausalityArrow,
    ChartExpr,
    CrossArrow,
    EventOccurrence,
    Impl,
    Leaf,
    Loop,
    Mode,
    OccRef,
    Par,
    Polarity,
    Scesc,
    Seq,
    SpecFile,
    SymbolTable,
    label,
    validate,
)
from .errors import CescError, ParseError, ValidationError
from .expr import And, Expr, Not, Or, Sym, TRUE, FALSE, format_expr

KEYWORDS = {
    "events", "props", "clocks", "instances", "mode", "chart", "on", "ticks", "arrow",
    "absent", "compose", "top", "seq", "par", "alt", "loop", "implies", "async", "pad",
    "true", "false", "detect", "assert",
}

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>[0-9]+)|(?P<arrow>->)|(?P<punct>[@\[\]:;,{}()!&|.*=])|(?P<bad>.)"
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'int', 'punct', 'eof'
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            continue
        elif kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r}", line=line, col=col)
        else:
            toks.append(Token("punct" if kind == "arrow" else kind, m.group(), line, col))
    toks.append(Token("eof", "", line, 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.events: list[str] = []
        self.props: list[str] = []
        self.clocks: list[str] | None = None
        self.instances: list[str] | None = None
        self.mode: Mode | None = None
        self.charts: dict[str, Scesc] = {}
        self.raw_composites: dict[str, tuple] = {}
        self.raw_top: tuple | None = None
        self.names_seen: dict[str, int] = {}

    # -- token helpers
    def peek(self, offset: int = 0) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None, code: str | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(msg, code=code, line=tok.line, col=tok.col)

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "ident") and tok.value == value

    def expect(self, value: str) -> Token:
        if not self.at(value):
            got = self.peek().value or "end of file"
            raise self.error(f"expected {value!r}, got {got!r}")
        return self.advance()

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.value in KEYWORDS:
            raise self.error(f"expected {what}, got {tok.value or 'end of file'!r}")
        return self.advance()

    def integer(self) -> int:
        tok = self.peek()
        if tok.kind != "int":
            raise self.error(f"expected integer, got {tok.value or 'end of file'!r}")
        self.advance()
        return int(tok.value)

    def ident_list(self) -> list[Token]:
        out = [self.ident()]
        while self.at(","):
            self.advance()
            out.append(self.ident())
        self.expect(";")
        return out

    def declare(self, tok: Token) -> None:
        if tok.value in self.names_seen:
            raise self.error(f"{tok.value} already declared on line {self.names_seen[tok.value]}",
                             tok, code="E_DUPLICATE_NAME")
        self.names_seen[tok.value] = tok.line

    # -- top level
    def parse(self) -> SpecFile:
        while self.peek().kind != "eof":
            tok = self.peek()
            if self.at("events") or self.at("props"):
                self.advance()
                target = self.events if tok.value == "events" else self.props
                for t in self.ident_list():
                    self.declare(t)
                    target.append(t.value)
            elif self.at("clocks") or self.at("instances"):
                self.advance()
                names = [t.value for t in self.ident_list()]
                if tok.value == "clocks":
                    self.clocks = (self.clocks or []) + names
                else:
                    self.instances = (self.instances or []) + names
            elif self.at("mode"):
                self.advance()
                if self.at("detect") or self.at("assert"):
                    self.mode = Mode(self.advance().value)
                else:
                    raise self.error("mode must be 'detect' or 'assert'")
                self.expect(";")
            elif self.at("chart"):
                self.parse_chart()
            elif self.at("compose"):
                self.advance()
                name = self.ident("composite name")
                self.declare(name)
                self.expect("=")
                self.raw_composites[name.value] = self.parse_cexpr()
                self.expect(";")
            elif self.at("top"):
                if self.raw_top is not None:
                    raise self.error("second 'top' statement", code="E_DUPLICATE_NAME")
                self.advance()
                self.raw_top = self.parse_cexpr()
                self.expect(";")
            else:
                raise self.error(f"unexpected {tok.value!r}")
        return self.finish()

    def parse_chart(self) -> None:
        start = self.expect("chart")
        name = self.ident("chart name")
        self.declare(name)
        self.expect("on")
        clock = self.ident("clock name").value
        self.expect("ticks")
        n = self.integer()
        self.expect("{")
        occs: list[EventOccurrence] = []
        raw_arrows: list[tuple[Token, str, int | None, str, int | None]] = []
        while not self.at("}"):
            if self.at("@"):
                self.advance()
                tick = self.integer()
                occs.append(self.parse_occurrence(tick))
                while self.at(","):
                    self.advance()
                    occs.append(self.parse_occurrence(tick))
                self.expect(";")
            elif self.at("arrow"):
                tok = self.advance()
                src, stick = self.parse_endpoint()
                self.expect("->")
                dst, dtick = self.parse_endpoint()
                self.expect(";")
                raw_arrows.append((tok, src, stick, dst, dtick))
            else:
                raise self.error(f"expected '@k', 'arrow' or '}}', got {self.peek().value!r}")
        self.expect("}")
        arrows = []
        for tok, src, stick, dst, dtick in raw_arrows:
            refs = []
            for ev, tick in ((src, stick), (dst, dtick)):
                if tick is None:
                    ticks = sorted({o.tick for o in occs
                                    if o.event == ev and o.polarity is Polarity.PRESENT})
                    if len(ticks) != 1:
                        raise self.error(f"arrow endpoint {ev} matches {len(ticks)} present "
                                         "occurrences; give a tick with @", tok,
                                         code="E_ARROW_ENDPOINT")
                    tick = ticks[0]
                refs.append(OccRef(ev, tick))
            arrows.append(CausalityArrow(refs[0], refs[1], line=tok.line))
        self.charts[name.value] = Scesc(name.value, clock, n, tuple(occs), tuple(arrows),
                                        line=start.line)

    def parse_endpoint(self) -> tuple[str, int | None]:
        ev = self.ident("event name")
        self.check_event(ev)
        tick = None
        if self.at("@"):
            self.advance()
            tick = self.integer()
        return ev.value, tick

    def check_event(self, tok: Token) -> None:
        if tok.value in self.props:
            raise self.error(f"{tok.value} is a proposition, not an event", tok, code="E_NOT_EVENT")
        if tok.value not in self.events:
            raise self.error(f"undeclared event {tok.value}", tok, code="E_UNDECLARED_SYMBOL")

    def parse_occurrence(self, tick: int) -> EventOccurrence:
        first = self.peek()
        guard = None
        if self.at("["):
            self.advance()
            guard = self.parse_or()
            self.expect("]")
            self.expect(":")
        polarity = Polarity.PRESENT
        if self.at("absent"):
            self.advance()
            polarity = Polarity.ABSENT
        instance = None
        tok = self.ident("event name")
        if self.at("!"):
            self.advance()
            instance = tok.value
            if instance != "env" and self.instances is not None and instance not in self.instances:
                raise self.error(f"undeclared instance {instance}", tok, code="E_UNDECLARED_SYMBOL")
            tok = self.ident("event name")
        self.check_event(tok)
        return EventOccurrence(tok.value, tick, polarity, guard, instance, line=first.line)

    # -- guard expressions
    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.at("|"):
            self.advance()
            e = Or(e, self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_not()
        while self.at("&"):
            self.advance()
            e = And(e, self.parse_not())
        return e

    def parse_not(self) -> Expr:
        if self.at("!"):
            self.advance()
            return Not(self.parse_not())
        if self.at("("):
            self.advance()
            e = self.parse_or()
            self.expect(")")
            return e
        if self.at("true"):
            self.advance()
            return TRUE
        if self.at("false"):
            self.advance()
            return FALSE
        tok = self.ident("symbol")
        if tok.value not in self.events and tok.value not in self.props:
            raise self.error(f"undeclared symbol {tok.value}", tok, code="E_UNDECLARED_SYMBOL")
        return Sym(tok.value)

    # -- composite expressions (resolved after the whole file is read)
    def parse_cexpr(self) -> tuple:
        tok = self.peek()
        if tok.kind == "ident" and tok.value not in KEYWORDS:
            self.advance()
            return ("ref", tok)
        if self.at("seq") or self.at("alt") or self.at("async"):
            op = self.advance().value
            self.expect("(")
            kids = [self.parse_cexpr()]
            while self.at(","):
                self.advance()
                kids.append(self.parse_cexpr())
            self.expect(")")
            if len(kids) < 2:
                raise self.error(f"{op} needs at least two operands", tok)
            arrows = []
            if op == "async" and self.at("{"):
                self.advance()
                while self.at("arrow"):
                    atok = self.advance()
                    sc, se, st = self.parse_cross_endpoint()
                    self.expect("->")
                    tc, te, tt = self.parse_cross_endpoint()
                    self.expect(";")
                    arrows.append(CrossArrow(sc, se, st, tc, te, tt, line=atok.line))
                self.expect("}")
            return (op, tok, kids, arrows)
        if self.at("par"):
            self.advance()
            pad = False
            if self.at("["):
                self.advance()
                self.expect("pad")
                self.expect("]")
                pad = True
            self.expect("(")
            a = self.parse_cexpr()
            self.expect(",")
            b = self.parse_cexpr()
            self.expect(")")
            return ("par", tok, [a, b], pad)
        if self.at("loop"):
            self.advance()
            self.expect("(")
            if self.at("*"):
                self.advance()
                count = None
            else:
                count = self.integer()
            self.expect(",")
            body = self.parse_cexpr()
            self.expect(")")
            return ("loop", tok, [body], count)
        if self.at("implies"):
            self.advance()
            self.expect("(")
            a = self.parse_cexpr()
            self.expect(",")
            b = self.parse_cexpr()
            self.expect(")")
            return ("implies", tok, [a, b])
        raise self.error(f"expected a chart expression, got {tok.value or 'end of file'!r}")

    def parse_cross_endpoint(self) -> tuple[str, str, int | None]:
        chart = self.ident("chart name").value
        self.expect(".")
        ev = self.ident("event name")
        self.check_event(ev)
        tick = None
        if self.at("@"):
            self.advance()
            tick = self.integer()
        return chart, ev.value, tick

    def resolve(self, raw: tuple, visiting: frozenset[str] = frozenset()) -> ChartExpr:
        kind, tok = raw[0], raw[1]
        if kind == "ref":
            name = tok.value
            if name in self.charts:
                return Leaf(self.charts[name])
            if name in self.raw_composites:
                if name in visiting:
                    raise self.error(f"composite {name} refers to itself", tok, code="E_CYCLE")
                node = self.resolve(self.raw_composites[name], visiting | {name})
                return node if isinstance(node, Leaf) else replace(node, name=name)
            raise self.error(f"unknown chart {name}", tok, code="E_UNDECLARED_SYMBOL")
        kids = [self.resolve(k, visiting) for k in raw[2]]
        if kind == "seq":
            node = kids[0]
            for k in kids[1:]:
                node = Seq(node, k)
            return node
        if kind == "alt":
            node = kids[0]
            for k in kids[1:]:
                node = Alt(node, k)
            return node
        if kind == "async":
            return AsyncPar(tuple(kids), tuple(raw[3]))
        if kind == "par":
            return Par(kids[0], kids[1], pad=raw[3])
        if kind == "loop":
            return Loop(kids[0], raw[3])
        return Impl(kids[0], kids[1])

    def finish(self) -> SpecFile:
        if self.raw_top is not None:
            top = self.resolve(self.raw_top)
            raw = self.raw_top
            top_name = raw[1].value if raw[0] == "ref" else label(top)
        else:
            defined = list(self.charts) + list(self.raw_composites)
            if len(defined) != 1:
                raise ParseError("no 'top' statement and more than one chart defined",
                                 code="E_NO_TOP")
            top_name = defined[0]
            top = self.resolve(("ref", Token("ident", top_name, 0, 0)))
        composites = {name: self.resolve(("ref", Token("ident", name, 0, 0)))
                      for name in self.raw_composites}
        clocks = self.clocks
        if clocks is None:
            clocks = []
            for s in self.charts.values():
                if s.clock not in clocks:
                    clocks.append(s.clock)
        instances = self.instances
        if instances is None:
            instances = []
            for s in self.charts.values():
                for inst in s.instances:
                    if inst not in instances:
                        instances.append(inst)
        symtab = SymbolTable(tuple(self.events), tuple(self.props), tuple(clocks),
                             tuple(instances))
        return SpecFile(symtab, self.charts, composites, top, top_name,
                        self.mode or Mode.DETECT)


def parse_spec(text: str) -> SpecFile:
    """Parse ``.cesc`` text. Structural checks are left to :func:`validate`."""
    return _Parser(text).parse()


def load_spec(text: str) -> SpecFile:
    """Parse and validate; raises :class:`ValidationError` listing all diagnostics."""
    spec = parse_spec(text)
    diags = validate(spec)
    if diags:
        raise ValidationError(diags)
    return spec


def read_spec(path) -> SpecFile:
    with open(path, encoding="utf-8") as fh:
        return load_spec(fh.read())


# -- printing -------------------------------------------------------------------

def _format_occurrence(o: EventOccurrence) -> str:
    out = f"@{o.tick} "
    if o.guard is not None:
        out += f"[{format_expr(o.guard)}]: "
    if o.polarity is Polarity.ABSENT:
        out += "absent "
    if o.instance is not None:
        out += f"{o.instance}!"
    return out + o.event + ";"


def format_scesc(s: Scesc) -> str:
    lines = [f"chart {s.name} on {s.clock} ticks {s.tick_count} {{"]
    lines += [f"  {_format_occurrence(o)}" for o in s.occurrences]
    lines += [f"  arrow {a.source} -> {a.target};" for a in s.arrows]
    lines.append("}")
    return "\n".join(lines)


def format_chart_expr(c: ChartExpr, named: dict[str, ChartExpr] | None = None,
                      use_names: bool = True) -> str:
    named = named or {}
    if isinstance(c, Leaf):
        return c.scesc.name
    if use_names and c.name and named.get(c.name) == c:
        return c.name

    def sub(x: ChartExpr) -> str:
        return format_chart_expr(x, named)

    if isinstance(c, Seq):
        return f"seq({sub(c.first)}, {sub(c.second)})"
    if isinstance(c, Par):
        return f"par{'[pad]' if c.pad else ''}({sub(c.left)}, {sub(c.right)})"
    if isinstance(c, Alt):
        return f"alt({sub(c.left)}, {sub(c.right)})"
    if isinstance(c, Loop):
        return f"loop({'*' if c.count is None else c.count}, {sub(c.body)})"
    if isinstance(c, Impl):
        return f"implies({sub(c.antecedent)}, {sub(c.consequent)})"
    out = "async(" + ", ".join(sub(ch) for ch in c.children) + ")"
    if c.arrows:
        arrows = []
        for a in c.arrows:
            st = "" if a.source_tick is None else f"@{a.source_tick}"
            tt = "" if a.target_tick is None else f"@{a.target_tick}"
            arrows.append(f"  arrow {a.source_chart}.{a.source_event}{st} -> "
                          f"{a.target_chart}.{a.target_event}{tt};")
        out += " {\n" + "\n".join(arrows) + "\n}"
    return out


def format_spec(spec: SpecFile) -> str:
    st = spec.symbols
    lines = [f"mode {spec.mode.value};"]
    if st.events:
        lines.append("events " + ", ".join(st.events) + ";")
    if st.props:
        lines.append("props " + ", ".join(st.props) + ";")
    if st.clocks:
        lines.append("clocks " + ", ".join(st.clocks) + ";")
    if st.instances:
        lines.append("instances " + ", ".join(st.instances) + ";")
    for s in spec.charts.values():
        lines.append("")
        lines.append(format_scesc(s))
    if spec.composites:
        lines.append("")
    for name, c in spec.composites.items():
        body = format_chart_expr(c, spec.composites, use_names=False) if not isinstance(c, Leaf) \
            else c.scesc.name
        lines.append(f"compose {name} = {body};")
    lines.append("")
    if spec.top_name in spec.charts or spec.top_name in spec.composites:
        lines.append(f"top {spec.top_name};")
    else:
        lines.append(f"top {format_chart_expr(spec.top, spec.composites)};")
    return "\n".join(lines) + "\n"
