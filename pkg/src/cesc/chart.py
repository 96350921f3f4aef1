"""Chart abstract syntax: SCESC leaves and the structural constructs.

A single-clock chart (:class:`Scesc`) lists event occurrences on numbered
ticks plus causality arrows between them. Composite charts combine leaves
with ``seq``, ``par``, ``alt``, ``loop``, ``implies`` and ``async``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator, Union

from .errors import CescError, Diagnostic
from .expr import Expr, SymbolKind, support

ENV = "env"


class Polarity(enum.Enum):
    PRESENT = "present"
    ABSENT = "absent"


class Mode(enum.Enum):
    DETECT = "detect"
    ASSERT = "assert"


@dataclass(frozen=True)
class EventOccurrence:
    event: str
    tick: int
    polarity: Polarity = Polarity.PRESENT
    guard: Expr | None = None
    instance: str | None = None
    line: int | None = field(default=None, compare=False, repr=False)

    @property
    def is_env(self) -> bool:
        return self.instance == ENV

    def shifted(self, offset: int) -> EventOccurrence:
        return replace(self, tick=self.tick + offset)


@dataclass(frozen=True)
class OccRef:
    """Names an occurrence by event and tick; ticks make arrows unambiguous."""

    event: str
    tick: int

    def __str__(self) -> str:
        return f"{self.event}@{self.tick}"


@dataclass(frozen=True)
class CausalityArrow:
    source: OccRef
    target: OccRef
    line: int | None = field(default=None, compare=False, repr=False)

    def shifted(self, offset: int) -> CausalityArrow:
        return CausalityArrow(OccRef(self.source.event, self.source.tick + offset),
                              OccRef(self.target.event, self.target.tick + offset), self.line)


@dataclass(frozen=True)
class Scesc:
    name: str
    clock: str
    tick_count: int
    occurrences: tuple[EventOccurrence, ...] = ()
    arrows: tuple[CausalityArrow, ...] = ()
    line: int | None = field(default=None, compare=False, repr=False)

    @property
    def instances(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for occ in self.occurrences:
            if occ.instance is not None and occ.instance != ENV:
                seen.setdefault(occ.instance)
        return tuple(seen)

    def find(self, ref: OccRef) -> EventOccurrence | None:
        for occ in self.occurrences:
            if occ.event == ref.event and occ.tick == ref.tick:
                return occ
        return None

    def present_ticks(self, event: str) -> list[int]:
        return sorted({o.tick for o in self.occurrences
                       if o.event == event and o.polarity is Polarity.PRESENT})


# -- composite charts ----------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    scesc: Scesc


@dataclass(frozen=True)
class Seq:
    first: ChartExpr
    second: ChartExpr
    name: str | None = None


@dataclass(frozen=True)
class Par:
    left: ChartExpr
    right: ChartExpr
    pad: bool = False
    name: str | None = None


@dataclass(frozen=True)
class Alt:
    left: ChartExpr
    right: ChartExpr
    name: str | None = None


@dataclass(frozen=True)
class Loop:
    body: ChartExpr
    count: int | None  # None means unbounded, written ``loop(*, body)``
    name: str | None = None


@dataclass(frozen=True)
class Impl:
    antecedent: ChartExpr
    consequent: ChartExpr
    name: str | None = None


@dataclass(frozen=True)
class CrossArrow:
    """Arrow between occurrences of two children of an ``async`` node.

    Ticks index the child's flattened pattern; ``None`` means "the unique
    present occurrence of that event", resolved at synthesis time.
    """

    source_chart: str
    source_event: str
    source_tick: int | None
    target_chart: str
    target_event: str
    target_tick: int | None
    line: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AsyncPar:
    children: tuple[ChartExpr, ...]
    arrows: tuple[CrossArrow, ...] = ()
    name: str | None = None


ChartExpr = Union[Leaf, Seq, Par, Alt, Loop, Impl, AsyncPar]


@dataclass(frozen=True)
class SymbolTable:
    events: tuple[str, ...] = ()
    props: tuple[str, ...] = ()
    clocks: tuple[str, ...] = ()
    instances: tuple[str, ...] = ()

    def kind(self, name: str) -> SymbolKind | None:
        if name in self.events:
            return SymbolKind.EVENT
        if name in self.props:
            return SymbolKind.PROP
        return None

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.events + self.props


@dataclass
class SpecFile:
    symbols: SymbolTable
    charts: dict[str, Scesc]
    composites: dict[str, ChartExpr]
    top: ChartExpr
    top_name: str
    mode: Mode = Mode.DETECT


# -- helpers -------------------------------------------------------------------

def label(c: ChartExpr) -> str:
    """Display name: the chart/compose name, or a structural rendering."""
    if isinstance(c, Leaf):
        return c.scesc.name
    if c.name:
        return c.name
    if isinstance(c, Seq):
        return f"seq({label(c.first)}, {label(c.second)})"
    if isinstance(c, Par):
        return f"par{'[pad]' if c.pad else ''}({label(c.left)}, {label(c.right)})"
    if isinstance(c, Alt):
        return f"alt({label(c.left)}, {label(c.right)})"
    if isinstance(c, Loop):
        return f"loop({'*' if c.count is None else c.count}, {label(c.body)})"
    if isinstance(c, Impl):
        return f"implies({label(c.antecedent)}, {label(c.consequent)})"
    return "async(" + ", ".join(label(ch) for ch in c.children) + ")"


def children(c: ChartExpr) -> tuple[ChartExpr, ...]:
    if isinstance(c, Leaf):
        return ()
    if isinstance(c, Seq):
        return (c.first, c.second)
    if isinstance(c, (Par, Alt)):
        return (c.left, c.right)
    if isinstance(c, Loop):
        return (c.body,)
    if isinstance(c, Impl):
        return (c.antecedent, c.consequent)
    return c.children


def leaves(c: ChartExpr) -> Iterator[Scesc]:
    if isinstance(c, Leaf):
        yield c.scesc
    for ch in children(c):
        yield from leaves(ch)


def is_reducible(c: ChartExpr) -> bool:
    """True when ``c`` denotes a single fixed-length pattern on one clock."""
    if isinstance(c, Leaf):
        return True
    if isinstance(c, (Seq, Par)):
        return all(is_reducible(ch) for ch in children(c))
    if isinstance(c, Loop):
        return c.count is not None and is_reducible(c.body)
    return False


def clock_of(c: ChartExpr) -> str:
    return next(leaves(c)).clock


def length_of(c: ChartExpr) -> int:
    """Tick count of a reducible chart."""
    if isinstance(c, Leaf):
        return c.scesc.tick_count
    if isinstance(c, Seq):
        return length_of(c.first) + length_of(c.second)
    if isinstance(c, Par):
        return max(length_of(c.left), length_of(c.right))
    if isinstance(c, Loop) and c.count is not None:
        return c.count * length_of(c.body)
    raise CescError(f"{label(c)} has no fixed length", code="E_NESTING")


def concat(a: Scesc, b: Scesc, name: str | None = None) -> Scesc:
    if a.clock != b.clock:
        raise CescError(f"cannot sequence {a.name} on {a.clock} with {b.name} on {b.clock}",
                        code="E_CLOCK_MISMATCH")
    off = a.tick_count
    return Scesc(
        name=name or f"{a.name}_{b.name}",
        clock=a.clock,
        tick_count=a.tick_count + b.tick_count,
        occurrences=a.occurrences + tuple(o.shifted(off) for o in b.occurrences),
        arrows=a.arrows + tuple(ar.shifted(off) for ar in b.arrows),
    )


def flatten_seq(c: ChartExpr) -> ChartExpr:
    """Collapse every ``seq`` of leaves into one leaf, recursively.

    Ticks of the second child shift by the first child's tick count.
    """
    if isinstance(c, Leaf):
        return c
    if isinstance(c, Seq):
        first, second = flatten_seq(c.first), flatten_seq(c.second)
        if isinstance(first, Leaf) and isinstance(second, Leaf):
            return Leaf(concat(first.scesc, second.scesc, name=c.name))
        return replace(c, first=first, second=second)
    if isinstance(c, (Par, Alt)):
        return replace(c, left=flatten_seq(c.left), right=flatten_seq(c.right))
    if isinstance(c, Loop):
        return replace(c, body=flatten_seq(c.body))
    if isinstance(c, Impl):
        return replace(c, antecedent=flatten_seq(c.antecedent),
                       consequent=flatten_seq(c.consequent))
    return replace(c, children=tuple(flatten_seq(ch) for ch in c.children))


def pad_to(s: Scesc, n: int) -> Scesc:
    return replace(s, tick_count=max(s.tick_count, n))


def reduce_chart(c: ChartExpr) -> Scesc:
    """Reduce a ``seq``/``par``/``loop(k)`` tree to one equivalent leaf.

    ``par`` merges occurrence lists tick by tick, which conjoins the two
    patterns element-wise; ``loop(k)`` concatenates ``k`` copies.
    """
    if isinstance(c, Leaf):
        return c.scesc
    if isinstance(c, Seq):
        return concat(reduce_chart(c.first), reduce_chart(c.second), name=c.name)
    if isinstance(c, Par):
        a, b = reduce_chart(c.left), reduce_chart(c.right)
        if a.clock != b.clock:
            raise CescError(f"par children on clocks {a.clock} and {b.clock}",
                            code="E_CLOCK_MISMATCH")
        if a.tick_count != b.tick_count:
            if not c.pad:
                raise CescError(f"par children have lengths {a.tick_count} and "
                                f"{b.tick_count}; use par[pad]", code="E_PAR_LENGTH")
            n = max(a.tick_count, b.tick_count)
            a, b = pad_to(a, n), pad_to(b, n)
        return Scesc(name=c.name or f"{a.name}_par_{b.name}", clock=a.clock,
                     tick_count=a.tick_count, occurrences=a.occurrences + b.occurrences,
                     arrows=a.arrows + b.arrows)
    if isinstance(c, Loop) and c.count is not None:
        body = reduce_chart(c.body)
        out = body
        for _ in range(c.count - 1):
            out = concat(out, body)
        return replace(out, name=c.name or f"{body.name}_x{c.count}")
    raise CescError(f"{label(c)} is not a fixed pattern", code="E_NESTING")


def resolve_cross_arrow(arrow: CrossArrow, kids: dict[str, Scesc]) -> tuple[OccRef, OccRef]:
    """Resolve a cross-domain arrow's endpoints against the reduced children."""
    refs = []
    for chart, event, tick in ((arrow.source_chart, arrow.source_event, arrow.source_tick),
                               (arrow.target_chart, arrow.target_event, arrow.target_tick)):
        if chart not in kids:
            raise CescError(f"arrow names {chart!r}, not a child of this async",
                            code="E_ARROW_SCOPE", line=arrow.line)
        scesc = kids[chart]
        if tick is None:
            ticks = scesc.present_ticks(event)
            if len(ticks) != 1:
                raise CescError(f"{event} occurs {len(ticks)} times in {chart}; "
                                "give a tick with @", code="E_ARROW_ENDPOINT", line=arrow.line)
            tick = ticks[0]
        occ = scesc.find(OccRef(event, tick))
        if occ is None or occ.polarity is not Polarity.PRESENT:
            raise CescError(f"{event}@{tick} is not a present occurrence of {chart}",
                            code="E_ARROW_ENDPOINT", line=arrow.line)
        refs.append(OccRef(event, tick))
    return refs[0], refs[1]


# -- validation ------------------------------------------------------------------

def _check_scesc(s: Scesc, symtab: SymbolTable, out: list[Diagnostic]) -> None:
    if s.tick_count < 1:
        out.append(Diagnostic("E_TICK_COUNT", f"chart {s.name} needs at least one tick", s.line))
    if symtab.clocks and s.clock not in symtab.clocks:
        out.append(Diagnostic("E_UNKNOWN_CLOCK", f"chart {s.name} uses undeclared clock {s.clock}",
                              s.line))
    for occ in s.occurrences:
        if not 0 <= occ.tick < s.tick_count:
            out.append(Diagnostic("E_TICK_RANGE",
                                  f"{occ.event}@{occ.tick} outside 0..{s.tick_count - 1} "
                                  f"in chart {s.name}", occ.line))
        kind = symtab.kind(occ.event)
        if kind is None:
            out.append(Diagnostic("E_UNDECLARED_SYMBOL", f"undeclared event {occ.event}", occ.line))
        elif kind is not SymbolKind.EVENT:
            out.append(Diagnostic("E_NOT_EVENT", f"{occ.event} is a proposition, not an event",
                                  occ.line))
        if occ.guard is not None:
            for name in sorted(support(occ.guard)):
                if symtab.kind(name) is None:
                    out.append(Diagnostic("E_UNDECLARED_SYMBOL", f"undeclared symbol {name} in guard",
                                          occ.line))
    for ar in s.arrows:
        ends = [s.find(ar.source), s.find(ar.target)]
        for ref, occ in zip((ar.source, ar.target), ends):
            if occ is None or occ.polarity is not Polarity.PRESENT:
                out.append(Diagnostic("E_ARROW_ENDPOINT",
                                      f"arrow endpoint {ref} is not a present occurrence "
                                      f"of chart {s.name}", ar.line))
        if ar.source == ar.target or ar.source.tick >= ar.target.tick:
            out.append(Diagnostic("E_ARROW_ORDER",
                                  f"arrow {ar.source} -> {ar.target} must point to a later tick",
                                  ar.line))


def _structure(c: ChartExpr, top: bool, mode: Mode, out: list[Diagnostic]) -> None:
    """Check nesting, clocks and lengths of the composite tree."""

    def clocks(x: ChartExpr) -> set[str]:
        return {leaf.clock for leaf in leaves(x)}

    def check_reducible(x: ChartExpr, where: str) -> bool:
        if not is_reducible(x):
            out.append(Diagnostic("E_NESTING", f"{label(x)} cannot appear inside {where}; "
                                  "only seq/par/loop(k) of charts may nest there"))
            return False
        return True

    def check_pattern(x: ChartExpr) -> None:
        if isinstance(x, Leaf):
            return
        for ch in children(x):
            check_pattern(ch)
        if len(clocks(x)) > 1:
            out.append(Diagnostic("E_CLOCK_MISMATCH",
                                  f"{label(x)} mixes clocks {sorted(clocks(x))}"))
            return
        if isinstance(x, Loop) and x.count is not None and x.count < 1:
            out.append(Diagnostic("E_LOOP_COUNT", f"{label(x)} needs a positive count"))
        if isinstance(x, Par) and not x.pad:
            try:
                if length_of(x.left) != length_of(x.right):
                    out.append(Diagnostic("E_PAR_LENGTH",
                                          f"{label(x)} children have lengths {length_of(x.left)} "
                                          f"and {length_of(x.right)}"))
            except CescError:
                pass

    if isinstance(c, Impl):
        if not top:
            out.append(Diagnostic("E_NESTING", f"{label(c)} must be the top-level chart"))
        if mode is not Mode.ASSERT:
            out.append(Diagnostic("E_MODE", "implies requires 'mode assert'"))
        ok = check_reducible(c.antecedent, "implies") & check_reducible(c.consequent, "implies")
        if ok:
            check_pattern(c.antecedent)
            check_pattern(c.consequent)
            if len(clocks(c)) > 1:
                out.append(Diagnostic("E_CLOCK_MISMATCH",
                                      f"{label(c)} mixes clocks {sorted(clocks(c))}"))
        return
    if mode is Mode.ASSERT and top:
        out.append(Diagnostic("E_MODE", "'mode assert' requires an implies chart at the top"))
    if isinstance(c, Alt):
        for ch in (c.left, c.right):
            if isinstance(ch, Alt):
                _structure(ch, False, mode, out)
            elif check_reducible(ch, "alt"):
                check_pattern(ch)
        if len(clocks(c)) > 1:
            out.append(Diagnostic("E_CLOCK_MISMATCH", f"{label(c)} mixes clocks {sorted(clocks(c))}"))
        return
    if isinstance(c, Loop) and c.count is None:
        if not top:
            out.append(Diagnostic("E_NESTING", f"{label(c)} must be the top-level chart"))
        if check_reducible(c.body, "loop(*)"):
            check_pattern(c.body)
        return
    if isinstance(c, AsyncPar):
        if not top:
            out.append(Diagnostic("E_NESTING", f"{label(c)} must be the top-level chart"))
        names = [label(ch) for ch in c.children]
        if len(set(names)) != len(names):
            out.append(Diagnostic("E_DUPLICATE_NAME", f"async children repeat a name: {names}"))
        seen: set[str] = set()
        kids: dict[str, Scesc] = {}
        for ch in c.children:
            if not check_reducible(ch, "async"):
                continue
            check_pattern(ch)
            cl = clocks(ch)
            if cl & seen:
                out.append(Diagnostic("E_ASYNC_SAME_CLOCK",
                                      f"async children share clock {sorted(cl & seen)[0]}"))
            seen |= cl
            try:
                kids[label(ch)] = reduce_chart(ch)
            except CescError:
                pass
        for ar in c.arrows:
            if ar.source_chart == ar.target_chart:
                out.append(Diagnostic("E_ARROW_SCOPE",
                                      f"cross-domain arrow endpoints both in {ar.source_chart}",
                                      ar.line))
                continue
            try:
                resolve_cross_arrow(ar, kids)
            except CescError as err:
                out.append(Diagnostic(err.code, err.message, ar.line))
        return
    if check_reducible(c, "the top level"):
        check_pattern(c)


def validate(spec: SpecFile) -> list[Diagnostic]:
    """Return one diagnostic per violated invariant; empty means well-formed."""
    out: list[Diagnostic] = []
    names = list(spec.symbols.events) + list(spec.symbols.props)
    dupes = sorted({n for n in names if names.count(n) > 1})
    for n in dupes:
        out.append(Diagnostic("E_DUPLICATE_NAME", f"symbol {n} declared twice"))
    for s in spec.charts.values():
        _check_scesc(s, spec.symbols, out)
    # charts reachable only through the top tree (e.g. built in code) get checked too
    for s in leaves(spec.top):
        if spec.charts.get(s.name) != s:
            _check_scesc(s, spec.symbols, out)
    _structure(spec.top, True, spec.mode, out)
    return out
