"""Chart families for equivalence sweeps: an exhaustive small family and seeded random charts."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .chart import CausalityArrow, EventOccurrence, Leaf, OccRef, Polarity, Scesc, SpecFile, SymbolTable
from .errors import CescError
from .expr import And, Expr, Not, Or, Sym
from .synth import extract_pattern
from .trace import TickRecord, Trace, Valuation

CLOCK = "clk"

# per-tick choices of the exhaustive family, over events a and b
TICK_FORMS = ("a", "b", "[b]: a", "absent a")


def _occ(form: str, tick: int) -> EventOccurrence:
    if form == "a":
        return EventOccurrence("a", tick)
    if form == "b":
        return EventOccurrence("b", tick)
    if form == "[b]: a":
        return EventOccurrence("a", tick, guard=Sym("b"))
    if form == "absent a":
        return EventOccurrence("a", tick, Polarity.ABSENT)
    raise ValueError(form)


def spec_of(s: Scesc, symtab: SymbolTable) -> SpecFile:
    return SpecFile(symtab, {s.name: s}, {}, Leaf(s), s.name)


def exhaustive_family(max_n: int = 4, arrows_up_to: int = 3) -> list[SpecFile]:
    """Every one-occurrence-per-tick chart over {a, b} with ``n <= max_n``.

    Charts with ``n <= arrows_up_to`` whose first and last ticks are present
    also appear once more with an arrow from the first to the last occurrence.
    """
    symtab = SymbolTable(events=("a", "b"), clocks=(CLOCK,))
    out = []
    for n in range(1, max_n + 1):
        for forms in itertools.product(TICK_FORMS, repeat=n):
            occs = tuple(_occ(f, i) for i, f in enumerate(forms))
            name = "c_" + "_".join(str(TICK_FORMS.index(f)) for f in forms)
            s = Scesc(name, CLOCK, n, occs)
            out.append(spec_of(s, symtab))
            first, last = occs[0], occs[-1]
            if (n >= 2 and n <= arrows_up_to and first.polarity is Polarity.PRESENT
                    and last.polarity is Polarity.PRESENT):
                arrow = CausalityArrow(OccRef(first.event, 0), OccRef(last.event, n - 1))
                out.append(spec_of(Scesc(name + "_arrow", CLOCK, n, occs, (arrow,)), symtab))
    return out


@dataclass
class RandomChartConfig:
    max_n: int = 6
    max_symbols: int = 5
    max_per_tick: int = 2
    p_absent: float = 0.25
    p_guard: float = 0.3
    p_empty: float = 0.15
    max_arrows: int = 2


def _random_guard(rng: random.Random, names: list[str], depth: int = 0) -> Expr:
    if depth >= 2 or rng.random() < 0.5:
        leaf: Expr = Sym(rng.choice(names))
        return Not(leaf) if rng.random() < 0.4 else leaf
    op = And if rng.random() < 0.5 else Or
    return op(_random_guard(rng, names, depth + 1), _random_guard(rng, names, depth + 1))


def random_chart(rng: random.Random, cfg: RandomChartConfig | None = None,
                 name: str = "r") -> SpecFile:
    """A random non-vacuous SCESC with guards, absences, empty ticks and arrows."""
    cfg = cfg or RandomChartConfig()
    while True:
        k = rng.randint(1, cfg.max_symbols)
        n_events = rng.randint(1, k)
        events = tuple(f"e{i}" for i in range(n_events))
        props = tuple(f"p{i}" for i in range(k - n_events))
        names = list(events + props)
        n = rng.randint(1, cfg.max_n)
        occs = []
        for t in range(n):
            if rng.random() < cfg.p_empty:
                continue
            for e in rng.sample(events, rng.randint(1, min(cfg.max_per_tick, len(events)))):
                pol = Polarity.ABSENT if rng.random() < cfg.p_absent else Polarity.PRESENT
                guard = _random_guard(rng, names) if rng.random() < cfg.p_guard else None
                occs.append(EventOccurrence(e, t, pol, guard))
        present = [o for o in occs if o.polarity is Polarity.PRESENT]
        arrows = []
        for _ in range(rng.randint(0, cfg.max_arrows)):
            pairs = [(x, y) for x in present for y in present if x.tick < y.tick]
            if not pairs:
                break
            x, y = rng.choice(pairs)
            arrow = CausalityArrow(OccRef(x.event, x.tick), OccRef(y.event, y.tick))
            if arrow not in arrows:
                arrows.append(arrow)
        s = Scesc(name, CLOCK, n, tuple(occs), tuple(arrows))
        try:
            extract_pattern(s)
        except CescError:
            continue
        return spec_of(s, SymbolTable(events=events, props=props, clocks=(CLOCK,)))


def random_trace(rng: random.Random, symtab: SymbolTable, length: int,
                 density: float = 0.5) -> Trace:
    recs = tuple(TickRecord(i, frozenset(symtab.clocks),
                            Valuation({s: rng.random() < density for s in symtab.symbols}))
                 for i in range(length))
    return Trace(recs, tuple(symtab.clocks))


def near_miss_trace(rng: random.Random, spec: SpecFile, length: int,
                    flip: float = 0.1) -> Trace:
    """A trace with one embedded window of the chart, then random bit flips.

    Flips land on every symbol of every tick with probability ``flip``, so
    the result is a mix of matches, near misses and extra accidental matches.
    """
    from .gen import GenConfig, _fill, _linear_plan
    from .chart import reduce_chart

    s = reduce_chart(spec.top)
    before = rng.randint(0, max(0, length - s.tick_count))
    cfg = GenConfig(pad_before=before, pad_after=max(0, length - s.tick_count - before))
    plan = _linear_plan([s], s.clock, rng, cfg, pad_before=before)
    rows = _fill(plan, spec.symbols, rng, rng.random())
    for row in rows:
        for sym in row:
            if rng.random() < flip:
                row[sym] = not row[sym]
    recs = tuple(TickRecord(i, frozenset([s.clock]), Valuation(r)) for i, r in enumerate(rows))
    return Trace(recs, tuple(spec.symbols.clocks))
