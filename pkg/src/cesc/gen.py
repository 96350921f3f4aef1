"""Seeded generation of conforming and mutated traces for a chart.

A conforming trace embeds one full window of the chart (every element
satisfied, every arrow source present) between stretches of random noise.
A mutated trace takes a conforming one and applies a single mutation:

``drop_event``
    a present occurrence whose guard holds loses its event;
``swap_adjacent``
    two neighbouring window ticks trade valuations;
``violate_guard``
    a guarded occurrence gets its guard true and its event wrong, or an
    absent event is made to occur;
``break_arrow_order``
    an arrow source is moved from its own tick to the target's tick.

Every trace is checked against the oracle before it is returned; noise is
thinned on later attempts and :data:`E_UNSATISFIABLE_GEN` is raised when no
attempt passes.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .chart import (
    Alt,
    AsyncPar,
    ChartExpr,
    Impl,
    Loop,
    Mode,
    Polarity,
    Scesc,
    SpecFile,
    SymbolTable,
    is_reducible,
    label,
    reduce_chart,
    resolve_cross_arrow,
)
from .errors import CescError
from .expr import Expr, Sym, conj, evaluate, support
from .oracle import expected_verdicts
from .synth import occurrence_expr
from .trace import TickRecord, Trace, Valuation

UNSAT_GEN = "E_UNSATISFIABLE_GEN"
MUTATIONS = ("drop_event", "swap_adjacent", "violate_guard", "break_arrow_order")


@dataclass
class GenConfig:
    seed: int = 0
    pad_before: int = 3  # noise ticks before the window, at most
    pad_after: int = 3
    density: float = 0.3  # chance an unconstrained event is true
    attempts: int = 60
    periods: dict[str, int] | None = None  # async charts: clock -> tick period
    max_iterations: int = 3  # loop(*) repetitions in conforming traces


@dataclass
class Generated:
    trace: Trace
    kind: str  # "conforming" or a mutation name
    window: tuple[int, int]  # global ticks spanned by the embedded window


@dataclass
class _Slot:
    clocks: frozenset[str]
    need: list[tuple[Scesc, int]] = field(default_factory=list)  # (chart, position)
    forced: set[str] = field(default_factory=set)  # arrow sources that must be true


@dataclass
class _Plan:
    slots: list[_Slot]
    mutable: list[int]  # slot indices a mutation may touch
    arrows: list[tuple[int, int, str]]  # (source slot, target slot, event)
    domain: dict[int, frozenset[str]] = field(default_factory=dict)  # slot -> clocks


def clock_schedule(periods: dict[str, int], length: int,
                   phases: dict[str, int] | None = None) -> list[frozenset[str]]:
    """Ticking clocks per global tick; records on which nothing ticks are skipped.

    Clock ``c`` ticks at raw time ``t`` when ``(t + phase) % period == 0``.
    """
    phases = phases or {}
    out = []
    t = 0
    while len(out) < length:
        cs = frozenset(c for c, p in sorted(periods.items()) if (t + phases.get(c, 0)) % p == 0)
        if cs:
            out.append(cs)
        t += 1
    return out


def _window_slots(s: Scesc, clocks: frozenset[str], base: int) -> list[_Slot]:
    slots = [_Slot(clocks) for _ in range(s.tick_count)]
    for p in range(s.tick_count):
        slots[p].need.append((s, p))
    for ar in s.arrows:
        slots[ar.source.tick].forced.add(ar.source.event)
    return slots


def _linear_plan(parts: list[Scesc], clock: str, rng: random.Random, cfg: GenConfig,
                 mutable_from: int = 0, pad_before: int | None = None) -> _Plan:
    clocks = frozenset([clock])
    pre = rng.randint(0, cfg.pad_before) if pad_before is None else pad_before
    slots = [_Slot(clocks) for _ in range(pre)]
    mutable: list[int] = []
    arrows = []
    for idx, s in enumerate(parts):
        base = len(slots)
        slots += _window_slots(s, clocks, base)
        if idx >= mutable_from:
            mutable += range(base, base + s.tick_count)
        arrows += [(base + a.source.tick, base + a.target.tick, a.source.event)
                   for a in s.arrows if idx >= mutable_from]
    slots += [_Slot(clocks) for _ in range(rng.randint(0, cfg.pad_after))]
    return _Plan(slots, mutable, arrows)


def _async_plan(c: AsyncPar, rng: random.Random, cfg: GenConfig) -> _Plan:
    kids = {label(ch): reduce_chart(ch) for ch in c.children}
    cross = [(ar.source_chart, *resolve_cross_arrow(ar, kids), ar.target_chart) for ar in c.arrows]
    periods = dict(cfg.periods) if cfg.periods else {s.clock: rng.randint(1, 3)
                                                    for s in kids.values()}
    phases = {clk: rng.randrange(p) for clk, p in sorted(periods.items())}
    # sources before targets where the arrows allow it
    order = list(kids)
    for _ in range(len(order)):
        for src, _, _, dst in cross:
            if order.index(src) > order.index(dst):
                order.remove(src)
                order.insert(order.index(dst), src)
    pre = rng.randint(0, cfg.pad_before)
    length = pre + sum(s.tick_count * periods[s.clock] for s in kids.values()) * 2 \
        + cfg.pad_after + 4
    sched = clock_schedule(periods, length, phases)
    starts: dict[str, int] = {}  # child -> global index of its first window tick
    slot_need: dict[int, list[tuple[Scesc, int]]] = {}
    forced: dict[int, set[str]] = {}
    arrows = []
    where: dict[tuple[str, int], int] = {}
    cursor = pre
    for kid in order:
        s = kids[kid]
        ticks = [g for g in range(cursor, len(sched)) if s.clock in sched[g]]
        chosen = None
        for k in range(len(ticks) - s.tick_count + 1):
            window = ticks[k:k + s.tick_count]
            ok = all(window[dst.tick] > where[(src_kid, src.tick)]
                     for src_kid, src, dst, dst_kid in cross
                     if dst_kid == kid and (src_kid, src.tick) in where)
            if ok:
                chosen = window
                break
        if chosen is None:
            raise CescError(f"schedule too short to place {kid}", code=UNSAT_GEN)
        starts[kid] = chosen[0]
        for p, g in enumerate(chosen):
            where[(kid, p)] = g
            slot_need.setdefault(g, []).append((s, p))
        for ar in s.arrows:
            forced.setdefault(chosen[ar.source.tick], set()).add(ar.source.event)
            arrows.append((chosen[ar.source.tick], chosen[ar.target.tick], ar.source.event))
        cursor = chosen[0] + rng.randint(0, 1)
    for src_kid, src, dst, dst_kid in cross:
        g = where[(src_kid, src.tick)]
        forced.setdefault(g, set()).add(src.event)
        arrows.append((g, where[(dst_kid, dst.tick)], src.event))
    last = max(where.values())
    end = min(len(sched), last + 1 + rng.randint(0, cfg.pad_after))
    slots = [_Slot(sched[g], slot_need.get(g, []), forced.get(g, set())) for g in range(end)]
    mutable = sorted(set(where.values()))
    return _Plan(slots, mutable, arrows)


def _plan(spec: SpecFile, rng: random.Random, cfg: GenConfig, for_mutation: bool) -> _Plan:
    c = spec.top
    if isinstance(c, AsyncPar):
        return _async_plan(c, rng, cfg)
    if isinstance(c, Impl):
        ante, cons = reduce_chart(c.antecedent), reduce_chart(c.consequent)
        return _linear_plan([ante, cons], ante.clock, rng, cfg, mutable_from=1)
    if isinstance(c, Loop) and c.count is None:
        body = reduce_chart(c.body)
        reps = 1 if for_mutation else rng.randint(1, cfg.max_iterations)
        return _linear_plan([body] * reps, body.clock, rng, cfg)
    if isinstance(c, Alt):
        branches = []
        stack = [c]
        while stack:
            x = stack.pop(0)
            if isinstance(x, Alt):
                stack[:0] = [x.left, x.right]
            else:
                branches.append(x)
        s = reduce_chart(rng.choice(branches))
        return _linear_plan([s], s.clock, rng, cfg)
    if is_reducible(c):
        s = reduce_chart(c)
        return _linear_plan([s], s.clock, rng, cfg)
    raise CescError(f"cannot generate traces for {label(c)}", code="E_NESTING")


def _slot_expr(slot: _Slot) -> Expr:
    parts: list[Expr] = []
    for s, p in slot.need:
        parts += [occurrence_expr(o) for o in s.occurrences if o.tick == p]
    parts += [Sym(e) for e in sorted(slot.forced)]
    return conj(parts)


def _solve(e: Expr, rng: random.Random) -> dict[str, bool] | None:
    names = sorted(support(e))
    if len(names) > 16:
        raise CescError(f"{len(names)} symbols in one tick exceed the generator cap",
                        code=UNSAT_GEN)
    sols = []
    for bits in itertools.product((False, True), repeat=len(names)):
        v = dict(zip(names, bits))
        if evaluate(e, v):
            sols.append(v)
    return rng.choice(sols) if sols else None


def _fill(plan: _Plan, symtab: SymbolTable, rng: random.Random, density: float) -> list[dict]:
    rows = []
    for slot in plan.slots:
        row = {e: rng.random() < density for e in symtab.events}
        row.update({p: rng.random() < 0.5 for p in symtab.props})
        fixed = _solve(_slot_expr(slot), rng)
        if fixed is None:
            raise CescError("a window tick has contradictory requirements", code=UNSAT_GEN)
        row.update(fixed)
        rows.append(row)
    return rows


def _to_trace(plan: _Plan, rows: list[dict], symtab: SymbolTable) -> Trace:
    recs = tuple(TickRecord(i, slot.clocks, Valuation(row))
                 for i, (slot, row) in enumerate(zip(plan.slots, rows)))
    return Trace(recs, tuple(symtab.clocks))


def judge(spec: SpecFile, t: Trace) -> bool:
    """Does ``t`` exhibit the chart: a detection (detect mode), or a PASS and no FAIL (assert)?"""
    verdicts, _ = expected_verdicts(spec.top, t, spec.top_name)
    kinds = [v[1] for v in verdicts]
    if spec.mode is Mode.ASSERT:
        return "PASS" in kinds and "FAIL" not in kinds
    if isinstance(spec.top, AsyncPar):
        detected = {v[2] for v in verdicts}
        return all(label(ch) in detected for ch in spec.top.children)
    return "DETECTED" in kinds


def violated(spec: SpecFile, t: Trace) -> bool:
    """The property-negative outcome: no scenario detected, or some FAIL in assert mode."""
    verdicts, _ = expected_verdicts(spec.top, t, spec.top_name)
    if spec.mode is Mode.ASSERT:
        return any(v[1] == "FAIL" for v in verdicts)
    return not judge(spec, t)


def _density(cfg: GenConfig, attempt: int) -> float:
    # thin the noise as attempts fail; the last third is noise-free
    frac = max(0.0, 1.0 - attempt / max(1, (2 * cfg.attempts) // 3))
    return cfg.density * frac


def _window_span(plan: _Plan) -> tuple[int, int]:
    return (min(plan.mutable), max(plan.mutable)) if plan.mutable else (0, 0)


def conforming(spec: SpecFile, k: int, cfg: GenConfig | None = None) -> list[Generated]:
    cfg = cfg or GenConfig()
    rng = random.Random(cfg.seed)
    out = []
    for _ in range(k):
        for attempt in range(cfg.attempts):
            plan = _plan(spec, rng, cfg, for_mutation=False)
            rows = _fill(plan, spec.symbols, rng, _density(cfg, attempt))
            t = _to_trace(plan, rows, spec.symbols)
            if judge(spec, t):
                out.append(Generated(t, "conforming", _window_span(plan)))
                break
        else:
            raise CescError(f"no conforming trace after {cfg.attempts} attempts", code=UNSAT_GEN)
    return out


# -- mutations ------------------------------------------------------------------------

def _occs_at(plan: _Plan, i: int):
    for s, p in plan.slots[i].need:
        for o in s.occurrences:
            if o.tick == p:
                yield o


def _drop_event(plan: _Plan, rows: list[dict], rng: random.Random) -> bool:
    cands = []
    for i in plan.mutable:
        for o in _occs_at(plan, i):
            if (o.polarity is Polarity.PRESENT and rows[i][o.event]
                    and (o.guard is None or evaluate(o.guard, rows[i]))):
                cands.append((i, o.event))
        cands += [(i, e) for e in sorted(plan.slots[i].forced) if rows[i][e]]
    if not cands:
        return False
    i, e = rng.choice(sorted(set(cands)))
    rows[i][e] = False
    return True


def _swap_adjacent(plan: _Plan, rows: list[dict], rng: random.Random) -> bool:
    mut = set(plan.mutable)
    cands = [i for i in plan.mutable if i + 1 in mut and rows[i] != rows[i + 1]]
    if not cands:
        return False
    i = rng.choice(cands)
    rows[i], rows[i + 1] = rows[i + 1], rows[i]
    return True


def _violate_guard(plan: _Plan, rows: list[dict], rng: random.Random) -> bool:
    guarded, absent = [], []
    for i in plan.mutable:
        for o in _occs_at(plan, i):
            if o.guard is not None:
                guarded.append((i, o))
            elif o.polarity is Polarity.ABSENT:
                absent.append((i, o))
    if guarded:
        i, o = guarded[rng.randrange(len(guarded))]
        want = o.polarity is not Polarity.PRESENT
        assign = _solve(conj([o.guard]), rng)
        if assign is None or o.event in assign and assign[o.event] != want:
            return False
        rows[i].update(assign)
        rows[i][o.event] = want
        return True
    if absent:
        i, o = absent[rng.randrange(len(absent))]
        rows[i][o.event] = True
        return True
    return False


def _break_arrow(plan: _Plan, rows: list[dict], rng: random.Random) -> bool:
    if not plan.arrows:
        return False
    src, dst, e = plan.arrows[rng.randrange(len(plan.arrows))]
    rows[src][e] = False
    # the source now fires no earlier than the target
    later = [j for j in range(dst, len(rows)) if plan.slots[j].clocks & plan.slots[src].clocks]
    if later:
        rows[later[0]][e] = True
    return True


_APPLY = {
    "drop_event": _drop_event,
    "swap_adjacent": _swap_adjacent,
    "violate_guard": _violate_guard,
    "break_arrow_order": _break_arrow,
}


def mutated(spec: SpecFile, k: int, cfg: GenConfig | None = None,
            kinds: tuple[str, ...] = MUTATIONS) -> list[Generated]:
    """``k`` mutated traces, cycling through ``kinds``; inapplicable kinds are skipped."""
    cfg = cfg or GenConfig()
    rng = random.Random(cfg.seed)
    out = []
    turn = 0
    while len(out) < k:
        made = None
        for attempt in range(cfg.attempts):
            kind = kinds[(turn + attempt) % len(kinds)]
            plan = _plan(spec, rng, cfg, for_mutation=True)
            rows = _fill(plan, spec.symbols, rng, _density(cfg, attempt))
            if not judge(spec, _to_trace(plan, rows, spec.symbols)):
                continue
            rows = [dict(r) for r in rows]
            if not _APPLY[kind](plan, rows, rng):
                continue
            t = _to_trace(plan, rows, spec.symbols)
            if violated(spec, t):
                made = Generated(t, kind, _window_span(plan))
                break
        if made is None:
            raise CescError(f"no mutated trace after {cfg.attempts} attempts", code=UNSAT_GEN)
        out.append(made)
        turn += 1
    return out
