"""Brute-force reference semantics, written without the synthesized automata.

Windows are checked directly against chart occurrences: a present event
must be true (or its guard false), an absent one false, and every arrow's
source must be true at its position in the window. Sequencing, parallel
composition and bounded loops are evaluated from their definitions rather
than by flattening.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .chart import (
    Alt,
    AsyncPar,
    ChartExpr,
    Impl,
    Leaf,
    Loop,
    Par,
    Polarity,
    Scesc,
    Seq,
    SymbolTable,
    clock_of,
    label,
    leaves,
    length_of,
    reduce_chart,
    resolve_cross_arrow,
)
from .errors import CescError
from .expr import evaluate, support
from .trace import TickRecord, Trace, Valuation

DEFAULT_ENUM_CAP = 2 ** 20


@dataclass(frozen=True)
class MatchRecord:
    chart: str
    start: int  # global tick of the window's first record
    end: int
    arrows: tuple[tuple[str, int, int, bool], ...] = ()  # (arrow, source tick, target tick, ok)


def _occ_holds(occ, v: Mapping[str, bool]) -> bool:
    if occ.guard is not None and not evaluate(occ.guard, v):
        return True
    value = bool(v[occ.event])
    return value if occ.polarity is Polarity.PRESENT else not value


def _leaf_window(s: Scesc, vals: Sequence[Mapping[str, bool]], start: int) -> bool:
    for occ in s.occurrences:
        if not _occ_holds(occ, vals[start + occ.tick]):
            return False
    for ar in s.arrows:
        if not vals[start + ar.source.tick][ar.source.event]:
            return False
    return True


def ends_at(c: ChartExpr, vals: Sequence[Mapping[str, bool]], t: int) -> bool:
    """Does a window of the reducible chart ``c`` end at local index ``t``?"""
    n = length_of(c)
    if t < n - 1 or t >= len(vals):
        return False
    if isinstance(c, Leaf):
        return _leaf_window(c.scesc, vals, t - n + 1)
    if isinstance(c, Seq):
        return ends_at(c.second, vals, t) and ends_at(c.first, vals, t - length_of(c.second))
    if isinstance(c, Par):
        start = t - n + 1
        return (ends_at(c.left, vals, start + length_of(c.left) - 1)
                and ends_at(c.right, vals, start + length_of(c.right) - 1))
    if isinstance(c, Loop) and c.count is not None:
        m = length_of(c.body)
        return all(ends_at(c.body, vals, t - j * m) for j in range(c.count))
    raise CescError(f"{label(c)} is not a fixed pattern", code="E_NESTING")


def _alt_branches(c: ChartExpr) -> list[ChartExpr]:
    if isinstance(c, Alt):
        return _alt_branches(c.left) + _alt_branches(c.right)
    return [c]


def _position_ok(s: Scesc, vals: Sequence[Mapping[str, bool]], start: int, p: int) -> bool:
    """Position ``p`` of an attempt starting at ``start``: element and arrow checks."""
    v = vals[start + p]
    for occ in s.occurrences:
        if occ.tick == p and not _occ_holds(occ, v):
            return False
    for ar in s.arrows:
        if ar.target.tick == p and not vals[start + ar.source.tick][ar.source.event]:
            return False
    return True


def _domain(trace: Trace, clock: str) -> tuple[list[int], list[Valuation]]:
    recs = [r for r in trace.records if clock in r.ticking_clocks]
    return [r.global_index for r in recs], [r.valuation for r in recs]


class _AsyncOracle:
    """Per-domain windows plus cross-domain arrows compared on the global clock.

    A cross arrow's target position passes when some attempt of the source
    chart recorded the source event at a strictly earlier global tick and had
    not failed before the target's tick.
    """

    def __init__(self, c: AsyncPar, trace: Trace):
        self.kids = {label(ch): reduce_chart(ch) for ch in c.children}
        self.dom = {k: _domain(trace, s.clock) for k, s in self.kids.items()}
        self.cross: dict[tuple[str, int], list] = {}
        for ar in c.arrows:
            src, dst = resolve_cross_arrow(ar, self.kids)
            self.cross.setdefault((ar.target_chart, dst.tick), []).append(
                (ar.source_chart, src.event, src.tick))
        self.pos_ok = lru_cache(maxsize=None)(self._pos_ok)

    def _pos_ok(self, kid: str, start: int, p: int) -> bool:
        s = self.kids[kid]
        globs, vals = self.dom[kid]
        if not _position_ok(s, vals, start, p):
            return False
        g_y = globs[start + p]
        for src_kid, event, i in self.cross.get((kid, p), ()):
            if not self.live_source(src_kid, event, i, g_y):
                return False
        return True

    def alive_before(self, kid: str, start: int, g: int) -> bool:
        s = self.kids[kid]
        globs, _ = self.dom[kid]
        for p in range(s.tick_count):
            if start + p >= len(globs) or globs[start + p] >= g:
                break
            if not self.pos_ok(kid, start, p):
                return False
        return True

    def live_source(self, kid: str, event: str, i: int, g_y: int) -> bool:
        globs, vals = self.dom[kid]
        for start in range(len(globs) - i):
            if globs[start + i] >= g_y:
                break
            if vals[start + i][event] and self.alive_before(kid, start, g_y):
                return True
        return False

    def matches(self) -> list[MatchRecord]:
        out = []
        for kid, s in self.kids.items():
            globs, _ = self.dom[kid]
            n = s.tick_count
            for start in range(len(globs) - n + 1):
                if all(self.pos_ok(kid, start, p) for p in range(n)):
                    out.append(MatchRecord(kid, globs[start], globs[start + n - 1]))
        return out


def window_match(c: ChartExpr, t: Trace, name: str | None = None) -> list[MatchRecord]:
    """Every matching window of a detection chart, in order of end tick."""
    name = name or label(c)
    if isinstance(c, AsyncPar):
        return sorted(_AsyncOracle(c, t).matches(), key=lambda m: (m.end, m.chart))
    if isinstance(c, Impl):
        raise CescError("implies charts have verdicts, not matches; use expected_verdicts",
                        code="E_MODE")
    body = c.body if isinstance(c, Loop) and c.count is None else c
    branches = _alt_branches(body)
    globs, vals = _domain(t, clock_of(c))
    out = []
    for branch in branches:
        n = length_of(branch)
        chart = name if len(branches) == 1 else label(branch)
        for end in range(n - 1, len(vals)):
            if ends_at(branch, vals, end):
                arrows = tuple(
                    (f"{ar.source}->{ar.target}", globs[end - n + 1 + ar.source.tick],
                     globs[end - n + 1 + ar.target.tick], True)
                    for ar in _arrows_in_window(branch))
                out.append(MatchRecord(chart, globs[end - n + 1], globs[end], arrows))
    return sorted(out, key=lambda m: (m.end, m.chart))


def _arrows_in_window(c: ChartExpr):
    try:
        return reduce_chart(c).arrows
    except CescError:
        return ()


# -- verdict-level expectations ------------------------------------------------------

def verdicts_at(c: ChartExpr, name: str, globs: Sequence[int],
                vals: Sequence[Mapping[str, bool]], t: int) -> list[tuple[int, str, str, str]]:
    """Expected verdicts emitted at local index ``t`` of a single-clock chart.

    Tuples are ``(global tick, kind, chart, detail)``, matching the runtime's
    :class:`~cesc.runtime.Verdict` fields.
    """
    g = globs[t]
    if isinstance(c, Impl):
        out = []
        ante, cons = c.antecedent, reduce_chart(c.consequent)
        m = cons.tick_count
        for p in range(m):
            a_end = t - 1 - p
            if a_end < 0 or not ends_at(ante, vals, a_end):
                continue
            start = a_end + 1
            prior_ok = all(_position_ok(cons, vals, start, q) for q in range(p))
            if not prior_ok:
                continue
            here = _position_ok(cons, vals, start, p)
            if not here:
                out.append((g, "FAIL", name, f"antecedent_end={globs[a_end]}"))
            elif p == m - 1:
                out.append((g, "PASS", name, f"antecedent_end={globs[a_end]}"))
        return sorted(out, key=lambda x: (x[1] == "FAIL", x[3]))
    if isinstance(c, Loop) and c.count is None:
        n = length_of(c.body)
        if not ends_at(c.body, vals, t):
            return []
        count = 1
        while ends_at(c.body, vals, t - count * n):
            count += 1
        return [(g, "DETECTED", name, f"start={globs[t - n + 1]} iterations={count}")]
    branches = _alt_branches(c)
    if len(branches) > 1:
        hits = []
        for b in branches:
            if ends_at(b, vals, t):
                hits.append(f"{label(b)}@{globs[t - length_of(b) + 1]}")
        # runtime orders branches by position in the alt tree
        if hits:
            return [(g, "DETECTED", name, "branches=" + ",".join(hits))]
        return []
    if ends_at(c, vals, t):
        return [(g, "DETECTED", name, f"start={globs[t - length_of(c) + 1]}")]
    return []


def expected_verdicts(c: ChartExpr, t: Trace, name: str | None = None
                      ) -> tuple[list[tuple[int, str, str, str]], int]:
    """All expected verdicts for a trace, plus the count of unresolved obligations."""
    name = name or label(c)
    if isinstance(c, AsyncPar):
        matches = _AsyncOracle(c, t).matches()
        out = sorted(((m.end, "DETECTED", m.chart, f"start={m.start}") for m in matches),
                     key=lambda x: (x[0], x[2]))
        return out, 0
    globs, vals = _domain(t, clock_of(c))
    out = []
    for i in range(len(vals)):
        out.extend(verdicts_at(c, name, globs, vals, i))
    pending = 0
    if isinstance(c, Impl):
        cons = reduce_chart(c.consequent)
        m = cons.tick_count
        for a_end in range(len(vals)):
            if not ends_at(c.antecedent, vals, a_end):
                continue
            start = a_end + 1
            avail = len(vals) - start
            if avail < m and all(_position_ok(cons, vals, start, q) for q in range(avail)):
                pending += 1
    return out, pending


def chart_support(c: ChartExpr) -> frozenset[str]:
    """Symbols the chart's occurrences and guards mention."""
    out: set[str] = set()
    for s in leaves(c):
        for occ in s.occurrences:
            out.add(occ.event)
            if occ.guard is not None:
                out |= support(occ.guard)
    return frozenset(out)


# -- exhaustive comparison ------------------------------------------------------------

@dataclass
class EquivReport:
    ok: bool
    traces: int
    max_length: int
    counterexample: Trace | None = None
    expected: list | None = None
    observed: list | None = None

    def format(self) -> str:
        if self.ok:
            return f"equivalent: {self.traces} traces up to length {self.max_length}, 0 mismatches\n"
        return (f"counterexample of length {len(self.counterexample)} after {self.traces} traces\n"
                f"  oracle:  {self.expected}\n  monitor: {self.observed}\n")


def alphabet(c: ChartExpr, symtab: SymbolTable) -> list[tuple[frozenset[str], Valuation]]:
    """Per-tick input letters: (ticking clocks, valuation over the chart's support)."""
    sup = sorted(chart_support(c))
    clocks = sorted({s.clock for s in leaves(c)})
    clock_sets = [frozenset(cs) for r in range(1, len(clocks) + 1)
                  for cs in itertools.combinations(clocks, r)]
    letters = []
    for cs in clock_sets:
        for bits in itertools.product((False, True), repeat=len(sup)):
            data = {name: False for name in symtab.symbols}
            data.update(zip(sup, bits))
            letters.append((cs, Valuation(data)))
    return letters


def _fast_single(c: ChartExpr, m, letters: list, maxlen: int, vals: list,
                 best: list) -> int:
    """Prefix-tree walk for a scoreboard-free single monitor.

    Only detection instants are compared (the start tick follows from the
    pattern length); any mismatch is replayed by the caller.
    """
    n = m.n
    final = [n in st.matched_lengths for st in m.states]
    count = 0
    stack = [(m.initial, 0)]  # (state, next letter index) per depth
    path: list = []
    while stack:
        sid, li = stack[-1]
        if li == len(letters) or (best[0] is not None and len(path) + 1 >= len(best[0])):
            stack.pop()
            if path:
                path.pop()
                vals.pop()
            continue
        stack[-1] = (sid, li + 1)
        cs, v = letters[li]
        count += 1
        dst = m.transition_for(sid, v).dst
        vals.append(v)
        path.append((cs, v))
        if final[dst] != ends_at(c, vals, len(vals) - 1):
            if best[0] is None or len(path) < len(best[0]):
                best[0] = list(path)
            path.pop()
            vals.pop()
            stack.pop()
            if path:
                path.pop()
                vals.pop()
            continue
        if len(path) < maxlen:
            stack.append((dst, 0))
        else:
            path.pop()
            vals.pop()
    return count


def exhaustive_equiv(c: ChartExpr, maxlen: int, symtab: SymbolTable, net=None,
                     name: str | None = None, cap: int = DEFAULT_ENUM_CAP,
                     stepper: Callable | None = None) -> EquivReport:
    """Compare oracle and monitor verdicts on every trace up to ``maxlen`` ticks.

    Traces are enumerated depth-first as a prefix tree, so each node is one
    trace; the shortest disagreeing trace is returned as the counterexample.
    """
    from .runtime import initial_state, step
    from .synth import compose

    name = name or label(c)
    letters = alphabet(c, symtab)
    total = sum(len(letters) ** k for k in range(1, maxlen + 1))
    if total > cap:
        raise CescError(f"{total} traces exceed the enumeration cap {cap}",
                        code="E_ENUMERATION_TOO_LARGE")
    if net is None:
        net = compose(c, name)
    single_clock = not isinstance(c, AsyncPar)
    clock = clock_of(c)
    best: list = [None]
    count = 0

    globs = range(maxlen)
    vals: list[Valuation] = []

    def oracle_here(prefix: list[TickRecord]) -> list:
        if single_clock:
            # a single-clock alphabet ticks its clock on every record
            return verdicts_at(c, name, globs, vals, len(vals) - 1)
        expected, _ = expected_verdicts(c, Trace(tuple(prefix), symtab.clocks), name)
        return [x for x in expected if x[0] == prefix[-1].global_index]

    def visit(rs, prefix: list[TickRecord]) -> None:
        nonlocal count
        depth = len(prefix) + 1
        if best[0] is not None and depth >= len(best[0][0]):
            return
        for cs, val in letters:
            rec = TickRecord(len(prefix), cs, val)
            prefix.append(rec)
            vals.append(val)
            count += 1
            rs2, vs = step(net, rs, rec)
            got = sorted((v.global_tick, v.kind, v.chart, v.detail) for v in vs)
            want = sorted(oracle_here(prefix))
            if got != want:
                if best[0] is None or len(prefix) < len(best[0][0]):
                    best[0] = (list(prefix), want, got)
                prefix.pop()
                vals.pop()
                return
            if depth < maxlen:
                visit(rs2, prefix)
            prefix.pop()
            vals.pop()

    if (single_clock and net.kind == "single" and stepper is None
            and not net.monitors[0].has_scoreboard):
        count = _fast_single(c, net.monitors[0], letters, maxlen, vals, best)
        if best[0] is not None:
            # replay through the full runtime so the report carries real verdicts
            recs = [TickRecord(i, cs, v) for i, (cs, v) in enumerate(best[0])]
            rs = initial_state(net, symtab.events)
            got: list = []
            for rec in recs:
                rs, vs = step(net, rs, rec)
                got = sorted((v.global_tick, v.kind, v.chart, v.detail) for v in vs)
            want = sorted(verdicts_at(c, name, globs, [r.valuation for r in recs], len(recs) - 1))
            best[0] = (recs, want, got)
    else:
        visit(initial_state(net, symtab.events), [])
    if best[0] is None:
        return EquivReport(True, count, maxlen)
    recs, want, got = best[0]
    return EquivReport(False, count, maxlen, Trace(tuple(recs), symtab.clocks), want, got)
