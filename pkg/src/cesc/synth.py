"""Monitor synthesis: patterns, subset-construction monitors, causality, nets.

A monitor state is the set of pattern-prefix lengths matched by the most
recent inputs (always containing 0). Reaching a state that contains ``n``
means the last ``n`` inputs matched the whole pattern. Transition guards
are symbolic and partition the valuation space of the monitor's universe.

Causality arrows ``e_x -> e_y`` are compiled into scoreboard traffic:
``add`` when a match attempt passes ``e_x``'s tick with ``e_x`` true,
``chk`` when it extends past ``e_y``'s tick, and ``del`` when an attempt
that passed ``e_x`` is abandoned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .chart import (
    Alt,
    AsyncPar,
    CausalityArrow,
    ChartExpr,
    Impl,
    Loop,
    OccRef,
    Polarity,
    Scesc,
    flatten_seq,
    is_reducible,
    label,
    reduce_chart,
    resolve_cross_arrow,
)
from .errors import CescError, SynthesisError
from .expr import (
    DEFAULT_SAT_CAP,
    TRUE,
    Expr,
    Not,
    Or,
    Sym,
    conj,
    disj,
    evaluate,
    support,
    valuations,
)


@dataclass(frozen=True)
class Pattern:
    elements: tuple[Expr, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i: int) -> Expr:
        return self.elements[i]

    def support(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for e in self.elements:
            out |= support(e)
        return out


def occurrence_expr(occ) -> Expr:
    lit: Expr = Sym(occ.event)
    if occ.polarity is Polarity.ABSENT:
        lit = Not(lit)
    if occ.guard is not None:
        return Or(Not(occ.guard), lit)
    return lit


def extract_pattern(c: Scesc, cap: int = DEFAULT_SAT_CAP) -> Pattern:
    """One expression per tick: the conjunction of that tick's occurrences.

    ``e`` gives ``e``, ``[p]: e`` gives ``!p | e``, ``absent e`` gives ``!e``;
    an empty tick gives ``true``.
    """
    elements = []
    for i in range(c.tick_count):
        parts = [occurrence_expr(o) for o in c.occurrences if o.tick == i]
        elem = conj(parts)
        sup = support(elem)
        if len(sup) <= cap and not any(evaluate(elem, v) for v in valuations(sup)):
            raise SynthesisError(f"tick {i} of chart {c.name} can never match",
                                 code="E_VACUOUS")
        elements.append(elem)
    return Pattern(tuple(elements))


# -- monitor data ----------------------------------------------------------------

@dataclass(frozen=True)
class Action:
    kind: str  # "add" or "del"
    event: str
    length: int  # prefix length of the attempt before this step
    position: int  # tick of the arrow's source occurrence


@dataclass(frozen=True)
class Check:
    event: str
    length: int  # prefix length being extended; the checked tick
    position: int  # tick of the source occurrence
    domain: str | None = None  # source clock for cross-domain arrows


@dataclass(frozen=True)
class MonitorState:
    id: int
    matched_lengths: frozenset[int]
    is_final: bool

    def label(self) -> str:
        return "{" + ",".join(str(k) for k in sorted(self.matched_lengths)) + "}"


@dataclass(frozen=True)
class Transition:
    src: int
    guard: Expr
    dst: int
    actions: tuple[Action, ...] = ()
    checks: tuple[Check, ...] = ()


@dataclass(frozen=True)
class Export:
    """An occurrence of this monitor that other domains check for."""

    event: str
    position: int


@dataclass(frozen=True)
class Import:
    """A cross-domain check: reaching ``target_position`` needs ``event`` from ``domain``."""

    event: str
    position: int
    domain: str
    chart: str
    target_event: str
    target_position: int


@dataclass(frozen=True)
class Monitor:
    name: str
    clock: str
    pattern: Pattern
    universe: tuple[str, ...]
    states: tuple[MonitorState, ...]
    transitions: tuple[Transition, ...]
    initial: int = 0
    causality: tuple[CausalityArrow, ...] = ()
    exports: tuple[Export, ...] = ()
    imports: tuple[Import, ...] = ()
    anchored: bool = False
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        by_src: dict[int, list[Transition]] = {}
        for tr in self.transitions:
            by_src.setdefault(tr.src, []).append(tr)
        ids = {s.matched_lengths: s.id for s in self.states}
        object.__setattr__(self, "_index", {"by_src": by_src, "ids": ids, "cache": {}})

    @property
    def n(self) -> int:
        return len(self.pattern)

    @property
    def finals(self) -> tuple[int, ...]:
        return tuple(s.id for s in self.states if s.is_final)

    @property
    def has_scoreboard(self) -> bool:
        return bool(self.causality or self.exports or self.imports)

    def state(self, sid: int) -> MonitorState:
        return self.states[sid]

    def state_id(self, matched: frozenset[int]) -> int | None:
        return self._index["ids"].get(matched)

    def outgoing(self, sid: int) -> list[Transition]:
        return self._index["by_src"].get(sid, [])

    def transition_for(self, sid: int, v: Mapping[str, bool]) -> Transition:
        """The unique enabled transition out of ``sid`` under ``v`` (memoized)."""
        key = (sid, tuple(v[u] for u in self.universe))
        cache = self._index["cache"]
        tr = cache.get(key)
        if tr is None:
            enabled = [t for t in self.outgoing(sid) if evaluate(t.guard, v)]
            if len(enabled) != 1:
                from .errors import RuntimeCheckError
                raise RuntimeCheckError(f"monitor {self.name}: {len(enabled)} enabled "
                                        f"transitions from state {sid}")
            tr = cache[key] = enabled[0]
        return tr


# -- construction ------------------------------------------------------------------

def _prime_cover(required: set[tuple], dont_care: set[tuple], width: int) -> list[tuple]:
    """Small Quine-McCluskey: cubes (True/False/None per predicate) covering ``required``."""
    if not required:
        return []
    level = set(required) | set(dont_care)
    primes: set[tuple] = set()
    while level:
        nxt: set[tuple] = set()
        used: set[tuple] = set()
        for cube in level:
            for i in range(width):
                if cube[i] is None:
                    continue
                other = cube[:i] + (not cube[i],) + cube[i + 1:]
                if other in level:
                    nxt.add(cube[:i] + (None,) + cube[i + 1:])
                    used.add(cube)
                    used.add(other)
        primes |= level - used
        level = nxt

    def covers(cube: tuple, vec: tuple) -> bool:
        return all(c is None or c == x for c, x in zip(cube, vec))

    primes_list = sorted(primes, key=lambda c: (-sum(x is None for x in c),
                                                 tuple(2 if x is None else int(x) for x in c)))
    chosen: list[tuple] = []
    uncovered = set(required)
    # essential primes first, then greedy
    for vec in sorted(required):
        hits = [p for p in primes_list if covers(p, vec)]
        if len(hits) == 1 and hits[0] not in chosen:
            chosen.append(hits[0])
    for p in chosen:
        uncovered -= {v for v in uncovered if covers(p, v)}
    while uncovered:
        best = max(primes_list, key=lambda p: sum(covers(p, v) for v in uncovered))
        chosen.append(best)
        uncovered -= {v for v in uncovered if covers(best, v)}
    return sorted(chosen, key=lambda c: tuple(2 if x is None else int(x) for x in c))


def _cube_expr(cube: tuple, preds: list[Expr]) -> Expr:
    lits = []
    for val, p in zip(cube, preds):
        if val is None:
            continue
        lits.append(p if val else Not(p))
    return conj(lits)


def _construct(name: str, clock: str, pattern: Pattern, universe: Iterable[str],
               arrows: Iterable[CausalityArrow] = (), exports: Iterable[Export] = (),
               imports: Iterable[Import] = (), anchored: bool = False,
               cap: int = DEFAULT_SAT_CAP) -> Monitor:
    n = len(pattern)
    if n < 1:
        raise SynthesisError("pattern must have at least one element", code="E_EMPTY_PATTERN")
    arrows = tuple(arrows)
    exports = tuple(exports)
    imports = tuple(imports)
    universe = tuple(sorted(set(universe)))
    if len(universe) > cap:
        raise SynthesisError(f"monitor {name} needs {len(universe)} symbols; cap is {cap}",
                             code="E_UNIVERSE_TOO_LARGE")
    missing = pattern.support() - set(universe)
    if missing:
        raise SynthesisError(f"pattern symbols {sorted(missing)} outside universe",
                             code="E_UNDECLARED_SYMBOL")

    # arrow sources: position -> events recorded when an attempt passes it
    sources: dict[int, list[str]] = {}
    for ar in arrows:
        if ar.source.tick >= ar.target.tick or not 0 <= ar.source.tick < n \
                or not 0 <= ar.target.tick < n:
            raise SynthesisError(f"arrow {ar.source} -> {ar.target} out of scope",
                                 code="E_ARROW_SCOPE")
        sources.setdefault(ar.source.tick, [])
        if ar.source.event not in sources[ar.source.tick]:
            sources[ar.source.tick].append(ar.source.event)
    for ex in exports:
        sources.setdefault(ex.position, [])
        if ex.event not in sources[ex.position]:
            sources[ex.position].append(ex.event)
    for evs in sources.values():
        for e in evs:
            if e not in universe:
                raise SynthesisError(f"arrow source {e} outside universe", code="E_ARROW_SCOPE")
    check_templates: dict[int, list[Check]] = {}
    for ar in arrows:
        chk = Check(ar.source.event, ar.target.tick, ar.source.tick)
        if chk not in check_templates.setdefault(ar.target.tick, []):
            check_templates[ar.target.tick].append(chk)
    for im in imports:
        chk = Check(im.event, im.target_position, im.position, im.domain)
        if chk not in check_templates.setdefault(im.target_position, []):
            check_templates[im.target_position].append(chk)

    all_vals = list(valuations(universe))
    start = frozenset({0})
    order: list[frozenset[int]] = [start]
    seen = {start}
    raw_transitions: list[tuple[frozenset[int], Expr, frozenset[int], tuple, tuple]] = []
    qi = 0
    while qi < len(order):
        S = order[qi]
        qi += 1
        preds: list[Expr] = []

        def pred_index(e: Expr) -> int:
            if e not in preds:
                preds.append(e)
            return preds.index(e)

        ext_idx = {k: pred_index(pattern[k]) for k in sorted(S) if k < n}
        src_idx = {(k, e): pred_index(Sym(e)) for k in sorted(S) for e in sources.get(k, ())}
        outcome_of: dict[tuple, tuple] = {}
        for v in all_vals:
            vec = tuple(evaluate(p, v) for p in preds)
            if vec in outcome_of:
                continue
            succ = {k + 1 for k, i in ext_idx.items() if vec[i]}
            if not anchored:
                succ.add(0)
            succ = frozenset(succ)
            actions = []
            for k in sorted(S):
                for e in sources.get(k, ()):
                    if k + 1 in succ and vec[src_idx[(k, e)]]:
                        actions.append(Action("add", e, k, k))
            for k in sorted(S):
                if 0 < k < n and k + 1 not in succ:
                    for pos in sorted(sources):
                        if pos < k:
                            actions.extend(Action("del", e, k, pos) for e in sources[pos])
            checks = tuple(chk for k in sorted(S) if k + 1 in succ
                           for chk in check_templates.get(k, ()))
            outcome_of[vec] = (succ, tuple(actions), checks)

        groups: dict[tuple, set[tuple]] = {}
        for vec, out in outcome_of.items():
            groups.setdefault(out, set()).add(vec)
        width = len(preds)
        dont_care: set[tuple] = set()
        if width <= 12:
            dont_care = set(itertools.product((False, True), repeat=width)) - set(outcome_of)
        for out, vecs in sorted(groups.items(), key=lambda kv: min(kv[1])):
            succ, actions, checks = out
            if len(groups) == 1:
                guard = TRUE
            else:
                cubes = _prime_cover(vecs, dont_care, width)
                guard = disj(_cube_expr(c, preds) for c in cubes)
            raw_transitions.append((S, guard, succ, actions, checks))
            targets = [succ]
            fail_lengths = sorted({c.length + 1 for c in checks})
            for r in range(1, len(fail_lengths) + 1):
                for dropped in itertools.combinations(fail_lengths, r):
                    targets.append(succ - frozenset(dropped))
            for tgt in targets:
                if tgt not in seen:
                    seen.add(tgt)
                    order.append(tgt)

    ids = {s: i for i, s in enumerate(order)}
    states = tuple(MonitorState(ids[s], s, n in s) for s in order)
    transitions = tuple(Transition(ids[S], g, ids[D], a, c) for S, g, D, a, c in raw_transitions)
    return Monitor(name, clock, pattern, universe, states, transitions, 0, arrows, exports,
                   imports, anchored)


def build_monitor(p: Pattern, universe: Iterable[str], name: str = "M", clock: str = "clk",
                  anchored: bool = False, cap: int = DEFAULT_SAT_CAP) -> Monitor:
    """Deterministic, total sliding-window monitor for ``p`` (no causality)."""
    return _construct(name, clock, p, universe, anchored=anchored, cap=cap)


def add_causality_check(m: Monitor, arrow: CausalityArrow, cap: int = DEFAULT_SAT_CAP) -> Monitor:
    """Return ``m`` extended with add/chk/del traffic for ``arrow``."""
    if arrow.source.tick >= arrow.target.tick:
        raise SynthesisError(f"arrow {arrow.source} -> {arrow.target} must point forward",
                             code="E_ARROW_SCOPE")
    universe = set(m.universe) | {arrow.source.event}
    return _construct(m.name, m.clock, m.pattern, universe, m.causality + (arrow,), m.exports,
                      m.imports, m.anchored, cap)


def synthesize_scesc(s: Scesc, name: str | None = None, exports: Iterable[Export] = (),
                     imports: Iterable[Import] = (), anchored: bool = False,
                     cap: int = DEFAULT_SAT_CAP) -> Monitor:
    """Pattern, monitor and every causality arrow of ``s`` in one construction."""
    pattern = extract_pattern(s, cap)
    exports, imports = tuple(exports), tuple(imports)
    universe = set(pattern.support())
    universe |= {a.source.event for a in s.arrows}
    universe |= {e.event for e in exports}
    return _construct(name or s.name, s.clock, pattern, universe, s.arrows, exports, imports,
                      anchored, cap)


def integer_state_view(m: Monitor) -> dict[int, int] | None:
    """Map each state to its longest match when no state tracks two live attempts.

    When every state holds at most one nonzero prefix length, the monitor is
    the plain ``{0..n}`` counter automaton and this returns ``state -> k``.
    """
    view = {}
    for s in m.states:
        live = s.matched_lengths - {0}
        if len(live) > 1:
            return None
        view[s.id] = max(s.matched_lengths, default=0)
    return view


# -- nets -------------------------------------------------------------------------

@dataclass(frozen=True)
class MonitorNet:
    """Monitors for a whole chart plus how their outcomes combine.

    ``kind`` is ``single``, ``alt`` (any branch detects), ``loop`` (unbounded
    repetition with iteration counts), ``impl`` (``monitors[0]`` is the
    antecedent, ``monitors[1]`` the anchored consequent) or ``async`` (one
    monitor per clock domain).
    """

    kind: str
    name: str
    monitors: tuple[Monitor, ...]
    cross_arrows: tuple[tuple[str, OccRef, str, OccRef], ...] = ()

    @property
    def clocks(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(m.clock for m in self.monitors))


def pattern_concat(a: Pattern, b: Pattern) -> Pattern:
    return Pattern(a.elements + b.elements)


def pattern_par(a: Pattern, b: Pattern, pad: bool = False) -> Pattern:
    if len(a) != len(b):
        if not pad:
            raise SynthesisError(f"par of lengths {len(a)} and {len(b)}", code="E_PAR_LENGTH")
        n = max(len(a), len(b))
        a = Pattern(a.elements + (TRUE,) * (n - len(a)))
        b = Pattern(b.elements + (TRUE,) * (n - len(b)))
    from .expr import And
    return Pattern(tuple(And(x, y) for x, y in zip(a.elements, b.elements)))


def pattern_loop(p: Pattern, k: int) -> Pattern:
    return Pattern(p.elements * k)


def _alt_branches(c: ChartExpr) -> list[ChartExpr]:
    if isinstance(c, Alt):
        return _alt_branches(c.left) + _alt_branches(c.right)
    return [c]


def compose(c: ChartExpr, name: str | None = None, cap: int = DEFAULT_SAT_CAP) -> MonitorNet:
    """Synthesize the monitor net for a validated chart tree."""
    name = name or label(c)
    c = flatten_seq(c)
    try:
        if is_reducible(c):
            return MonitorNet("single", name, (synthesize_scesc(reduce_chart(c), name, cap=cap),))
        if isinstance(c, Alt):
            branches = _alt_branches(c)
            mons = tuple(synthesize_scesc(reduce_chart(b), label(b), cap=cap) for b in branches)
            clocks = {m.clock for m in mons}
            if len(clocks) > 1:
                raise SynthesisError(f"alt branches on clocks {sorted(clocks)}",
                                     code="E_CLOCK_MISMATCH")
            return MonitorNet("alt", name, mons)
        if isinstance(c, Loop) and c.count is None:
            return MonitorNet("loop", name, (synthesize_scesc(reduce_chart(c.body), name, cap=cap),))
        if isinstance(c, Impl):
            ante = reduce_chart(c.antecedent)
            cons = reduce_chart(c.consequent)
            if ante.clock != cons.clock:
                raise SynthesisError("implies children on different clocks",
                                     code="E_CLOCK_MISMATCH")
            return MonitorNet("impl", name, (
                synthesize_scesc(ante, label(c.antecedent), cap=cap),
                synthesize_scesc(cons, label(c.consequent), anchored=True, cap=cap),
            ))
        if isinstance(c, AsyncPar):
            kids = {label(ch): reduce_chart(ch) for ch in c.children}
            clocks = [s.clock for s in kids.values()]
            if len(set(clocks)) != len(clocks):
                raise SynthesisError("async children must use distinct clocks",
                                     code="E_ASYNC_SAME_CLOCK")
            exports: dict[str, list[Export]] = {k: [] for k in kids}
            imports: dict[str, list[Import]] = {k: [] for k in kids}
            cross = []
            for ar in c.arrows:
                if ar.source_chart == ar.target_chart:
                    raise SynthesisError("cross-domain arrow inside one chart",
                                         code="E_ARROW_SCOPE")
                src, dst = resolve_cross_arrow(ar, kids)
                exports[ar.source_chart].append(Export(src.event, src.tick))
                imports[ar.target_chart].append(Import(src.event, src.tick,
                                                       kids[ar.source_chart].clock,
                                                       ar.source_chart, dst.event, dst.tick))
                cross.append((ar.source_chart, src, ar.target_chart, dst))
            mons = tuple(synthesize_scesc(s, k, exports[k], imports[k], cap=cap)
                         for k, s in kids.items())
            return MonitorNet("async", name, mons, tuple(cross))
    except SynthesisError:
        raise
    except CescError as err:
        raise SynthesisError(err.message, code=err.code, line=err.line) from None
    raise SynthesisError(f"cannot synthesize {label(c)}; validate the chart file first",
                         code="E_NESTING")


def synthesize(spec, cap: int = DEFAULT_SAT_CAP) -> MonitorNet:
    """Net for a parsed :class:`~cesc.chart.SpecFile`."""
    return compose(spec.top, spec.top_name, cap)


def with_retarget(m: Monitor, index: int, dst: int) -> Monitor:
    """Copy of ``m`` with one transition pointed elsewhere (for fault injection)."""
    trs = list(m.transitions)
    trs[index] = replace(trs[index], dst=dst)
    return replace(m, transitions=tuple(trs), _index=None)
