"""Run a :class:`~cesc.synth.MonitorNet` over a trace and collect verdicts.

Each record of the trace is one global tick. Monitors whose clock ticks on
that record take exactly one transition; scoreboard writes made during the
tick are committed after every monitor has stepped.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import RuntimeCheckError
from .scoreboard import Scoreboard
from .synth import Monitor, MonitorNet, Transition
from .trace import TickRecord, Trace

DETECTED = "DETECTED"
PASS = "PASS"
FAIL = "FAIL"
_KIND_ORDER = {DETECTED: 0, PASS: 1, FAIL: 2}


@dataclass(frozen=True, order=True)
class Verdict:
    global_tick: int
    kind: str
    chart: str
    detail: str = ""

    def sort_key(self) -> tuple:
        return (self.global_tick, _KIND_ORDER[self.kind], self.chart, self.detail)

    def format(self) -> str:
        return f"{self.kind} {self.global_tick} {self.chart} {self.detail}".rstrip()


@dataclass
class Obligation:
    start: int  # local tick at which the consequent's first element is read
    antecedent_end: int  # global tick of the antecedent detection
    state: int


@dataclass
class RunState:
    tick: int
    states: list[int]
    local: list[int]
    recent: list[tuple[int, ...]]  # last n global indices seen by each monitor
    obligations: list[Obligation]
    scoreboard: Scoreboard
    loop_hits: dict[int, int] = field(default_factory=dict)  # local end -> iterations
    visited: list[set[int]] = field(default_factory=list)

    def copy(self, share_scoreboard: bool = False) -> RunState:
        sb = self.scoreboard if share_scoreboard else self.scoreboard.copy()
        return RunState(self.tick, list(self.states), list(self.local), list(self.recent),
                        [Obligation(o.start, o.antecedent_end, o.state) for o in self.obligations],
                        sb, dict(self.loop_hits), [set(v) for v in self.visited])


def initial_state(net: MonitorNet, events: Iterable[str] | None = None) -> RunState:
    k = len(net.monitors)
    return RunState(0, [m.initial for m in net.monitors], [0] * k, [()] * k, [],
                    Scoreboard(events), {}, [{m.initial} for m in net.monitors])


def _advance(m: Monitor, ns, sid: int, tr: Transition, t: int, g: int,
             sb: Scoreboard) -> frozenset[int]:
    """Apply ``tr``'s scoreboard traffic; return the actual successor's matched set."""
    n = m.n
    succ = m.states[tr.dst].matched_lengths
    failed = set()
    for chk in tr.checks:
        if chk.domain is None:
            ok = sb.chk_evt(chk.event, attempt=(ns, t - chk.length), position=chk.position)
        else:
            ok = sb.chk_evt(chk.event, position=chk.position, domain=chk.domain)
        if not ok:
            failed.add(chk.length + 1)
    for a in tr.actions:
        att = (ns, t - a.length)
        if a.kind == "add":
            if a.length + 1 not in failed:
                sb.add_evt(a.event, g, m.clock, att, a.position)
        else:
            sb.del_evt(a.event, att)
    if m.has_scoreboard:
        for k in m.states[sid].matched_lengths:
            if 0 < k < n and k + 1 not in succ:
                sb.abandoned.add((ns, t - k))
        for length in failed:
            sb.abandon((ns, t - (length - 1)))
    actual = succ - failed if failed else succ
    if n in actual and m.has_scoreboard:
        sb.complete((ns, t - (n - 1)), keep=[(e.event, e.position) for e in m.exports])
    return actual


def _state_for(m: Monitor, matched: frozenset[int]) -> int:
    sid = m.state_id(matched)
    if sid is None:
        raise RuntimeCheckError(f"monitor {m.name} has no state {sorted(matched)}")
    return sid


def step(net: MonitorNet, rs: RunState, rec: TickRecord,
         order: Sequence[int] | None = None, inplace: bool = False
         ) -> tuple[RunState, list[Verdict]]:
    """Consume one global tick; returns the new state and this tick's verdicts.

    ``order`` permutes the stepping order of the ticking monitors; the
    result does not depend on it. ``rs`` is left untouched unless
    ``inplace`` is set.
    """
    uses_sb = any(m.has_scoreboard for m in net.monitors)
    new = rs if inplace else rs.copy(share_scoreboard=not uses_sb)
    sb = new.scoreboard
    g = rec.global_index
    v = rec.valuation
    verdicts: list[Verdict] = []
    sliding = (0,) if net.kind == "impl" else range(len(net.monitors))
    ticking = [i for i in sliding if net.monitors[i].clock in rec.ticking_clocks]
    if order is not None:
        ticking = [i for i in order if i in ticking]
    hits: dict[int, int] = {}
    for i in ticking:
        m = net.monitors[i]
        t = new.local[i]
        sid = new.states[i]
        tr = m.transition_for(sid, v)
        actual = _advance(m, i, sid, tr, t, g, sb)
        new.states[i] = _state_for(m, actual)
        new.visited[i].add(new.states[i])
        new.local[i] = t + 1
        new.recent[i] = (new.recent[i] + (g,))[-m.n:]
        if m.n in actual:
            hits[i] = new.recent[i][0]

    if net.kind == "impl" and 0 in ticking:
        cons = net.monitors[1]
        t = new.local[0] - 1
        still = []
        for ob in new.obligations:
            tr = cons.transition_for(ob.state, v)
            actual = _advance(cons, ("obl", ob.start), ob.state, tr, t, g, sb)
            ob.state = _state_for(cons, actual)
            new.visited[1].add(ob.state)
            if cons.n in actual:
                verdicts.append(Verdict(g, PASS, net.name, f"antecedent_end={ob.antecedent_end}"))
            elif not actual:
                verdicts.append(Verdict(g, FAIL, net.name, f"antecedent_end={ob.antecedent_end}"))
            else:
                still.append(ob)
        if 0 in hits:
            still.append(Obligation(t + 1, g, cons.initial))
        new.obligations = still
    elif net.kind == "alt":
        if hits:
            detail = ",".join(f"{net.monitors[i].name}@{hits[i]}" for i in sorted(hits))
            verdicts.append(Verdict(g, DETECTED, net.name, f"branches={detail}"))
    elif net.kind == "loop":
        if 0 in hits:
            m = net.monitors[0]
            t = new.local[0] - 1
            count = new.loop_hits.get(t - m.n, 0) + 1
            new.loop_hits = {k: c for k, c in new.loop_hits.items() if k > t - m.n}
            new.loop_hits[t] = count
            verdicts.append(Verdict(g, DETECTED, net.name, f"start={hits[0]} iterations={count}"))
    elif net.kind == "async":
        for i in sorted(hits):
            verdicts.append(Verdict(g, DETECTED, net.monitors[i].name, f"start={hits[i]}"))
    elif net.kind == "single":
        if 0 in hits:
            verdicts.append(Verdict(g, DETECTED, net.name, f"start={hits[0]}"))
    if uses_sb:
        sb.commit()
    new.tick += 1
    verdicts.sort(key=Verdict.sort_key)
    return new, verdicts


@dataclass
class VerdictReport:
    net: str
    mode: str
    verdicts: list[Verdict]
    inconclusive: int
    counts: dict[str, int]
    scenario_detected: bool
    states: dict[str, tuple[int, int]]  # monitor -> (visited, total)
    exit_status: int

    def format(self) -> str:
        lines = [v.format() for v in self.verdicts]
        summary = {
            "net": self.net,
            "mode": self.mode,
            "detected": self.counts.get(DETECTED, 0),
            "pass": self.counts.get(PASS, 0),
            "fail": self.counts.get(FAIL, 0),
            "inconclusive": self.inconclusive,
            "scenario_detected": self.scenario_detected,
            "states": {k: list(v) for k, v in self.states.items()},
            "exit": self.exit_status,
        }
        lines.append("summary " + json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"


def run(net: MonitorNet, t: Trace, mode: str = "detect", events: Iterable[str] | None = None,
        rng: random.Random | None = None) -> VerdictReport:
    """Fold :func:`step` over the trace.

    With ``rng`` the monitor stepping order is shuffled on every tick (used
    to exercise order independence).
    """
    mode = getattr(mode, "value", mode)
    rs = initial_state(net, events)
    verdicts: list[Verdict] = []
    for rec in t.records:
        order = None
        if rng is not None:
            order = list(range(len(net.monitors)))
            rng.shuffle(order)
        rs, vs = step(net, rs, rec, order, inplace=True)
        verdicts.extend(vs)
    return make_report(net, mode, rs, verdicts)


def make_report(net: MonitorNet, mode: str, rs: RunState, verdicts: list[Verdict]) -> VerdictReport:
    counts = Counter(v.kind for v in verdicts)
    if net.kind == "async":
        detected_by = {v.chart for v in verdicts if v.kind == DETECTED}
        scenario = all(m.name in detected_by for m in net.monitors)
    else:
        scenario = counts.get(DETECTED, 0) > 0
    if mode == "assert":
        exit_status = 0 if counts.get(FAIL, 0) == 0 else 1
    else:
        exit_status = 0 if scenario else 1
    states = {m.name: (len(rs.visited[i]), len(m.states)) for i, m in enumerate(net.monitors)}
    return VerdictReport(net.name, mode, verdicts, len(rs.obligations), dict(counts), scenario,
                         states, exit_status)


def abandoned_balances(rs: RunState) -> dict:
    """Add-minus-delete per abandoned attempt; all zero when bookkeeping is sound."""
    sb = rs.scoreboard
    return {a: sb.balance(a) for a in sb.abandoned}
