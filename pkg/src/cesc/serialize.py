"""Text forms of synthesized monitors: the ``.monitor`` file and Graphviz DOT.

A ``.monitor`` file is line oriented; ``#`` starts a comment::

    net single handshake
    monitor handshake clock c1
    universe busy req ack
    elem 0 !busy | req
    arrow req@0 -> ack@1
    state 0 {0} initial
    state 1 {0,1}
    state 2 {0,2} final
    trans 0 -> 1 : busy & req
      add req 0 0
    trans 1 -> 2 : ack
      chk req 1 0
    end

``add``/``del`` lines give event, attempt length and source position;
``chk`` lines give event, length, position and, for cross-domain checks,
the source clock. Guards use the expression syntax of the chart language.
Anything written by :func:`dump_net` reads back to an equal net, and hand
edits (say, retargeting one transition) are accepted as long as the file is
well formed.
"""

from __future__ import annotations

from .chart import CausalityArrow, OccRef
from .errors import CescError
from .expr import format_expr, parse_expr
from .synth import (
    Action,
    Check,
    Export,
    Import,
    Monitor,
    MonitorNet,
    MonitorState,
    Pattern,
    Transition,
)

MONITOR_ERROR = "E_MONITOR_FORMAT"


def _ref(r: OccRef) -> str:
    return f"{r.event}@{r.tick}"


def _parse_ref(text: str, lineno: int) -> OccRef:
    event, sep, tick = text.partition("@")
    if not sep or not tick.isdigit():
        raise CescError(f"bad occurrence reference {text!r}", code=MONITOR_ERROR, line=lineno)
    return OccRef(event, int(tick))


def _set_label(lengths) -> str:
    return "{" + ",".join(str(k) for k in sorted(lengths)) + "}"


def dump_monitor(m: Monitor) -> str:
    out = [f"monitor {m.name} clock {m.clock}" + (" anchored" if m.anchored else "")]
    out.append("universe " + " ".join(m.universe) if m.universe else "universe")
    for i, e in enumerate(m.pattern.elements):
        out.append(f"elem {i} {format_expr(e)}")
    for a in m.causality:
        out.append(f"arrow {_ref(a.source)} -> {_ref(a.target)}")
    for x in m.exports:
        out.append(f"export {x.event}@{x.position}")
    for x in m.imports:
        out.append(f"import {x.event}@{x.position} {x.domain} {x.chart} "
                   f"{x.target_event}@{x.target_position}")
    for s in m.states:
        flags = (" initial" if s.id == m.initial else "") + (" final" if s.is_final else "")
        out.append(f"state {s.id} {_set_label(s.matched_lengths)}{flags}")
    for tr in m.transitions:
        out.append(f"trans {tr.src} -> {tr.dst} : {format_expr(tr.guard)}")
        for a in tr.actions:
            out.append(f"  {a.kind} {a.event} {a.length} {a.position}")
        for c in tr.checks:
            dom = "" if c.domain is None else f" {c.domain}"
            out.append(f"  chk {c.event} {c.length} {c.position}{dom}")
    out.append("end")
    return "\n".join(out) + "\n"


def dump_net(net: MonitorNet) -> str:
    out = [f"net {net.kind} {net.name}"]
    for src_chart, src, dst_chart, dst in net.cross_arrows:
        out.append(f"cross {src_chart} {_ref(src)} -> {dst_chart} {_ref(dst)}")
    text = "\n".join(out) + "\n"
    return text + "".join(dump_monitor(m) for m in net.monitors)


class _MonitorBuilder:
    def __init__(self, name: str, clock: str, anchored: bool):
        self.name, self.clock, self.anchored = name, clock, anchored
        self.universe: tuple[str, ...] = ()
        self.elems: dict[int, object] = {}
        self.arrows: list[CausalityArrow] = []
        self.exports: list[Export] = []
        self.imports: list[Import] = []
        self.states: list[MonitorState] = []
        self.initial = 0
        self.trans: list[list] = []  # [src, guard, dst, actions, checks]

    def build(self, lineno: int) -> Monitor:
        if sorted(self.elems) != list(range(len(self.elems))):
            raise CescError(f"monitor {self.name}: pattern elements are not 0..n-1",
                            code=MONITOR_ERROR, line=lineno)
        ids = [s.id for s in self.states]
        if ids != list(range(len(ids))):
            raise CescError(f"monitor {self.name}: state ids must be 0..k-1 in order",
                            code=MONITOR_ERROR, line=lineno)
        for src, _, dst, _, _ in self.trans:
            if not (0 <= src < len(ids) and 0 <= dst < len(ids)):
                raise CescError(f"monitor {self.name}: transition {src} -> {dst} "
                                "names an unknown state", code=MONITOR_ERROR, line=lineno)
        pattern = Pattern(tuple(self.elems[i] for i in range(len(self.elems))))
        trs = tuple(Transition(s, g, d, tuple(a), tuple(c)) for s, g, d, a, c in self.trans)
        return Monitor(self.name, self.clock, pattern, self.universe, tuple(self.states), trs,
                       self.initial, tuple(self.arrows), tuple(self.exports),
                       tuple(self.imports), self.anchored)


def load_net(text: str) -> MonitorNet:
    """Parse a ``.monitor`` file; raises ``E_MONITOR_FORMAT`` on malformed input."""
    kind = name = None
    cross = []
    monitors: list[Monitor] = []
    cur: _MonitorBuilder | None = None

    def bad(msg: str, lineno: int):
        return CescError(msg, code=MONITOR_ERROR, line=lineno)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        words = rest.split()
        try:
            if head == "net":
                # names of composite nets contain spaces: the name is the rest of the line
                kind, _, name = rest.partition(" ")
                if not kind or not name.strip():
                    raise ValueError
                name = name.strip()
            elif head == "cross":
                sc, sref, arrow, tc, tref = words
                if arrow != "->":
                    raise ValueError
                cross.append((sc, _parse_ref(sref, lineno), tc, _parse_ref(tref, lineno)))
            elif head == "monitor":
                if cur is not None:
                    raise bad("missing 'end' before next monitor", lineno)
                mname, sep, tail = rest.rpartition(" clock ")
                tail = tail.split()
                if not sep or not mname.strip() or len(tail) not in (1, 2):
                    raise ValueError
                anchored = len(tail) == 2
                if anchored and tail[1] != "anchored":
                    raise ValueError
                cur = _MonitorBuilder(mname.strip(), tail[0], anchored)
            elif cur is None:
                raise bad(f"{head!r} outside a monitor block", lineno)
            elif head == "universe":
                cur.universe = tuple(words)
            elif head == "elem":
                idx, _, expr = rest.partition(" ")
                cur.elems[int(idx)] = parse_expr(expr, lineno)
            elif head == "arrow":
                src, arrow, dst = words
                if arrow != "->":
                    raise ValueError
                cur.arrows.append(CausalityArrow(_parse_ref(src, lineno), _parse_ref(dst, lineno)))
            elif head == "export":
                ref = _parse_ref(words[0], lineno)
                cur.exports.append(Export(ref.event, ref.tick))
            elif head == "import":
                src, domain, chart, dst = words
                s, d = _parse_ref(src, lineno), _parse_ref(dst, lineno)
                cur.imports.append(Import(s.event, s.tick, domain, chart, d.event, d.tick))
            elif head == "state":
                sid, lengths, *flags = words
                if not (lengths.startswith("{") and lengths.endswith("}")):
                    raise ValueError
                inner = lengths[1:-1]
                matched = frozenset(int(k) for k in inner.split(",")) if inner else frozenset()
                if set(flags) - {"initial", "final"}:
                    raise ValueError
                cur.states.append(MonitorState(int(sid), matched, "final" in flags))
                if "initial" in flags:
                    cur.initial = int(sid)
            elif head == "trans":
                arrows, sep, guard = rest.partition(":")
                src, arrow, dst = arrows.split()
                if not sep or arrow != "->":
                    raise ValueError
                cur.trans.append([int(src), parse_expr(guard.strip(), lineno), int(dst), [], []])
            elif head in ("add", "del"):
                if not cur.trans:
                    raise bad(f"{head} before any transition", lineno)
                event, length, pos = words
                cur.trans[-1][3].append(Action(head, event, int(length), int(pos)))
            elif head == "chk":
                if not cur.trans:
                    raise bad("chk before any transition", lineno)
                event, length, pos, *dom = words
                if len(dom) > 1:
                    raise ValueError
                cur.trans[-1][4].append(Check(event, int(length), int(pos),
                                              dom[0] if dom else None))
            elif head == "end":
                monitors.append(cur.build(lineno))
                cur = None
            else:
                raise bad(f"unknown directive {head!r}", lineno)
        except ValueError:
            raise bad(f"malformed {head!r} line", lineno) from None
    if cur is not None:
        raise bad("monitor block not closed with 'end'", len(text.splitlines()))
    if kind is None:
        raise bad("missing 'net' line", 1)
    if not monitors:
        raise bad("no monitors", 1)
    return MonitorNet(kind, name, tuple(monitors), tuple(cross))


# -- DOT ------------------------------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def edge_label(tr: Transition) -> str:
    """``guard / actions [checks]``; ``null`` stands for no scoreboard action."""
    acts = list(dict.fromkeys(f"{a.kind}({a.event}@{a.position})" for a in tr.actions))
    label = f"{format_expr(tr.guard)} / {', '.join(acts) if acts else 'null'}"
    checks = list(dict.fromkeys(
        f"chk({c.event}@{c.position})" if c.domain is None
        else f"chk({c.domain}:{c.event}@{c.position})" for c in tr.checks))
    if checks:
        label += " [" + ", ".join(checks) + "]"
    return label


def _monitor_body(m: Monitor, prefix: str, indent: str) -> list[str]:
    lines = [f"{indent}{_quote(prefix + '__start')} [shape=point];"]
    for s in m.states:
        shape = "doublecircle" if s.is_final else "circle"
        lines.append(f"{indent}{_quote(prefix + str(s.id))} "
                     f"[shape={shape}, label={_quote(s.label())}];")
    lines.append(f"{indent}{_quote(prefix + '__start')} -> {_quote(prefix + str(m.initial))};")
    for tr in m.transitions:
        lines.append(f"{indent}{_quote(prefix + str(tr.src))} -> {_quote(prefix + str(tr.dst))} "
                     f"[label={_quote(edge_label(tr))}];")
    return lines


def to_dot(m: Monitor) -> str:
    lines = [f"digraph {_quote(m.name)} {{", "  rankdir=LR;"]
    lines += _monitor_body(m, "", "  ")
    lines.append("}")
    return "\n".join(lines) + "\n"


def net_to_dot(net: MonitorNet) -> str:
    """One cluster per monitor; a single-monitor net prints as :func:`to_dot`."""
    if len(net.monitors) == 1:
        return to_dot(net.monitors[0])
    lines = [f"digraph {_quote(net.name)} {{", "  rankdir=LR;",
             f"  label={_quote(net.kind + ' ' + net.name)};"]
    for i, m in enumerate(net.monitors):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_quote(m.name + ' @ ' + m.clock)};")
        lines += _monitor_body(m, f"m{i}_", "    ")
        lines.append("  }")
    for src_chart, src, dst_chart, dst in net.cross_arrows:
        lines.append(f"  // cross arrow {src_chart}.{_ref(src)} -> {dst_chart}.{_ref(dst)}")
    lines.append("}")
    return "\n".join(lines) + "\n"
