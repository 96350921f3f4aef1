"""Clocked traces: one record per global tick.

File format (``.trace``), one JSON object per line::

    {"i": 0, "clk": ["c1"], "ev": ["req"], "prop": {"busy": false}}

Events are pulses (unlisted means false); every proposition must be listed
on every line. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, TextIO

from .chart import SymbolTable
from .errors import CescError, TraceFormatError


class Valuation(Mapping[str, bool]):
    """Immutable, hashable truth assignment over a symbol table."""

    __slots__ = ("_data", "_hash")

    def __init__(self, data: Mapping[str, bool]):
        self._data = dict(data)
        self._hash = None

    def __getitem__(self, key: str) -> bool:
        return self._data[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._data.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Valuation):
            return self._data == other._data
        return NotImplemented

    def __repr__(self) -> str:
        true = sorted(k for k, v in self._data.items() if v)
        return f"Valuation(true={true})"

    def true_set(self) -> frozenset[str]:
        return frozenset(k for k, v in self._data.items() if v)

    @classmethod
    def of(cls, symtab: SymbolTable, true: Iterable[str] = ()) -> Valuation:
        true = set(true)
        unknown = true - set(symtab.symbols)
        if unknown:
            raise CescError(f"undeclared symbols {sorted(unknown)}", code="E_UNDECLARED_SYMBOL")
        return cls({name: name in true for name in symtab.symbols})


@dataclass(frozen=True)
class TickRecord:
    global_index: int
    ticking_clocks: frozenset[str]
    valuation: Valuation


@dataclass(frozen=True)
class Trace:
    records: tuple[TickRecord, ...]
    clocks: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TickRecord]:
        return iter(self.records)

    @classmethod
    def from_steps(cls, symtab: SymbolTable, steps: Iterable[Iterable[str]],
                   clocks: Iterable[Iterable[str]] | None = None) -> Trace:
        """Build a trace from per-tick sets of true symbols.

        ``clocks`` gives the ticking clocks per record; by default every
        declared clock ticks on every record.
        """
        steps = list(steps)
        all_clocks = frozenset(symtab.clocks)
        if clocks is None:
            ticking = [all_clocks] * len(steps)
        else:
            ticking = [frozenset(c) for c in clocks]
            if len(ticking) != len(steps):
                raise ValueError("clocks and steps differ in length")
        records = tuple(TickRecord(i, ticking[i], Valuation.of(symtab, step))
                        for i, step in enumerate(steps))
        return cls(records, tuple(symtab.clocks))


def _lines(stream: TextIO | str | Iterable[str]) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def read_trace(stream: TextIO | str | Iterable[str], symtab: SymbolTable) -> Trace:
    records: list[TickRecord] = []
    declared_clocks = set(symtab.clocks)
    events, props = set(symtab.events), set(symtab.props)
    last = -1
    for lineno, raw in enumerate(_lines(stream), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"not a JSON record: {exc.msg}", line=lineno) from None
        if not isinstance(obj, dict) or "i" not in obj:
            raise TraceFormatError("record needs an 'i' field", line=lineno)
        unknown_fields = set(obj) - {"i", "clk", "ev", "prop"}
        if unknown_fields:
            raise TraceFormatError(f"unknown fields {sorted(unknown_fields)}", line=lineno)
        idx = obj["i"]
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
            raise TraceFormatError("'i' must be a natural number", line=lineno)
        if idx <= last:
            raise TraceFormatError(f"index {idx} does not increase past {last}",
                                   code="E_NONMONOTONIC_INDEX", line=lineno)
        last = idx
        clk = obj.get("clk", sorted(declared_clocks))
        if not isinstance(clk, list) or not clk or not all(isinstance(c, str) for c in clk):
            raise TraceFormatError("'clk' must be a nonempty list of clock names", line=lineno)
        bad = set(clk) - declared_clocks
        if bad:
            raise TraceFormatError(f"undeclared clocks {sorted(bad)}", line=lineno)
        ev = obj.get("ev", [])
        if not isinstance(ev, list) or not all(isinstance(e, str) for e in ev):
            raise TraceFormatError("'ev' must be a list of event names", line=lineno)
        bad = set(ev) - events
        if bad:
            raise TraceFormatError(f"undeclared events {sorted(bad)}",
                                   code="E_UNDECLARED_SYMBOL", line=lineno)
        prop = obj.get("prop", {})
        if not isinstance(prop, dict) or not all(isinstance(v, bool) for v in prop.values()):
            raise TraceFormatError("'prop' must map names to true/false", line=lineno)
        bad = set(prop) - props
        if bad:
            raise TraceFormatError(f"undeclared propositions {sorted(bad)}",
                                   code="E_UNDECLARED_SYMBOL", line=lineno)
        missing = props - set(prop)
        if missing:
            raise TraceFormatError(f"propositions {sorted(missing)} not sampled", line=lineno)
        data = {e: e in ev for e in symtab.events}
        data.update(prop)
        records.append(TickRecord(idx, frozenset(clk), Valuation(data)))
    return Trace(tuple(records), tuple(symtab.clocks))


def format_record(rec: TickRecord, symtab: SymbolTable) -> str:
    obj = {
        "i": rec.global_index,
        "clk": sorted(rec.ticking_clocks),
        "ev": [e for e in symtab.events if rec.valuation[e]],
        "prop": {p: rec.valuation[p] for p in symtab.props},
    }
    return json.dumps(obj)


def write_trace(trace: Trace, symtab: SymbolTable, fh: TextIO | None = None) -> str:
    text = "".join(format_record(r, symtab) + "\n" for r in trace.records)
    if fh is not None:
        fh.write(text)
    return text


def project(trace: Trace, clock: str) -> list[tuple[int, Valuation]]:
    """The records on which ``clock`` ticks, in order."""
    if clock not in trace.clocks:
        raise CescError(f"clock {clock} not declared", code="E_UNKNOWN_CLOCK")
    return [(r.global_index, r.valuation) for r in trace.records if clock in r.ticking_clocks]


def merge_projections(parts: Mapping[str, list[tuple[int, Valuation]]]) -> list[tuple[int, frozenset[str]]]:
    """Inverse of :func:`project` on the (index, ticking clocks) structure."""
    by_index: dict[int, set[str]] = {}
    for clock, proj in parts.items():
        for idx, _ in proj:
            by_index.setdefault(idx, set()).add(clock)
    return [(idx, frozenset(cl)) for idx, cl in sorted(by_index.items())]
