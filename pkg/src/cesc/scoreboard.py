"""Shared store of event-occurrence records used for causality checks.

Writes made during a global tick are buffered and become visible only when
:meth:`Scoreboard.commit` runs at the end of that tick, so every reader in
the tick sees the same snapshot whatever order the monitors step in.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable

from .errors import CescError

Attempt = Hashable


@dataclass(frozen=True)
class ScoreEntry:
    event: str
    global_tick: int
    domain: str
    attempt: Attempt
    position: int | None = None  # pattern index of the occurrence that recorded it


class Scoreboard:
    def __init__(self, events: Iterable[str] | None = None):
        self.events = None if events is None else frozenset(events)
        self._committed: dict[tuple, ScoreEntry] = {}
        self._pending_add: dict[tuple, ScoreEntry] = {}
        self._pending_del: set[tuple] = set()
        self.adds: Counter = Counter()
        self.dels: Counter = Counter()
        self.abandoned: set[Attempt] = set()
        self.completed: set[Attempt] = set()

    def copy(self) -> Scoreboard:
        new = Scoreboard.__new__(Scoreboard)
        new.events = self.events
        new._committed = dict(self._committed)
        new._pending_add = dict(self._pending_add)
        new._pending_del = set(self._pending_del)
        new.adds = Counter(self.adds) if self.adds else Counter()
        new.dels = Counter(self.dels) if self.dels else Counter()
        new.abandoned = set(self.abandoned)
        new.completed = set(self.completed)
        return new

    def _check_event(self, e: str) -> None:
        if self.events is not None and e not in self.events:
            raise CescError(f"{e} is not an event", code="E_NOT_EVENT")

    @staticmethod
    def _key(entry: ScoreEntry) -> tuple:
        return (entry.attempt, entry.event, entry.position)

    def add_evt(self, e: str, tick: int, domain: str, attempt: Attempt,
                position: int | None = None) -> None:
        self._check_event(e)
        entry = ScoreEntry(e, tick, domain, attempt, position)
        key = self._key(entry)
        # one entry per (attempt, event, position): re-adding is a no-op
        if key in self._pending_add:
            return
        if key in self._committed:
            if key in self._pending_del:
                self._pending_del.discard(key)
                self.dels[attempt] -= 1
            return
        self._pending_add[key] = entry
        self.adds[attempt] += 1

    def chk_evt(self, e: str, attempt: Attempt | None = None, position: int | None = None,
                domain: str | None = None) -> bool:
        """True iff the committed snapshot holds a matching entry for ``e``.

        ``attempt``, ``position`` and ``domain`` narrow the match when given.
        """
        self._check_event(e)
        for entry in self._committed.values():
            if entry.event != e:
                continue
            if attempt is not None and entry.attempt != attempt:
                continue
            if position is not None and entry.position != position:
                continue
            if domain is not None and entry.domain != domain:
                continue
            return True
        return False

    def del_evt(self, e: str, attempt: Attempt) -> None:
        """Remove ``e``'s entries recorded by ``attempt``; a no-op when there are none."""
        for key in [k for k in self._pending_add if k[0] == attempt and k[1] == e]:
            del self._pending_add[key]
            self.dels[attempt] += 1
        for key in self._committed:
            if key[0] == attempt and key[1] == e and key not in self._pending_del:
                self._pending_del.add(key)
                self.dels[attempt] += 1

    def abandon(self, attempt: Attempt) -> None:
        """Delete every entry of a failed match attempt."""
        events = {k[1] for k in self._pending_add if k[0] == attempt}
        events |= {k[1] for k in self._committed if k[0] == attempt}
        for e in sorted(events):
            self.del_evt(e, attempt)
        self.abandoned.add(attempt)

    def complete(self, attempt: Attempt, keep: Iterable[tuple[str, int]] = ()) -> None:
        """Garbage-collect a finished attempt's entries, except ``(event, position)`` in ``keep``."""
        keep = set(keep)
        for key in [k for k in self._pending_add if k[0] == attempt]:
            if (key[1], key[2]) not in keep:
                del self._pending_add[key]
        for key in self._committed:
            if key[0] == attempt and (key[1], key[2]) not in keep:
                self._pending_del.add(key)
        self.completed.add(attempt)

    def commit(self) -> None:
        for key in self._pending_del:
            self._committed.pop(key, None)
        self._committed.update(self._pending_add)
        self._pending_add.clear()
        self._pending_del.clear()

    def balance(self, attempt: Attempt) -> int:
        """Adds minus deletes for ``attempt``; zero for every cleanly abandoned attempt."""
        return self.adds[attempt] - self.dels[attempt]

    def live(self, attempt: Attempt) -> list[ScoreEntry]:
        entries = [e for k, e in self._committed.items()
                   if k[0] == attempt and k not in self._pending_del]
        entries += [e for k, e in self._pending_add.items() if k[0] == attempt]
        return entries

    def entries(self) -> list[ScoreEntry]:
        return list(self._committed.values())

    def dump(self) -> str:
        lines = []
        for e in sorted(self._committed.values(),
                        key=lambda x: (x.global_tick, x.domain, x.event, repr(x.attempt))):
            pos = "" if e.position is None else f"@{e.position}"
            lines.append(f"entry {e.event}{pos} tick={e.global_tick} domain={e.domain} "
                         f"attempt={e.attempt}")
        return "\n".join(lines) + ("\n" if lines else "")
