"""Event-log data model.

An :class:`EventLog` can be looked at in three ways:

* as a set of events (:attr:`EventLog.events`),
* as a set of cases, each a time-ordered sequence of events (:attr:`EventLog.cases`),
* as a multiset of traces, i.e. activity sequences with multiplicities
  (:func:`extract_variants`).

Attribute values are plain Python objects: ``str`` for text, ``int`` for
integers (booleans are stored as ``bool``, a subclass of ``int``), ``float``
for reals and :class:`Timestamp` for points in time.  A missing attribute is
represented by the :data:`ABSENT` singleton, which is distinct from ``""``,
``0`` and ``None``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping, Sequence

logger = logging.getLogger(__name__)

ACTIVITY = "activity"
TIMESTAMP = "timestamp"
RESOURCE = "resource"
COST = "cost"


class _Absent:
    _instance: _Absent | None = None

    def __new__(cls) -> _Absent:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ABSENT"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Absent, ())


ABSENT: Any = _Absent()
"""Marker for an attribute an event does not carry."""


class Timestamp(int):
    """Milliseconds since the Unix epoch, UTC.

    A subclass of ``int`` so that timestamps order and compare like numbers,
    while still being distinguishable from plain integer attributes.
    """

    def __new__(cls, ms: int) -> Timestamp:
        if isinstance(ms, float):
            if not math.isfinite(ms):
                raise ValueError(f"timestamp must be finite, got {ms!r}")
            ms = int(ms)
        value = super().__new__(cls, ms)
        if value < 0:
            raise ValueError(f"timestamp must be >= 0, got {ms!r}")
        return value

    @classmethod
    def from_datetime(cls, dt: datetime) -> Timestamp:
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        delta = dt - datetime(1970, 1, 1, tzinfo=timezone.utc)
        return cls(delta.days * 86_400_000 + delta.seconds * 1000 + delta.microseconds // 1000)

    def to_datetime(self) -> datetime:
        return datetime.fromtimestamp(int(self) / 1000, tz=timezone.utc)

    def isoformat(self) -> str:
        """ISO-8601 text with millisecond precision and a ``Z`` suffix."""
        dt = self.to_datetime()
        return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{int(self) % 1000:03d}Z"

    def __repr__(self) -> str:
        return f"Timestamp({int(self)})"

    __str__ = isoformat


def value_kind(value: Any) -> str:
    """Name the kind of an attribute value: text, integer, real, timestamp or absent."""
    if value is ABSENT:
        return "absent"
    if isinstance(value, Timestamp):
        return "timestamp"
    if isinstance(value, (bool, int)):
        return "integer"
    if isinstance(value, float):
        return "real"
    if isinstance(value, str):
        return "text"
    raise TypeError(f"unsupported attribute value {value!r}")


@dataclass(frozen=True)
class Event:
    event_id: str
    case_id: str
    attributes: Mapping[str, Any]

    def __post_init__(self) -> None:
        if not isinstance(self.attributes, MappingProxyType):
            object.__setattr__(self, "attributes", MappingProxyType(dict(self.attributes)))

    def __getitem__(self, name: str) -> Any:
        return self.attributes.get(name, ABSENT)

    @property
    def activity(self) -> Any:
        return self.attributes.get(ACTIVITY, ABSENT)

    @property
    def timestamp(self) -> Any:
        return self.attributes.get(TIMESTAMP, ABSENT)

    def __hash__(self) -> int:
        return hash((self.event_id, self.case_id))


def attribute_value(event: Event, name: str) -> Any:
    """Return the value of attribute ``name`` on ``event``, or :data:`ABSENT`."""
    return event.attributes.get(name, ABSENT)


@dataclass(frozen=True)
class Case:
    case_id: str
    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.events, tuple):
            object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    @property
    def trace(self) -> tuple[Any, ...]:
        """Activity labels in event order (absent labels included)."""
        return tuple(e.activity for e in self.events)

    @property
    def labeled_trace(self) -> tuple[str, ...]:
        return tuple(a for a in self.trace if a is not ABSENT)


def subsequence(case: Case, i: int, j: int) -> tuple[Event, ...]:
    """Events at 1-based positions ``i`` through ``j`` inclusive."""
    if not 1 <= i <= j <= len(case.events):
        raise IndexError(f"invalid sub-sequence [{i}, {j}] of a case with {len(case.events)} events")
    return case.events[i - 1 : j]


def _sort_key(event: Event) -> int:
    ts = event.timestamp
    if ts is ABSENT:
        raise ValueError(f"event {event.event_id!r} of case {event.case_id!r} has no timestamp")
    return int(ts)


class EventLog:
    """Immutable collection of cases.

    Build one with :meth:`from_events` (which groups and orders events) or
    directly from already ordered :class:`Case` objects.  Case insertion order
    is preserved.
    """

    def __init__(self, cases: Iterable[Case] = (), *, reordered_events: int = 0):
        by_id: dict[str, Case] = {}
        for case in cases:
            if case.case_id in by_id:
                raise ValueError(f"duplicate case id {case.case_id!r}")
            for e in case.events:
                if e.case_id != case.case_id:
                    raise ValueError(f"event {e.event_id!r} belongs to case {e.case_id!r}, not {case.case_id!r}")
            by_id[case.case_id] = case
        self._cases = MappingProxyType(by_id)
        self.reordered_events = reordered_events
        labels = {e.activity for c in by_id.values() for e in c.events}
        labels.discard(ABSENT)
        self._alphabet = tuple(sorted(labels, key=str))

    @classmethod
    def from_events(cls, events: Iterable[Event]) -> EventLog:
        """Group events by case and order each case by timestamp.

        Ties keep the order in which events were supplied.  Raises
        ``ValueError`` if an event has no timestamp.
        """
        grouped: dict[str, list[Event]] = {}
        for e in events:
            grouped.setdefault(e.case_id, []).append(e)
        cases = []
        moved = 0
        for case_id, evs in grouped.items():
            ordered = sorted(evs, key=_sort_key)
            moved += sum(1 for a, b in zip(evs, ordered) if a is not b)
            cases.append(Case(case_id, tuple(ordered)))
        return cls(cases, reordered_events=moved)

    @property
    def cases(self) -> Mapping[str, Case]:
        return self._cases

    @property
    def activity_alphabet(self) -> tuple[str, ...]:
        return self._alphabet

    @property
    def events(self) -> list[Event]:
        return [e for c in self._cases.values() for e in c.events]

    @property
    def n_events(self) -> int:
        return sum(len(c.events) for c in self._cases.values())

    def __len__(self) -> int:
        return len(self._cases)

    def __iter__(self) -> Iterator[Case]:
        return iter(self._cases.values())

    def __contains__(self, case_id: object) -> bool:
        return case_id in self._cases

    def __getitem__(self, case_id: str) -> Case:
        return self._cases[case_id]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return list(self._cases.items()) == list(other._cases.items())

    def __repr__(self) -> str:
        return f"EventLog({len(self)} cases, {self.n_events} events)"

    def traces(self) -> dict[str, tuple[str, ...]]:
        """Map case id to its activity sequence, skipping cases with unlabeled events."""
        out = {}
        for c in self:
            trace = c.trace
            if ABSENT not in trace:
                out[c.case_id] = trace
        return out


@dataclass(frozen=True)
class Variant:
    trace: tuple[str, ...]
    count: int
    case_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.count != len(self.case_ids) or self.count < 1:
            raise ValueError("variant count must equal the number of its cases and be >= 1")


@dataclass(frozen=True)
class VariantTable:
    variants: tuple[Variant, ...]
    total_cases: int
    skipped_cases: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.variants)

    def __iter__(self) -> Iterator[Variant]:
        return iter(self.variants)

    def __getitem__(self, i: int) -> Variant:
        return self.variants[i]

    @property
    def counts(self) -> list[int]:
        return [v.count for v in self.variants]

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> VariantTable:
        """Synthetic table with placeholder traces, handy for statistics on bare counts."""
        variants = []
        for i, n in enumerate(counts):
            n = int(n)
            ids = tuple(f"v{i}:{k}" for k in range(n))
            variants.append(Variant((f"v{i}",), n, ids))
        return cls(_sorted_variants(variants), sum(v.count for v in variants))


def _trace_order(trace: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(str(a) for a in trace)


def _sorted_variants(variants: Iterable[Variant]) -> tuple[Variant, ...]:
    return tuple(sorted(variants, key=lambda v: (-v.count, _trace_order(v.trace))))


def extract_variants(log: EventLog) -> VariantTable:
    """Group the cases of ``log`` by their activity sequence.

    Cases containing an event without an activity are left out and counted in
    ``skipped_cases``.  Variants are sorted by descending count, ties broken by
    lexicographic trace order.
    """
    groups: dict[tuple[str, ...], list[str]] = {}
    skipped = 0
    for case in log:
        trace = case.trace
        if ABSENT in trace:
            skipped += 1
            continue
        groups.setdefault(trace, []).append(case.case_id)
    if skipped:
        logger.warning("%d case(s) with unlabeled events left out of variant extraction", skipped)
    variants = [Variant(t, len(ids), tuple(ids)) for t, ids in groups.items()]
    total = sum(v.count for v in variants)
    return VariantTable(_sorted_variants(variants), total, skipped)


def make_log(traces: Iterable[Sequence[str]], *, start: int = 0, step: int = 60_000, prefix: str = "c") -> EventLog:
    """Build a log from bare activity sequences.

    Case ids are ``{prefix}{index}`` zero-padded to a common width, event ids
    are ``{case_id}.{position}`` and timestamps advance by ``step`` ms per event.
    """
    traces = [list(t) for t in traces]
    width = len(str(max(len(traces) - 1, 0)))
    cases = []
    clock = start
    for i, trace in enumerate(traces):
        case_id = f"{prefix}{i:0{width}d}"
        events = []
        for pos, act in enumerate(trace, start=1):
            attrs = {TIMESTAMP: Timestamp(clock)}
            if act is not ABSENT:
                attrs[ACTIVITY] = act
            events.append(Event(f"{case_id}.{pos}", case_id, attrs))
            clock += step
        cases.append(Case(case_id, tuple(events)))
    return EventLog(cases)
