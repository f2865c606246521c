"""Event log data model: events, traces, logs, variants, statistics, filtering.

Values are immutable after construction; every operation returns new objects,
so per-trace work can safely run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .timeutil import to_utc

# Attribute values carried by events, traces and logs.
AttrValue = str | int | float | bool | datetime


def _normalize_attrs(attrs: dict[str, AttrValue]) -> dict[str, AttrValue]:
    """Instant-valued attributes are normalized to UTC like event timestamps."""
    return {k: to_utc(v) if isinstance(v, datetime) else v for k, v in attrs.items()}


@dataclass(frozen=True)
class Event:
    """One recorded activity execution."""

    activity: str
    timestamp: datetime
    attributes: dict[str, AttrValue] = field(default_factory=dict)
    raw_extensions: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.activity:
            raise ValueError("event activity must be non-empty")
        object.__setattr__(self, "timestamp", to_utc(self.timestamp))
        object.__setattr__(self, "attributes", _normalize_attrs(self.attributes))


@dataclass(frozen=True)
class Trace:
    """All events of one case, kept sorted by timestamp (stable for ties)."""

    case_id: str
    events: tuple[Event, ...] = ()
    attributes: dict[str, AttrValue] = field(default_factory=dict)
    raw_extensions: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.case_id:
            raise ValueError("trace case_id must be non-empty")
        object.__setattr__(self, "attributes", _normalize_attrs(self.attributes))
        events = tuple(self.events)
        if any(events[i].timestamp > events[i + 1].timestamp for i in range(len(events) - 1)):
            events = tuple(sorted(events, key=lambda e: e.timestamp))
        object.__setattr__(self, "events", events)

    @property
    def complete(self) -> bool:
        """False marks an ongoing case (partial trace); absent means complete."""
        return self.attributes.get("complete", True) is not False

    @property
    def start_time(self) -> datetime | None:
        return self.events[0].timestamp if self.events else None

    @property
    def end_time(self) -> datetime | None:
        return self.events[-1].timestamp if self.events else None

    @property
    def duration(self) -> timedelta | None:
        if not self.events:
            return None
        return self.events[-1].timestamp - self.events[0].timestamp

    def activities(self) -> tuple[str, ...]:
        return tuple(e.activity for e in self.events)


@dataclass(frozen=True)
class EventLog:
    """An ordered collection of traces with unique case ids."""

    traces: tuple[Trace, ...] = ()
    name: str = ""
    attributes: dict[str, AttrValue] = field(default_factory=dict)
    raw_extensions: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        object.__setattr__(self, "attributes", _normalize_attrs(self.attributes))
        seen = set()
        for trace in self.traces:
            if trace.case_id in seen:
                raise ValueError(f"duplicate case_id {trace.case_id!r}")
            seen.add(trace.case_id)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    @property
    def event_count(self) -> int:
        return sum(len(t.events) for t in self.traces)

    def activity_alphabet(self) -> tuple[str, ...]:
        """Distinct activity labels, sorted."""
        return tuple(sorted({e.activity for t in self.traces for e in t.events}))


@dataclass(frozen=True)
class Variant:
    """A distinct activity sequence shared by one or more cases."""

    sequence: tuple[str, ...]
    count: int
    case_ids: tuple[str, ...]


@dataclass(frozen=True)
class LogStats:
    case_count: int
    event_count: int
    activity_count: int
    variant_count: int
    complete_case_count: int
    mean_events_per_case: float | None
    mean_case_duration: timedelta | None


def variants(log: EventLog) -> list[Variant]:
    """Group traces by exact activity sequence, most frequent first.

    Ties are broken lexicographically by sequence so output order is stable.
    """
    groups: dict[tuple[str, ...], list[str]] = {}
    for trace in log:
        groups.setdefault(trace.activities(), []).append(trace.case_id)
    out = [Variant(seq, len(ids), tuple(ids)) for seq, ids in groups.items()]
    out.sort(key=lambda v: (-v.count, v.sequence))
    return out


def log_stats(log: EventLog) -> LogStats:
    """Summary statistics; means are None (not zero) for an empty log.

    Mean case duration is averaged over complete traces only, measured as the
    gap between a trace's first and last event; ongoing cases are censored.
    """
    case_count = len(log)
    event_count = log.event_count
    complete_traces = [t for t in log if t.complete]
    mean_events = event_count / case_count if case_count else None
    durations = [t.duration for t in complete_traces if t.duration is not None]
    mean_duration = sum(durations, timedelta()) / len(durations) if durations else None
    return LogStats(
        case_count=case_count,
        event_count=event_count,
        activity_count=len(log.activity_alphabet()),
        variant_count=len(variants(log)),
        complete_case_count=len(complete_traces),
        mean_events_per_case=mean_events,
        mean_case_duration=mean_duration,
    )


def filter_by_time(log: EventLog, split: datetime, side: str, anchor: str = "first_event") -> EventLog:
    """Keep whole traces by where their anchor event falls relative to split.

    side 'before' keeps traces whose first event is strictly earlier than the
    split; 'on_or_after' keeps the complement (including traces without any
    event), so the two sides always partition the log. Traces are never cut.
    """
    if anchor != "first_event":
        raise ValueError(f"unsupported anchor {anchor!r}")
    if side not in ("before", "on_or_after"):
        raise ValueError(f"side must be 'before' or 'on_or_after', got {side!r}")
    split = to_utc(split)

    def is_before(trace: Trace) -> bool:
        return trace.start_time is not None and trace.start_time < split

    if side == "before":
        kept = tuple(t for t in log if is_before(t))
    else:
        kept = tuple(t for t in log if not is_before(t))
    return EventLog(kept, name=log.name, attributes=dict(log.attributes),
                    raw_extensions=log.raw_extensions)


def filter_complete(log: EventLog) -> EventLog:
    """Drop ongoing cases (trace attribute complete=false)."""
    return EventLog(tuple(t for t in log if t.complete), name=log.name,
                    attributes=dict(log.attributes), raw_extensions=log.raw_extensions)


def drop_activities(log: EventLog, labels: set[str]) -> EventLog:
    """Remove all events with the given activity labels, keeping traces."""
    out = []
    for trace in log:
        events = tuple(e for e in trace.events if e.activity not in labels)
        out.append(Trace(trace.case_id, events, dict(trace.attributes), trace.raw_extensions))
    return EventLog(tuple(out), name=log.name, attributes=dict(log.attributes),
                    raw_extensions=log.raw_extensions)
