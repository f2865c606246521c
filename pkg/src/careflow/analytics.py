"""Log analytics: dotted chart, resource occupancy, durations, wave comparison."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

from .dfg import Dfg, discover_dfg
from .eventlog import EventLog, filter_by_time, filter_complete
from .timeutil import format_timestamp, to_utc


@dataclass(frozen=True)
class DottedChartRow:
    case_index: int
    case_id: str
    timestamp: datetime
    color_key: str


@dataclass(frozen=True)
class DottedChartData:
    rows: tuple[DottedChartRow, ...]
    sort_mode: str


@dataclass(frozen=True)
class OccupancySeries:
    """Piecewise-constant concurrency: count holds from a breakpoint to the next."""

    breakpoints: tuple[tuple[datetime, int], ...]
    peak: tuple[datetime, int] | None
    flagged_cases: tuple[str, ...] = ()


@dataclass(frozen=True)
class CaseDurationStats:
    mean: timedelta
    median: timedelta
    min: timedelta
    max: timedelta
    histogram: tuple[int, ...]
    bin_width: timedelta


@dataclass(frozen=True)
class WaveStats:
    case_count: int
    event_count: int
    mean_case_duration: timedelta | None
    dfg: Dfg


@dataclass(frozen=True)
class WaveComparison:
    split: datetime
    first: WaveStats
    second: WaveStats


def _color_value(value) -> str:
    if value is None:
        return "unknown"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def dotted_chart(log: EventLog, color_attribute: str = "ards",
                 sort: str = "by_first_event") -> DottedChartData:
    """One row per event, with a case index assigned after sorting cases.

    Cases without events get no index so row indices stay contiguous from 0.
    The color key is the trace attribute value as a string, 'unknown' when the
    attribute is absent.
    """
    if sort not in ("by_first_event", "by_case_id"):
        raise ValueError(f"unknown sort mode {sort!r}")
    traces = [t for t in log if t.events]
    if sort == "by_first_event":
        traces.sort(key=lambda t: (t.start_time, t.case_id))
    else:
        traces.sort(key=lambda t: t.case_id)
    rows = []
    for index, trace in enumerate(traces):
        color = _color_value(trace.attributes.get(color_attribute))
        for event in trace.events:
            rows.append(DottedChartRow(index, trace.case_id, event.timestamp, color))
    return DottedChartData(tuple(rows), sort)


def occupancy(log: EventLog, start_activity: str, end_activity: str) -> OccupancySeries:
    """Sweep-line concurrency of [start, end) intervals paired per trace.

    Within a trace each start event pairs with the next matching end event; a
    start without an end keeps the resource occupied until the log's last
    timestamp. An end with no open start flags the trace and is skipped, as is
    a second concurrent start (the intervals would be ambiguous). Intervals
    are half open, so at equal instants an ending case and a starting case
    never count twice.
    """
    horizon = max((e.timestamp for t in log for e in t.events), default=None)
    intervals: list[tuple[datetime, datetime]] = []
    flagged: list[str] = []
    for trace in log:
        open_starts: list[datetime] = []
        bad = False
        for event in trace.events:
            if event.activity == start_activity:
                if open_starts:
                    bad = True  # concurrent second start within one case
                open_starts.append(event.timestamp)
            elif event.activity == end_activity:
                if not open_starts:
                    bad = True  # end with no open start
                else:
                    start = open_starts.pop(0)
                    if event.timestamp >= start:
                        intervals.append((start, event.timestamp))
                    else:
                        bad = True  # end before its start: skip the pairing
        if horizon is not None:
            intervals.extend((start, horizon) for start in open_starts)
        if bad:
            flagged.append(trace.case_id)

    deltas: dict[datetime, int] = {}
    for start, end in intervals:
        deltas[start] = deltas.get(start, 0) + 1
        deltas[end] = deltas.get(end, 0) - 1
    breakpoints = []
    count = 0
    for instant in sorted(deltas):
        count += deltas[instant]
        breakpoints.append((instant, count))
    peak = None
    for instant, count in breakpoints:
        if peak is None or count > peak[1]:
            peak = (instant, count)
    return OccupancySeries(tuple(breakpoints), peak, tuple(flagged))


def occupancy_daily_max(series: OccupancySeries) -> tuple[tuple[datetime, int], ...]:
    """Downsample to one (midnight UTC, max count that day) point per day."""
    if not series.breakpoints:
        return ()
    days: dict[datetime, int] = {}
    current = 0
    prev_instant = None
    for instant, count in series.breakpoints:
        day = instant.replace(hour=0, minute=0, second=0, microsecond=0)
        if prev_instant is not None:
            cursor = prev_instant.replace(hour=0, minute=0, second=0, microsecond=0)
            while cursor < day:  # days the running count carried through
                cursor += timedelta(days=1)
                if cursor < day:
                    days[cursor] = max(days.get(cursor, 0), current)
        days[day] = max(days.get(day, 0), count, current)
        current = count
        prev_instant = instant
    return tuple(sorted(days.items()))


def case_duration_stats(log: EventLog, bin_width: timedelta = timedelta(days=1)) -> CaseDurationStats | None:
    """Duration summary over complete traces; None when there are none.

    The histogram uses fixed-width bins starting at zero.
    """
    durations = sorted(t.duration for t in log if t.complete and t.events)
    if not durations:
        return None
    n = len(durations)
    mean = sum(durations, timedelta()) / n
    median = durations[n // 2] if n % 2 else (durations[n // 2 - 1] + durations[n // 2]) / 2
    bins = int(durations[-1] / bin_width) + 1
    histogram = [0] * bins
    for d in durations:
        histogram[min(int(d / bin_width), bins - 1)] += 1
    return CaseDurationStats(mean=mean, median=median, min=durations[0], max=durations[-1],
                             histogram=tuple(histogram), bin_width=bin_width)


def compare_waves(log: EventLog, split: datetime, complete_only: bool = True) -> WaveComparison:
    """Split the log at an instant (anchored on first events) and compare sides.

    Ongoing cases are excluded by default: their durations are censored, so
    per-wave counts and means are computed over complete cases.
    """
    split = to_utc(split)
    base = filter_complete(log) if complete_only else log

    def wave(side: str) -> WaveStats:
        part = filter_by_time(base, split, side)
        durations = [t.duration for t in part if t.complete and t.events]
        mean = sum(durations, timedelta()) / len(durations) if durations else None
        return WaveStats(case_count=len(part), event_count=part.event_count,
                         mean_case_duration=mean, dfg=discover_dfg(part))

    return WaveComparison(split, wave("before"), wave("on_or_after"))


# --- CSV / SVG emitters -------------------------------------------------------

_PALETTE = {"true": "#e8538f", "false": "#2e9e5b", "unknown": "#9aa0a6"}
_EXTRA_COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860")


def _color_for(key: str, assigned: dict[str, str]) -> str:
    if key in _PALETTE:
        return _PALETTE[key]
    if key not in assigned:
        assigned[key] = _EXTRA_COLORS[len(assigned) % len(_EXTRA_COLORS)]
    return assigned[key]


def dotted_chart_csv(data: DottedChartData) -> str:
    lines = ["case_index,case_id,timestamp,color"]
    for row in data.rows:
        lines.append(f"{row.case_index},{row.case_id},{format_timestamp(row.timestamp)},{row.color_key}")
    lines.append("")
    return "\n".join(lines)


def dotted_chart_svg(data: DottedChartData, width: int = 1000, height: int = 600) -> str:
    """Self-contained SVG: x = time, y = case index, one circle per event."""
    pad = 40
    rows = data.rows
    if rows:
        t_min = min(r.timestamp for r in rows)
        t_max = max(r.timestamp for r in rows)
        span = (t_max - t_min).total_seconds() or 1.0
        max_index = max(r.case_index for r in rows)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
             'fill="none" stroke="#333333"/>']
    if rows:
        assigned: dict[str, str] = {}
        for row in rows:
            x = pad + (row.timestamp - t_min).total_seconds() / span * (width - 2 * pad)
            y = height - pad - (row.case_index / max(max_index, 1)) * (height - 2 * pad)
            color = _color_for(row.color_key, assigned)
            lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="{color}"/>')
        lines.append(f'<text x="{pad}" y="{height - pad + 16}" font-size="11" fill="#333333">'
                     f'{format_timestamp(t_min)}</text>')
        lines.append(f'<text x="{width - pad}" y="{height - pad + 16}" font-size="11" '
                     f'fill="#333333" text-anchor="end">{format_timestamp(t_max)}</text>')
    lines.append("</svg>")
    lines.append("")
    return "\n".join(lines)


def occupancy_csv(series: OccupancySeries, daily_max: bool = False) -> str:
    lines = ["timestamp,count"]
    points = occupancy_daily_max(series) if daily_max else series.breakpoints
    for instant, count in points:
        lines.append(f"{format_timestamp(instant)},{count}")
    lines.append("")
    return "\n".join(lines)


def occupancy_svg(series: OccupancySeries, width: int = 1000, height: int = 400) -> str:
    """Step plot of the concurrency series."""
    pad = 40
    points = series.breakpoints
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
             'fill="none" stroke="#333333"/>']
    if points:
        t_min = points[0][0]
        t_max = points[-1][0]
        span = (t_max - t_min).total_seconds() or 1.0
        top = max(count for _, count in points) or 1

        def xy(instant: datetime, count: int) -> tuple[float, float]:
            x = pad + (instant - t_min).total_seconds() / span * (width - 2 * pad)
            y = height - pad - count / top * (height - 2 * pad)
            return x, y

        path = []
        prev_y = None
        for instant, count in points:
            x, y = xy(instant, count)
            if prev_y is None:
                path.append(f"M {x:.2f} {y:.2f}")
            else:
                path.append(f"L {x:.2f} {prev_y:.2f}")
                path.append(f"L {x:.2f} {y:.2f}")
            prev_y = y
        lines.append(f'<path d="{" ".join(path)}" fill="none" stroke="#2b6cb0" stroke-width="1.5"/>')
        if series.peak:
            px, py = xy(series.peak[0], series.peak[1])
            lines.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="#c53030"/>')
            lines.append(f'<text x="{px:.2f}" y="{py - 6:.2f}" font-size="11" fill="#c53030" '
                         f'text-anchor="middle">{series.peak[1]}</text>')
    lines.append("</svg>")
    lines.append("")
    return "\n".join(lines)
