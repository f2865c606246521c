"""Timestamp and duration helpers.

All instants in the toolkit are timezone-aware UTC datetimes; parsers accept
other offsets and naive values (assumed UTC) but normalize on ingestion.
"""

from datetime import datetime, timedelta, timezone


def to_utc(dt: datetime) -> datetime:
    """Normalize a datetime to UTC; naive values are assumed to be UTC."""
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def parse_timestamp(text: str, fmt: str | None = None) -> datetime:
    """Parse an instant, ISO-8601 by default or via a strptime format string.

    Raises ValueError on unparseable input.
    """
    text = text.strip()
    if fmt is not None:
        return to_utc(datetime.strptime(text, fmt))
    # datetime.fromisoformat in 3.10 does not accept a trailing 'Z'
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return to_utc(datetime.fromisoformat(text))


def format_timestamp(dt: datetime) -> str:
    """ISO-8601 with explicit UTC offset, e.g. 2020-04-13T10:30:00+00:00."""
    return to_utc(dt).isoformat()


def format_duration(td: timedelta) -> str:
    """Render a duration as 'Nd HHh MMm' (minutes rounded down)."""
    total_minutes = int(td.total_seconds() // 60)
    sign = "-" if total_minutes < 0 else ""
    total_minutes = abs(total_minutes)
    days, rest = divmod(total_minutes, 24 * 60)
    hours, minutes = divmod(rest, 60)
    return f"{sign}{days}d {hours:02d}h {minutes:02d}m"


def parse_split_instant(text: str) -> datetime:
    """Parse a wave split point; bare dates mean midnight UTC of that day."""
    if len(text) == 10 and text.count("-") == 2:
        return parse_timestamp(text + "T00:00:00+00:00")
    return parse_timestamp(text)
