"""UTC instants: parsing, formatting, validation.

Instants are timezone-aware ``datetime`` objects in UTC with whole-second
resolution. Naive inputs are rejected unless the caller supplies an explicit
UTC offset (used by the CLI's local-time flag).
"""
from datetime import datetime, timedelta, timezone

from .errors import HeliocotError


def utc_instant(t, utc_offset_hours=None):
    """Normalize ``t`` to an aware UTC datetime truncated to the second.

    A naive ``t`` is interpreted as local time at ``utc_offset_hours``; if no
    offset is given, naive input is an error.
    """
    if t.tzinfo is None:
        if utc_offset_hours is None:
            raise HeliocotError(f"timestamp {t.isoformat()} has no UTC offset")
        t = t.replace(tzinfo=timezone(timedelta(hours=utc_offset_hours)))
    return t.astimezone(timezone.utc).replace(microsecond=0)


def parse_utc(text, utc_offset_hours=None):
    """Parse an ISO-8601 timestamp (``Z`` suffix allowed) into a UTC instant."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        t = datetime.fromisoformat(s)
    except ValueError as exc:
        raise HeliocotError(f"invalid timestamp {text!r}") from exc
    return utc_instant(t, utc_offset_hours)


def format_utc(t):
    """ISO-8601 with a ``Z`` suffix, second resolution."""
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def day_of_year(t):
    return t.timetuple().tm_yday
