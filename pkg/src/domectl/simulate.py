"""Deterministic hourly replay of a weather timeline and crowd profile."""

from __future__ import annotations

import bisect
import datetime as dt
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, TextIO

from .config import Config
from .dome import (
    NO_RULE,
    STOP,
    CrowdEstimate,
    DomeDecision,
    DomeState,
    WeatherReading,
    advance,
    apply_decision,
    decide,
    failsafe_decision,
)
from .errors import DataError
from .ingest import CrowdProfileEntry, WeatherRecord

HOUR = dt.timedelta(hours=1)


@dataclass(frozen=True)
class EventLogEntry:
    timestamp: dt.datetime
    temperature: Optional[float]
    humidity: Optional[float]
    rain: Optional[bool]
    ratio: Optional[float]
    open_seconds: float
    label: str
    fired: tuple[tuple[int, float], ...]
    fleet: str
    fault: str = ""


@dataclass(frozen=True)
class ReplaySummary:
    hours: int
    open_seconds_total: float
    rain_closures: int
    no_rule: int

    @classmethod
    def of(cls, entries: Sequence[EventLogEntry]) -> "ReplaySummary":
        return cls(
            hours=len(entries),
            open_seconds_total=sum(e.open_seconds for e in entries),
            rain_closures=sum(1 for e in entries if e.rain and e.label == STOP),
            no_rule=sum(1 for e in entries if e.label == NO_RULE),
        )


def _hour_heads(start: dt.datetime, end: dt.datetime, offset: dt.timedelta) -> list[dt.datetime]:
    head = (start - offset).replace(minute=0, second=0, microsecond=0) + offset
    if head < start:
        head += HOUR
    heads = []
    while head <= end:
        heads.append(head)
        head += HOUR
    return heads


class _Carry:
    """Last observation at or before a time, if no older than ``max_age``."""

    def __init__(self, times: list[dt.datetime], items: list, max_age: dt.timedelta):
        self.times, self.items, self.max_age = times, items, max_age

    def at(self, t: dt.datetime):
        i = bisect.bisect_right(self.times, t) - 1
        if i < 0 or t - self.times[i] > self.max_age:
            return None
        return self.items[i]


def _check_sorted(times: list[dt.datetime], what: str) -> None:
    if any(b < a for a, b in zip(times, times[1:])):
        raise DataError(f"{what} is not sorted by time")


def iter_replay(
    weather: Sequence[WeatherRecord],
    crowd: Sequence[CrowdProfileEntry],
    config: Config = Config(),
) -> Iterator[EventLogEntry]:
    """Yield one log entry per hour head in the weather span, as they are produced."""
    if not weather:
        raise DataError("empty weather timeline")
    wtimes = [r.timestamp for r in weather]
    ctimes = [c.timestamp for c in crowd]
    _check_sorted(wtimes, "weather timeline")
    _check_sorted(ctimes, "crowd profile")

    ctl = config.controller
    max_age = dt.timedelta(seconds=ctl.staleness_seconds)
    weather_at = _Carry(wtimes, list(weather), max_age)
    crowd_at = _Carry(ctimes, list(crowd), max_age)
    offset = dt.timedelta(minutes=ctl.tick_offset_minutes)

    state = DomeState.closed(ctl.domes)
    previous = None
    for head in _hour_heads(wtimes[0], wtimes[-1], offset):
        if previous is not None:
            state = advance(state, (head - previous).total_seconds(), ctl.travel_seconds)
        previous = head

        w = weather_at.at(head)
        c = crowd_at.at(head)
        fault = ""
        if w is None:
            fault = "stale_weather"
        elif c is None:
            fault = "stale_crowd"

        if fault:
            decision = failsafe_decision(head, fault)
        else:
            reading = WeatherReading(w.temperature, w.humidity, w.rain, head)
            estimate = CrowdEstimate.from_ratio(c.ratio, ctl.capacity)
            decision = decide(reading, estimate, config.engine)
        state = apply_decision(state, decision, ctl.travel_seconds)
        yield _entry(head, w, c, decision, state, fault)


def run_replay(
    weather: Sequence[WeatherRecord],
    crowd: Sequence[CrowdProfileEntry],
    config: Config = Config(),
) -> list[EventLogEntry]:
    return list(iter_replay(weather, crowd, config))


def _entry(head, w, c, decision: DomeDecision, state: DomeState, fault: str) -> EventLogEntry:
    fired = decision.trace.fired if decision.trace is not None else ()
    return EventLogEntry(
        timestamp=head,
        temperature=None if w is None else w.temperature,
        humidity=None if w is None else w.humidity,
        rain=None if w is None else w.rain,
        ratio=None if c is None else c.ratio,
        open_seconds=decision.open_seconds,
        label=decision.label,
        fired=fired,
        fleet=state.summary(),
        fault=fault,
    )


def _num(v: Optional[float], digits: int) -> str:
    return "NA" if v is None else f"{v:.{digits}f}"


def _bool(v: Optional[bool]) -> str:
    return "NA" if v is None else ("true" if v else "false")


def format_fired(fired: Sequence[tuple[int, float]]) -> str:
    return ",".join(f"{i}:{s:.4f}" for i, s in fired) or "-"


def format_entry(e: EventLogEntry) -> str:
    fields = [
        ("kind", "decision"),
        ("timestamp", e.timestamp.isoformat()),
        ("temperature", _num(e.temperature, 2)),
        ("humidity", _num(e.humidity, 2)),
        ("rain", _bool(e.rain)),
        ("ratio", _num(e.ratio, 4)),
        ("open_seconds", f"{e.open_seconds:.2f}"),
        ("minutes", f"{e.open_seconds / 60:.2f}"),
        ("label", e.label),
        ("fired", format_fired(e.fired)),
        ("fleet", e.fleet),
    ]
    if e.fault:
        fields.append(("fault", e.fault))
    return " ".join(f"{k}={v}" for k, v in fields)


def format_summary(s: ReplaySummary) -> str:
    return (f"kind=summary hours={s.hours} open_seconds_total={s.open_seconds_total:.2f} "
            f"rain_closures={s.rain_closures} no_rule={s.no_rule}")


def write_log(fh: TextIO, entries: Sequence[EventLogEntry]) -> ReplaySummary:
    for e in entries:
        fh.write(format_entry(e) + "\n")
    summary = ReplaySummary.of(entries)
    fh.write(format_summary(summary) + "\n")
    return summary


def parse_log_line(line: str) -> dict[str, str]:
    """Split one log record into its ``key=value`` fields."""
    out = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise DataError(f"malformed log token {token!r}")
        out[key] = value
    return out
