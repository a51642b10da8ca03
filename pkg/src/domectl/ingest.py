"""Parsers for weather history, crowd profiles and head annotations.

Data rows that cannot be used become ``Fault`` entries; only schema problems
(missing header, missing required columns) raise.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

import numpy as np

from .density import HeadAnnotations
from .dome import SENSOR_MAX_C, SENSOR_MIN_C, crowd_ratio
from .errors import DataError

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}

# header aliases seen in public weather exports
_ALIASES = {
    "temp": "temperature",
    "wind_strength": "wind",
    "wind strength": "wind",
}
WEATHER_REQUIRED = ("date", "hour", "minute", "temperature", "humidity")
WEATHER_COLUMNS = ("date", "hour", "minute", "day", "temperature", "humidity",
                   "wind", "barometer", "visibility", "rain")


@dataclass(frozen=True)
class Fault:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


@dataclass(frozen=True)
class WeatherRecord:
    date: dt.date
    hour: int
    minute: int
    temperature: float
    humidity: float
    day: str = ""
    wind: Optional[float] = None
    barometer: Optional[float] = None
    visibility: Optional[float] = None
    rain: bool = False

    @property
    def timestamp(self) -> dt.datetime:
        return dt.datetime.combine(self.date, dt.time(self.hour, self.minute))


@dataclass(frozen=True)
class CrowdProfileEntry:
    timestamp: dt.datetime
    ratio: float
    count: Optional[float] = None
    source: str = "file"


def _parse_date(text: str) -> dt.date:
    text = text.strip()
    for fmt in ("%Y-%m-%d", "%d/%m/%Y", "%d %B %Y"):
        try:
            return dt.datetime.strptime(text, fmt).date()
        except ValueError:
            pass
    raise ValueError(f"unrecognised date {text!r}")


def _parse_timestamp(text: str) -> dt.datetime:
    try:
        return dt.datetime.fromisoformat(text.strip())
    except ValueError:
        raise ValueError(f"unrecognised timestamp {text!r}") from None


def _number(text: str) -> float:
    v = float(text.strip().rstrip("%"))
    if not math.isfinite(v):
        raise ValueError(f"non-finite number {text!r}")
    return v


def _optional_number(text: Optional[str]) -> Optional[float]:
    if text is None or not text.strip():
        return None
    return _number(text)


def _flag(text: Optional[str]) -> bool:
    t = (text or "").strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"bad boolean {text!r}")


def _reader(stream: TextIO) -> tuple[csv.DictReader, dict[str, str]]:
    reader = csv.DictReader(stream)
    if not reader.fieldnames:
        raise DataError("missing header row")
    columns = {}
    for name in reader.fieldnames:
        key = (name or "").strip().lower()
        columns.setdefault(_ALIASES.get(key, key), name)
    return reader, columns


def parse_weather_csv(stream: TextIO) -> tuple[list[WeatherRecord], list[Fault]]:
    """Read a weather history; columns are matched by header name."""
    reader, columns = _reader(stream)
    missing = [c for c in WEATHER_REQUIRED if c not in columns]
    if missing:
        raise DataError(f"weather file lacks required columns {missing}")

    def get(row, col):
        name = columns.get(col)
        return None if name is None else row.get(name)

    records, faults = [], []
    for row in reader:
        line = reader.line_num
        try:
            if None in row:
                raise ValueError("more fields than header columns")
            if any(v is None for v in row.values()):
                raise ValueError("fewer fields than header columns")
            hour, minute = int(get(row, "hour")), int(get(row, "minute"))
            if not 0 <= hour <= 23:
                raise ValueError(f"hour {hour} outside [0, 23]")
            if not 0 <= minute <= 59:
                raise ValueError(f"minute {minute} outside [0, 59]")
            temp = _number(get(row, "temperature"))
            if not SENSOR_MIN_C <= temp <= SENSOR_MAX_C:
                raise ValueError(f"temperature {temp} outside sensor range")
            humidity = _number(get(row, "humidity"))
            if not 0 <= humidity <= 100:
                raise ValueError(f"humidity {humidity} outside [0, 100]")
            records.append(WeatherRecord(
                date=_parse_date(get(row, "date")),
                hour=hour,
                minute=minute,
                temperature=temp,
                humidity=humidity,
                day=(get(row, "day") or "").strip(),
                wind=_optional_number(get(row, "wind")),
                barometer=_optional_number(get(row, "barometer")),
                visibility=_optional_number(get(row, "visibility")),
                rain=_flag(get(row, "rain")),
            ))
        except (TypeError, ValueError) as exc:
            faults.append(Fault(line, str(exc)))
    return records, faults


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def serialize_weather_csv(records: Iterable[WeatherRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(WEATHER_COLUMNS)
    for r in records:
        w.writerow([r.date.isoformat(), r.hour, r.minute, r.day, _fmt(r.temperature), _fmt(r.humidity),
                    _fmt(r.wind), _fmt(r.barometer), _fmt(r.visibility), _fmt(r.rain)])
    return out.getvalue()


def parse_crowd_profile(stream: TextIO, capacity: int) -> tuple[list[CrowdProfileEntry], list[Fault]]:
    """Read a ``timestamp`` + (``count`` | ``ratio``) profile.

    Counts become ratios against ``capacity``; ratios above 100 are clamped
    and noted. Entries come back sorted by timestamp.
    """
    if capacity <= 0:
        raise DataError(f"capacity must be positive, got {capacity}")
    try:
        reader, columns = _reader(stream)
    except DataError:
        return [], []
    if "timestamp" not in columns:
        raise DataError("crowd profile lacks a 'timestamp' column")
    has_count, has_ratio = "count" in columns, "ratio" in columns
    if has_count == has_ratio:
        raise DataError("crowd profile needs exactly one of 'count' or 'ratio' columns")

    entries, faults = [], []
    previous = None
    for row in reader:
        line = reader.line_num
        try:
            ts = _parse_timestamp(row[columns["timestamp"]] or "")
            source = (row.get(columns["source"]) or "file").strip() if "source" in columns else "file"
            if has_count:
                count = _number(row[columns["count"]] or "")
                if count < 0:
                    raise ValueError(f"negative count {count}")
                entry = CrowdProfileEntry(ts, crowd_ratio(count, capacity), count, source)
            else:
                ratio = _number(row[columns["ratio"]] or "")
                if ratio < 0:
                    raise ValueError(f"negative ratio {ratio}")
                if ratio > 100:
                    faults.append(Fault(line, f"ratio {ratio} clamped to 100"))
                    ratio = 100.0
                entry = CrowdProfileEntry(ts, ratio, None, source)
        except (TypeError, ValueError) as exc:
            faults.append(Fault(line, str(exc)))
            continue
        if previous is not None and ts <= previous:
            faults.append(Fault(line, f"timestamp {ts.isoformat()} not after {previous.isoformat()}"))
        previous = ts
        entries.append(entry)
    entries.sort(key=lambda e: e.timestamp)
    return entries, faults


def serialize_crowd_profile(entries: Iterable[CrowdProfileEntry]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("timestamp", "ratio", "source"))
    for e in entries:
        w.writerow((e.timestamp.isoformat(), repr(float(e.ratio)), e.source))
    return out.getvalue()


def parse_annotations(stream: TextIO) -> HeadAnnotations:
    """Read ``size W H`` followed by one ``x y`` pair per line (``#`` comments)."""
    size = None
    points = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            if parts[0].lower() == "size":
                if size is not None:
                    raise DataError(f"line {lineno}: duplicate size line")
                if len(parts) != 3:
                    raise ValueError
                size = (int(parts[1]), int(parts[2]))
            else:
                if len(parts) != 2:
                    raise ValueError
                points.append((_number(parts[0]), _number(parts[1])))
        except ValueError:
            raise DataError(f"line {lineno}: cannot read {line!r}") from None
    if size is None:
        raise DataError("annotation file has no 'size W H' line")
    return HeadAnnotations(np.array(points, dtype=float).reshape(-1, 2), *size)


def serialize_annotations(ann: HeadAnnotations) -> str:
    lines = [f"size {ann.width} {ann.height}"]
    lines += [f"{x!r} {y!r}" for x, y in ann.points.tolist()]
    return "\n".join(lines) + "\n"
