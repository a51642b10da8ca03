"""Dome controller: sensor inputs to fuzzy inputs, rain override, fleet actuation."""

from __future__ import annotations

import datetime as dt
import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

from .errors import ConfigError, DataError
from .fuzzy import Flag, FuzzyEngine, FuzzyOutcome

log = logging.getLogger(__name__)

SENSOR_MIN_C = -40.0
SENSOR_MAX_C = 80.0

NO_RULE = "NoRule"
STOP = "Stop"


def crowd_ratio(count: float, capacity: float) -> float:
    """Occupancy as a percentage of capacity, clamped to [0, 100]."""
    if not capacity > 0:
        raise ConfigError(f"capacity must be positive, got {capacity}")
    if count < 0:
        raise DataError(f"count must be non-negative, got {count}")
    return min(100.0 * count / capacity, 100.0)


@dataclass(frozen=True)
class WeatherReading:
    temperature: float
    humidity: float
    rain: bool
    timestamp: dt.datetime

    def __post_init__(self):
        if not math.isfinite(self.temperature) or not SENSOR_MIN_C <= self.temperature <= SENSOR_MAX_C:
            raise DataError(f"temperature {self.temperature} outside sensor range [-40, 80]")
        if not 0.0 <= self.humidity <= 100.0:
            raise DataError(f"humidity {self.humidity} outside [0, 100]")


@dataclass(frozen=True)
class CrowdEstimate:
    count: float
    capacity: int

    def __post_init__(self):
        if not self.capacity > 0:
            raise ConfigError(f"capacity must be positive, got {self.capacity}")
        if not self.count >= 0:
            raise DataError(f"count must be non-negative, got {self.count}")

    @property
    def ratio(self) -> float:
        return crowd_ratio(self.count, self.capacity)

    @classmethod
    def from_ratio(cls, ratio: float, capacity: int) -> "CrowdEstimate":
        ratio = min(max(float(ratio), 0.0), 100.0)
        return cls(count=ratio * capacity / 100.0, capacity=capacity)


@dataclass(frozen=True)
class DomeDecision:
    open_seconds: float
    label: str
    trace: Optional[FuzzyOutcome]
    issued_at: Optional[dt.datetime] = None
    rain: bool = False
    ratio: Optional[float] = None
    temperature: Optional[float] = None
    humidity: Optional[float] = None

    @property
    def minutes(self) -> float:
        return self.open_seconds / 60.0


def _label_for(engine: FuzzyEngine, crisp: float) -> str:
    # the output term that best describes the crisp duration
    out = engine.output
    degrees = out.fuzzify(crisp)
    return max(out.labels, key=lambda lbl: degrees[lbl])


def decide(
    weather: WeatherReading,
    crowd: CrowdEstimate,
    engine: FuzzyEngine,
    crowd_var: str = "crowd",
    weather_var: str = "weather",
) -> DomeDecision:
    """One control decision. Rain closes the domes without consulting the engine."""
    ratio = crowd.ratio
    common = dict(
        issued_at=weather.timestamp,
        rain=weather.rain,
        ratio=ratio,
        temperature=weather.temperature,
        humidity=weather.humidity,
    )
    if weather.rain:
        return DomeDecision(0.0, STOP, None, **common)
    outcome = engine.infer({crowd_var: ratio, weather_var: weather.temperature})
    if outcome.flag is Flag.NO_RULE_FIRED:
        log.warning("no rule fired at %s (ratio=%.2f, temp=%.2f); keeping domes closed",
                    weather.timestamp, ratio, weather.temperature)
        return DomeDecision(0.0, NO_RULE, outcome, **common)
    hi = engine.output.axis.hi
    seconds = min(max(outcome.crisp, 0.0), hi)
    return DomeDecision(seconds, _label_for(engine, seconds), outcome, **common)


def failsafe_decision(at: Optional[dt.datetime], reason: str) -> DomeDecision:
    log.warning("fail-safe closed at %s: %s", at, reason)
    return DomeDecision(0.0, NO_RULE, None, issued_at=at)


class Phase(enum.Enum):
    CLOSED = "Closed"
    OPENING = "Opening"
    OPEN = "Open"
    CLOSING = "Closing"


@dataclass(frozen=True)
class DomeStatus:
    """One dome. ``elapsed`` is travel time spent in Opening/Closing;
    ``remaining`` is hold time left once fully open (also carried while Opening)."""

    phase: Phase = Phase.CLOSED
    elapsed: float = 0.0
    remaining: float = 0.0

    def __str__(self):
        if self.phase is Phase.CLOSED:
            return "Closed"
        if self.phase is Phase.OPEN:
            return f"Open({self.remaining:g})"
        return f"{self.phase.value}({self.elapsed:g})"


CLOSED = DomeStatus()


class IllegalTransition(DataError):
    pass


def _command(status: DomeStatus, open_seconds: float, travel_seconds: float) -> DomeStatus:
    phase = status.phase
    if open_seconds > 0:
        if phase is Phase.CLOSED:
            return DomeStatus(Phase.OPENING, 0.0, open_seconds)
        if phase is Phase.OPENING:
            return replace(status, remaining=open_seconds)
        if phase is Phase.OPEN:
            return replace(status, remaining=open_seconds)
        raise IllegalTransition("cannot open a dome that is closing")
    if phase is Phase.CLOSED or phase is Phase.CLOSING:
        return status
    if phase is Phase.OPENING:
        # reverse from where it is: the remaining travel equals the distance covered
        return DomeStatus(Phase.CLOSING, max(travel_seconds - status.elapsed, 0.0), 0.0)
    return DomeStatus(Phase.CLOSING, 0.0, 0.0)


def _advance(status: DomeStatus, seconds: float, travel_seconds: float) -> DomeStatus:
    left = seconds
    while left > 0:
        phase = status.phase
        if phase is Phase.CLOSED:
            return status
        if phase is Phase.OPENING:
            need = travel_seconds - status.elapsed
            if left < need:
                return replace(status, elapsed=status.elapsed + left)
            left -= need
            status = DomeStatus(Phase.OPEN, 0.0, status.remaining)
        elif phase is Phase.OPEN:
            if left < status.remaining:
                return replace(status, remaining=status.remaining - left)
            left -= status.remaining
            status = DomeStatus(Phase.CLOSING, 0.0, 0.0)
        else:
            need = travel_seconds - status.elapsed
            if left < need:
                return replace(status, elapsed=status.elapsed + left)
            left -= need
            status = CLOSED
    return status


@dataclass(frozen=True)
class DomeState:
    """Status of every dome in the fleet."""

    domes: tuple[DomeStatus, ...]

    @classmethod
    def closed(cls, fleet_size: int = 27) -> "DomeState":
        if fleet_size < 1:
            raise ConfigError("fleet size must be at least 1")
        return cls((CLOSED,) * fleet_size)

    @property
    def fleet_size(self) -> int:
        return len(self.domes)

    @property
    def uniform(self) -> bool:
        return all(d == self.domes[0] for d in self.domes)

    def summary(self) -> str:
        if self.uniform:
            return str(self.domes[0])
        counts: dict[str, int] = {}
        for d in self.domes:
            counts[d.phase.value] = counts.get(d.phase.value, 0) + 1
        return "mixed:" + ",".join(f"{k}={v}" for k, v in sorted(counts.items()))


def apply_decision(state: DomeState, decision: DomeDecision, travel_seconds: float = 60.0) -> DomeState:
    """Issue the same command to every dome.

    An illegal request (opening a dome that is still closing) leaves the whole
    fleet unchanged and logs a fault.
    """
    if decision.open_seconds < 0:
        raise DataError("open_seconds must be non-negative")
    try:
        domes = tuple(_command(d, decision.open_seconds, travel_seconds) for d in state.domes)
    except IllegalTransition as exc:
        log.error("rejected command at %s: %s", decision.issued_at, exc)
        return state
    return DomeState(domes)


def advance(state: DomeState, seconds: float, travel_seconds: float = 60.0) -> DomeState:
    """Run every dome's timers forward by ``seconds``."""
    if seconds < 0:
        raise ValueError("cannot advance by a negative duration")
    return DomeState(tuple(_advance(d, seconds, travel_seconds) for d in state.domes))


InputsProvider = Callable[[dt.datetime], Optional[tuple[WeatherReading, CrowdEstimate]]]


def _hour_heads_between(start: Optional[dt.datetime], end: dt.datetime, offset: dt.timedelta):
    """Hour heads h (shifted by ``offset``) with start < h <= end; only ``end`` itself if start is None."""
    head = (end - offset).replace(minute=0, second=0, microsecond=0) + offset
    if start is None:
        return [end] if head == end else []
    heads = []
    while head > start:
        heads.append(head)
        head -= dt.timedelta(hours=1)
    return heads[::-1]


class DomeController:
    """Advances the fleet on a monotone clock and decides at every hour head."""

    def __init__(
        self,
        engine: FuzzyEngine,
        fleet_size: int = 27,
        travel_seconds: float = 60.0,
        tick_offset_minutes: int = 0,
    ):
        self.engine = engine
        self.travel_seconds = float(travel_seconds)
        self.offset = dt.timedelta(minutes=tick_offset_minutes)
        self.state = DomeState.closed(fleet_size)
        self.clock: Optional[dt.datetime] = None

    def tick(self, clock: dt.datetime, inputs: InputsProvider) -> Optional[DomeDecision]:
        if self.clock is not None and clock < self.clock:
            raise ValueError(f"clock went backwards: {clock} < {self.clock}")
        heads = _hour_heads_between(self.clock, clock, self.offset)
        decision = None
        last = self.clock
        for head in heads:
            if last is not None:
                self.state = advance(self.state, (head - last).total_seconds(), self.travel_seconds)
            decision = self._decide_at(head, inputs)
            self.state = apply_decision(self.state, decision, self.travel_seconds)
            last = head
        if last is not None and clock > last:
            self.state = advance(self.state, (clock - last).total_seconds(), self.travel_seconds)
        self.clock = clock
        return decision

    def _decide_at(self, head: dt.datetime, inputs: InputsProvider) -> DomeDecision:
        try:
            got = inputs(head)
        except (DataError, LookupError) as exc:
            return failsafe_decision(head, f"input provider failed: {exc}")
        if got is None:
            return failsafe_decision(head, "missing inputs")
        weather, crowd = got
        return replace(decide(weather, crowd, self.engine), issued_at=head)
