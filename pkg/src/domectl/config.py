"""Structured-text configuration for the engine, controller and density kernels.

Grammar (see docs/formats.md for the full description)::

    # comment
    [variable crowd]
    axis = 0 100 1
    term NoCrowd = trapezoidal 0 0 25 30

    [rules]
    rule = weather is Outlook and crowd is Medium => time is Medium

    [controller]
    capacity = 698000

    [kernel]
    k = 4

Sections that are omitted fall back to the defaults below. A ``[variable X]``
section replaces the default variable ``X`` as a whole, and a ``[rules]``
section replaces the whole default rule base.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field, fields
from typing import TextIO, Union

from .density import KernelParams
from .errors import ConfigError
from .fuzzy import (
    SHAPES,
    FuzzyEngine,
    LinguisticVariable,
    Rule,
    Singleton,
    Trapezoidal,
    Triangular,
    UniverseAxis,
)

DEFAULT_CAPACITY = 698_000
DEFAULT_DOMES = 27


def default_variables() -> list[LinguisticVariable]:
    crowd = LinguisticVariable(
        UniverseAxis("crowd", 0.0, 100.0, 0.5),
        (
            ("NoCrowd", Trapezoidal(0, 0, 25, 30)),
            ("Medium", Triangular(25, 50, 75)),
            ("Crowd", Triangular(70, 100, 100)),
        ),
    )
    weather = LinguisticVariable(
        UniverseAxis("weather", 0.0, 50.0, 0.5),
        (
            ("Rain", Trapezoidal(0, 0, 7, 24)),
            ("Outlook", Triangular(7, 27, 47)),
        ),
    )
    time = LinguisticVariable(
        UniverseAxis("time", 0.0, 300.0, 0.5),
        (
            ("Stop", Singleton(0)),
            ("Short", Triangular(0, 60, 120)),
            ("Medium", Triangular(90, 150, 210)),
            ("Tall", Triangular(180, 240, 300)),
        ),
    )
    return [crowd, weather, time]


def default_rules() -> list[Rule]:
    return [
        Rule((("weather", "Rain"),), ("time", "Stop")),
        Rule((("weather", "Outlook"), ("crowd", "NoCrowd")), ("time", "Short")),
        Rule((("weather", "Outlook"), ("crowd", "Medium")), ("time", "Medium")),
        Rule((("weather", "Outlook"), ("crowd", "Crowd")), ("time", "Tall")),
    ]


def default_engine() -> FuzzyEngine:
    return FuzzyEngine(default_variables(), default_rules())


@dataclass(frozen=True)
class ControllerConfig:
    capacity: int = DEFAULT_CAPACITY
    domes: int = DEFAULT_DOMES
    travel_seconds: float = 60.0
    tick_offset_minutes: int = 0
    staleness_seconds: float = 3600.0

    def __post_init__(self):
        if self.capacity <= 0:
            raise ConfigError("capacity must be positive")
        if self.domes < 1:
            raise ConfigError("domes must be at least 1")
        if self.travel_seconds < 0:
            raise ConfigError("travel_seconds must be non-negative")
        if not 0 <= self.tick_offset_minutes < 60:
            raise ConfigError("tick_offset_minutes must be in [0, 59]")
        if self.staleness_seconds <= 0:
            raise ConfigError("staleness_seconds must be positive")


@dataclass(frozen=True)
class Config:
    engine: FuzzyEngine = field(default_factory=default_engine)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    kernel: KernelParams = field(default_factory=KernelParams)


_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)(?:\s+([A-Za-z_][A-Za-z0-9_]*))?\s*\]$")
_TERM_KEY = re.compile(r"^term\s+([A-Za-z_][A-Za-z0-9_]*)$")
# the first '=' that is not part of a rule's '=>'
_KEY_VALUE = re.compile(r"^([^=]+?)\s*=(?!>)(.*)$")
_CLAUSE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s+is\s+([A-Za-z_][A-Za-z0-9_]*)$")


def _fail(lineno: int, section: str, msg: str) -> ConfigError:
    return ConfigError(f"line {lineno} [{section}]: {msg}")


def _numbers(text: str, lineno: int, section: str) -> list[float]:
    try:
        return [float(t) for t in text.split()]
    except ValueError:
        raise _fail(lineno, section, f"expected numbers, got {text!r}") from None


def _parse_rule(text: str, lineno: int) -> Rule:
    if "=>" not in text:
        raise _fail(lineno, "rules", "rule needs '=>' between antecedent and consequent")
    lhs, rhs = (s.strip() for s in text.split("=>", 1))
    clauses = []
    for part in re.split(r"\s+and\s+", lhs):
        m = _CLAUSE.match(part.strip())
        if not m:
            raise _fail(lineno, "rules", f"cannot read clause {part.strip()!r}")
        clauses.append((m.group(1), m.group(2)))
    m = _CLAUSE.match(rhs)
    if not m:
        raise _fail(lineno, "rules", f"cannot read consequent {rhs!r}")
    return Rule(tuple(clauses), (m.group(1), m.group(2)))


_CONTROLLER_KEYS = {f.name: f.type for f in fields(ControllerConfig)}
_KERNEL_KEYS = {f.name: f.type for f in fields(KernelParams)}


def _scalar(key: str, kind: str, value: str, lineno: int, section: str):
    try:
        if kind == "int":
            f = float(value)
            if not f.is_integer():
                raise ValueError
            return int(f)
        return float(value)
    except ValueError:
        raise _fail(lineno, section, f"{key}: bad {kind} value {value!r}") from None


def load_config(stream: Union[TextIO, str, None] = None) -> Config:
    """Parse a configuration stream; every invariant is checked here.

    An empty stream (or None) yields the full default configuration.
    """
    if stream is None:
        return Config()
    if isinstance(stream, str):
        stream = io.StringIO(stream)

    variables = {v.name: v for v in default_variables()}
    rules: list[Rule] | None = None
    controller: dict = {}
    kernel: dict = {}

    section = None
    var_name = None
    var_axis = None
    var_terms: list = []
    var_line = 0

    def close_variable():
        if var_name is None:
            return
        if var_axis is None:
            raise _fail(var_line, f"variable {var_name}", "missing 'axis = lo hi step'")
        try:
            variables[var_name] = LinguisticVariable(UniverseAxis(var_name, *var_axis), tuple(var_terms))
        except ConfigError as exc:
            raise _fail(var_line, f"variable {var_name}", str(exc)) from None

    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            close_variable()
            var_name = None
            kind, arg = m.group(1), m.group(2)
            if kind == "variable":
                if not arg:
                    raise _fail(lineno, kind, "variable section needs a name")
                section = f"variable {arg}"
                var_name, var_axis, var_terms, var_line = arg, None, [], lineno
            elif kind in ("rules", "controller", "kernel") and not arg:
                section = kind
                if kind == "rules":
                    if rules is not None:
                        raise _fail(lineno, kind, "duplicate [rules] section")
                    rules = []
            else:
                raise _fail(lineno, line, "unknown section")
            continue
        if section is None:
            raise _fail(lineno, "-", "key outside any section")
        kv = _KEY_VALUE.match(line)
        if not kv:
            raise _fail(lineno, section, f"expected 'key = value', got {line!r}")
        key, value = kv.group(1), kv.group(2).strip()
        if section == "rules":
            if key != "rule":
                raise _fail(lineno, section, f"unknown key {key!r}")
            rules.append(_parse_rule(value, lineno))
        elif var_name is not None:
            if key == "axis":
                nums = _numbers(value, lineno, section)
                if len(nums) != 3:
                    raise _fail(lineno, section, "axis needs 'lo hi step'")
                var_axis = nums
            elif _TERM_KEY.match(key):
                label = _TERM_KEY.match(key).group(1)
                parts = value.split(None, 1)
                shape = parts[0].lower() if parts else ""
                if shape not in SHAPES:
                    raise _fail(lineno, section, f"term {label!r}: unknown shape {shape!r}")
                nums = _numbers(parts[1] if len(parts) > 1 else "", lineno, section)
                try:
                    var_terms.append((label, SHAPES[shape](*nums)))
                except TypeError:
                    raise _fail(lineno, section, f"term {label!r}: wrong number of breakpoints for {shape}") from None
                except ConfigError as exc:
                    raise _fail(lineno, section, f"term {label!r}: {exc}") from None
            else:
                raise _fail(lineno, section, f"unknown key {key!r}")
        else:
            table, target = (_CONTROLLER_KEYS, controller) if section == "controller" else (_KERNEL_KEYS, kernel)
            if key not in table:
                raise _fail(lineno, section, f"unknown key {key!r}")
            target[key] = _scalar(key, table[key], value, lineno, section)
    close_variable()

    try:
        engine = FuzzyEngine(list(variables.values()), rules if rules is not None else default_rules())
    except ConfigError as exc:
        raise ConfigError(f"[rules]: {exc}") from None
    try:
        ctrl = ControllerConfig(**controller)
    except ConfigError as exc:
        raise ConfigError(f"[controller]: {exc}") from None
    try:
        kern = KernelParams(**kernel)
    except ConfigError as exc:
        raise ConfigError(f"[kernel]: {exc}") from None
    return Config(engine, ctrl, kern)


def _fmt(v: float) -> str:
    return repr(float(v)) if not float(v).is_integer() else str(int(v))


def dump_config(config: Config) -> str:
    """Serialise a configuration in the grammar ``load_config`` reads."""
    lines: list[str] = []
    for var in config.engine.variables.values():
        ax = var.axis
        lines.append(f"[variable {var.name}]")
        lines.append(f"axis = {_fmt(ax.lo)} {_fmt(ax.hi)} {_fmt(ax.step)}")
        for label, mf in var.terms:
            shape = type(mf).__name__.lower()
            lines.append(f"term {label} = {shape} " + " ".join(_fmt(p) for p in mf.params))
        lines.append("")
    lines.append("[rules]")
    for rule in config.engine.rules:
        lhs = " and ".join(f"{v} is {t}" for v, t in rule.antecedent)
        lines.append(f"rule = {lhs} => {rule.consequent[0]} is {rule.consequent[1]}")
    for name, obj in (("controller", config.controller), ("kernel", config.kernel)):
        lines.append("")
        lines.append(f"[{name}]")
        for f in fields(obj):
            lines.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def load_config_file(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return load_config(fh)
