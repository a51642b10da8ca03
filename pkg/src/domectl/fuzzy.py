"""Mamdani fuzzy inference.

Fuzzification, min-conjunction of rule antecedents, min-clipped consequents
aggregated with max, and a discrete centroid over the output axis grid.

Everything here is immutable after construction; ``FuzzyEngine.infer`` is a
pure function of the engine and its inputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "UniverseAxis",
    "Triangular",
    "Trapezoidal",
    "Singleton",
    "MembershipFunction",
    "LinguisticVariable",
    "Rule",
    "Flag",
    "FuzzyOutcome",
    "FuzzyEngine",
    "membership_at",
    "defuzzify_centroid",
]


@dataclass(frozen=True)
class UniverseAxis:
    name: str
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and math.isfinite(self.step)):
            raise ConfigError(f"axis {self.name!r}: bounds and step must be finite")
        if not self.lo < self.hi:
            raise ConfigError(f"axis {self.name!r}: lo ({self.lo}) must be < hi ({self.hi})")
        if not self.step > 0:
            raise ConfigError(f"axis {self.name!r}: step must be > 0")
        if (self.hi - self.lo) / self.step < 10:
            raise ConfigError(f"axis {self.name!r}: needs at least 10 grid intervals")

    @property
    def n_points(self) -> int:
        return int(round((self.hi - self.lo) / self.step)) + 1

    def grid(self) -> np.ndarray:
        """Uniform sample points ``lo, lo+step, ..., hi`` (endpoints included)."""
        return np.linspace(self.lo, self.hi, self.n_points)

    def clamp(self, x: float) -> float:
        return min(max(float(x), self.lo), self.hi)


def _rising(x, a, b):
    if b > a:
        return (x - a) / (b - a)
    # vertical left edge: full membership from a onwards
    return np.where(x >= a, 1.0, 0.0)


def _falling(x, c, d):
    if d > c:
        return (d - x) / (d - c)
    return np.where(x <= d, 1.0, 0.0)


@dataclass(frozen=True)
class Triangular:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a <= self.b <= self.c:
            raise ConfigError(f"triangular breakpoints must satisfy a <= b <= c, got {self.params}")

    @property
    def params(self) -> tuple[float, ...]:
        return (self.a, self.b, self.c)

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.c)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip(np.minimum(_rising(x, self.a, self.b), _falling(x, self.b, self.c)), 0.0, 1.0)

    def sample(self, grid: np.ndarray) -> np.ndarray:
        return self(grid)


@dataclass(frozen=True)
class Trapezoidal:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not self.a <= self.b <= self.c <= self.d:
            raise ConfigError(f"trapezoidal breakpoints must satisfy a <= b <= c <= d, got {self.params}")

    @property
    def params(self) -> tuple[float, ...]:
        return (self.a, self.b, self.c, self.d)

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.d)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip(np.minimum(_rising(x, self.a, self.b), _falling(x, self.c, self.d)), 0.0, 1.0)

    def sample(self, grid: np.ndarray) -> np.ndarray:
        return self(grid)


@dataclass(frozen=True)
class Singleton:
    """Full membership at a single point.

    On a sampled axis the singleton occupies the grid point nearest to ``p``,
    so in a centroid it weighs as one grid cell of height 1.
    """

    p: float

    @property
    def params(self) -> tuple[float, ...]:
        return (self.p,)

    @property
    def support(self) -> tuple[float, float]:
        return (self.p, self.p)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x == self.p, 1.0, 0.0)

    def sample(self, grid: np.ndarray) -> np.ndarray:
        out = np.zeros(len(grid))
        out[int(np.argmin(np.abs(grid - self.p)))] = 1.0
        return out


MembershipFunction = Union[Triangular, Trapezoidal, Singleton]

SHAPES = {"triangular": Triangular, "trapezoidal": Trapezoidal, "singleton": Singleton}


def membership_at(mf: MembershipFunction, x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"membership input must be finite, got {x!r}")
    return float(mf(x))


@dataclass(frozen=True)
class LinguisticVariable:
    axis: UniverseAxis
    terms: tuple[tuple[str, MembershipFunction], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((str(lbl), mf) for lbl, mf in self.terms))
        labels = [lbl for lbl, _ in self.terms]
        if not labels:
            raise ConfigError(f"variable {self.name!r} has no terms")
        dupes = {lbl for lbl in labels if labels.count(lbl) > 1}
        if dupes:
            raise ConfigError(f"variable {self.name!r}: duplicate term labels {sorted(dupes)}")
        for lbl, mf in self.terms:
            lo, hi = mf.support
            if lo < self.axis.lo or hi > self.axis.hi:
                raise ConfigError(
                    f"variable {self.name!r}: term {lbl!r} support [{lo}, {hi}] "
                    f"leaves axis [{self.axis.lo}, {self.axis.hi}]"
                )

    @property
    def name(self) -> str:
        return self.axis.name

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.terms)

    def term(self, label: str) -> MembershipFunction:
        for lbl, mf in self.terms:
            if lbl == label:
                return mf
        raise ConfigError(f"variable {self.name!r} has no term {label!r}")

    def fuzzify(self, x: float) -> dict[str, float]:
        """Degree of every term at ``x``; ``x`` is clamped onto the axis first."""
        if not math.isfinite(x):
            raise ValueError(f"{self.name}: input must be finite, got {x!r}")
        x = self.axis.clamp(x)
        return {lbl: float(mf(x)) for lbl, mf in self.terms}


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(tuple(c) for c in self.antecedent))
        object.__setattr__(self, "consequent", tuple(self.consequent))
        if not self.antecedent:
            raise ConfigError("rule antecedent must not be empty")

    def __str__(self):
        cond = " and ".join(f"{v} is {t}" for v, t in self.antecedent)
        return f"if {cond} then {self.consequent[0]} is {self.consequent[1]}"


class Flag(enum.Enum):
    OK = "Ok"
    NO_RULE_FIRED = "NoRuleFired"


@dataclass(frozen=True)
class FuzzyOutcome:
    crisp: float
    grid: np.ndarray = field(repr=False)
    aggregate: np.ndarray = field(repr=False)
    fired: tuple[tuple[int, float], ...]
    flag: Flag
    memberships: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def strength(self, rule_index: int) -> float:
        return dict(self.fired)[rule_index]


def defuzzify_centroid(grid: np.ndarray, curve: np.ndarray, lo: float | None = None) -> tuple[float, Flag]:
    """Discrete centroid ``sum(x*mu)/sum(mu)`` of a curve on a uniform grid.

    A curve with zero mass yields ``(lo, Flag.NO_RULE_FIRED)`` where ``lo``
    defaults to the first grid point.
    """
    grid = np.asarray(grid, dtype=float)
    curve = np.asarray(curve, dtype=float)
    mass = float(np.sum(curve))
    if mass <= 0.0:
        return (float(grid[0]) if lo is None else float(lo)), Flag.NO_RULE_FIRED
    return float(np.sum(grid * curve) / mass), Flag.OK


class FuzzyEngine:
    """A set of linguistic variables plus a rule base.

    Rules are numbered from 1 in traces, matching the order given.
    """

    def __init__(self, variables: Sequence[LinguisticVariable], rules: Sequence[Rule]):
        self.variables: dict[str, LinguisticVariable] = {}
        for var in variables:
            if var.name in self.variables:
                raise ConfigError(f"duplicate variable {var.name!r}")
            self.variables[var.name] = var
        self.rules: tuple[Rule, ...] = tuple(rules)
        if not self.rules:
            raise ConfigError("rule base is empty")
        for i, rule in enumerate(self.rules, start=1):
            for var_name, label in rule.antecedent + (rule.consequent,):
                if var_name not in self.variables:
                    raise ConfigError(f"rule {i}: unknown variable {var_name!r}")
                if label not in self.variables[var_name].labels:
                    raise ConfigError(f"rule {i}: variable {var_name!r} has no term {label!r}")
        outputs = {r.consequent[0] for r in self.rules}
        if len(outputs) != 1:
            raise ConfigError(f"rules must share one output variable, got {sorted(outputs)}")
        self.output_name = outputs.pop()
        if self.output_name in self.input_names:
            raise ConfigError(f"variable {self.output_name!r} is used as both input and output")

    @property
    def output(self) -> LinguisticVariable:
        return self.variables[self.output_name]

    @property
    def input_names(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for rule in self.rules:
            for var_name, _ in rule.antecedent:
                seen.setdefault(var_name)
        return tuple(seen)

    def fuzzify(self, inputs: Mapping[str, float]) -> dict[str, dict[str, float]]:
        missing = [n for n in self.input_names if n not in inputs]
        if missing:
            raise ConfigError(f"missing input values for {missing}")
        return {n: self.variables[n].fuzzify(inputs[n]) for n in self.input_names}

    def evaluate_rules(self, inputs: Mapping[str, float]) -> list[tuple[Rule, float]]:
        degrees = self.fuzzify(inputs)
        return [
            (rule, min(degrees[v][t] for v, t in rule.antecedent))
            for rule in self.rules
        ]

    def aggregate(self, strengths: Sequence[tuple[Rule, float]]) -> np.ndarray:
        out = self.output
        grid = out.axis.grid()
        curve = np.zeros_like(grid)
        for rule, strength in strengths:
            if strength <= 0.0:
                continue
            clipped = np.minimum(out.term(rule.consequent[1]).sample(grid), strength)
            np.maximum(curve, clipped, out=curve)
        return curve

    def infer(self, inputs: Mapping[str, float]) -> FuzzyOutcome:
        degrees = self.fuzzify(inputs)
        strengths = [
            (rule, min(degrees[v][t] for v, t in rule.antecedent)) for rule in self.rules
        ]
        curve = self.aggregate(strengths)
        grid = self.output.axis.grid()
        crisp, flag = defuzzify_centroid(grid, curve, self.output.axis.lo)
        curve.setflags(write=False)
        grid.setflags(write=False)
        return FuzzyOutcome(
            crisp=crisp,
            grid=grid,
            aggregate=curve,
            fired=tuple((i, float(s)) for i, (_, s) in enumerate(strengths, start=1)),
            flag=flag,
            memberships=degrees,
        )

    def __repr__(self):
        return f"FuzzyEngine(variables={list(self.variables)}, rules={len(self.rules)})"
