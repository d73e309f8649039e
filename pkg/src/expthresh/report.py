"""Per-inequality evaluation records shared by all checkers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .numerics import LogReal, Number

SCHEMA = "v1"

# Slack on ln(rhs) - ln(lhs) before a point counts as failed.  Analytic
# boundaries (r exactly at a threshold) otherwise flip on rounding.
LOG_TOL = 1e-12


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"

    @property
    def exit_code(self) -> int:
        return {"PASS": 0, "FAIL": 1, "INCONCLUSIVE": 2}[self.value]


def combine(verdicts) -> Verdict:
    verdicts = list(verdicts)
    if Verdict.FAIL in verdicts:
        return Verdict.FAIL
    if Verdict.INCONCLUSIVE in verdicts:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS


def log_margin(lhs: LogReal, rhs: LogReal) -> float:
    """``ln rhs - ln lhs`` with the obvious conventions for signs and zeros."""
    if lhs.sign <= 0 and rhs.sign > 0:
        return math.inf
    if lhs.sign <= 0 and rhs.sign <= 0:
        if lhs <= rhs:
            return math.inf if lhs < rhs else 0.0
        return -math.inf
    if rhs.sign <= 0:
        return -math.inf
    return rhs.log_abs - lhs.log_abs


def _holds(lhs: LogReal, rhs: LogReal) -> bool:
    return log_margin(lhs, rhs) >= -LOG_TOL


@dataclass
class Point:
    """One instance of an inequality ``lhs <= rhs``.

    ``lhs_band`` is an optional (low, high) range for Monte Carlo inputs; a
    point whose band straddles ``rhs`` is INCONCLUSIVE.
    """

    name: str
    lhs: LogReal
    rhs: LogReal
    index: Optional[int] = None
    lhs_band: Optional[tuple] = None
    informational: bool = False
    note: str = ""

    @property
    def margin(self) -> float:
        return log_margin(self.lhs, self.rhs)

    @property
    def verdict(self) -> Verdict:
        if self.lhs_band is None:
            return Verdict.PASS if _holds(self.lhs, self.rhs) else Verdict.FAIL
        lo, hi = self.lhs_band
        if _holds(hi, self.rhs):
            return Verdict.PASS
        if not _holds(lo, self.rhs):
            return Verdict.FAIL
        return Verdict.INCONCLUSIVE

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "index": self.index,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "margin": _finite_or_str(self.margin),
            "verdict": self.verdict.value,
            "informational": self.informational,
        }
        if self.lhs_band is not None:
            out["lhs_band"] = [b.to_json() for b in self.lhs_band]
        if self.note:
            out["note"] = self.note
        return out


def _finite_or_str(x: float) -> Union[float, str]:
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def point(
    name: str,
    lhs: Union[Number, LogReal],
    rhs: Union[Number, LogReal],
    **kwargs,
) -> Point:
    return Point(name, LogReal.of(lhs), LogReal.of(rhs), **kwargs)


@dataclass
class ConditionReport:
    inequality: str
    points: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        return combine(p.verdict for p in self.points if not p.informational)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def point_named(self, name: str, index: Optional[int] = None) -> Point:
        for p in self.points:
            if p.name == name and (index is None or p.index == index):
                return p
        raise KeyError((name, index))

    def failing(self) -> list:
        return [p for p in self.points if not p.informational and p.verdict is Verdict.FAIL]

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "inequality": self.inequality,
            "verdict": self.verdict.value,
            "params": self.params,
            "warnings": list(self.warnings),
            "notes": list(self.notes),
            "points": [p.to_json() for p in self.points],
        }
