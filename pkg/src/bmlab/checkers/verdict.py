"""Verdicts: sound comparison of a measured left side against a mean on the right.

Both margins are crossed: the hold margin compares the lower bound of the
left side with the upper bound of the right side, the violation margin the
other way round.  Each is therefore a claim about the exact quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..density import EPS, MeasureBracket
from ..means import INF

HOLDS = "certified_holds"
VIOLATION = "certified_violation"
INCONCLUSIVE = "inconclusive"

# relative widening applied to every mean evaluated in floating point
MEAN_SLACK = 16 * EPS


@dataclass(frozen=True)
class Enclosure:
    """Signed interval lower <= value <= upper (functionals may be negative)."""

    lower: float
    upper: float
    rigorous: bool = True

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def __repr__(self):
        tag = "" if self.rigorous else ", heuristic"
        return f"[{self.lower:.12g}, {self.upper:.12g}{tag}]"


@dataclass(frozen=True)
class Hypothesis:
    """One precondition of a check and how it was established.

    ``method`` is "exact" (finite exact test), "bracket" (overlap of rigorous
    brackets), "sampled" or "asserted" (taken from the caller or generator).
    """

    name: str
    holds: bool
    method: str = "exact"
    detail: str = ""

    @property
    def rigorous(self) -> bool:
        return self.holds and self.method == "exact"

    def line(self) -> str:
        mark = "ok  " if self.holds else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"  [{mark}] {self.name} [{self.method}]{extra}"


@dataclass
class Verdict:
    status: str
    hold_margin: float
    violation_margin: float
    lhs: object
    rhs: Enclosure
    measures: dict = field(default_factory=dict)
    hypotheses: list = field(default_factory=list)
    label: str = ""
    rigorous: bool = True
    notes: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == HOLDS and not self.hold_margin >= 0:
            raise AssertionError("certified_holds needs a non-negative hold margin")
        if self.status == VIOLATION and not self.violation_margin > 0:
            raise AssertionError("certified_violation needs a positive violation margin")

    @property
    def gates_pass(self) -> bool:
        return all(h.holds for h in self.hypotheses)

    @property
    def gates_rigorous(self) -> bool:
        return all(h.rigorous for h in self.hypotheses)

    @property
    def bracket_width(self) -> float:
        return self.lhs.width + self.rhs.width

    @property
    def margin(self) -> Enclosure:
        """Enclosure of the exact margin lhs - rhs."""
        return Enclosure(self.hold_margin, -self.violation_margin, self.rigorous)

    def summary(self) -> str:
        tag = "" if self.rigorous else " (heuristic brackets)"
        gates = "gates ok" if self.gates_pass else "gates FAILED"
        return (f"{self.label}: {self.status}{tag}; margin in [{self.hold_margin:.6g}, "
                f"{-self.violation_margin:.6g}]; {gates}")

    def report(self) -> str:
        lines = [self.summary()]
        for k, v in self.params.items():
            lines.append(f"  {k} = {v}")
        lines.append(f"  lhs = {self.lhs!r}")
        lines.append(f"  rhs = {self.rhs!r}")
        for name, br in self.measures.items():
            lines.append(f"  {name} = {br!r}")
        lines.extend(h.line() for h in self.hypotheses)
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def decide(lhs, rhs: Enclosure, inclusion_margin: float | None = None) -> tuple:
    """Status and crossed margins for lhs >= rhs.

    ``inclusion_margin`` is an independent lower bound on lhs - rhs (used
    when C contains both A and B); the hold margin is the better of the two.
    """
    hold = lhs.lower - rhs.upper
    if inclusion_margin is not None and inclusion_margin > hold:
        hold = inclusion_margin
    violation = rhs.lower - lhs.upper
    if math.isnan(hold) or math.isnan(violation):
        return INCONCLUSIVE, -INF, -INF
    if hold >= 0:
        return HOLDS, hold, violation
    if violation > 0:
        return VIOLATION, hold, violation
    return INCONCLUSIVE, hold, violation


def _widen(value: float, exact: bool) -> tuple:
    if exact or value == 0 or math.isinf(value):
        return value, value
    return value * (1 - MEAN_SLACK), value * (1 + MEAN_SLACK)


def mean_enclosure(fn, a: MeasureBracket, b: MeasureBracket) -> Enclosure:
    """Enclosure of fn(mu_A, mu_B) for a mean fn non-decreasing in both arguments."""
    lo = fn(a.lower, b.lower)
    hi = fn(a.upper, b.upper)
    lo_exact = lo in (a.lower, b.lower)
    hi_exact = hi in (a.upper, b.upper)
    return Enclosure(_widen(lo, lo_exact)[0], _widen(hi, hi_exact)[1], a.rigorous and b.rigorous)


def root_bracket(br, n: int) -> MeasureBracket:
    """Bracket of mu^(1/n) from a bracket of mu."""
    lo = br.lower ** (1.0 / n) * (1 - MEAN_SLACK)
    hi = br.upper ** (1.0 / n) * (1 + MEAN_SLACK)
    return MeasureBracket(max(lo, 0.0), hi, br.rigorous)


def make_verdict(lhs, rhs: Enclosure, label: str, measures=None, hypotheses=(), notes=(),
                 params=None, inclusion_margin=None) -> Verdict:
    status, hold, violation = decide(lhs, rhs, inclusion_margin)
    rigorous = bool(getattr(lhs, "rigorous", True) and rhs.rigorous)
    return Verdict(status, float(hold), float(violation), lhs, rhs, dict(measures or {}), list(hypotheses),
                   label, rigorous, list(notes), dict(params or {}))


def flips(a: Verdict, b: Verdict) -> bool:
    """True when one verdict certifies the inequality and the other refutes it."""
    return {a.status, b.status} == {HOLDS, VIOLATION}
