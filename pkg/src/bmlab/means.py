"""Two-point p-th means over [0, +inf], weighted means and BBL exponents.

Arguments of the means are non-negative floats where ``math.inf`` (IEEE
infinity, a distinct value rather than a large sentinel) stands for +inf.
The parameter ``p`` is either an exact rational (``Fraction``) or one of
``math.inf`` / ``-math.inf``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

INF = math.inf

_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")

# below this |p| the power mean is evaluated through log1p/expm1
LOG_SPACE_CUTOFF = 1e-3


def parse_rational(value) -> Fraction:
    """Parse an exact rational from an int, Fraction or a "k" / "k/m" string.

    Floats and decimal strings such as "0.5" are rejected, since every
    downstream lattice operation needs the exact value.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL.match(value)
        if not match:
            raise ValueError(f"expected an exact rational like '3/4', got {value!r}")
        num = int(match.group(1))
        den = int(match.group(2)) if match.group(2) else 1
        if den == 0:
            raise ValueError(f"zero denominator in {value!r}")
        return Fraction(num, den)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class Lambda:
    """Interpolation weight lambda = k/m with 0 < k < m and gcd(k, m) = 1."""

    k: int
    m: int

    def __post_init__(self):
        if self.m <= 0 or not 0 < self.k < self.m:
            raise ValueError(f"lambda must lie in (0, 1), got {self.k}/{self.m}")
        if math.gcd(self.k, self.m) != 1:
            raise ValueError(f"lambda {self.k}/{self.m} is not in lowest terms")

    @classmethod
    def of(cls, value) -> "Lambda":
        if isinstance(value, Lambda):
            return value
        frac = parse_rational(value)
        return cls(frac.numerator, frac.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.k, self.m)

    @property
    def value(self) -> float:
        return self.k / self.m

    def __str__(self):
        return f"{self.k}/{self.m}"


def parse_p(value):
    """Normalize a mean parameter to a Fraction or to +/-inf."""
    if isinstance(value, float):
        if math.isinf(value):
            return value
        raise TypeError("finite p must be an exact rational")
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return INF
        if text in ("-inf", "-infinity"):
            return -INF
    return parse_rational(value)


def format_p(p) -> str:
    if p == INF:
        return "inf"
    if p == -INF:
        return "-inf"
    return str(p)


def _weight(lam):
    return Lambda.of(lam).value


def _finite_power_mean(a: float, b: float, w: float, p) -> float:
    """((1-w) a^p + w b^p)^(1/p) for finite positive a, b and finite p != 0."""
    if a == b:
        return a
    pf = float(p)
    if abs(pf) < LOG_SPACE_CUTOFF:
        la, lb = math.log(a), math.log(b)
        s = (1.0 - w) * math.expm1(pf * la) + w * math.expm1(pf * lb)
        return math.exp(math.log1p(s) / pf)
    # normalize so that both ratios raised to p are at most 1 (no overflow)
    ref = max(a, b) if pf > 0 else min(a, b)
    s = (1.0 - w) * (a / ref) ** pf + w * (b / ref) ** pf
    return ref * s ** (1.0 / pf)


def _combination(a: float, b: float, w: float, p) -> float:
    """Power combination without the ab = 0 convention (continuity values)."""
    if p == INF:
        return max(a, b)
    if p == -INF:
        return min(a, b)
    if p == 0:
        if a == 0 or b == 0:
            return 0.0
        if math.isinf(a) or math.isinf(b):
            return INF
        if a == b:
            return a
        return math.exp((1.0 - w) * math.log(a) + w * math.log(b))
    if math.isinf(a) or math.isinf(b):
        if p > 0 or (math.isinf(a) and math.isinf(b)):
            return INF
        # p < 0: the infinite argument contributes nothing
        finite, weight = (b, w) if math.isinf(a) else (a, 1.0 - w)
        return weight ** (1.0 / float(p)) * finite
    if a == 0 or b == 0:
        if p < 0:
            return 0.0
        other, weight = (b, w) if a == 0 else (a, 1.0 - w)
        return weight ** (1.0 / float(p)) * other
    return _finite_power_mean(a, b, w, p)


def p_mean(a: float, b: float, lam, p) -> float:
    """M_p(a, b, lambda) with the convention M_p = 0 whenever ab = 0."""
    p = parse_p(p)
    if a < 0 or b < 0:
        raise ValueError("means are defined for non-negative arguments")
    if a == 0 or b == 0:
        return 0.0
    return _combination(float(a), float(b), _weight(lam), p)


def raw_power_combination(a: float, b: float, lam, p) -> float:
    """((1-lambda) a^p + lambda b^p)^(1/p) with no zeroing when ab = 0.

    This is the right-hand side of the extended inequality that allows one
    of the sets to be null: for p > 0 and a = 0 the value is lambda^(1/p) b.
    """
    p = parse_p(p)
    if a < 0 or b < 0:
        raise ValueError("means are defined for non-negative arguments")
    return _combination(float(a), float(b), _weight(lam), p)


def p_mean_weighted(a: float, b: float, lam, p, q) -> float:
    """((1-lambda)^q a^p + lambda^q b^p)^(1/p), zero when ab = 0.

    ``q`` may be any positive real; p = 0 has no weighted counterpart.
    """
    p = parse_p(p)
    if p == 0:
        raise ValueError("the weighted mean is undefined for p = 0")
    if a < 0 or b < 0:
        raise ValueError("means are defined for non-negative arguments")
    if a == 0 or b == 0:
        return 0.0
    if p == INF:
        return max(a, b)
    if p == -INF:
        return min(a, b)
    w = _weight(lam)
    q = float(q)
    pf = float(p)
    # absorb the weights into the arguments: (1-w)^q a^p = (1-w)^(q-1) (a')^p
    ca = (1.0 - w) ** ((q - 1.0) / pf)
    cb = w ** ((q - 1.0) / pf)
    return _combination(float(ca * a), float(cb * b), w, p)


def bbl_exponent(p, m):
    """Conclusion exponent q = p / (m p + 1) of BBL(p, m).

    Exact for rational p and m; p = +inf gives 1/m and p = -1/m gives -inf.
    """
    p = parse_p(p)
    m = parse_rational(m) if not isinstance(m, float) else m
    if m <= 0:
        raise ValueError("m must be positive")
    if p == INF:
        return 1 / m if isinstance(m, float) else Fraction(1) / m
    if p == -INF or p < -1 / m:
        raise ValueError(f"p = {format_p(p)} is below -1/m")
    if p == -1 / m:
        return -INF
    return p / (m * p + 1)
