"""Weighted quermassintegral, the M_mu functional and the isoperimetric and concavity checks.

Derivatives are estimated from exact lattice sets A + tB and (1 - s) A along
a decreasing rational schedule.  The enclosures combine the rigorous measure
brackets with the last Richardson step as a truncation estimate, so they are
reported as heuristic.
"""

from __future__ import annotations

from fractions import Fraction

from ..density import DensityND, measure
from ..gridset import GridSet, align, is_weakly_unconditional, minkowski_sum, scale
from ..means import parse_rational
from .suites import gate_product_pd
from .verdict import HOLDS, INCONCLUSIVE, MEAN_SLACK, VIOLATION, Enclosure, Hypothesis, Verdict, make_verdict, \
    root_bracket

DEFAULT_SCHEDULE = ("1/4", "1/8", "1/16", "1/32", "1/64")


def _schedule(ts):
    ts = [parse_rational(t) for t in (DEFAULT_SCHEDULE if ts is None else ts)]
    if len(ts) < 2 or any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("the schedule must be at least two decreasing positive rationals")
    return ts


def _richardson(ts, quotients) -> Enclosure:
    """Extrapolate difference-quotient enclosures D(t) = D0 + c t + O(t^2) to t = 0.

    For consecutive t_i > t_{i+1} with ratio r, R = (r D(t_{i+1}) - D(t_i)) / (r - 1)
    removes the linear term.  Interval arithmetic carries the measure brackets;
    the change between the last two extrapolants is added as truncation slack.
    """
    R = []
    for (t0, (l0, h0)), (t1, (l1, h1)) in zip(zip(ts, quotients), zip(ts[1:], quotients[1:])):
        r = float(t0 / t1)
        R.append(((r * l1 - h0) / (r - 1), (r * h1 - l0) / (r - 1)))
    lo, hi = R[-1]
    if len(R) > 1:
        mid_last = 0.5 * (R[-1][0] + R[-1][1])
        mid_prev = 0.5 * (R[-2][0] + R[-2][1])
        step = abs(mid_last - mid_prev)
    else:
        l, h = quotients[-1]
        step = abs(0.5 * (l + h) - 0.5 * (lo + hi))
    return Enclosure(lo - step, hi + step, rigorous=False)


def _scale_enclosure(e: Enclosure, c: float) -> Enclosure:
    return Enclosure(e.lower * c, e.upper * c, e.rigorous)


def w1_quermassintegral(A: GridSet, B: GridSet, phi: DensityND, t_schedule=None) -> Enclosure:
    """(1/n) lim_{t -> 0+} (mu(A + tB) - mu(A)) / t."""
    ts = _schedule(t_schedule)
    mA = measure(A, phi)
    quotients = []
    for t in ts:
        mt = measure(minkowski_sum(A, B, t), phi)
        tf = float(t)
        quotients.append(((mt.lower - mA.upper) / tf, (mt.upper - mA.lower) / tf))
    return _scale_enclosure(_richardson(ts, quotients), 1.0 / A.dim)


def surface_measure(A: GridSet, ball: GridSet, phi: DensityND, t_schedule=None) -> Enclosure:
    """mu^+(A) = n W_1(A; unit ball), with ``ball`` a digitized unit ball."""
    return _scale_enclosure(w1_quermassintegral(A, ball, phi, t_schedule), A.dim)


def m_mu_functional(A: GridSet, phi: DensityND, s_schedule=None) -> Enclosure:
    """n mu(A) minus the left derivative of t -> mu(tA) at t = 1."""
    ss = _schedule(s_schedule)
    mA = measure(A, phi)
    quotients = []
    for s in ss:
        ms = measure(scale(A, 1 - s), phi)
        sf = float(s)
        quotients.append(((mA.lower - ms.upper) / sf, (mA.upper - ms.lower) / sf))
    deriv = _richardson(ss, quotients)
    n = A.dim
    return Enclosure(n * mA.lower - deriv.upper, n * mA.upper - deriv.lower, rigorous=False)


def _iso_gates(A, B, phi, convex: bool):
    hyps = [Hypothesis("A weakly unconditional", is_weakly_unconditional(A), "exact"),
            Hypothesis("B weakly unconditional", is_weakly_unconditional(B), "exact"),
            Hypothesis("A and B convex", bool(convex), "asserted", "generator tag")]
    return hyps + gate_product_pd(phi)


def check_isoperimetric(A: GridSet, B: GridSet, phi: DensityND, t_schedule=None, convex: bool = True) -> Verdict:
    """W_1(A; B) + M_mu(A) / n >= mu(A)^(1 - 1/n) mu(B)^(1/n), equality expected when A = B."""
    A, B = align(A, B)
    n = A.dim
    w1 = w1_quermassintegral(A, B, phi, t_schedule)
    mm = m_mu_functional(A, phi, t_schedule)
    lhs = Enclosure(w1.lower + mm.lower / n, w1.upper + mm.upper / n, rigorous=False)
    mA, mB = measure(A, phi), measure(B, phi)
    lo = mA.lower ** (1 - 1 / n) * mB.lower ** (1 / n) * (1 - MEAN_SLACK)
    hi = mA.upper ** (1 - 1 / n) * mB.upper ** (1 / n) * (1 + MEAN_SLACK)
    rhs = Enclosure(lo, hi, mA.rigorous and mB.rigorous)
    v = make_verdict(lhs, rhs, "isoperimetric", {"mu(A)": mA, "mu(B)": mB, "W1": w1, "M_mu": mm},
                     _iso_gates(A, B, phi, convex), params={"pitch": str(A.pitch)})
    if A == B:
        v.params["equality_case"] = True
        v.params["equality_gap"] = abs(lhs.mid - rhs.mid)
    return v


def _second_differences(values):
    """Enclosures of f(t_{i-1}) - 2 f(t_i) + f(t_{i+1}) from value brackets."""
    out = []
    for a, b, c in zip(values, values[1:], values[2:]):
        out.append((a.lower - 2 * b.upper + c.lower, a.upper - 2 * b.lower + c.upper))
    return out


def check_concavity_profile(A: GridSet, B: GridSet, phi: DensityND, t_grid=None, convex: bool = True) -> Verdict:
    """Concavity of t -> mu(A + tB)^(1/n) and t -> mu(tA)^(1/n) through second differences.

    The grid must be uniform.  The verdict holds when every second difference
    is certainly <= 0 and is a violation when one is certainly > 0.
    """
    A, B = align(A, B)
    n = A.dim
    ts = [parse_rational(t) for t in (t_grid or [Fraction(k, 4) for k in range(9)])]
    steps = {b - a for a, b in zip(ts, ts[1:])}
    if len(steps) != 1 or min(steps) <= 0 or ts[0] < 0:
        raise ValueError("the t grid must be uniform, increasing and non-negative")
    sum_profile = []
    dil_profile = []
    zero = Enclosure(0.0, 0.0)
    for t in ts:
        S = A if t == 0 else minkowski_sum(A, B, t)
        sum_profile.append(root_bracket(measure(S, phi), n))
        dil_profile.append(zero if t == 0 else root_bracket(measure(scale(A, t), phi), n))
    diffs = _second_differences(sum_profile) + _second_differences(dil_profile)
    worst_hi = max(d[1] for d in diffs)
    worst_lo = max(d[0] for d in diffs)
    hold, violation = -worst_hi, worst_lo
    status = HOLDS if hold >= 0 else VIOLATION if violation > 0 else INCONCLUSIVE
    rigorous = all(b.rigorous for b in sum_profile + dil_profile)
    lhs = Enclosure(-worst_hi, -worst_lo, rigorous)
    return Verdict(status, hold, violation, lhs, Enclosure(0.0, 0.0), {}, _iso_gates(A, B, phi, convex),
                   "concavity_profile", rigorous, [],
                   {"t": [str(t) for t in ts], "sum_profile": sum_profile, "dilation_profile": dil_profile})
