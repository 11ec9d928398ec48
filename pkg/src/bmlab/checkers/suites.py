"""Brunn-Minkowski checks for sets and the per-theorem hypothesis gates.

Every check runs regardless of its gates: failed hypotheses are recorded
on the verdict, so the same code serves to confirm theorems and to hunt for
counterexamples once a hypothesis is dropped.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..density import (
    DensityND,
    ExpDecay,
    Gaussian,
    Lebesgue,
    MeasureBracket,
    ProductDensity,
    is_p_concave_sampled,
    is_positively_decreasing,
    marginal_profile,
    measure,
    section_measures,
)
from ..gridset import (
    GridSet,
    align,
    combine,
    is_weakly_unconditional,
    scale,
    scale_axes,
    section,
    section_indices,
)
from ..means import INF, Lambda, format_p, p_mean, p_mean_weighted, parse_p, parse_rational, raw_power_combination
from .verdict import MEAN_SLACK, Enclosure, Hypothesis, Verdict, make_verdict, mean_enclosure, root_bracket

# densities whose factors are log-concave, so every axis sub-product satisfies BM(0)
_LOG_CONCAVE = (Gaussian, ExpDecay, Lebesgue)


def _mean_fn(lam, p, general: bool, weight_q):
    if weight_q is not None:
        return lambda a, b: p_mean_weighted(a, b, lam, p, weight_q)
    if general:
        return lambda a, b: raw_power_combination(a, b, lam, p)
    return lambda a, b: p_mean(a, b, lam, p)


def _inclusion_eligible(p, general: bool, weight_q) -> bool:
    """Whether the mean never exceeds max(a, b), so mu(C) >= max(mu A, mu B) suffices."""
    if weight_q is None:
        return True
    q = float(weight_q)
    return q == 1 or (p > 0 and q >= 1)


def _exact_lebesgue_margin(A: GridSet, B: GridSet, C: GridSet, lam: Lambda, p, general: bool, weight_q):
    """Exact mu(C) - M_p(mu(A), mu(B)) for Lebesgue measure and p in {1, +inf, -inf}, else None."""
    if weight_q is not None and weight_q != 1:
        return None
    if p not in (1, INF, -INF):
        return None
    a, b, c = (S.n_cells * S.pitch ** S.dim for S in (A, B, C))
    if p == INF:
        rhs = max(a, b)
    elif p == -INF:
        rhs = min(a, b) if not general or (a and b) else Fraction(0)
    elif not general and (a == 0 or b == 0):
        rhs = Fraction(0)
    else:
        rhs = (1 - lam.fraction) * a + lam.fraction * b
    return c - rhs


def _float_below(x: Fraction) -> float:
    f = float(x)
    return float(np.nextafter(f, -np.inf)) if Fraction(f) > x else f


def check_bm(A: GridSet, B: GridSet, lam, p, phi: DensityND, general: bool = False, weight_q=None,
             C: GridSet | None = None, label: str = "bm", hypotheses=()) -> Verdict:
    """Certified verdict on mu(C) >= M_p(mu(A), mu(B), lambda).

    C defaults to the exact combination (1 - lambda) A + lambda B.  A
    caller-supplied C must be a superset of that combination; its measure then
    only bounds mu of the combination from above, so such a check can certify
    a violation but never that the inequality holds.
    ``general`` selects the raw power combination (no zeroing when a measure
    vanishes); ``weight_q`` selects the weighted mean with coefficients
    (1 - lambda)^q and lambda^q.
    """
    lam = Lambda.of(lam)
    p = parse_p(p)
    if A.dim != B.dim or A.dim != phi.dim:
        raise ValueError(f"dimension mismatch: A {A.dim}, B {B.dim}, density {phi.dim}")
    A, B = align(A, B)
    supplied = C is not None
    notes = []
    if C is None:
        C = combine(A, B, lam)
    mA, mB, mC = measure(A, phi), measure(B, phi), measure(C, phi)
    rhs = mean_enclosure(_mean_fn(lam, p, general, weight_q), mA, mB)
    lhs = mC
    inclusion = None
    if supplied:
        lhs = MeasureBracket(0.0, mC.upper, mC.rigorous)
        notes.append("C is a caller-supplied superset: only its upper bound is used")
    elif lhs.lower < rhs.upper and _inclusion_eligible(p, general, weight_q):
        Ca, Aa = align(C, A)
        Cb, Ba = align(C, B)
        if Aa <= Ca and Ba <= Cb:
            inclusion = min(measure(Ca - Aa, phi).lower, measure(Cb - Ba, phi).lower)
            notes.append("C contains A and B: margin bounded below by min mu(C \\ A), mu(C \\ B)")
    if not supplied and isinstance(phi, ProductDensity) and phi.is_lebesgue():
        exact = _exact_lebesgue_margin(A, B, C, lam, p, general, weight_q)
        if exact is not None and exact >= 0:
            inclusion = max(inclusion if inclusion is not None else 0.0, _float_below(exact))
            notes.append(f"exact rational margin {exact}")
    if not (mA.rigorous and mB.rigorous and mC.rigorous):
        notes.append("measure brackets are sampled, not rigorous")
    params = {"lambda": str(lam), "p": format_p(p), "pitch": str(A.pitch)}
    if general:
        params["general"] = True
    if weight_q is not None:
        params["q"] = str(weight_q)
    return make_verdict(lhs, rhs, label, {"mu(A)": mA, "mu(B)": mB, "mu(C)": mC}, hypotheses, notes, params,
                        inclusion_margin=inclusion)


# ---------------------------------------------------------------------------
# hypothesis gates


def gate_weakly_unconditional(A: GridSet, name: str) -> Hypothesis:
    return Hypothesis(f"{name} weakly unconditional", is_weakly_unconditional(A), "exact")


def gate_product_pd(phi: DensityND, axes=None) -> list:
    if not isinstance(phi, ProductDensity):
        return [Hypothesis("product density", False, "exact", type(phi).__name__)]
    out = [Hypothesis("product density", True, "exact")]
    axes = range(phi.dim) if axes is None else axes
    for k in axes:
        chk = is_positively_decreasing(phi.factors[k])
        out.append(Hypothesis(f"factor {k} positively decreasing", chk.holds, "exact" if chk.exact else "sampled",
                              chk.detail))
    return out


def _require_product(phi):
    if not isinstance(phi, ProductDensity):
        raise TypeError("this check needs a product density")


def _central_cover(A: GridSet, axis: int):
    """Slice c in {0, -1} whose section contains every other section, if any."""
    idx = section_indices(A, axis)
    for c in (0, -1):
        if c not in idx:
            continue
        S = section(A, axis, c)
        if all(section(A, axis, int(j)) <= S for j in idx):
            return c, S
    return None, None


def _sup_bracket(brackets) -> MeasureBracket:
    return MeasureBracket(max(b.lower for b in brackets), max(b.upper for b in brackets),
                          all(b.rigorous for b in brackets))


def gate_central_sup(A: GridSet, B: GridSet, axis: int, profile) -> Hypothesis:
    """Both sets attain the sup of ``profile`` on a slice touching 0, with equal values.

    Exact when, for each set, one central section contains all the others and
    the two central sections coincide; otherwise the bracket-overlap test.
    """
    cA, SA = _central_cover(A, axis)
    cB, SB = _central_cover(B, axis)
    if SA is not None and SB is not None:
        SA, SB = align(SA, SB)
        if SA == SB:
            return Hypothesis("central slice attains equal sups", True, "exact",
                              f"central sections equal (slices {cA}, {cB})")
    ia, ba = profile(A)
    ib, bb = profile(B)
    sa, sb = _sup_bracket(ba), _sup_bracket(bb)

    def central_ok(idx, brs, sup):
        vals = [b for j, b in zip(idx, brs) if j in (0, -1)]
        return bool(vals) and max(b.upper for b in vals) >= sup.lower

    ok = central_ok(ia, ba, sa) and central_ok(ib, bb, sb) and sa.overlaps(sb)
    return Hypothesis("central slice attains equal sups", ok, "bracket", f"sup A {sa!r}, sup B {sb!r}")


# ---------------------------------------------------------------------------
# theorem suites


def check_theorem_A(A: GridSet, B: GridSet, lam, phi: DensityND, C: GridSet | None = None) -> Verdict:
    """BM(1/n) for weakly unconditional sets under a positively decreasing product density."""
    hyps = [gate_weakly_unconditional(A, "A"), gate_weakly_unconditional(B, "B")] + gate_product_pd(phi)
    return check_bm(A, B, lam, Fraction(1, A.dim), phi, C=C, label="theorem_A", hypotheses=hyps)


def fiber_measure_satisfies_bm(phi: ProductDensity, axis: int) -> Hypothesis:
    rest = [f for k, f in enumerate(phi.factors) if k != axis]
    ok = all(isinstance(f, _LOG_CONCAVE) for f in rest)
    return Hypothesis("fiber measure satisfies a BM inequality", ok, "exact",
                      "log-concave factors" if ok else "no structural certificate")


def section_sup_counts(A: GridSet, axis: int):
    """Exact maximal section cell count along ``axis``."""
    return max(section(A, axis, int(j)).n_cells for j in section_indices(A, axis))


def equalize_section_sup(A: GridSet, B: GridSet, axis: int, fiber_axis: int) -> GridSet:
    """Rescale B along ``fiber_axis`` so that its maximal Lebesgue section equals that of A.

    Exact for Lebesgue fibers: the factor r = sup_A / sup_B is rational and the
    scaled set is represented on a refined lattice.
    """
    if fiber_axis == axis:
        raise ValueError("the fiber axis must differ from the split axis")
    A, B = align(A, B)
    r = Fraction(section_sup_counts(A, axis), section_sup_counts(B, axis))
    factors = [Fraction(1)] * B.dim
    factors[fiber_axis] = r
    return scale_axes(B, factors)


def check_linear_equal_sup(A: GridSet, B: GridSet, lam, axis: int, phi: DensityND) -> Verdict:
    """Linear BM under equal sups of the fiber measures of the sections along ``axis``."""
    _require_product(phi)
    A, B = align(A, B)
    hyps = []
    split = phi.factors[axis]
    hyps.append(Hypothesis("split factor is Lebesgue", isinstance(split, Lebesgue), "exact"))
    hyps.append(fiber_measure_satisfies_bm(phi, axis))
    rest_lebesgue = all(isinstance(f, Lebesgue) for k, f in enumerate(phi.factors) if k != axis)
    if rest_lebesgue:
        ca, cb = section_sup_counts(A, axis), section_sup_counts(B, axis)
        hyps.append(Hypothesis("equal section sups", ca == cb, "exact", f"cells {ca} vs {cb}"))
    else:
        _, ba = section_measures(A, axis, phi)
        _, bb = section_measures(B, axis, phi)
        sa, sb = _sup_bracket(ba), _sup_bracket(bb)
        hyps.append(Hypothesis("equal section sups", sa.overlaps(sb), "bracket", f"{sa!r} vs {sb!r}"))
    return check_bm(A, B, lam, 1, phi, label="linear_equal_sup", hypotheses=hyps)


def gate_q_concave(phi: ProductDensity, axes, name: str) -> Hypothesis:
    sub = ProductDensity(tuple(phi.factors[k] for k in axes))
    tag = sub.concavity_tag
    if tag is not None:
        return Hypothesis(f"{name} is {format_p(tag)}-concave", True, "exact", "structural tag")
    chk = is_p_concave_sampled(sub, -INF)
    return Hypothesis(f"{name} is quasi-concave", chk.holds, "sampled", chk.detail)


def check_theorem_4_7(A: GridSet, B: GridSet, lam, phi: DensityND) -> Verdict:
    """Linear BM for phi_1 (axis 0) positively decreasing and a q-concave fiber density.

    Gate: the central slice of each set (index 0 or -1, both touching x_1 = 0)
    attains the sup of the fiber measures and the two sups agree.
    """
    _require_product(phi)
    A, B = align(A, B)
    hyps = gate_product_pd(phi, axes=[0])
    hyps.append(gate_q_concave(phi, range(1, phi.dim), "fiber density"))
    hyps.append(gate_central_sup(A, B, 0, lambda S: section_measures(S, 0, phi)))
    return check_bm(A, B, lam, 1, phi, label="theorem_4_7", hypotheses=hyps)


def gate_concavity_tag(phi: DensityND) -> Hypothesis:
    tag = getattr(phi, "concavity_tag", None)
    ok = tag is not None and tag >= Fraction(-1, phi.dim)
    return Hypothesis("density p-concave with p >= -1/n", ok, "exact",
                      f"tag {format_p(tag)}" if tag is not None else "no tag")


def gate_marginal_sup(A: GridSet, B: GridSet, axis: int, phi: DensityND) -> Hypothesis:
    if isinstance(phi, ProductDensity) and is_positively_decreasing(phi.factors[axis]).exact \
            and is_positively_decreasing(phi.factors[axis]).holds:
        # marginal = phi_k(x) * fiber measure; the central cover attains its sup
        return gate_central_sup(A, B, axis, lambda S: marginal_profile(S, axis, phi))
    _, ba = marginal_profile(A, axis, phi)
    _, bb = marginal_profile(B, axis, phi)
    sa, sb = _sup_bracket(ba), _sup_bracket(bb)
    return Hypothesis("equal marginal sups", sa.overlaps(sb), "bracket", f"{sa!r} vs {sb!r}")


def check_linear_marginal(A: GridSet, B: GridSet, lam, axis: int, phi: DensityND) -> Verdict:
    """Linear BM for a p-concave density (p >= -1/n) under equal marginal sups along ``axis``."""
    A, B = align(A, B)
    hyps = [gate_concavity_tag(phi), gate_marginal_sup(A, B, axis, phi)]
    return check_bm(A, B, lam, 1, phi, label="linear_marginal", hypotheses=hyps)


def check_bm_weighted_product(A: GridSet, B: GridSet, lam, n: int, N, phi: DensityND) -> Verdict:
    """BM(1/(n+1), (N+1)/(n+1)) on R x Y, Y of dimension n satisfying BM(1/n, N/n).

    The shipped instance is Lebesgue measure, where Y satisfies BM(1/n, N/n)
    for every N >= n.
    """
    if A.dim != n + 1:
        raise ValueError(f"sets must live in dimension n + 1 = {n + 1}")
    N = parse_rational(N)
    ok = isinstance(phi, ProductDensity) and phi.is_lebesgue() and N >= n
    hyps = [Hypothesis(f"fiber satisfies BM(1/{n}, {N}/{n})", ok, "exact",
                       "Lebesgue fiber" if ok else "no certificate for this fiber")]
    q = Fraction(N + 1, n + 1)
    return check_bm(A, B, lam, Fraction(1, n + 1), phi, weight_q=q, label="weighted_product", hypotheses=hyps)


def check_rescaled_bm(A: GridSet, B: GridSet, lam, t0, axis: int, phi: DensityND) -> Verdict:
    """mu(C)^(1/n) >= (1 - l) mu(A)^(1/n) + l mu(t0 B)^(1/n) / t0 for radially decreasing p-concave phi.

    Gate: A and t0 B have equal marginal sups along ``axis``.
    """
    lam = Lambda.of(lam)
    t0 = parse_rational(t0)
    A, B = align(A, B)
    n = A.dim
    tB = scale(B, t0)
    hyps = [gate_concavity_tag(phi)]
    if isinstance(phi, ProductDensity):
        hyps += gate_product_pd(phi)[1:]
    else:
        hyps.append(Hypothesis("radially decreasing", False, "exact", "no certificate"))
    Aa, tBa = align(A, tB)
    hyps.append(gate_marginal_sup(Aa, tBa, axis, phi))
    C = combine(A, B, lam)
    mA, mC, mtB = measure(A, phi), measure(C, phi), measure(tB, phi)
    rA, rC, rtB = root_bracket(mA, n), root_bracket(mC, n), root_bracket(mtB, n)
    w, tf = lam.value, float(t0)
    lo = ((1 - w) * rA.lower + w * rtB.lower / tf) * (1 - MEAN_SLACK)
    hi = ((1 - w) * rA.upper + w * rtB.upper / tf) * (1 + MEAN_SLACK)
    rhs = Enclosure(lo, hi, rA.rigorous and rtB.rigorous)
    params = {"lambda": str(lam), "t0": str(t0), "pitch": str(C.pitch)}
    return make_verdict(rC, rhs, "rescaled_bm", {"mu(A)": mA, "mu(t0 B)": mtB, "mu(C)": mC}, hyps,
                        params=params)
