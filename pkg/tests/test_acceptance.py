"""Acceptance criteria 1-11, each reported as one PASS/FAIL line."""

import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from bmlab.checkers import (
    VIOLATION,
    GridFn,
    check_bm,
    check_concavity_profile,
    check_isoperimetric,
    check_pl,
    check_theorem_A,
    flips,
    random_pd_piecewise,
    repro,
    sup_convolution,
)
from bmlab.density import Lebesgue, ProductDensity, lebesgue, radial_gaussian
from bmlab.gridset import GridSet, Lattice, combine, random_set
from bmlab.means import Lambda, p_mean, raw_power_combination
from bmlab.metric import EmbeddedSpace, pushforward_density
from bmlab.specs import load_experiment, run_experiment

from conftest import ACCEPTANCE_LINES

SPECS = Path(__file__).resolve().parent.parent / "specs"
LAMBDAS = ("1/4", "1/2", "3/4")
G2 = radial_gaussian(1.0, 2)


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def theorem_a_inputs(count=200, pitch=Fraction(1, 16)):
    """Seeded weakly unconditional pairs, each with a Gaussian and a random step density."""
    L = Lattice(2, pitch)
    rng = np.random.default_rng(20240601)
    out = []
    for i in range(count):
        A = random_set("wu", 2, L, ("-2", "2"), int(rng.integers(1 << 62)))
        B = random_set("wu", 2, L, ("-2", "2"), int(rng.integers(1 << 62)))
        step = ProductDensity((random_pd_piecewise(rng), random_pd_piecewise(rng)))
        out.append((A, B, step))
    return out


def test_criterion_1_theorem_A_suite():
    t0 = time.perf_counter()
    checks = violations = gate_failures = 0
    worst = math.inf
    for A, B, step in theorem_a_inputs():
        for phi in (G2, step):
            for lam in LAMBDAS:
                v = check_theorem_A(A, B, lam, phi)
                checks += 1
                violations += v.status == VIOLATION
                gate_failures += not v.gates_pass
                worst = min(worst, v.hold_margin + v.bracket_width)
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and gate_failures == 0 and worst >= 0 and elapsed <= 300
    record(1, ok, f"{checks} checks on 200 wu pairs, {violations} violations, {gate_failures} gate failures, "
                  f"min(hold margin + bracket width) {worst:.3g}, {elapsed:.1f}s")


def test_criterion_2_gaussian_shifted_balls():
    rep = repro("gauss-shifted-balls")
    hits = [c for c, v in rep.verdicts if v.status == VIOLATION and v.params["pitch"] == "1/8"]
    persist = [c for c, v in rep.verdicts if v.status == VIOLATION and v.params["pitch"] == "1/16"]
    ok = rep.reproduced and bool(set(hits) & set(persist))
    record(2, ok, f"violations at pitch 1/8 for {', '.join(hits)}; persisting at 1/16 for "
                  f"{len(set(hits) & set(persist))} shifts")


def test_criterion_3_cone_counterexample():
    rep = repro("nayar-tkocz-cone")
    by_window = {}
    for case, v in rep.verdicts:
        if v.status == VIOLATION:
            by_window.setdefault(v.params["window"], []).append(case)
    ok = rep.reproduced and set(by_window) == {6, 8}
    record(3, ok, f"certified violations for windows {sorted(by_window)}, e.g. {by_window.get(6, ['none'])[0]}")


def test_criterion_4_x_squared():
    v = run_experiment(load_experiment(SPECS / "x_squared_1d.json"))
    lo, hi = v.hold_margin, -v.violation_margin
    ok = v.status == VIOLATION and -0.395 <= lo <= hi <= -0.355
    record(4, ok, f"{v.status}, margin in [{lo:.6g}, {hi:.6g}] (oracle -0.375)")


def test_criterion_5_isoperimetric_equality():
    A = GridSet.box(Lattice(2, 1), [0, 0], [1, 1])
    v = check_isoperimetric(A, A, lebesgue(2), ["1/4", "1/8", "1/16", "1/32", "1/64"])
    gap = v.params["equality_gap"]
    record(5, gap <= 1e-3, f"|W1 + M/2 - mu(A)| = {gap:.3g}, W1 {v.measures['W1']!r}, M {v.measures['M_mu']!r}")


def wu_convex_pairs(count=50):
    L = Lattice(2, Fraction(1, 8))
    return [(random_set("wu_convex", 2, L, ("-2", "2"), 2 * i), random_set("wu_convex", 2, L, ("-2", "2"), 2 * i + 1))
            for i in range(count)]


def test_criterion_6_concavity_profile():
    bad = []
    worst = math.inf
    for i, (A, B) in enumerate(wu_convex_pairs()):
        v = check_concavity_profile(A, B, G2)
        worst = min(worst, v.hold_margin)
        if v.status == VIOLATION:
            bad.append(i)
    record(6, not bad, f"50 wu-convex pairs, second differences certainly positive for {len(bad)} pairs, "
                       f"smallest -max(second difference upper bound) {worst:.3g}")


def test_criterion_7_coordinatewise_suites():
    log = repro("log-bm-boxes")
    pbm = repro("p-bm-boxes")
    box = log.rows[0]
    closed = (2 * math.sqrt(2) - 1) ** 2
    ok = log.reproduced and pbm.reproduced and abs(box["lhs_lo"] - closed) <= 1e-9
    record(7, ok, f"log-bm-boxes {'ok' if log.reproduced else 'failed'} (box area {box['lhs_lo']:.12g}), "
                  f"p-bm-boxes {'ok' if pbm.reproduced else 'failed'} for p = 1/4, 1/2, 3/4")


def test_criterion_8_means():
    rng = np.random.default_rng(8)
    n = 10_000
    a = np.exp(rng.uniform(-5, 5, n))
    b = np.exp(rng.uniform(-5, 5, n))
    m = rng.integers(2, 101, n)
    k = np.array([rng.integers(1, mm) for mm in m])
    grid = [-math.inf, Fraction(-4), Fraction(-1), Fraction(-1, 3), Fraction(0), Fraction(1, 4), Fraction(1),
            Fraction(3), math.inf]
    mono = limits = 0
    for i in range(n):
        lam = Lambda.of(Fraction(int(k[i]), int(m[i])))
        vals = [p_mean(a[i], b[i], lam, p) for p in grid]
        mono += any(y < x * (1 - 1e-12) for x, y in zip(vals, vals[1:]))
        g = vals[4]
        for p, ref in ((Fraction(1, 10**6), g), (Fraction(-1, 10**6), g), (Fraction(10**6), max(a[i], b[i])),
                       (Fraction(-10**6), min(a[i], b[i]))):
            limits += abs(p_mean(a[i], b[i], lam, p) - ref) > 1e-4 * ref
    conventions = sum(p_mean(0.0, x, "1/3", p) != 0.0 or p_mean(x, 0.0, "1/3", p) != 0.0
                      for x in (0.5, 2.0, math.inf) for p in grid)
    conventions += raw_power_combination(0, 8, "1/2", 1) != 4.0
    conventions += raw_power_combination(0, 1, "1/2", "1/2") != 0.25
    conventions += raw_power_combination(0, 5, "1/3", -1) != 0.0
    # reverse Hoelder: (1-l) a1 b1 + l a2 b2 >= M_{-p}(a1, a2) M_q(b1, b2) with q = p / (p + 1)
    holder = 0
    x = np.exp(rng.uniform(-4, 4, (n, 4)))
    for i in range(n):
        lam = Lambda.of(Fraction(int(k[i]), int(m[i])))
        p = Fraction(int(rng.integers(1, 65)), 64)
        q = p / (p + 1)
        a1, a2, b1, b2 = x[i]
        lhs = (1 - lam.value) * a1 * b1 + lam.value * a2 * b2
        rhs = raw_power_combination(a1, a2, lam, -p) * raw_power_combination(b1, b2, lam, q)
        holder += lhs < rhs * (1 - 1e-12)
    ok = mono == limits == conventions == holder == 0
    record(8, ok, f"monotonicity failures {mono}/{n}, limit failures {limits}, convention failures {conventions}, "
                  f"reverse Hoelder failures {holder}/{n}")


def brute_member(A, B, lam, cell):
    """Is the fine cell inside some pair cube ((m-k) a + k b) + [0, m)^n?"""
    lam = Lambda.of(lam)
    k, m = lam.k, lam.m
    ca, cb = A.cells(), B.cells()
    anchors = (m - k) * ca[:, None, :] + k * cb[None, :, :]
    inside = np.all((anchors <= cell) & (cell < anchors + m), axis=2)
    return bool(inside.any())


def test_criterion_9_combine_exactness():
    rng = np.random.default_rng(9)
    mismatches = queries = 0
    for inst in range(20):
        L = Lattice(2, Fraction(1, int(rng.integers(1, 5))))
        A = random_set("any", 2, L, ("-1", "1"), int(rng.integers(1 << 62)))
        B = random_set("any", 2, L, ("-1", "1"), int(rng.integers(1 << 62)))
        lam = Lambda.of(["1/2", "1/3", "2/3", "1/4", "3/5"][inst % 5])
        C = combine(A, B, lam)
        lo, hi = C.bbox()
        members = C.cells()
        for _ in range(500):
            if rng.random() < 0.5:
                cell = members[rng.integers(len(members))]
            else:
                cell = rng.integers(lo - 2, hi + 2)
            queries += 1
            mismatches += bool(C.contains_cells([cell])[0]) != brute_member(A, B, lam, cell)
    record(9, mismatches == 0, f"{queries} membership queries over 20 instances, {mismatches} mismatches")


def refined_pairs_flip(pairs, check):
    flipped = 0
    for args in pairs:
        v1 = check(*args)
        v2 = check(*[a.refine(2) if isinstance(a, (GridSet, GridFn)) else a for a in args])
        flipped += flips(v1, v2)
    return flipped


def test_criterion_10_refinement():
    counts = {}
    # shipped experiment specs, rebuilt at half the pitch
    flipped = 0
    for path in sorted(SPECS.glob("*.json")):
        spec = load_experiment(path)
        flipped += flips(run_experiment(spec), run_experiment(spec, refine=2))
    counts["specs"] = flipped
    # Theorem A suite, sets refined
    pairs = [(A, B, lam, phi) for A, B, step in theorem_a_inputs(50) for phi in (G2, step) for lam in LAMBDAS]
    counts["theorem A"] = refined_pairs_flip(pairs, check_theorem_A)
    # repro scans: the same case at both pitches must not flip
    for name in ("gauss-shifted-balls", "nayar-tkocz-cone", "x-squared-1d", "nonproduct-square", "pl-product",
                 "log-bm-boxes"):
        rep = repro(name)
        by_case = {}
        for case, v in rep.verdicts:
            by_case.setdefault(case, []).append(v)
        counts[name] = sum(flips(a, b) for vs in by_case.values() for a, b in zip(vs, vs[1:]))
    # concavity profiles
    counts["concavity"] = refined_pairs_flip([(A, B, G2) for A, B in wu_convex_pairs(20)], check_concavity_profile)
    # isoperimetric equality
    unit = GridSet.box(Lattice(2, 1), [0, 0], [1, 1])
    counts["isoperimetric"] = refined_pairs_flip([(unit, unit, lebesgue(2))], check_isoperimetric)
    # coordinatewise suites on the same pairs
    for name, space in (("log", EmbeddedSpace("log")), ("power", EmbeddedSpace("power", p=0.5))):
        phi = ProductDensity(tuple(pushforward_density(space, Lebesgue()) for _ in range(2)))
        L = Lattice(2, Fraction(1, 8))
        window = ("-1", "1") if name == "log" else ("1/8", "2")
        pairs = [(random_set("any", 2, L, window, 2 * i), random_set("any", 2, L, window, 2 * i + 1), "1/2",
                  Fraction(0) if name == "log" else Fraction(1, 4), phi) for i in range(20)]
        counts[name] = refined_pairs_flip(pairs, check_bm)
    # functional inequality
    rng = np.random.default_rng(10)
    L = Lattice(2, Fraction(1, 4))
    fpairs = []
    for i in range(10):
        S = random_set("any", 2, L, ("-1", "1"), 2 * i)
        T = random_set("any", 2, L, ("-1", "1"), 2 * i + 1)
        f = GridFn(L, S.cells(), rng.uniform(0.1, 1, S.n_cells))
        g = GridFn(L, T.cells(), rng.uniform(0.1, 1, T.n_cells))
        fpairs.append((f, g, sup_convolution(f, g, "1/2", 0), "1/2", G2))
    counts["pl"] = refined_pairs_flip(fpairs, check_pl)
    total = sum(counts.values())
    record(10, total == 0, "flips per suite: " + ", ".join(f"{k} {v}" for k, v in counts.items()))


def test_criterion_11_search_determinism(tmp_path):
    outs = []
    for workers in (1, 8):
        path = tmp_path / f"w{workers}.csv"
        proc = subprocess.run([sys.executable, "-m", "bmlab.cli", "search", "--family", "any", "--density",
                               "gaussian", "--p", "1/2", "--trials", "120", "--seed", "11", "--workers",
                               str(workers), "--csv", str(path)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    same = outs[0] == outs[1]
    record(11, same, f"120-trial search CSV with 1 and 8 workers: {'byte-identical' if same else 'DIFFERENT'} "
                     f"({len(outs[0])} bytes)")
