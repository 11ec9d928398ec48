"""Seeded random search for Brunn-Minkowski violations.

Trial i draws everything from its own seed splitmix64(seed, i), so the output
does not depend on how trials are distributed over worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..density import PiecewiseConstant
from ..gridset import Lattice, random_set
from ..means import Lambda, format_p, parse_p, parse_rational
from ..specs import build_density, set_to_spec
from .suites import check_bm
from .verdict import VIOLATION

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

CSV_COLUMNS = ("trial", "seed", "lambda", "p", "mu_A_lo", "mu_A_hi", "mu_B_lo", "mu_B_hi", "mu_C_lo", "mu_C_hi",
               "margin_lo", "margin_hi", "status")

DENSITY_PRESETS = {
    "gaussian": {"gaussian": {"sigma": 1.0}},
    "lebesgue": {"lebesgue": {}},
    "exp_decay": {"exp_decay": {"rate": 1.0}},
    "nonproduct": {"nonproduct_square_example": {}},
}


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial seed derived from the master seed (63 bits, usable by numpy)."""
    return splitmix64((int(seed) * GOLDEN + splitmix64(int(trial))) & MASK64) >> 1


def random_pd_piecewise(rng: np.random.Generator, pieces: int = 4, reach: float = 3.0) -> PiecewiseConstant:
    """A random positively decreasing step density: values fall away from a piece covering 0."""
    k_left = int(rng.integers(1, pieces + 1))
    k_right = int(rng.integers(1, pieces + 1))
    left = -np.sort(rng.uniform(0.05, reach, size=k_left))[::-1]
    right = np.sort(rng.uniform(0.05, reach, size=k_right))
    breakpoints = np.concatenate([left, right])
    top = rng.uniform(0.5, 2.0)
    # steps away from the central piece, decreasing outwards on both sides
    dec_l = np.cumprod(rng.uniform(0.3, 1.0, size=k_left - 1))[::-1] * top if k_left > 1 else np.zeros(0)
    dec_r = np.cumprod(rng.uniform(0.3, 1.0, size=k_right - 1)) * top if k_right > 1 else np.zeros(0)
    values = np.concatenate([dec_l, [top], dec_r])
    return PiecewiseConstant(tuple(breakpoints.tolist()), tuple(values.tolist()))


def density_spec_for_trial(name, dim: int, rng: np.random.Generator):
    if isinstance(name, dict):
        return name
    if name == "random_piecewise":
        return {"product": [random_pd_piecewise(rng).to_spec() for _ in range(dim)]}
    if name in DENSITY_PRESETS:
        return DENSITY_PRESETS[name]
    raise ValueError(f"unknown density {name!r}")


@dataclass
class TrialResult:
    row: dict
    witness: dict | None = None


def run_trial(args) -> TrialResult:
    """One falsification trial; ``args`` is a picklable tuple."""
    trial, seed, family, density, p, lambdas, dim, pitch, window, general = args
    s = trial_seed(seed, trial)
    rng = np.random.default_rng(s)
    lattice = Lattice(dim, parse_rational(pitch))
    A = random_set(family, dim, lattice, window, int(rng.integers(1 << 62)))
    B = random_set(family, dim, lattice, window, int(rng.integers(1 << 62)))
    lam = Lambda.of(lambdas[int(rng.integers(len(lambdas)))])
    dspec = density_spec_for_trial(density, dim, rng)
    phi = build_density(dspec, dim)
    v = check_bm(A, B, lam, parse_p(p), phi, general=general, label="search")
    m = v.measures
    row = {"trial": trial, "seed": s, "lambda": str(lam), "p": format_p(parse_p(p)),
           "mu_A_lo": m["mu(A)"].lower, "mu_A_hi": m["mu(A)"].upper,
           "mu_B_lo": m["mu(B)"].lower, "mu_B_hi": m["mu(B)"].upper,
           "mu_C_lo": m["mu(C)"].lower, "mu_C_hi": m["mu(C)"].upper,
           "margin_lo": v.hold_margin, "margin_hi": -v.violation_margin, "status": v.status}
    witness = None
    if v.status == VIOLATION:
        witness = {"check": "bm", "dim": dim, "pitch": str(A.pitch), "lambda": str(lam),
                   "p": format_p(parse_p(p)), "general": general, "density": dspec,
                   "A": set_to_spec(A), "B": set_to_spec(B)}
    return TrialResult(row, witness)


@dataclass
class SearchReport:
    rows: list
    witnesses: list = field(default_factory=list)

    @property
    def n_violations(self) -> int:
        return sum(r["status"] == VIOLATION for r in self.rows)

    @property
    def min_margin(self) -> float:
        return min(r["margin_lo"] for r in self.rows) if self.rows else float("nan")

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in CSV_COLUMNS])
        return buf.getvalue()

    def summary(self) -> str:
        statuses = [r["status"] for r in self.rows]
        counts = {s: statuses.count(s) for s in sorted(set(statuses))}
        return (f"{len(self.rows)} trials, minimum hold margin {self.min_margin:.6g}, "
                f"statuses {counts}, {len(self.witnesses)} witnesses")

    def witness_json(self, i: int) -> str:
        return json.dumps(self.witnesses[i][1], indent=1, sort_keys=True)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("BMLAB_WORKERS", "1")))
    except ValueError:
        return 1


def falsify(family: str, density="gaussian", p="1/2", lambdas=("1/4", "1/2", "3/4"), trials: int = 200,
            seed: int = 0, workers: int | None = None, dim: int = 2, pitch="1/16", window=("-2", "2"),
            general: bool = False) -> SearchReport:
    """Run ``trials`` random checks of BM(p) and collect margins and violation witnesses."""
    workers = default_workers() if workers is None else max(1, int(workers))
    lambdas = tuple(str(Lambda.of(l)) for l in lambdas)
    p = format_p(parse_p(p))
    window = tuple(str(Fraction(parse_rational(w))) for w in window)
    jobs = [(t, int(seed), family, density, p, lambdas, int(dim), str(pitch), window, bool(general))
            for t in range(int(trials))]
    if workers == 1:
        results = [run_trial(j) for j in jobs]
    else:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, jobs, chunksize=chunk))
    report = SearchReport([r.row for r in results])
    report.witnesses = [(r.row["trial"], r.witness) for r in results if r.witness is not None]
    return report
