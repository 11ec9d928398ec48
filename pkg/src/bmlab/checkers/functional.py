"""Piecewise-constant functions on lattices and the Prekopa-Leindler / BBL checks.

For functions constant on open cells the hypothesis
h((1-l) x + l y) >= M_p(f(x), g(y), l) is a finite condition: the points
(1-l) x + l y with x, y in the open cells a, b fill the open cube of side h
anchored at ((m-k) a + k b) h/m, so it suffices to compare the minimum of h
over each such cube with the largest mean landing on it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..density import EPS, DensityND, MeasureBracket, _down, _up, lebesgue, run_masses
from ..gridset import GridSet, Lattice, common_pitch, combine
from ..means import Lambda, bbl_exponent, format_p, p_mean, parse_p
from .verdict import Hypothesis, Verdict, make_verdict, mean_enclosure


@dataclass(frozen=True)
class GridFn:
    """Non-negative function equal to ``values[i]`` on the open cell ``cells[i]``, zero elsewhere."""

    lattice: Lattice
    cells: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, self.lattice.dim)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(cells) != len(values):
            raise ValueError("one value per cell")
        if np.any(~np.isfinite(values)) or np.any(values < 0):
            raise ValueError("values must be finite and non-negative")
        keep = values > 0
        cells, values = cells[keep], values[keep]
        order = np.lexsort(cells.T[::-1]) if len(cells) else np.zeros(0, dtype=np.int64)
        cells, values = cells[order], values[order]
        if len(cells) > 1 and np.any(np.all(cells[1:] == cells[:-1], axis=1)):
            raise ValueError("duplicate cells")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "values", values)

    @classmethod
    def indicator(cls, A: GridSet, value: float = 1.0) -> "GridFn":
        cells = A.cells()
        return cls(A.lattice, cells, np.full(len(cells), float(value)))

    @classmethod
    def weighted_indicator(cls, A: GridSet, phi, which: str = "inf") -> "GridFn":
        """chi_A times the cellwise infimum (``inf``) or supremum (``sup``) of a product density."""
        cells = A.cells()
        lo = np.ones(len(cells))
        hi = np.ones(len(cells))
        for k, f in enumerate(phi.factors):
            a, b = f.inf_sup(A.lattice.edges(cells[:, k]), A.lattice.edges(cells[:, k] + 1))
            lo *= np.asarray(a, dtype=float)
            hi *= np.asarray(b, dtype=float)
        vals = lo * (1 - 4 * EPS) if which == "inf" else hi * (1 + 4 * EPS)
        return cls(A.lattice, cells, vals)

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def pitch(self) -> Fraction:
        return self.lattice.pitch

    def support(self) -> GridSet:
        return GridSet.from_cells(self.lattice, self.cells)

    def refine(self, k: int) -> "GridFn":
        if k == 1:
            return self
        offsets = np.array(list(itertools.product(range(k), repeat=self.dim)), dtype=np.int64)
        cells = (self.cells * k)[:, None, :] + offsets[None, :, :]
        values = np.repeat(self.values, len(offsets))
        return GridFn(self.lattice.refine(k), cells.reshape(-1, self.dim), values)

    def to_pitch(self, pitch) -> "GridFn":
        ratio = Fraction(self.pitch) / Fraction(pitch)
        if ratio.denominator != 1:
            raise ValueError(f"pitch {pitch} does not divide {self.pitch}")
        return self.refine(int(ratio))

    def dense(self, lo, shape) -> np.ndarray:
        """Values on the index box [lo, lo + shape) as a dense array (zero off the support)."""
        out = np.zeros(tuple(int(s) for s in shape))
        rel = self.cells - np.asarray(lo, dtype=np.int64)
        inside = np.all((rel >= 0) & (rel < np.asarray(shape)), axis=1)
        out[tuple(rel[inside].T)] = self.values[inside]
        return out

    def integral(self, phi: DensityND | None = None) -> MeasureBracket:
        """Bracket on the integral of the function against phi (Lebesgue by default)."""
        if len(self.cells) == 0:
            return MeasureBracket(0.0, 0.0)
        phi = lebesgue(self.dim) if phi is None else phi
        cells = self.cells
        # one run per cell, so the per-run masses are per-cell masses
        S = GridSet(self.lattice, cells[:, :-1], cells[:, -1], cells[:, -1] + 1, canonical=True)
        lo, hi, rigorous = run_masses(S, phi)
        rel = (self.dim + 4) * EPS
        return MeasureBracket(_down(math.fsum(self.values * lo) * (1 - rel)),
                              _up(math.fsum(self.values * hi) * (1 + rel)), rigorous)


def _common(*fns):
    pitch = fns[0].pitch
    for f in fns[1:]:
        pitch = common_pitch(pitch, f.pitch)
    return [f.to_pitch(pitch) for f in fns], pitch


def _pair_bounds(f: GridFn, g: GridFn, lam: Lambda, mean):
    """Anchors ((m-k) a + k b) and the mean of the values for every support pair."""
    uf, inv_f = np.unique(f.values, return_inverse=True)
    ug, inv_g = np.unique(g.values, return_inverse=True)
    table = np.array([[mean(a, b) for b in ug] for a in uf])
    anchors = ((lam.m - lam.k) * f.cells[:, None, :] + lam.k * g.cells[None, :, :]).reshape(-1, f.dim)
    bounds = table[np.asarray(inv_f).ravel()[:, None], np.asarray(inv_g).ravel()[None, :]].ravel()
    return anchors, bounds


def _sliding(arr, size: int, reducer, dilate: bool):
    for ax in range(arr.ndim):
        if dilate:
            pad = [(0, 0)] * arr.ndim
            pad[ax] = (size - 1, size - 1)
            arr = np.pad(arr, pad)
        arr = reducer(sliding_window_view(arr, size, axis=ax), axis=-1)
    return arr


def hypothesis_failures(f: GridFn, g: GridFn, h: GridFn, lam, mean, rel_tol: float = 1e-12, limit: int = 5):
    """Cells where h falls below the largest mean landing on the corresponding cube.

    Returns (number of failing anchors, list of up to ``limit`` witnesses).
    """
    lam = Lambda.of(lam)
    (f, g), base = _common(f, g)
    if len(f.cells) == 0 or len(g.cells) == 0:
        return 0, []
    fine = base / lam.m
    P = common_pitch(fine, h.pitch)
    r = int(fine / P)
    h = h.to_pitch(P)
    side = lam.m * r
    anchors, bounds = _pair_bounds(f, g, lam, mean)
    anchors = anchors * r
    uniq, inv = np.unique(anchors, axis=0, return_inverse=True)
    need = np.zeros(len(uniq))
    np.maximum.at(need, np.asarray(inv).ravel(), bounds)
    lo = uniq.min(axis=0)
    shape = uniq.max(axis=0) - lo + side
    hmin = _sliding(h.dense(lo, shape), side, np.min, dilate=False)
    have = hmin[tuple((uniq - lo).T)]
    bad = have < need * (1 - rel_tol)
    witnesses = []
    for i in np.nonzero(bad)[0][:limit]:
        witnesses.append({"cube_anchor": uniq[i].tolist(), "pitch": str(P), "h_min": float(have[i]),
                          "required": float(need[i])})
    return int(bad.sum()), witnesses


def sup_convolution(f: GridFn, g: GridFn, lam, p) -> GridFn:
    """The least cellwise function h satisfying the M_p hypothesis for f and g."""
    lam = Lambda.of(lam)
    p = parse_p(p)
    (f, g), base = _common(f, g)
    fine = Lattice(f.dim, base / lam.m)
    if len(f.cells) == 0 or len(g.cells) == 0:
        return GridFn(fine, np.zeros((0, f.dim)), np.zeros(0))
    anchors, bounds = _pair_bounds(f, g, lam, lambda a, b: p_mean(a, b, lam, p))
    lo = anchors.min(axis=0)
    shape = anchors.max(axis=0) - lo + 1
    dense = np.zeros(tuple(shape))
    np.maximum.at(dense, tuple((anchors - lo).T), bounds)
    spread = _sliding(dense, lam.m, np.max, dilate=True)
    idx = np.argwhere(spread > 0)
    return GridFn(fine, idx + lo, spread[tuple(idx.T)])


def _excess(f: GridFn, h: GridFn, phi):
    """Lower bound on int (h - f) when h >= f cellwise, else None."""
    (f, h), _ = _common(f, h)
    if len(f.cells) == 0:
        return h.integral(phi).lower
    cells = np.concatenate([f.cells, h.cells])
    uniq, inv = np.unique(cells, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    diff = np.zeros(len(uniq))
    np.add.at(diff, inv[len(f.cells):], h.values)
    np.subtract.at(diff, inv[:len(f.cells)], f.values)
    if np.any(diff < 0):
        return None
    return GridFn(h.lattice, uniq, diff).integral(phi).lower


def _functional_verdict(f, g, h, lam, hyp_mean, concl_mean, phi, label, params, extra_hyps=()) -> Verdict:
    count, witnesses = hypothesis_failures(f, g, h, lam, hyp_mean)
    detail = "all support pairs" if count == 0 else f"{count} failing cubes, e.g. {witnesses[0]}"
    hyps = [Hypothesis("pointwise hypothesis on h", count == 0, "exact", detail)] + list(extra_hyps)
    If, Ig, Ih = f.integral(phi), g.integral(phi), h.integral(phi)
    rhs = mean_enclosure(concl_mean, If, Ig)
    # h >= f and h >= g cellwise: int h exceeds max(int f, int g), hence every mean of them
    notes, dominance = [], None
    ef = _excess(f, h, phi) if Ih.lower < rhs.upper else None
    eg = _excess(g, h, phi) if ef is not None else None
    if eg is not None:
        dominance = min(ef, eg)
        notes.append("h dominates f and g: margin bounded below by min int (h - f), int (h - g)")
    v = make_verdict(Ih, rhs, label, {"int f": If, "int g": Ig, "int h": Ih}, hyps, notes, params=params,
                     inclusion_margin=dominance)
    v.params["witnesses"] = witnesses
    return v


def check_pl(f: GridFn, g: GridFn, h: GridFn, lam, phi: DensityND | None = None) -> Verdict:
    """int h >= (int f)^(1-l) (int g)^l, with the hypothesis checked on every support pair."""
    lam = Lambda.of(lam)
    mean = lambda a, b: p_mean(a, b, lam, 0)
    return _functional_verdict(f, g, h, lam, mean, mean, phi, "pl", {"lambda": str(lam)})


def check_bbl(f: GridFn, g: GridFn, h: GridFn, lam, p, m, phi: DensityND | None = None) -> Verdict:
    """int h >= M_q(int f, int g) with q = p / (m p + 1), under the M_p hypothesis."""
    lam = Lambda.of(lam)
    p = parse_p(p)
    q = bbl_exponent(p, m)
    hyp_mean = lambda a, b: p_mean(a, b, lam, p)
    concl = lambda a, b: p_mean(a, b, lam, q)
    params = {"lambda": str(lam), "p": format_p(p), "m": str(m), "q": format_p(q)}
    return _functional_verdict(f, g, h, lam, hyp_mean, concl, phi, "bbl", params)


def indicator_triple(A: GridSet, B: GridSet, lam):
    """(chi_A, chi_B, chi_C) with C the exact combination."""
    C = combine(A, B, lam)
    return GridFn.indicator(A), GridFn.indicator(B), GridFn.indicator(C)
