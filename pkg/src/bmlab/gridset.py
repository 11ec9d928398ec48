"""Finite unions of closed lattice cells with exact rational combinations.

A cell with integer index i on a lattice of pitch h is the closed box
prod_k [i_k h, (i_k + 1) h].  Sets are stored run-length encoded along the
last axis: ``rows`` holds the first n-1 indices of each run and
``start``/``stop`` the half-open index range on the last axis.  The
encoding is canonical (rows sorted lexicographically, runs sorted, merged
when overlapping or adjacent), so two GridSets on the same lattice are
equal as point sets exactly when their arrays are equal.

Combinations (1-lambda)A + lambda B are exact: two runs always combine to a
single run on the refined lattice, so the output is computed run-pair by
run-pair and then canonicalized.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .means import Lambda, parse_rational

# cap on the number of run pairs expanded at once inside a Minkowski sum
_PAIR_CHUNK = 1 << 22


class EmptySet(ValueError):
    """Raised when a construction that must be non-empty produced no cells."""


@dataclass(frozen=True)
class Lattice:
    dim: int
    pitch: Fraction

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("lattice dimension must be positive")
        object.__setattr__(self, "pitch", parse_rational(self.pitch))
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")

    def refine(self, k: int) -> "Lattice":
        return Lattice(self.dim, self.pitch / k)

    def edges(self, idx) -> np.ndarray:
        """Float coordinates of lattice points ``idx * pitch`` (correctly rounded)."""
        idx = np.asarray(idx, dtype=np.int64)
        num, den = self.pitch.numerator, self.pitch.denominator
        if abs(int(idx.max(initial=0))) * num < 2**62 and abs(int(idx.min(initial=0))) * num < 2**62:
            return (idx * num) / den
        return idx.astype(float) * float(self.pitch)

    def index_floor(self, x: Fraction) -> int:
        return math.floor(Fraction(x) / self.pitch)

    def index_ceil(self, x: Fraction) -> int:
        return math.ceil(Fraction(x) / self.pitch)


def common_pitch(a: Fraction, b: Fraction) -> Fraction:
    """Largest rational g with a/g and b/g both integers."""
    a, b = Fraction(a), Fraction(b)
    num = math.gcd(a.numerator, b.numerator)
    den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# run-array helpers


def _empty_runs(dim: int):
    return (np.zeros((0, dim - 1), dtype=np.int64),
            np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))


def _flat(arr: np.ndarray) -> np.ndarray:
    """Merge the first two axes of a 3-D array (safe when the last axis is empty)."""
    return arr.reshape(arr.shape[0] * arr.shape[1], arr.shape[2])


def _row_change(rows: np.ndarray) -> np.ndarray:
    """Boolean mask marking the first run of every distinct row (rows sorted)."""
    change = np.ones(len(rows), dtype=bool)
    if len(rows) > 1:
        if rows.shape[1]:
            change[1:] = np.any(rows[1:] != rows[:-1], axis=1)
        else:
            change[1:] = False
    return change


def _canonical(rows, start, stop):
    """Sort runs and merge overlapping or adjacent ones within each row."""
    rows = np.asarray(rows, dtype=np.int64)
    start = np.asarray(start, dtype=np.int64)
    stop = np.asarray(stop, dtype=np.int64)
    dim = rows.shape[1] + 1
    keep = stop > start
    if not keep.all():
        rows, start, stop = rows[keep], start[keep], stop[keep]
    if len(start) == 0:
        return _empty_runs(dim)
    keys = (start,) + tuple(rows[:, c] for c in range(rows.shape[1] - 1, -1, -1))
    order = np.lexsort(keys)
    rows, start, stop = rows[order], start[order], stop[order]
    new_row = _row_change(rows)
    group = np.cumsum(new_row) - 1
    lo = int(stop.min())
    span = int(stop.max()) - lo + 1
    shifted = (stop - lo) + group * span
    reach = np.maximum.accumulate(shifted) - group * span + lo
    prev_reach = np.empty_like(reach)
    prev_reach[0] = 0
    prev_reach[1:] = reach[:-1]
    new_run = new_row.copy()
    new_run[1:] |= start[1:] > prev_reach[1:]
    first = np.nonzero(new_run)[0]
    last = np.append(first[1:] - 1, len(start) - 1)
    return rows[first], start[first], reach[last]


def _expand(rows, start, stop, u: int, extent: int | None = None):
    """Index map i -> cells [u i, u i + extent) in every axis (extent defaults to u)."""
    if extent is None:
        extent = u
    dim = rows.shape[1] + 1
    if dim == 1 or extent == 1:
        new_rows = rows * u
        return new_rows, start * u, (stop - 1) * u + extent
    offsets = np.array(list(itertools.product(range(extent), repeat=dim - 1)), dtype=np.int64)
    new_rows = (rows * u)[:, None, :] + offsets[None, :, :]
    new_rows = _flat(new_rows)
    reps = len(offsets)
    return new_rows, np.repeat(start * u, reps), np.repeat((stop - 1) * u + extent, reps)


def _sweep(parts, predicate):
    """Boolean combination of canonical run sets via a coverage sweep.

    ``parts`` is a list of (rows, start, stop, weight); ``predicate`` maps the
    weighted coverage count array to a boolean mask of kept segments.
    """
    rows = np.concatenate([np.concatenate([p[0], p[0]]) for p in parts])
    pos = np.concatenate([np.concatenate([p[1], p[2]]) for p in parts])
    delta = np.concatenate([np.concatenate([np.full(len(p[1]), p[3]), np.full(len(p[2]), -p[3])])
                            for p in parts]).astype(np.int64)
    dim = rows.shape[1] + 1
    if len(pos) == 0:
        return _empty_runs(dim)
    keys = (pos,) + tuple(rows[:, c] for c in range(rows.shape[1] - 1, -1, -1))
    order = np.lexsort(keys)
    rows, pos, delta = rows[order], pos[order], delta[order]
    level = np.cumsum(delta)
    same_row = ~_row_change(rows)
    seg_ok = np.zeros(len(pos), dtype=bool)
    seg_ok[:-1] = same_row[1:] & (pos[1:] > pos[:-1])
    seg_ok[:-1] &= predicate(level[:-1])
    idx = np.nonzero(seg_ok)[0]
    return _canonical(rows[idx], pos[idx], pos[idx + 1])


# ---------------------------------------------------------------------------


class GridSet:
    """Immutable finite union of closed cells on a lattice (run-length encoded)."""

    __slots__ = ("lattice", "rows", "start", "stop")

    def __init__(self, lattice: Lattice, rows, start, stop, canonical: bool = False):
        self.lattice = lattice
        if not canonical:
            start = np.asarray(start, dtype=np.int64)
            rows = np.asarray(rows, dtype=np.int64).reshape(len(start), lattice.dim - 1)
            rows, start, stop = _canonical(rows, start, stop)
        for arr in (rows, start, stop):
            arr.setflags(write=False)
        self.rows, self.start, self.stop = rows, start, stop

    # -- constructors ------------------------------------------------------

    @classmethod
    def empty(cls, lattice: Lattice) -> "GridSet":
        return cls(lattice, *_empty_runs(lattice.dim), canonical=True)

    @classmethod
    def from_cells(cls, lattice: Lattice, cells) -> "GridSet":
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, lattice.dim)
        return cls(lattice, cells[:, :-1], cells[:, -1], cells[:, -1] + 1)

    @classmethod
    def from_runs(cls, lattice: Lattice, runs) -> "GridSet":
        runs = np.asarray(runs, dtype=np.int64).reshape(-1, lattice.dim + 1)
        return cls(lattice, runs[:, :-2], runs[:, -2], runs[:, -1])

    @classmethod
    def box(cls, lattice: Lattice, lo_idx, hi_idx) -> "GridSet":
        """Cells with lo_idx <= i < hi_idx componentwise."""
        lo = [int(v) for v in lo_idx]
        hi = [int(v) for v in hi_idx]
        if any(h <= l for l, h in zip(lo, hi)):
            return cls.empty(lattice)
        prefix = [range(l, h) for l, h in zip(lo[:-1], hi[:-1])]
        combos = list(itertools.product(*prefix))
        rows = np.array(combos, dtype=np.int64).reshape(len(combos), lattice.dim - 1)
        n = len(rows)
        return cls(lattice, rows, np.full(n, lo[-1]), np.full(n, hi[-1]), canonical=True)

    @classmethod
    def from_mask(cls, lattice: Lattice, origin, mask) -> "GridSet":
        """Cells ``origin + idx`` for every True entry of an n-D boolean mask."""
        mask = np.asarray(mask, dtype=bool)
        origin = np.asarray(origin, dtype=np.int64)
        flat = mask.reshape(-1, mask.shape[-1])
        pad = np.zeros((flat.shape[0], 1), dtype=bool)
        d = np.diff(np.concatenate([pad, flat, pad], axis=1).astype(np.int8), axis=1)
        r_on, c_on = np.nonzero(d == 1)
        r_off, c_off = np.nonzero(d == -1)
        if mask.ndim == 1:
            rows = np.zeros((len(r_on), 0), dtype=np.int64)
        else:
            prefix = np.array(np.unravel_index(r_on, mask.shape[:-1]), dtype=np.int64).T
            rows = prefix.reshape(-1, mask.ndim - 1) + origin[:-1]
        return cls(lattice, rows, c_on + origin[-1], c_off + origin[-1])

    # -- basic queries -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def pitch(self) -> Fraction:
        return self.lattice.pitch

    @property
    def n_runs(self) -> int:
        return len(self.start)

    @property
    def n_cells(self) -> int:
        return int((self.stop - self.start).sum())

    def is_empty(self) -> bool:
        return len(self.start) == 0

    def __len__(self):
        return self.n_cells

    def __eq__(self, other):
        if not isinstance(other, GridSet):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if self.pitch != other.pitch:
            a, b = align(self, other)
            return a == b
        return (np.array_equal(self.rows, other.rows) and np.array_equal(self.start, other.start)
                and np.array_equal(self.stop, other.stop))

    def __hash__(self):
        return hash((self.lattice, self.rows.tobytes(), self.start.tobytes(), self.stop.tobytes()))

    def __repr__(self):
        return f"GridSet(dim={self.dim}, pitch={self.pitch}, runs={self.n_runs}, cells={self.n_cells})"

    def bbox(self):
        """Index bounding box (lo, hi) with lo <= i < hi for every cell."""
        if self.is_empty():
            raise EmptySet("empty set has no bounding box")
        lo = np.append(self.rows.min(axis=0), self.start.min()) if self.dim > 1 else np.array([self.start.min()])
        hi = np.append(self.rows.max(axis=0) + 1, self.stop.max()) if self.dim > 1 else np.array([self.stop.max()])
        return lo.astype(np.int64), hi.astype(np.int64)

    def cells(self) -> np.ndarray:
        """All cell indices as an (N, n) array in canonical order."""
        lengths = self.stop - self.start
        total = int(lengths.sum())
        offsets = np.repeat(np.cumsum(lengths) - lengths, lengths)
        last = np.repeat(self.start, lengths) + (np.arange(total) - offsets)
        rows = np.repeat(self.rows, lengths, axis=0)
        return np.column_stack([rows, last]) if self.dim > 1 else last[:, None]

    def runs(self) -> np.ndarray:
        return np.column_stack([self.rows, self.start, self.stop])

    def to_mask(self):
        """(origin, boolean mask) covering the bounding box."""
        lo, hi = self.bbox()
        mask = np.zeros(tuple(hi - lo), dtype=bool)
        cells = self.cells() - lo
        mask[tuple(cells.T)] = True
        return lo, mask

    def _keys(self, lo, hi):
        strides = np.ones(self.dim - 1, dtype=np.int64)
        spans = (hi - lo)[:-1]
        for c in range(self.dim - 3, -1, -1):
            strides[c] = strides[c + 1] * spans[c + 1]
        return strides

    def contains_cells(self, cells) -> np.ndarray:
        """Membership of integer cell indices (array (N, n)) in the cell set."""
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, self.dim)
        out = np.zeros(len(cells), dtype=bool)
        if self.is_empty() or len(cells) == 0:
            return out
        lo, hi = self.bbox()
        inside = np.all((cells >= lo) & (cells < hi), axis=1)
        q = cells[inside]
        strides = self._keys(lo, hi)
        width = int(hi[-1] - lo[-1]) + 1
        run_key = ((self.rows - lo[:-1]) @ strides) * width + (self.start - lo[-1])
        q_row = (q[:, :-1] - lo[:-1]) @ strides
        q_key = q_row * width + (q[:, -1] - lo[-1])
        pos = np.searchsorted(run_key, q_key, side="right") - 1
        ok = pos >= 0
        pos = np.where(ok, pos, 0)
        same_row = ((self.rows[pos] - lo[:-1]) @ strides) == q_row
        ok &= same_row & (q[:, -1] < self.stop[pos])
        out[np.nonzero(inside)[0]] = ok
        return out

    def contains_points(self, num, den: int = 1) -> np.ndarray:
        """Exact membership of rational points ``num / den`` in the closed cell union."""
        num = np.asarray(num, dtype=object).reshape(-1, self.dim)
        hp, hq = self.pitch.numerator, self.pitch.denominator
        scaled = num * hq
        d = den * hp
        idx = np.floor_divide(scaled, d)
        boundary = (scaled - idx * d) == 0
        idx = idx.astype(np.int64)
        boundary = boundary.astype(bool)
        hit = np.zeros(len(idx), dtype=bool)
        for shift in itertools.product((0, 1), repeat=self.dim):
            cand = idx - boundary * np.array(shift, dtype=np.int64)
            hit |= self.contains_cells(cand)
        return hit

    # -- lattice changes -------------------------------------------------------

    def refine(self, k: int) -> "GridSet":
        """Same point set on the lattice of pitch h/k."""
        if k == 1:
            return self
        rows, start, stop = _expand(self.rows, self.start, self.stop, k)
        return GridSet(self.lattice.refine(k), rows, start, stop)

    def to_pitch(self, pitch) -> "GridSet":
        ratio = Fraction(self.pitch) / parse_rational(pitch)
        if ratio.denominator != 1:
            raise ValueError(f"pitch {pitch} does not divide {self.pitch}")
        return self.refine(int(ratio))

    # -- set algebra ---------------------------------------------------------------

    def _binary(self, other, wa, wb, predicate):
        a, b = align(self, other)
        rows, start, stop = _sweep([(a.rows, a.start, a.stop, wa), (b.rows, b.start, b.stop, wb)], predicate)
        return GridSet(a.lattice, rows, start, stop, canonical=True)

    def union(self, other: "GridSet") -> "GridSet":
        a, b = align(self, other)
        return GridSet(a.lattice, np.concatenate([a.rows, b.rows]), np.concatenate([a.start, b.start]),
                       np.concatenate([a.stop, b.stop]))

    def intersection(self, other: "GridSet") -> "GridSet":
        return self._binary(other, 1, 2, lambda c: c == 3)

    def difference(self, other: "GridSet") -> "GridSet":
        return self._binary(other, 1, 2, lambda c: c == 1)

    def issubset(self, other: "GridSet") -> bool:
        return self.difference(other).is_empty()

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __le__ = issubset


def union_all(sets) -> GridSet:
    sets = list(sets)
    if not sets:
        raise ValueError("union of no sets")
    pitch = sets[0].pitch
    for s in sets[1:]:
        pitch = common_pitch(pitch, s.pitch)
    sets = [s.to_pitch(pitch) for s in sets]
    lattice = sets[0].lattice
    return GridSet(lattice, np.concatenate([s.rows for s in sets]), np.concatenate([s.start for s in sets]),
                   np.concatenate([s.stop for s in sets]))


def align(A: GridSet, B: GridSet):
    """Bring two sets to the coarsest common lattice."""
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    if A.pitch == B.pitch:
        return A, B
    pitch = common_pitch(A.pitch, B.pitch)
    return A.to_pitch(pitch), B.to_pitch(pitch)


# ---------------------------------------------------------------------------
# exact affine operations


def weighted_sum(A: GridSet, B: GridSet, wa, wb) -> GridSet:
    """The exact point set wa*A + wb*B for positive rationals wa, wb."""
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    if A.is_empty() or B.is_empty():
        raise EmptySet("Minkowski combination of an empty set")
    wa, wb = parse_rational(wa), parse_rational(wb)
    if wa <= 0 or wb <= 0:
        raise ValueError("weights must be positive")
    ua, ub = wa * A.pitch, wb * B.pitch
    g = common_pitch(ua, ub)
    alpha, beta = int(ua / g), int(ub / g)
    ext = alpha + beta
    dim = A.dim
    lattice = Lattice(dim, g)
    nb = B.n_runs
    per_a = max(1, _PAIR_CHUNK // max(1, nb * ext ** (dim - 1)))
    pieces = []
    for lo in range(0, A.n_runs, per_a):
        ar = A.rows[lo:lo + per_a]
        a0, a1 = A.start[lo:lo + per_a], A.stop[lo:lo + per_a]
        rows = _flat(alpha * ar[:, None, :] + beta * B.rows[None, :, :])
        start = (alpha * a0[:, None] + beta * B.start[None, :]).ravel()
        stop = (alpha * a1[:, None] + beta * B.stop[None, :]).ravel()
        if dim > 1 and ext > 1:
            rows, start, stop = _offset_rows(rows, start, stop, ext)
        pieces.append(_canonical(rows, start, stop))
    rows = np.concatenate([p[0] for p in pieces])
    start = np.concatenate([p[1] for p in pieces])
    stop = np.concatenate([p[2] for p in pieces])
    return GridSet(lattice, rows, start, stop, canonical=len(pieces) == 1)


def _offset_rows(rows, start, stop, ext):
    dim = rows.shape[1] + 1
    offsets = np.array(list(itertools.product(range(ext), repeat=dim - 1)), dtype=np.int64)
    rows = _flat(rows[:, None, :] + offsets[None, :, :])
    reps = len(offsets)
    return rows, np.repeat(start, reps), np.repeat(stop, reps)


def combine(A: GridSet, B: GridSet, lam) -> GridSet:
    """Exactly (1 - lambda) A + lambda B, on the lattice of pitch h/m for lambda = k/m."""
    lam = Lambda.of(lam)
    if A.lattice != B.lattice:
        raise ValueError(f"lattice mismatch: {A.lattice} vs {B.lattice}")
    if A.is_empty() or B.is_empty():
        raise EmptySet("combination of an empty set")
    return weighted_sum(A, B, 1 - lam.fraction, lam.fraction)


def minkowski_sum(A: GridSet, B: GridSet, t=1) -> GridSet:
    """Exactly A + tB for a positive rational t."""
    return weighted_sum(A, B, 1, t)


def scale(A: GridSet, t) -> GridSet:
    """Exactly tA for a positive rational t = u/v (pitch h/v)."""
    t = parse_rational(t)
    if t <= 0:
        raise ValueError("scale factor must be positive")
    u, v = t.numerator, t.denominator
    rows, start, stop = _expand(A.rows, A.start, A.stop, u)
    return GridSet(Lattice(A.dim, A.pitch / v), rows, start, stop, canonical=u == 1)


def scale_axes(A: GridSet, factors) -> GridSet:
    """Exactly diag(factors) A for positive rational per-axis factors."""
    factors = [parse_rational(f) for f in factors]
    if len(factors) != A.dim or any(f <= 0 for f in factors):
        raise ValueError("need one positive factor per axis")
    den = math.lcm(*[f.denominator for f in factors])
    mult = [int(f * den) for f in factors]
    lattice = Lattice(A.dim, A.pitch / den)
    if A.dim == 1:
        return GridSet(lattice, A.rows, A.start * mult[0], A.stop * mult[0])
    ranges = [range(m) for m in mult[:-1]]
    offsets = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    m = np.array(mult[:-1], dtype=np.int64)
    rows = _flat((A.rows * m)[:, None, :] + offsets[None, :, :])
    reps = len(offsets)
    return GridSet(lattice, rows, np.repeat(A.start * mult[-1], reps), np.repeat(A.stop * mult[-1], reps))


def translate(A: GridSet, by) -> GridSet:
    """Exactly A + by for a rational vector, on pitch h/v."""
    by = [parse_rational(b) for b in by]
    if len(by) != A.dim:
        raise ValueError("translation vector has the wrong length")
    v = math.lcm(*[(b / A.pitch).denominator for b in by])
    R = A.refine(v)
    shift = np.array([int(b / R.pitch) for b in by], dtype=np.int64)
    return GridSet(R.lattice, R.rows + shift[:-1], R.start + shift[-1], R.stop + shift[-1], canonical=True)


# ---------------------------------------------------------------------------
# hulls, sections, projections


def wu_hull(A: GridSet) -> GridSet:
    """Closure of the cell set under componentwise index zeroing."""
    parts = []
    n = A.dim
    for eps in itertools.product((0, 1), repeat=n):
        rows = A.rows * np.array(eps[:-1], dtype=np.int64) if n > 1 else A.rows
        if eps[-1]:
            parts.append((rows, A.start, A.stop))
        else:
            parts.append((rows, np.zeros_like(A.start), np.ones_like(A.stop)))
    return GridSet(A.lattice, np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
                   np.concatenate([p[2] for p in parts]))


def is_weakly_unconditional(A: GridSet) -> bool:
    return wu_hull(A) == A


def u_hull(A: GridSet) -> GridSet:
    """Union over cells of the origin-symmetric boxes prod_k [-c_k, c_k]."""
    if A.is_empty():
        return A
    c_last = np.maximum(np.abs(A.start), np.abs(A.stop))
    c_rows = np.maximum(np.abs(A.rows), np.abs(A.rows + 1))
    if A.dim == 1:
        c = int(c_last.max())
        return GridSet.box(A.lattice, [-c], [c])
    # keep, for each distinct prefix half-width vector, the widest last axis
    key, inv = np.unique(c_rows, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    widest = np.zeros(len(key), dtype=np.int64)
    np.maximum.at(widest, inv, c_last)
    boxes = [GridSet.box(A.lattice, list(-k) + [-w], list(k) + [w]) for k, w in zip(key, widest)]
    return union_all(boxes)


def section(A: GridSet, axis: int, j: int) -> GridSet:
    """Cells with index j along ``axis`` (0-based), that coordinate removed."""
    n = A.dim
    if n < 2:
        raise ValueError("sections need dimension at least 2")
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range")
    lattice = Lattice(n - 1, A.pitch)
    if axis == n - 1:
        hit = (A.start <= j) & (A.stop > j)
        return GridSet.from_cells(lattice, A.rows[hit])
    sel = A.rows[:, axis] == j
    rows = np.delete(A.rows[sel], axis, axis=1)
    return GridSet(lattice, rows, A.start[sel], A.stop[sel])


def section_indices(A: GridSet, axis: int) -> np.ndarray:
    """Sorted distinct indices along ``axis`` occupied by the set."""
    if axis == A.dim - 1:
        return np.unique(A.cells()[:, -1])
    return np.unique(A.rows[:, axis])


def project(A: GridSet, axes) -> GridSet:
    """Coordinate projection onto the retained (0-based, sorted) axes."""
    axes = sorted(set(int(a) for a in axes))
    n = A.dim
    if not axes or len(axes) >= n or axes[0] < 0 or axes[-1] >= n:
        raise ValueError("axes must be a non-empty proper subset")
    lattice = Lattice(len(axes), A.pitch)
    if axes[-1] == n - 1:
        return GridSet(lattice, A.rows[:, axes[:-1]], A.start, A.stop)
    return GridSet.from_cells(lattice, np.unique(A.rows[:, axes], axis=0))


# ---------------------------------------------------------------------------
# digitization of curved / polygonal shapes

_SLACK = 1e-12


def _window_indices(lattice: Lattice, lo: float, hi: float):
    h = float(lattice.pitch)
    return math.floor(lo / h) - 1, math.ceil(hi / h) + 1


def digitize_ball(lattice: Lattice, center, radius, mode: str) -> GridSet:
    """Inner (cells inside) or outer (cells meeting) digitization of a closed ball."""
    if mode not in ("inner", "outer"):
        raise ValueError("mode must be 'inner' or 'outer'")
    n = lattice.dim
    c = np.array([float(v) for v in center])
    r = float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")
    ranges = [_window_indices(lattice, ck - r, ck + r) for ck in c]
    h = float(lattice.pitch)
    combos = list(itertools.product(*[range(a, b) for a, b in ranges[:-1]]))
    prefix = np.array(combos, dtype=np.int64).reshape(len(combos), n - 1)
    lo_edge = lattice.edges(prefix)
    hi_edge = lattice.edges(prefix + 1)
    near = np.clip(c[:-1], lo_edge, hi_edge)
    d_near = ((near - c[:-1]) ** 2).sum(axis=1)
    d_far = np.maximum((lo_edge - c[:-1]) ** 2, (hi_edge - c[:-1]) ** 2).sum(axis=1)
    if mode == "inner":
        rest = r * r * (1 - 4 * _SLACK) - d_far
        ok = rest >= 0
        rho = np.sqrt(np.where(ok, rest, 0.0))
        start = np.ceil((c[-1] - rho) / h).astype(np.int64)
        stop = np.floor((c[-1] + rho) / h).astype(np.int64)
    else:
        rest = r * r * (1 + 4 * _SLACK) - d_near
        ok = rest >= 0
        rho = np.sqrt(np.where(ok, rest, 0.0)) * (1 + _SLACK) + _SLACK * h
        # a cell [i, i+1] meets [c - rho, c + rho] when i <= (c+rho)/h and i + 1 >= (c-rho)/h
        start = np.ceil((c[-1] - rho) / h).astype(np.int64) - 1
        stop = np.floor((c[-1] + rho) / h).astype(np.int64) + 1
    ok &= stop > start
    return GridSet(lattice, prefix[ok], start[ok], stop[ok])


def convex_hull_2d(points) -> np.ndarray:
    """Counter-clockwise convex hull (monotone chain), collinear points dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _chains(vertices):
    """Lower and upper boundary chains of a convex polygon as (x, y) arrays."""
    hull = convex_hull_2d(vertices)
    if len(hull) < 3:
        raise ValueError("polygon must have non-empty interior")
    xs = hull[:, 0]
    xmin, xmax = xs.min(), xs.max()
    i0 = int(np.argmin(np.where(xs == xmin, hull[:, 1], np.inf)))
    n = len(hull)
    # hull is counter-clockwise starting at the lowest-leftmost point: walk to the right end
    lower = [hull[i0]]
    k = i0
    while True:
        k = (k + 1) % n
        lower.append(hull[k])
        if hull[k][0] == xmax:
            break
    upper = [hull[i0]]
    k = i0
    while True:
        k = (k - 1) % n
        upper.append(hull[k])
        if hull[k][0] == xmax:
            break
    lower = np.array(lower)
    upper = np.array(upper)
    # at the extremes keep only the extreme vertices of vertical edges
    return _strict_chain(lower, np.min), _strict_chain(upper, np.max), xmin, xmax


def _strict_chain(chain, pick):
    xs, ys = chain[:, 0], chain[:, 1]
    ux = np.unique(xs)
    uy = np.array([pick(ys[xs == x]) for x in ux])
    return ux, uy


def digitize_polygon(lattice: Lattice, vertices, mode: str) -> GridSet:
    """Inner or outer digitization of a convex polygon in the plane."""
    if lattice.dim != 2:
        raise ValueError("polygons live in the plane")
    if mode not in ("inner", "outer"):
        raise ValueError("mode must be 'inner' or 'outer'")
    (lx, ly), (ux, uy), xmin, xmax = _chains(vertices)
    h = float(lattice.pitch)
    i_lo, i_hi = _window_indices(lattice, xmin, xmax)
    cols = np.arange(i_lo, i_hi, dtype=np.int64)
    x0, x1 = lattice.edges(cols), lattice.edges(cols + 1)
    scale_ = max(1.0, float(np.abs(np.concatenate([lx, ly, ux, uy])).max()))
    tol = _SLACK * scale_
    if mode == "inner":
        ok = (x0 >= xmin) & (x1 <= xmax)
        xa, xb = np.clip(x0, xmin, xmax), np.clip(x1, xmin, xmax)
        bottom = np.maximum(np.interp(xa, lx, ly), np.interp(xb, lx, ly)) + tol
        top = np.minimum(np.interp(xa, ux, uy), np.interp(xb, ux, uy)) - tol
        start = np.ceil(bottom / h).astype(np.int64)
        stop = np.floor(top / h).astype(np.int64)
    else:
        ok = (x1 >= xmin - tol) & (x0 <= xmax + tol)
        xa, xb = np.clip(x0, xmin, xmax), np.clip(x1, xmin, xmax)
        bottom = np.minimum(np.interp(xa, lx, ly), np.interp(xb, lx, ly))
        top = np.maximum(np.interp(xa, ux, uy), np.interp(xb, ux, uy))
        # interior vertices of the chains can be the extremes over a column
        for vx, vy, arr, better in ((lx, ly, bottom, np.minimum), (ux, uy, top, np.maximum)):
            col = np.searchsorted(x0, vx, side="right") - 1
            valid = (col >= 0) & (col < len(cols))
            better.at(arr, col[valid], vy[valid])
            # a vertex on a column boundary also belongs to the column on its left
            edge = valid & (col >= 1) & (x0[np.clip(col, 0, len(cols) - 1)] == vx)
            better.at(arr, col[edge] - 1, vy[edge])
        bottom -= tol
        top += tol
        start = np.ceil(bottom / h).astype(np.int64) - 1
        stop = np.floor(top / h).astype(np.int64) + 1
    ok &= stop > start
    return GridSet(lattice, cols[ok][:, None], start[ok], stop[ok])


def clip_polygon(vertices, normal, offset):
    """Sutherland-Hodgman clip of a convex polygon to {x : normal . x <= offset}."""
    out = []
    pts = [np.asarray(v, dtype=float) for v in vertices]
    nrm = np.asarray(normal, dtype=float)
    for i in range(len(pts)):
        p, q = pts[i], pts[(i + 1) % len(pts)]
        fp, fq = nrm @ p - offset, nrm @ q - offset
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return out


def cone_polygon(alpha_deg: float, window) -> np.ndarray:
    """The window-truncated cone {y >= |x| tan(alpha)} as polygon vertices."""
    (x0, x1), (y0, y1) = [(float(a), float(b)) for a, b in window]
    poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    slope = math.tan(math.radians(alpha_deg))
    poly = clip_polygon(poly, (slope, -1.0), 0.0)
    if poly:
        poly = clip_polygon(poly, (-slope, -1.0), 0.0)
    if len(poly) < 3:
        raise EmptySet("cone does not meet the window")
    return np.array(poly)


def digitize_halfspaces(lattice: Lattice, normals, offsets, window) -> GridSet:
    """Inner digitization of {x : normals @ x <= offsets} within an index window.

    A cell is kept when all of its corners satisfy every constraint, which is
    exact for convex polytopes.
    """
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    lo, hi = window
    n = lattice.dim
    grids = np.meshgrid(*[np.arange(a, b, dtype=np.int64) for a, b in zip(lo, hi)], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    ok = np.ones(len(idx), dtype=bool)
    for corner in itertools.product((0, 1), repeat=n):
        pts = lattice.edges(idx + np.array(corner))
        ok &= np.all(pts @ normals.T <= offsets * (1 - _SLACK) - _SLACK, axis=1)
    return GridSet.from_cells(lattice, idx[ok])


# ---------------------------------------------------------------------------
# random generators


def _window_index_box(lattice: Lattice, window):
    if np.ndim(window) == 1:
        window = [window] * lattice.dim
    lo = [lattice.index_ceil(parse_rational(a)) for a, _ in window]
    hi = [lattice.index_floor(parse_rational(b)) for _, b in window]
    if any(b - a < 1 for a, b in zip(lo, hi)):
        raise ValueError("window holds no full cell")
    return np.array(lo), np.array(hi)


def _random_boxes(rng, lattice, lo, hi, count):
    boxes = []
    for _ in range(count):
        a = rng.integers(lo, hi)
        side = rng.integers(1, np.maximum(2, (hi - lo) // 2) + 1)
        b = np.minimum(a + side, hi)
        boxes.append(GridSet.box(lattice, a, b))
    return union_all(boxes)


def random_set(family: str, dim: int, lattice: Lattice, window, seed, max_tries: int = 20) -> GridSet:
    """Seeded random cell sets.

    ``family`` is one of
      any        union of 1-4 random lattice boxes in the window
      wu         wu_hull of an ``any`` set, or (with probability 1/2) a box0 set
      convex     inner digitization of a random polytope (halfspace intersection)
      wu_convex  inner digitization of a random convex polygon closed under
                 coordinate projection, then index-level wu_hull (plane only)
      box0       a random lattice box containing the origin cell
    """
    if lattice.dim != dim:
        raise ValueError("lattice dimension does not match")
    rng = np.random.default_rng(seed)
    lo, hi = _window_index_box(lattice, window)
    for _ in range(max_tries):
        if family == "any":
            A = _random_boxes(rng, lattice, lo, hi, int(rng.integers(1, 5)))
        elif family == "wu":
            if rng.random() < 0.5:
                A = wu_hull(_random_boxes(rng, lattice, lo, hi, int(rng.integers(1, 5))))
            else:
                A = _random_box0(rng, lattice, lo, hi)
        elif family == "convex":
            A = _random_polytope(rng, lattice, lo, hi)
        elif family == "wu_convex":
            A = _random_wu_convex(rng, lattice, lo, hi)
        elif family == "box0":
            A = _random_box0(rng, lattice, lo, hi)
        else:
            raise ValueError(f"unknown family {family!r}")
        if not A.is_empty():
            return A
    raise EmptySet(f"random {family} generation kept producing empty sets")


def _random_box0(rng, lattice, lo, hi):
    a = rng.integers(lo, np.minimum(0, hi - 1) + 1)
    b = rng.integers(np.maximum(1, lo + 1), hi + 1)
    return GridSet.box(lattice, np.minimum(a, 0), np.maximum(b, 1))


def _random_polytope(rng, lattice, lo, hi):
    n = lattice.dim
    h = float(lattice.pitch)
    span = (hi - lo) * h
    center = (lo * h) + span * rng.uniform(0.25, 0.75, size=n)
    radius = span.min() * rng.uniform(0.15, 0.5)
    k = int(rng.integers(n + 1, 2 * n + 4))
    normals = rng.normal(size=(k, n))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = normals @ center + radius * rng.uniform(0.4, 1.0, size=k)
    # keep the polytope bounded by the window itself
    eye = np.eye(n)
    normals = np.vstack([normals, eye, -eye])
    offsets = np.concatenate([offsets, hi * h, -lo * h])
    return digitize_halfspaces(lattice, normals, offsets, (lo, hi))


def _random_wu_convex(rng, lattice, lo, hi):
    if lattice.dim != 2:
        raise ValueError("wu_convex generation is planar")
    h = float(lattice.pitch)
    k = int(rng.integers(2, 6))
    pts = rng.uniform(lo * h, hi * h, size=(k, 2))
    closed = [(0.0, 0.0)]
    for x, y in pts:
        closed += [(x, y), (x, 0.0), (0.0, y)]
    hull = convex_hull_2d(closed)
    if len(hull) < 3:
        return GridSet.empty(lattice)
    A = digitize_polygon(lattice, hull, "inner")
    if A.is_empty():
        return A
    return wu_hull(A)
