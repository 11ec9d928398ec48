"""Densities on R^n and rigorous measure brackets for GridSets.

Product densities are integrated through closed-form antiderivatives of their
one-dimensional factors, one interval per run of the set, and every computed
mass is widened outward by a bound on the floating-point error.  Densities
without structure fall back to 3^n samples per cell and the resulting bracket
is flagged non-rigorous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .gridset import GridSet, Lattice, section, section_indices
from .means import INF, Lambda, p_mean

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MeasureBracket:
    """Enclosure lower <= mu(A) <= upper; ``rigorous`` is False for sampled brackets."""

    lower: float
    upper: float
    rigorous: bool = True

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper) and not (math.isnan(self.lower) or math.isnan(self.upper)):
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def overlaps(self, other: "MeasureBracket") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def __add__(self, other: "MeasureBracket") -> "MeasureBracket":
        return MeasureBracket(_down(self.lower + other.lower), _up(self.upper + other.upper),
                              self.rigorous and other.rigorous)

    def __repr__(self):
        tag = "" if self.rigorous else ", sampled"
        return f"[{self.lower:.12g}, {self.upper:.12g}{tag}]"


def _down(x: float) -> float:
    return max(0.0, float(np.nextafter(x, -np.inf))) if x > 0 else 0.0


def _up(x: float) -> float:
    return float(np.nextafter(x, np.inf)) if x != 0 else 0.0


@dataclass(frozen=True)
class Check:
    """Outcome of a hypothesis check; ``exact`` is False for sampled checks."""

    holds: bool
    exact: bool
    detail: str = ""

    def __bool__(self):
        return self.holds


# ---------------------------------------------------------------------------
# one-dimensional factors


class Density1D:
    """Base class: non-negative locally integrable function on R with an antiderivative."""

    kind = "density"
    positively_decreasing = False

    def value(self, x):
        raise NotImplementedError

    def antiderivative(self, x):
        raise NotImplementedError

    def sup_value(self) -> float:
        raise NotImplementedError

    def interval_mass(self, a, b):
        """Bracket (lo, hi) of the integral over [a, b] for arrays a <= b."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        fa, fb = self.antiderivative(a), self.antiderivative(b)
        mass = fb - fa
        slack = 4 * EPS * (np.abs(fa) + np.abs(fb)) + 2 * EPS * (np.abs(a) + np.abs(b)) * self.sup_value()
        return np.maximum(mass - slack, 0.0), mass + slack

    def inf_sup(self, a, b):
        """Exact infimum and supremum of the density over each [a, b]."""
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(Density1D):
    sigma: float = 1.0
    kind = "gaussian"
    positively_decreasing = True

    def value(self, x):
        x = np.asarray(x, dtype=float) / self.sigma
        return np.exp(-0.5 * x * x) / (self.sigma * math.sqrt(2 * math.pi))

    def sup_value(self):
        return 1.0 / (self.sigma * math.sqrt(2 * math.pi))

    def antiderivative(self, x):
        return ndtr(np.asarray(x, dtype=float) / self.sigma)

    def interval_mass(self, a, b):
        a = np.asarray(a, dtype=float) / self.sigma
        b = np.asarray(b, dtype=float) / self.sigma
        # use upper tails on the positive side to avoid cancellation near 1
        pos = a >= 0
        fa = np.where(pos, ndtr(-a), ndtr(a))
        fb = np.where(pos, ndtr(-b), ndtr(b))
        mass = np.where(pos, fa - fb, fb - fa)
        slack = 4 * EPS * (np.abs(fa) + np.abs(fb)) + 2 * EPS * (np.abs(a) + np.abs(b)) * self.sup_value() * self.sigma
        return np.maximum(mass - slack, 0.0), mass + slack

    def inf_sup(self, a, b):
        return _decreasing_inf_sup(self, a, b)

    def to_spec(self):
        return {"gaussian": {"sigma": self.sigma}}


@dataclass(frozen=True)
class ExpDecay(Density1D):
    """exp(-rate |x|)."""

    rate: float = 1.0
    kind = "exp_decay"
    positively_decreasing = True

    def value(self, x):
        return np.exp(-self.rate * np.abs(np.asarray(x, dtype=float)))

    def sup_value(self):
        return 1.0

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * (-np.expm1(-self.rate * np.abs(x))) / self.rate

    def inf_sup(self, a, b):
        return _decreasing_inf_sup(self, a, b)

    def to_spec(self):
        return {"exp_decay": {"rate": self.rate}}


@dataclass(frozen=True)
class Power(Density1D):
    """|x|^alpha for alpha >= 0 (not positively decreasing unless alpha = 0)."""

    alpha: float = 2.0
    kind = "power"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("power densities need alpha >= 0")

    @property
    def positively_decreasing(self):
        return self.alpha == 0

    def value(self, x):
        return np.abs(np.asarray(x, dtype=float)) ** self.alpha

    def sup_value(self):
        return 1.0

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.abs(x) ** (self.alpha + 1) / (self.alpha + 1)

    def interval_mass(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        fa, fb = self.antiderivative(a), self.antiderivative(b)
        mass = fb - fa
        top = np.maximum(np.abs(a), np.abs(b))
        slack = 4 * EPS * (np.abs(fa) + np.abs(fb)) + 2 * EPS * (np.abs(a) + np.abs(b)) * top ** self.alpha
        return np.maximum(mass - slack, 0.0), mass + slack

    def inf_sup(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        near = np.clip(0.0, a, b)
        return self.value(near), np.maximum(self.value(a), self.value(b))

    def to_spec(self):
        return {"power": {"alpha": self.alpha}}


@dataclass(frozen=True)
class PiecewiseConstant(Density1D):
    """values[i] on [breakpoints[i], breakpoints[i+1]), zero outside."""

    breakpoints: tuple
    values: tuple
    kind = "piecewise_constant"

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if len(bp) != len(vals) + 1 or len(vals) == 0:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(vals < 0):
            raise ValueError("density values must be non-negative")
        object.__setattr__(self, "breakpoints", tuple(float(v) for v in bp))
        object.__setattr__(self, "values", tuple(float(v) for v in vals))

    @property
    def positively_decreasing(self):
        return piecewise_is_positively_decreasing(self.breakpoints, self.values)

    def _arrays(self):
        bp = np.asarray(self.breakpoints)
        vals = np.asarray(self.values)
        cum = np.concatenate([[0.0], np.cumsum(vals * np.diff(bp))])
        return bp, vals, cum

    def value(self, x):
        bp, vals, _ = self._arrays()
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(bp, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(vals))
        return np.where(inside, vals[np.clip(idx, 0, len(vals) - 1)], 0.0)

    def sup_value(self):
        return max(self.values)

    def antiderivative(self, x):
        bp, _, cum = self._arrays()
        return np.interp(np.asarray(x, dtype=float), bp, cum)

    def inf_sup(self, a, b):
        bp, vals, _ = self._arrays()
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        ext = np.concatenate([[0.0], vals, [0.0]])
        ia = np.searchsorted(bp, a, side="right")
        ib = np.searchsorted(bp, b, side="left")
        lo = np.empty(len(a))
        hi = np.empty(len(a))
        for k, (i, j) in enumerate(zip(ia, ib)):
            seg = ext[i:max(j, i) + 1]
            lo[k], hi[k] = seg.min(), seg.max()
        return lo, hi

    def to_spec(self):
        return {"piecewise_constant": {"breakpoints": list(self.breakpoints), "values": list(self.values)}}


@dataclass(frozen=True)
class Lebesgue(Density1D):
    kind = "lebesgue"
    positively_decreasing = True

    def value(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def sup_value(self):
        return 1.0

    def antiderivative(self, x):
        return np.asarray(x, dtype=float)

    def interval_mass(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mass = b - a
        slack = EPS * (np.abs(a) + np.abs(b))
        return np.maximum(mass - slack, 0.0), mass + slack

    def inf_sup(self, a, b):
        one = np.ones_like(np.asarray(a, dtype=float))
        return one, one

    def to_spec(self):
        return {"lebesgue": {}}


def _decreasing_inf_sup(phi, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    near = np.clip(0.0, a, b)
    far = np.where(np.abs(a) >= np.abs(b), a, b)
    return phi.value(far), phi.value(near)


def piecewise_is_positively_decreasing(breakpoints, values) -> bool:
    """Exact test on the value table (zero outside the support)."""
    bp = np.asarray(breakpoints, dtype=float)
    ext = np.concatenate([[0.0], np.asarray(values, dtype=float), [0.0]])
    # piece k of ext covers [bp[k-1], bp[k]) with bp[-1] = -inf, bp[len] = +inf
    lefts = np.concatenate([[-np.inf], bp])
    rights = np.concatenate([bp, [np.inf]])
    right_side = lefts >= 0
    left_side = rights <= 0
    # pieces straddling 0 belong to both sides
    mid = ~(right_side | left_side)
    order_r = np.nonzero(right_side | mid)[0]
    order_l = np.nonzero(left_side | mid)[0][::-1]
    vr = ext[order_r]
    vl = ext[order_l]
    return bool(np.all(np.diff(vr) <= 0) and np.all(np.diff(vl) <= 0))


def density1d_from_spec(spec: dict) -> Density1D:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"malformed 1-D density spec {spec!r}")
    (kind, args), = spec.items()
    args = args or {}
    if kind == "gaussian":
        return Gaussian(float(args.get("sigma", 1.0)))
    if kind == "exp_decay":
        return ExpDecay(float(args.get("rate", 1.0)))
    if kind == "power":
        return Power(float(args.get("alpha", 2.0)))
    if kind == "piecewise_constant":
        return PiecewiseConstant(tuple(args["breakpoints"]), tuple(args["values"]))
    if kind == "lebesgue":
        return Lebesgue()
    raise ValueError(f"unknown 1-D density {kind!r}")


# ---------------------------------------------------------------------------
# n-dimensional densities


class DensityND:
    dim: int
    # p for which the density is claimed p-concave (None when no claim)
    concavity_tag = None

    def value(self, points):
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ProductDensity(DensityND):
    factors: tuple
    name: str = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def dim(self):
        return len(self.factors)

    @property
    def concavity_tag(self):
        if all(isinstance(f, Lebesgue) for f in self.factors):
            return INF
        if all(isinstance(f, (Gaussian, ExpDecay, Lebesgue)) for f in self.factors):
            return Fraction(0)
        return None

    def value(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        out = np.ones(len(pts))
        for k, f in enumerate(self.factors):
            out *= f.value(pts[:, k])
        return out

    def is_lebesgue(self) -> bool:
        return all(isinstance(f, Lebesgue) for f in self.factors)

    def to_spec(self):
        if self.name == "radial_gaussian":
            return {"radial_gaussian": {"sigma": self.factors[0].sigma, "dim": self.dim}}
        return {"product": [f.to_spec() for f in self.factors]}


def radial_gaussian(sigma: float, dim: int) -> ProductDensity:
    """The centered Gaussian with covariance sigma^2 I, which factors over the axes."""
    return ProductDensity(tuple(Gaussian(sigma) for _ in range(dim)), name="radial_gaussian")


def lebesgue(dim: int) -> ProductDensity:
    return ProductDensity(tuple(Lebesgue() for _ in range(dim)))


@dataclass(frozen=True)
class BoxMixture(DensityND):
    """sum_i w_i * indicator of the closed box i."""

    weights: tuple
    boxes: tuple
    name: str = "box_mixture"
    concavity_tag = None

    @property
    def dim(self):
        return len(self.boxes[0])

    def value(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        out = np.zeros(len(pts))
        for w, box in zip(self.weights, self.boxes):
            lo = np.array([b[0] for b in box], dtype=float)
            hi = np.array([b[1] for b in box], dtype=float)
            out += w * np.all((pts >= lo) & (pts <= hi), axis=1)
        return out

    def to_spec(self):
        if self.name == "nonproduct_square_example":
            return {"nonproduct_square_example": {}}
        return {"box_mixture": {"weights": list(self.weights),
                                "boxes": [[list(b) for b in box] for box in self.boxes]}}


def nonproduct_square_example(dim: int = 2) -> BoxMixture:
    """1/2 on the square [-2, 2]^n plus 1/2 on [-1, 1]^n."""
    return BoxMixture((0.5, 0.5), (tuple((-2.0, 2.0) for _ in range(dim)), tuple((-1.0, 1.0) for _ in range(dim))),
                      name="nonproduct_square_example")


@dataclass(frozen=True)
class GeneralDensity(DensityND):
    """Black-box evaluator; brackets are sampled and flagged non-rigorous."""

    evaluator: Callable
    dim: int
    concavity_tag: object = None

    def value(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.asarray(self.evaluator(pts), dtype=float)

    def to_spec(self):
        raise ValueError("general densities have no JSON form")


def density_from_spec(spec: dict, dim: int) -> DensityND:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"malformed density spec {spec!r}")
    (kind, args), = spec.items()
    args = args or {}
    if kind == "product":
        factors = tuple(density1d_from_spec(f) for f in args)
        if len(factors) != dim:
            raise ValueError(f"product density has {len(factors)} factors for dimension {dim}")
        return ProductDensity(factors)
    if kind in ("radial_gaussian", "gaussian_product"):
        d = int(args.get("dim", dim))
        if d != dim:
            raise ValueError("density dimension mismatch")
        return radial_gaussian(float(args.get("sigma", 1.0)), dim)
    if kind == "nonproduct_square_example":
        return nonproduct_square_example(dim)
    if kind == "box_mixture":
        boxes = tuple(tuple((float(a), float(b)) for a, b in box) for box in args["boxes"])
        return BoxMixture(tuple(float(w) for w in args["weights"]), boxes)
    # a bare 1-D kind means the same factor on every axis
    factor = density1d_from_spec(spec)
    return ProductDensity(tuple(factor for _ in range(dim)))


# ---------------------------------------------------------------------------
# measure brackets


def _edges(lattice: Lattice, idx):
    return lattice.edges(idx), lattice.edges(np.asarray(idx) + 1)


def run_masses(A: GridSet, phi: DensityND):
    """Per-run (lo, hi) mass arrays and a rigour flag."""
    if A.dim != phi.dim:
        raise ValueError(f"dimension mismatch: set {A.dim}, density {phi.dim}")
    L = A.lattice
    if isinstance(phi, ProductDensity):
        lo = np.ones(A.n_runs)
        hi = np.ones(A.n_runs)
        for k, f in enumerate(phi.factors[:-1]):
            uniq, inv = np.unique(A.rows[:, k], return_inverse=True)
            ml, mh = f.interval_mass(*_edges(L, uniq))
            inv = np.asarray(inv).ravel()
            lo *= ml[inv]
            hi *= mh[inv]
        ml, mh = phi.factors[-1].interval_mass(L.edges(A.start), L.edges(A.stop))
        return lo * ml, hi * mh, True
    if isinstance(phi, BoxMixture):
        total = np.zeros(A.n_runs)
        lo_edges = np.column_stack([L.edges(A.rows), L.edges(A.start)]) if A.dim > 1 else L.edges(A.start)[:, None]
        hi_edges = np.column_stack([L.edges(A.rows + 1), L.edges(A.stop)]) if A.dim > 1 else L.edges(A.stop)[:, None]
        for w, box in zip(phi.weights, phi.boxes):
            blo = np.array([b[0] for b in box])
            bhi = np.array([b[1] for b in box])
            overlap = np.clip(np.minimum(hi_edges, bhi) - np.maximum(lo_edges, blo), 0.0, None)
            total += w * np.prod(overlap, axis=1)
        slack = 8 * EPS * total + 4 * EPS * np.abs(hi_edges).max(axis=1, initial=0.0) ** A.dim * sum(phi.weights)
        return np.maximum(total - slack, 0.0), total + slack, True
    # sampled fallback: corners and midpoints of every cell
    cells = A.cells()
    h = float(A.pitch)
    grid = np.array(np.meshgrid(*[[0.0, 0.5, 1.0]] * A.dim, indexing="ij")).reshape(A.dim, -1).T
    lo_c = np.full(len(cells), np.inf)
    hi_c = np.zeros(len(cells))
    base = L.edges(cells)
    for off in grid:
        vals = phi.value(base + off * h)
        lo_c = np.minimum(lo_c, vals)
        hi_c = np.maximum(hi_c, vals)
    vol = h ** A.dim
    lengths = A.stop - A.start
    run_id = np.repeat(np.arange(A.n_runs), lengths)
    lo = np.bincount(run_id, lo_c * vol, minlength=A.n_runs)
    hi = np.bincount(run_id, hi_c * vol, minlength=A.n_runs)
    return lo, hi, False


def measure(A: GridSet, phi: DensityND) -> MeasureBracket:
    """Rigorous (or flagged sampled) bracket on the phi-measure of A."""
    if A.dim != phi.dim:
        raise ValueError(f"dimension mismatch: set {A.dim}, density {phi.dim}")
    if A.is_empty():
        return MeasureBracket(0.0, 0.0)
    if isinstance(phi, ProductDensity) and phi.is_lebesgue():
        exact = A.n_cells * A.pitch ** A.dim
        return exact_bracket(exact)
    lo, hi, rigorous = run_masses(A, phi)
    # fsum rounds the float terms correctly; the factor absorbs the product roundings
    rel = (A.dim + 3) * EPS
    lower = _down(math.fsum(lo) * (1 - rel))
    upper = _up(math.fsum(hi) * (1 + rel))
    return MeasureBracket(lower, upper, rigorous)


def exact_bracket(value: Fraction) -> MeasureBracket:
    f = float(value)
    if Fraction(f) == value:
        return MeasureBracket(f, f)
    lo = f if Fraction(f) < value else float(np.nextafter(f, -np.inf))
    hi = f if Fraction(f) > value else float(np.nextafter(f, np.inf))
    return MeasureBracket(max(lo, 0.0), hi)


def gaussian_box_oracle(bounds, sigma: float = 1.0) -> float:
    """Product of 1-D Gaussian interval masses via the error function."""
    total = 1.0
    for a, b in bounds:
        total *= 0.5 * (math.erf(float(b) / (sigma * math.sqrt(2))) - math.erf(float(a) / (sigma * math.sqrt(2))))
    return total


def _sub_density(phi: ProductDensity, axis: int) -> ProductDensity:
    return ProductDensity(tuple(f for k, f in enumerate(phi.factors) if k != axis))


def section_measures(A: GridSet, axis: int, phi: DensityND):
    """Slice indices j and brackets on the (n-1)-measure of the section at slice j.

    ``phi`` must be a product density; its factor along ``axis`` is dropped.
    """
    if not isinstance(phi, ProductDensity):
        raise TypeError("section measures need a product density")
    rest = _sub_density(phi, axis)
    idx = section_indices(A, axis)
    brackets = [measure(section(A, axis, int(j)), rest) for j in idx]
    return idx, brackets


def marginal_profile(A: GridSet, axis: int, phi: DensityND):
    """Slice indices and brackets on the marginal x_k -> int_{A(x_k)} phi over each slice."""
    L = A.lattice
    if isinstance(phi, ProductDensity):
        idx, secs = section_measures(A, axis, phi)
        lo_f, hi_f = phi.factors[axis].inf_sup(*_edges(L, idx))
        lo_f, hi_f = np.atleast_1d(lo_f), np.atleast_1d(hi_f)
        out = []
        for s, a, b in zip(secs, lo_f, hi_f):
            out.append(MeasureBracket(_down(s.lower * a * (1 - 2 * EPS)), _up(s.upper * b * (1 + 2 * EPS)),
                                      s.rigorous))
        return idx, out
    if isinstance(phi, BoxMixture):
        idx = section_indices(A, axis)
        x0, x1 = _edges(L, idx)
        out = []
        for j, a, b in zip(idx, x0, x1):
            S = section(A, axis, int(j))
            lo = hi = 0.0
            for w, box in zip(phi.weights, phi.boxes):
                ka, kb = box[axis]
                rest = [bb for k, bb in enumerate(box) if k != axis]
                m = measure(S, BoxMixture((1.0,), (tuple(rest),)))
                if ka <= a and b <= kb:
                    lo += w * m.lower
                if b >= ka and a <= kb:
                    hi += w * m.upper
            out.append(MeasureBracket(_down(lo), _up(hi)))
        return idx, out
    raise TypeError("marginals need a product or box-mixture density")


def marginal_sup(A: GridSet, axis: int, phi: DensityND) -> MeasureBracket:
    """Bracket on the sup over slices of the marginal along ``axis`` (0-based)."""
    _, brackets = marginal_profile(A, axis, phi)
    return MeasureBracket(max(b.lower for b in brackets), max(b.upper for b in brackets),
                          all(b.rigorous for b in brackets))


# ---------------------------------------------------------------------------
# structural hypotheses


def is_positively_decreasing(phi: Density1D, grid: Sequence[float] | None = None) -> Check:
    """Whether t -> phi(t) and t -> phi(-t) are non-increasing on [0, inf)."""
    if isinstance(phi, (Gaussian, ExpDecay, Lebesgue)):
        return Check(True, True, phi.kind)
    if isinstance(phi, Power):
        return Check(phi.alpha == 0, True, "power")
    if isinstance(phi, PiecewiseConstant):
        return Check(piecewise_is_positively_decreasing(phi.breakpoints, phi.values), True, "monotone table")
    if grid is None:
        grid = np.linspace(0.0, 10.0, 2001)
    t = np.asarray(grid, dtype=float)
    t = np.unique(np.abs(t))
    right = phi.value(t)
    left = phi.value(-t)
    ok = bool(np.all(np.diff(right) <= 1e-12 * np.abs(right[:-1])) and np.all(np.diff(left) <= 1e-12 * np.abs(left[:-1])))
    return Check(ok, False, "sampled")


def is_p_concave_sampled(phi, p, trials: int = 2000, seed: int = 0, box=None) -> Check:
    """Sampled test of phi((1-l)x + l y) >= M_p(phi(x), phi(y), l) on random triples."""
    dim = getattr(phi, "dim", 1)
    rng = np.random.default_rng(seed)
    if box is None:
        box = [(-3.0, 3.0)] * dim
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    x = rng.uniform(lo, hi, size=(trials, dim))
    y = rng.uniform(lo, hi, size=(trials, dim))
    m = 64
    k = rng.integers(1, m, size=trials)
    lam = k / m
    z = (1 - lam)[:, None] * x + lam[:, None] * y

    def ev(pts):
        return phi.value(pts[:, 0]) if dim == 1 and isinstance(phi, Density1D) else phi.value(pts)

    fx, fy, fz = ev(x), ev(y), ev(z)
    for i in range(trials):
        frac = Fraction(int(k[i]), m)
        bound = p_mean(fx[i], fy[i], Lambda(frac.numerator, frac.denominator), p)
        if fz[i] < bound * (1 - 1e-12) - 1e-300:
            return Check(False, False, f"witness x={x[i].tolist()}, y={y[i].tolist()}, lambda={frac}")
    return Check(True, False, f"{trials} sampled triples")
