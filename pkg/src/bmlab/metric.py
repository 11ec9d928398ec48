"""Metrics induced by injective maps into R, their convex combinations and pushforwards.

A one-dimensional space X with map phi carries the distance
d(x, y) = |phi(x) - phi(y)|.  The midpoint-type combination is
phi^{-1}((1-l) phi(x) + l phi(y)), so sets are handled in the embedded
coordinate u = phi(x), where the combination is the ordinary one and the
measure becomes the pushforward density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .density import Check, Density1D, EPS, Lebesgue
from .gridset import GridSet, Lattice, combine
from .means import Lambda, parse_rational


@dataclass(frozen=True)
class EmbeddedSpace:
    """Interval domain of R with an injective continuous map.

    ``kind`` is one of identity, log, power (parameter p in (0, 1)), linear
    (parameter scale > 0) or monotone_table (strictly increasing piecewise
    linear map through ``table`` = ((x0, u0), (x1, u1), ...)).
    """

    kind: str = "identity"
    p: float = 0.5
    scale: float = 1.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind == "power" and not 0 < float(self.p) < 1:
            raise ValueError("power maps need p in (0, 1)")
        if self.kind == "linear" and float(self.scale) <= 0:
            raise ValueError("linear maps need a positive scale")
        if self.kind == "monotone_table":
            t = np.asarray(self.table, dtype=float)
            if t.ndim != 2 or len(t) < 2 or np.any(np.diff(t[:, 0]) <= 0) or np.any(np.diff(t[:, 1]) <= 0):
                raise ValueError("table must be strictly increasing in both columns")
        if self.kind not in ("identity", "log", "power", "linear", "monotone_table"):
            raise ValueError(f"unknown map {self.kind!r}")

    @property
    def domain(self):
        if self.kind in ("log", "power"):
            return (0.0, math.inf)
        if self.kind == "monotone_table":
            t = np.asarray(self.table, dtype=float)
            return (t[0, 0], t[-1, 0])
        return (-math.inf, math.inf)

    def in_domain(self, x) -> np.ndarray:
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        if self.kind in ("log", "power"):
            return (x > lo) & (x < hi)
        return (x >= lo) & (x <= hi)

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.in_domain(x)):
            raise ValueError("point outside the domain of the map")
        if self.kind == "identity":
            return x
        if self.kind == "log":
            return np.log(x)
        if self.kind == "power":
            return x ** float(self.p)
        if self.kind == "linear":
            return x * float(self.scale)
        t = np.asarray(self.table, dtype=float)
        return np.interp(x, t[:, 0], t[:, 1])

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "identity":
            return u
        if self.kind == "log":
            return np.exp(u)
        if self.kind == "power":
            if np.any(u < 0):
                raise ValueError("power-map coordinates are non-negative")
            return u ** (1.0 / float(self.p))
        if self.kind == "linear":
            return u / float(self.scale)
        t = np.asarray(self.table, dtype=float)
        return np.interp(u, t[:, 1], t[:, 0])

    def inverse_derivative(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "identity":
            return np.ones_like(u)
        if self.kind == "log":
            return np.exp(u)
        if self.kind == "power":
            q = 1.0 / float(self.p)
            return q * u ** (q - 1.0)
        if self.kind == "linear":
            return np.full_like(u, 1.0 / float(self.scale))
        t = np.asarray(self.table, dtype=float)
        slopes = np.diff(t[:, 0]) / np.diff(t[:, 1])
        idx = np.clip(np.searchsorted(t[:, 1], u, side="right") - 1, 0, len(slopes) - 1)
        return slopes[idx]

    def distance(self, x, y):
        return np.abs(self.phi(x) - self.phi(y))

    def to_spec(self) -> dict:
        if self.kind == "power":
            return {"map": "power", "p": str(self.p)}
        if self.kind == "linear":
            return {"map": "linear", "scale": self.scale}
        if self.kind == "monotone_table":
            return {"map": "monotone_table", "table": [list(r) for r in self.table]}
        return {"map": self.kind}


def space_from_spec(spec: dict) -> EmbeddedSpace:
    kind = spec.get("map", "identity")
    if kind == "power":
        p = spec.get("p", "1/2")
        p = float(parse_rational(p)) if isinstance(p, str) else float(p)
        return EmbeddedSpace("power", p=p)
    if kind == "linear":
        return EmbeddedSpace("linear", scale=float(spec.get("scale", 1.0)))
    if kind == "monotone_table":
        return EmbeddedSpace("monotone_table", table=tuple(tuple(map(float, r)) for r in spec["table"]))
    return EmbeddedSpace(kind)


@dataclass(frozen=True)
class ProductMetricSpace:
    """Product of embedded lines with the Euclidean norm of per-axis distances."""

    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def dim(self):
        return len(self.axes)

    def phi(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        return np.column_stack([s.phi(x[:, k]) for k, s in enumerate(self.axes)])

    def inverse(self, u):
        u = np.asarray(u, dtype=float).reshape(-1, self.dim)
        return np.column_stack([s.inverse(u[:, k]) for k, s in enumerate(self.axes)])

    def distance(self, x, y):
        return np.linalg.norm(self.phi(x) - self.phi(y), axis=1)

    @classmethod
    def from_spec(cls, spec: dict) -> "ProductMetricSpace":
        return cls(tuple(space_from_spec(a) for a in spec["axes"]))

    def to_spec(self):
        return {"axes": [a.to_spec() for a in self.axes]}


def combine_points(x, y, lam, space):
    """phi^{-1}((1 - l) phi(x) + l phi(y)), coordinatewise for product spaces."""
    w = Lambda.of(lam).value
    u = (1 - w) * space.phi(x) + w * space.phi(y)
    return space.inverse(u)


def star_combine(A: GridSet, B: GridSet, lam, space: ProductMetricSpace) -> GridSet:
    """The combination of sets given in embedded coordinates.

    For the product metric the combination acts axis by axis, so in the
    embedded coordinates it is the ordinary exact lattice combination.
    """
    if space is not None and space.dim != A.dim:
        raise ValueError("space and set dimensions differ")
    return combine(A, B, lam)


@dataclass(frozen=True)
class Pushforward(Density1D):
    """Density of the image measure in embedded coordinates.

    Value u -> w(phi^{-1}(u)) |(phi^{-1})'(u)|; masses are taken from the base
    antiderivative at phi^{-1} of the interval ends, so they equal the
    original measures of the preimages.
    """

    space: EmbeddedSpace
    base: Density1D
    kind = "pushforward"

    @property
    def positively_decreasing(self):
        return self.space.kind == "identity" and self.base.positively_decreasing

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return self.base.value(self.space.inverse(u)) * np.abs(self.space.inverse_derivative(u))

    def sup_value(self):
        return math.inf

    def antiderivative(self, u):
        return self.base.antiderivative(self.space.inverse(u))

    def interval_mass(self, a, b):
        xa = self.space.inverse(np.asarray(a, dtype=float))
        xb = self.space.inverse(np.asarray(b, dtype=float))
        lo, hi = self.base.interval_mass(xa, xb)
        # the inverse map is evaluated in floating point: widen by its rounding
        fa, fb = self.base.antiderivative(xa), self.base.antiderivative(xb)
        slack = 8 * EPS * (np.abs(fa) + np.abs(fb))
        return np.maximum(lo - slack, 0.0), hi + slack

    def inf_sup(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        samples = [self.value(a), self.value(b), self.value(0.5 * (a + b))]
        return np.minimum.reduce(samples), np.maximum.reduce(samples)

    def to_spec(self):
        return {"pushforward": {"space": self.space.to_spec(), "base": self.base.to_spec()}}


def pushforward_density(space: EmbeddedSpace, w: Density1D) -> Density1D:
    if space.kind == "identity":
        return w
    if space.kind == "monotone_table" and not isinstance(w, Lebesgue):
        # tables are only piecewise differentiable; accept them with Lebesgue bases only
        raise ValueError("table maps are supported only with a Lebesgue base measure")
    return Pushforward(space, w)


def verify_strictly_intrinsic(space, samples: int = 1000, seed: int = 0, tol: float = 1e-9) -> Check:
    """Sampled check of d(z, x) = l d(x, y) and d(z, y) = (1 - l) d(x, y)."""
    rng = np.random.default_rng(seed)
    x = space.sample(rng, samples) if hasattr(space, "sample") else _sample(space, rng, samples)
    y = space.sample(rng, samples) if hasattr(space, "sample") else _sample(space, rng, samples)
    k = rng.integers(1, 64, size=samples)
    for i in range(samples):
        lam = Lambda.of(Fraction(int(k[i]), 64))
        z = combine_points(x[i], y[i], lam, space)
        dxy = float(np.squeeze(space.distance(x[i], y[i])))
        dzx = float(np.squeeze(space.distance(z, x[i])))
        dzy = float(np.squeeze(space.distance(z, y[i])))
        scale_ = max(1.0, dxy)
        if abs(dzx - lam.value * dxy) > tol * scale_ or abs(dzy - (1 - lam.value) * dxy) > tol * scale_:
            return Check(False, False, f"witness x={x[i]}, y={y[i]}, lambda={lam}")
    return Check(True, False, f"{samples} sampled pairs")


def _sample(space, rng, n):
    if isinstance(space, ProductMetricSpace):
        return np.column_stack([_sample(s, rng, n) for s in space.axes])
    lo, hi = space.domain
    if space.kind in ("log", "power"):
        return np.exp(rng.uniform(-3.0, 3.0, size=n))
    if math.isinf(lo) or math.isinf(hi):
        return rng.uniform(-10.0, 10.0, size=n)
    return rng.uniform(lo, hi, size=n)


@dataclass(frozen=True)
class ArcSpace:
    """A circular arc of radius r with the arclength metric.

    Points are planar; the arclength parameter s = r * angle is an isometry
    onto an interval, so combinations are taken in the parameter.
    """

    radius: float = 1.0
    angle_range: tuple = (0.0, math.pi)

    def parameter(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        return self.radius * theta

    def point(self, s):
        s = np.asarray(s, dtype=float).reshape(-1)
        theta = s / self.radius
        return np.column_stack([self.radius * np.cos(theta), self.radius * np.sin(theta)])

    def phi(self, x):
        return self.parameter(x)

    def inverse(self, s):
        return self.point(s)

    def distance(self, x, y):
        return np.abs(self.parameter(x) - self.parameter(y))

    def sample(self, rng, n):
        theta = rng.uniform(*self.angle_range, size=n)
        return self.point(self.radius * theta)


def embed_box(space: ProductMetricSpace, lattice: Lattice, lo, hi, mode: str = "outer") -> GridSet:
    """Digitize the image of an original-coordinate box in embedded coordinates.

    The image of a box under a coordinatewise monotone map is the box with
    mapped corners; lattice-aligned images are exact, others are rounded
    outward (``outer``) or inward (``inner``).
    """
    ulo = space.phi(np.asarray(lo, dtype=float)).ravel()
    uhi = space.phi(np.asarray(hi, dtype=float)).ravel()
    h = float(lattice.pitch)
    a = np.floor(ulo / h).astype(np.int64) if mode == "outer" else np.ceil(ulo / h).astype(np.int64)
    b = np.ceil(uhi / h).astype(np.int64) if mode == "outer" else np.floor(uhi / h).astype(np.int64)
    return GridSet.box(lattice, a, b)
