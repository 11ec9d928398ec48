"""Planar convex bodies through sampled support functions, and Firey p-sums."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import HalfspaceIntersection

from .density import Check
from .gridset import convex_hull_2d
from .means import Lambda, parse_p, raw_power_combination


@dataclass(frozen=True)
class SupportFn2D:
    """Values h(K, u_k) at the directions u_k = (cos 2 pi k/N, sin 2 pi k/N)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 16:
            raise ValueError("need at least 16 directions")
        if np.any(~np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("support values must be finite and non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    def directions(self) -> np.ndarray:
        return directions(self.n)

    def __mul__(self, k: float) -> "SupportFn2D":
        return SupportFn2D(self.values * float(k))

    __rmul__ = __mul__

    def polygon(self) -> np.ndarray:
        """Vertices of the intersection of the halfplanes <x, u_k> <= h_k."""
        return halfplane_polygon(self.directions(), self.values)

    def area(self) -> float:
        return polygon_area(self.polygon())


def directions(n: int) -> np.ndarray:
    theta = 2 * math.pi * np.arange(n) / n
    return np.column_stack([np.cos(theta), np.sin(theta)])


def _contains_origin(hull: np.ndarray) -> bool:
    for i in range(len(hull)):
        p, q = hull[i], hull[(i + 1) % len(hull)]
        if (q[0] - p[0]) * (-p[1]) - (q[1] - p[1]) * (-p[0]) < -1e-12:
            return False
    return True


def support_from_polygon(vertices, n: int = 256) -> SupportFn2D:
    """Support function of conv(vertices) sampled at n directions."""
    hull = convex_hull_2d(vertices)
    if len(hull) < 3 or not _contains_origin(hull):
        raise ValueError("polygon must be convex with non-empty interior and contain the origin")
    vals = (directions(n) @ hull.T).max(axis=1)
    return SupportFn2D(np.maximum(vals, 0.0))


def halfplane_polygon(normals, offsets) -> np.ndarray:
    """Counter-clockwise vertices of {x : normals @ x <= offsets} (origin strictly inside)."""
    offsets = np.asarray(offsets, dtype=float)
    if np.any(offsets <= 0):
        raise ValueError("the origin must be an interior point")
    halfspaces = np.column_stack([normals, -offsets])
    hs = HalfspaceIntersection(halfspaces, np.zeros(2))
    return convex_hull_2d(hs.intersections)


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def lp_combine(hK: SupportFn2D, hL: SupportFn2D, lam, p, wulff: bool = False) -> SupportFn2D:
    """Support data of (1-l) K +_p l L.

    For p in [1, inf] this is the pointwise p-mean of the support values.
    For p < 1 the pointwise mean is not a support function in general; with
    ``wulff=True`` the support function of the body
    {x : <x, u> <= mean_p(u) for all sampled u} is returned instead.
    """
    if hK.n != hL.n:
        raise ValueError("support functions use different direction grids")
    lam = Lambda.of(lam)
    p = parse_p(p)
    vals = np.array([raw_power_combination(a, b, lam, p) for a, b in zip(hK.values, hL.values)])
    if p >= 1:
        return SupportFn2D(vals)
    if not wulff:
        raise ValueError("p < 1 needs the halfplane-intersection construction (wulff=True)")
    poly = halfplane_polygon(hK.directions(), vals)
    return SupportFn2D((hK.directions() @ poly.T).max(axis=1))


def check_firey_monotonicity(hK: SupportFn2D, hL: SupportFn2D, lam, p, q, rel_tol: float = 1e-12) -> Check:
    """Whether h_p <= h_q at every sampled direction (inclusion of the p-sum in the q-sum)."""
    hp = lp_combine(hK, hL, lam, p).values
    hq = lp_combine(hK, hL, lam, q).values
    bad = hp > hq * (1 + rel_tol) + rel_tol
    if np.any(bad):
        k = int(np.argmax(hp - hq))
        return Check(False, False, f"direction {k}: h_p = {hp[k]:.12g} > h_q = {hq[k]:.12g}")
    return Check(True, False, f"{hK.n} sampled directions")
