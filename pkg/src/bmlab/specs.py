"""JSON descriptions of sets, densities and experiments.

Fields that feed exact lattice operations (pitch, lambda, box corners, scale
factors, translations) must be exact rationals: integers or strings "k/m".
Fields that only affect measures or digitization (sigma, radii, angles)
may be decimals.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .density import DensityND, ProductDensity, density_from_spec, lebesgue
from .gridset import (
    EmptySet,
    GridSet,
    Lattice,
    align,
    common_pitch,
    cone_polygon,
    digitize_ball,
    digitize_polygon,
    random_set,
    scale,
    translate,
    u_hull,
    union_all,
    wu_hull,
)
from .means import Lambda, parse_p, parse_rational
from .metric import ProductMetricSpace, pushforward_density


class SpecError(ValueError):
    """Malformed experiment, set or density description."""


def _rationals(values):
    return [parse_rational(v) for v in values]


def _single(spec, what):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise SpecError(f"{what} spec must be an object with exactly one key, got {spec!r}")
    (kind, args), = spec.items()
    return kind, args


def build_set(spec: dict, lattice: Lattice) -> GridSet:
    """GridSet described by ``spec``; exact kinds may return a refined lattice."""
    kind, args = _single(spec, "set")
    n = lattice.dim
    if kind == "box":
        lo, hi = _rationals(args["min"]), _rationals(args["max"])
        if len(lo) != n or len(hi) != n:
            raise SpecError("box corners have the wrong dimension")
        pitch = lattice.pitch
        for v in lo + hi:
            if v != 0:
                pitch = common_pitch(pitch, v)
        L = Lattice(n, pitch)
        A = GridSet.box(L, [v / pitch for v in lo], [v / pitch for v in hi])
    elif kind == "ball":
        A = digitize_ball(lattice, [float(c) for c in args["center"]], float(args["radius"]),
                          args.get("mode", "outer"))
    elif kind == "cone":
        window = args.get("window", [[-2, 2], [0, 4]])
        poly = cone_polygon(float(args["alpha_deg"]), window)
        A = digitize_polygon(lattice, poly, args.get("mode", "outer"))
    elif kind == "polygon":
        A = digitize_polygon(lattice, np.asarray(args["vertices"], dtype=float), args.get("mode", "inner"))
    elif kind == "cells":
        cells = args["cells"] if isinstance(args, dict) else args
        L = Lattice(n, parse_rational(args["pitch"])) if isinstance(args, dict) and "pitch" in args else lattice
        A = GridSet.from_cells(L, cells)
    elif kind == "runs":
        L = Lattice(n, parse_rational(args["pitch"])) if "pitch" in args else lattice
        A = GridSet.from_runs(L, args["runs"])
    elif kind == "union":
        parts = [build_set(s, lattice) for s in args]
        A = union_all(parts)
    elif kind == "translate":
        A = translate(build_set(args["of"], lattice), _rationals(args["by"]))
    elif kind == "scale":
        A = scale(build_set(args["of"], lattice), parse_rational(args["by"]))
    elif kind == "wu_hull":
        A = wu_hull(build_set(args, lattice))
    elif kind == "u_hull":
        A = u_hull(build_set(args, lattice))
    elif kind == "random":
        A = random_set(args.get("family", "any"), n, lattice, args.get("window", ["-2", "2"]), int(args["seed"]))
    else:
        raise SpecError(f"unknown set kind {kind!r}")
    if A.is_empty():
        raise EmptySet(f"{kind} spec produced an empty set")
    # sets built on a coarser lattice than requested are brought to it
    if A.pitch != lattice.pitch and (A.pitch / lattice.pitch).denominator == 1:
        A = A.to_pitch(lattice.pitch)
    return A


def set_to_spec(A: GridSet) -> dict:
    """Lossless run-list description of a set."""
    return {"runs": {"pitch": str(A.pitch), "runs": A.runs().tolist()}}


def build_density(spec, dim: int, space=None) -> DensityND:
    phi = lebesgue(dim) if spec is None else density_from_spec(spec, dim)
    if space is None:
        return phi
    if not isinstance(phi, ProductDensity):
        raise SpecError("embedded spaces need a product density")
    if space.dim != dim:
        raise SpecError("space and experiment dimensions differ")
    return ProductDensity(tuple(pushforward_density(s, f) for s, f in zip(space.axes, phi.factors)))


CHECKS = ("bm", "theorem_A", "linear_equal_sup", "thm_4_7", "linear_marginal", "pl", "bbl", "weighted", "iso",
          "concavity", "rescaled_bm")


def load_experiment(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
    validate_experiment(spec)
    return spec


def validate_experiment(spec: dict) -> None:
    """Parse every exact field up front so malformed input fails before any work."""
    if not isinstance(spec, dict):
        raise SpecError("experiment must be a JSON object")
    check = spec.get("check")
    if check not in CHECKS:
        raise SpecError(f"unknown check {check!r}; expected one of {', '.join(CHECKS)}")
    try:
        int(spec.get("dim", 2))
        parse_rational(spec.get("pitch", "1/8"))
        if check not in ("iso", "concavity"):
            Lambda.of(spec.get("lambda", "1/2"))
        if "p" in spec:
            parse_p(spec["p"])
        for key in ("q", "t0", "N"):
            if key in spec:
                parse_rational(spec[key])
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc
    needed = ("f", "g") if check in ("pl", "bbl") else ("A", "B")
    for key in needed:
        if key not in spec:
            raise SpecError(f"missing field {key!r}")


def _build_fn(spec, lattice, phi):
    from .checkers.functional import GridFn

    kind, args = _single(spec, "function")
    if kind == "indicator":
        S = build_set(args["set"] if "set" in args else args, lattice)
        return GridFn.indicator(S, float(args.get("value", 1.0)) if "set" in args else 1.0)
    if kind == "weighted":
        S = build_set(args["set"], lattice)
        return GridFn.weighted_indicator(S, phi, args.get("which", "inf"))
    if kind == "cells":
        L = Lattice(lattice.dim, parse_rational(args.get("pitch", lattice.pitch)))
        return GridFn(L, args["cells"], args["values"])
    raise SpecError(f"unknown function kind {kind!r}")


def run_experiment(spec: dict, refine: int = 1):
    """Run one experiment at its pitch divided by ``refine``; returns a Verdict."""
    from . import checkers as ck

    validate_experiment(spec)
    check = spec["check"]
    dim = int(spec.get("dim", 2))
    lattice = Lattice(dim, parse_rational(spec.get("pitch", "1/8")) / refine)
    space = ProductMetricSpace.from_spec(spec["space"]) if "space" in spec else None
    phi = build_density(spec.get("density"), dim, space)
    lam = spec.get("lambda", "1/2")
    if check in ("pl", "bbl"):
        # PL and BBL integrate the functions themselves; the measure is Lebesgue
        f = _build_fn(spec["f"], lattice, phi)
        g = _build_fn(spec["g"], lattice, phi)
        p = parse_p(spec.get("p", 0)) if check == "bbl" else Fraction(0)
        h = _build_fn(spec["h"], lattice, phi) if "h" in spec else ck.sup_convolution(f, g, lam, p)
        if check == "pl":
            return ck.check_pl(f, g, h, lam)
        return ck.check_bbl(f, g, h, lam, p, parse_rational(spec.get("m", dim)))
    A = build_set(spec["A"], lattice)
    B = build_set(spec["B"], lattice)
    A, B = align(A, B)
    axis = int(spec.get("axis", 0))
    if check == "bm":
        C = None
        if "C" in spec:
            C = build_set(spec["C"], lattice)
            C, _ = align(C, A)
        q = parse_rational(spec["q"]) if "q" in spec else None
        return ck.check_bm(A, B, lam, parse_p(spec.get("p", 1)), phi, general=bool(spec.get("general", False)),
                           weight_q=q, C=C)
    if check == "theorem_A":
        return ck.check_theorem_A(A, B, lam, phi)
    if check == "linear_equal_sup":
        return ck.check_linear_equal_sup(A, B, lam, axis, phi)
    if check == "thm_4_7":
        return ck.check_theorem_4_7(A, B, lam, phi)
    if check == "linear_marginal":
        return ck.check_linear_marginal(A, B, lam, axis, phi)
    if check == "weighted":
        return ck.check_bm_weighted_product(A, B, lam, dim - 1, spec.get("N", dim - 1), phi)
    if check == "rescaled_bm":
        return ck.check_rescaled_bm(A, B, lam, spec.get("t0", 1), axis, phi)
    if check == "iso":
        return ck.check_isoperimetric(A, B, phi, spec.get("t_schedule"), convex=bool(spec.get("convex", True)))
    return ck.check_concavity_profile(A, B, phi, spec.get("t_grid"), convex=bool(spec.get("convex", True)))
