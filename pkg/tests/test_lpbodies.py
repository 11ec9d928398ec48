from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmlab.lpbodies import (
    SupportFn2D,
    check_firey_monotonicity,
    halfplane_polygon,
    lp_combine,
    polygon_area,
    support_from_polygon,
)

SQUARE = [(-1, -1), (1, -1), (1, 1), (-1, 1)]


def random_body(seed, n=128):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(12, 2))
    pts = np.vstack([pts, [[0.3, 0.0], [-0.3, 0.0], [0.0, 0.3], [0.0, -0.3]]])
    return support_from_polygon(pts, n)


def test_square_support_and_area():
    h = support_from_polygon(SQUARE, 64)
    assert h.values[0] == pytest.approx(1.0)
    assert h.values[8] == pytest.approx(np.sqrt(2))
    assert h.area() == pytest.approx(4.0, rel=1e-9)


def test_polygon_area_and_halfplanes():
    assert polygon_area([(0, 0), (2, 0), (2, 3), (0, 3)]) == 6.0
    poly = halfplane_polygon(np.array([[1, 0], [0, 1], [-1, 0], [0, -1]]), [1, 2, 1, 2])
    assert polygon_area(poly) == pytest.approx(8.0)


@pytest.mark.parametrize("p", [1, 2, "inf", "1/2"])
def test_idempotent(p):
    h = random_body(0)
    out = lp_combine(h, h, "1/3", p, wulff=True)
    assert np.allclose(out.values, h.values, rtol=1e-12)


def test_p_below_one_needs_wulff():
    h = random_body(1)
    with pytest.raises(ValueError):
        lp_combine(h, h, "1/2", "1/2")


def test_max_is_hull_of_union():
    hK = support_from_polygon(SQUARE, 64)
    hL = support_from_polygon([(-2, -0.5), (2, -0.5), (2, 0.5), (-2, 0.5)], 64)
    hull = support_from_polygon(SQUARE + [(-2, -0.5), (2, -0.5), (2, 0.5), (-2, 0.5)], 64)
    assert np.allclose(lp_combine(hK, hL, "1/2", "inf").values, hull.values)


def test_firey_monotonicity():
    hK, hL = random_body(2), random_body(3)
    assert check_firey_monotonicity(hK, hL, "1/2", 2, 2).holds
    assert check_firey_monotonicity(hK, hL, "1/2", 1, 2).holds
    bad = check_firey_monotonicity(hK, hL, "1/2", 2, 1)
    assert not bad.holds and "direction" in bad.detail


def test_support_validation():
    with pytest.raises(ValueError):
        SupportFn2D(np.ones(4))
    with pytest.raises(ValueError):
        support_from_polygon([(1, 1), (2, 1), (2, 2)])


@given(st.integers(0, 1000), st.integers(0, 1000), st.sampled_from(["1/4", "1/2", "3/4"]))
def test_sum_area_brunn_minkowski(s1, s2, lam):
    # Minkowski combination (p = 1) satisfies area^(1/2) concavity
    hK, hL = random_body(s1, 64), random_body(s2, 64)
    w = float(Fraction(lam))
    hC = lp_combine(hK, hL, lam, 1)
    assert np.sqrt(hC.area()) >= ((1 - w) * np.sqrt(hK.area()) + w * np.sqrt(hL.area())) * (1 - 1e-9)
