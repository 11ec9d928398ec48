import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmlab.density import Gaussian, Lebesgue, is_p_concave_sampled
from bmlab.gridset import GridSet, Lattice, combine
from bmlab.metric import (
    ArcSpace,
    EmbeddedSpace,
    ProductMetricSpace,
    combine_points,
    embed_box,
    pushforward_density,
    star_combine,
    verify_strictly_intrinsic,
)


@pytest.mark.parametrize("space,x,y,expected", [
    (EmbeddedSpace("identity"), 2, 4, 3.0),
    (EmbeddedSpace("log"), 4, 9, 6.0),
    (EmbeddedSpace("power", p=0.5), 1, 9, 4.0),
])
def test_combine_points(space, x, y, expected):
    assert float(combine_points(x, y, "1/2", space)) == pytest.approx(expected, rel=1e-14)


def test_identity_star_is_combine():
    L = Lattice(2, Fraction(1, 4))
    A = GridSet.box(L, [0, 0], [3, 2])
    B = GridSet.box(L, [1, -2], [5, 1])
    space = ProductMetricSpace((EmbeddedSpace(), EmbeddedSpace()))
    assert star_combine(A, B, "1/3", space) == combine(A, B, "1/3")


def test_log_boxes_combine_to_geometric_box():
    # [1,2]^2 and [1,4]^2 combine to [1, 2 sqrt 2]^2 in original coordinates
    space = ProductMetricSpace((EmbeddedSpace("log"), EmbeddedSpace("log")))
    x = combine_points(np.array([[2.0, 2.0]]), np.array([[4.0, 4.0]]), "1/2", space)
    assert np.allclose(x, 2 * math.sqrt(2), rtol=1e-14)
    lo = combine_points(np.array([[1.0, 1.0]]), np.array([[1.0, 1.0]]), "1/2", space)
    assert np.allclose(lo, 1.0)


def test_pushforward_identity():
    assert pushforward_density(EmbeddedSpace(), Gaussian(1.0)) == Gaussian(1.0)


def test_pushforward_log_lebesgue_is_exponential():
    w = pushforward_density(EmbeddedSpace("log"), Lebesgue())
    u = np.linspace(-3, 3, 13)
    assert np.allclose(w.value(u), np.exp(u), rtol=1e-14)
    lo, hi = w.interval_mass([0.0], [1.0])
    assert lo[0] <= math.e - 1 <= hi[0]
    assert is_p_concave_sampled(w, 0, box=[(-3.0, 3.0)]).holds


def test_pushforward_power_lebesgue():
    p = 0.5
    w = pushforward_density(EmbeddedSpace("power", p=p), Lebesgue())
    u = np.linspace(0.1, 3, 7)
    # proportional to u^(1/p - 1)
    ratio = w.value(u) / u ** (1 / p - 1)
    assert np.allclose(ratio, ratio[0], rtol=1e-13)
    # u^(1/p - 1) is (p / (1 - p))-concave on the positive axis
    assert is_p_concave_sampled(w, Fraction(1), box=[(0.01, 4.0)]).holds


def test_strictly_intrinsic():
    assert verify_strictly_intrinsic(EmbeddedSpace()).holds
    assert verify_strictly_intrinsic(EmbeddedSpace("log")).holds
    assert verify_strictly_intrinsic(ProductMetricSpace((EmbeddedSpace("log"), EmbeddedSpace("power", p=0.5)))).holds
    assert verify_strictly_intrinsic(ArcSpace(2.0)).holds


def test_invalid_maps():
    with pytest.raises(ValueError):
        EmbeddedSpace("power", p=1.5)
    with pytest.raises(ValueError):
        EmbeddedSpace("warp")
    with pytest.raises(ValueError):
        EmbeddedSpace("log").phi([-1.0])


def test_embed_box_exact_when_aligned():
    space = ProductMetricSpace((EmbeddedSpace("linear", scale=2.0), EmbeddedSpace()))
    L = Lattice(2, Fraction(1, 2))
    assert embed_box(space, L, [0, 0], [1, 1]) == GridSet.box(L, [0, 0], [4, 2])


@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1e-3, max_value=1e3),
       st.sampled_from(["log", "power", "identity"]))
def test_inverse_roundtrip(x, y, kind):
    space = EmbeddedSpace(kind)
    for v in (x, y):
        assert float(space.inverse(space.phi(v))) == pytest.approx(v, rel=1e-12)
    z = float(combine_points(x, y, "1/2", space))
    assert min(x, y) * (1 - 1e-12) <= z <= max(x, y) * (1 + 1e-12)


@given(st.floats(min_value=-4, max_value=4), st.floats(min_value=0.01, max_value=2))
def test_pushforward_mass_equals_preimage_mass(a, w):
    space = EmbeddedSpace("log")
    pf = pushforward_density(space, Gaussian(1.0))
    lo, hi = pf.interval_mass([a], [a + w])
    exact = 0.5 * (math.erf(math.exp(a + w) / math.sqrt(2)) - math.erf(math.exp(a) / math.sqrt(2)))
    assert lo[0] - 1e-15 <= exact <= hi[0] + 1e-15
