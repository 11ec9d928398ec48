import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmlab.density import (
    BoxMixture,
    ExpDecay,
    Gaussian,
    GeneralDensity,
    PiecewiseConstant,
    Power,
    ProductDensity,
    density_from_spec,
    gaussian_box_oracle,
    is_p_concave_sampled,
    is_positively_decreasing,
    lebesgue,
    marginal_sup,
    measure,
    nonproduct_square_example,
    radial_gaussian,
    section_measures,
)
from bmlab.gridset import GridSet, Lattice, digitize_ball

# erf(1/sqrt 2)^2, the standard Gaussian mass of [-1, 1]^2 (frozen)
GAUSS_SQUARE = 0.4660649426743922


def test_lebesgue_cell_is_exact():
    L = Lattice(3, Fraction(1, 8))
    br = measure(GridSet.from_cells(L, [(0, 0, 0)]), lebesgue(3))
    assert br.lower == br.upper == 1 / 512


def test_power_mass():
    L = Lattice(1, Fraction(1, 64))
    br = measure(GridSet.box(L, [64], [128]), ProductDensity((Power(2.0),)))
    assert br.contains(7 / 3) and br.width < 0.02


def test_gaussian_square():
    L = Lattice(2, Fraction(1, 8))
    br = measure(GridSet.box(L, [-8, -8], [8, 8]), radial_gaussian(1.0, 2))
    assert br.contains(GAUSS_SQUARE)
    assert abs(gaussian_box_oracle([(-1, 1), (-1, 1)]) - GAUSS_SQUARE) < 1e-15
    assert br.width < 1e-12


@pytest.mark.parametrize("phi", [Gaussian(1.0), Gaussian(2.5), ExpDecay(1.0)])
def test_whole_line_mass(phi):
    lo, hi = phi.interval_mass([-np.inf], [np.inf])
    assert lo[0] <= 1.0 <= hi[0] + 1e-15


def test_sampled_brackets_are_flagged():
    phi = GeneralDensity(lambda pts: np.exp(-np.sum(pts ** 2, axis=1) / 2) / (2 * np.pi), 2)
    L = Lattice(2, Fraction(1, 8))
    br = measure(GridSet.box(L, [-8, -8], [8, 8]), phi)
    assert not br.rigorous
    assert br.lower <= GAUSS_SQUARE * 1.001 and br.upper >= GAUSS_SQUARE * 0.999


def test_box_mixture_exact():
    phi = nonproduct_square_example(2)
    L = Lattice(2, Fraction(1, 4))
    br = measure(GridSet.box(L, [-8, -8], [8, 8]), phi)
    assert br.contains(10.0) and br.width < 1e-12
    br = measure(GridSet.box(L, [-6, -6], [6, 6]), phi)
    assert br.contains(6.5)


def test_section_and_marginal_of_box():
    L = Lattice(2, Fraction(1, 4))
    A = GridSet.box(L, [0, 0], [4, 8])
    idx, brs = section_measures(A, 0, lebesgue(2))
    assert list(idx) == [0, 1, 2, 3]
    assert all(b.lower == b.upper == 2.0 for b in brs)
    assert marginal_sup(A, 0, lebesgue(2)).contains(2.0)


def test_positively_decreasing():
    assert is_positively_decreasing(Gaussian(1.0)).holds
    assert not is_positively_decreasing(Power(2.0)).holds
    pc = PiecewiseConstant((-3, -2, -1, 1, 2, 3), (0.25, 0.5, 1.0, 0.5, 0.25))
    assert is_positively_decreasing(pc).holds
    bumpy = PiecewiseConstant((-1, 0, 1, 2), (1.0, 0.5, 1.0))
    assert not is_positively_decreasing(bumpy).holds


def test_concavity_sampling():
    assert is_p_concave_sampled(radial_gaussian(1.0, 2), 0).holds
    assert not is_p_concave_sampled(Power(2.0), 0).holds


def test_nonproduct_square_is_not_log_concave():
    phi = nonproduct_square_example(2)
    x, y, z = np.array([0.9, 0.0]), np.array([1.9, 0.0]), np.array([1.4, 0.0])
    fx, fy, fz = phi.value(np.array([x, y, z]))
    assert fz < math.sqrt(fx * fy)
    # it is quasi-concave: the sampled p = -inf test passes
    assert is_p_concave_sampled(phi, "-inf").holds


def test_density_specs():
    assert density_from_spec({"gaussian": {"sigma": 2.0}}, 2) == ProductDensity((Gaussian(2.0), Gaussian(2.0)))
    assert isinstance(density_from_spec({"nonproduct_square_example": {}}, 2), BoxMixture)
    pc = PiecewiseConstant((-1, 0, 1), (1.0, 0.5))
    assert density_from_spec(pc.to_spec(), 1).factors[0] == pc
    with pytest.raises(ValueError):
        density_from_spec({"product": [{"lebesgue": {}}]}, 2)


# properties

boxes = st.tuples(st.integers(-20, 19), st.integers(1, 20), st.integers(-20, 19), st.integers(1, 20))


@given(boxes, st.floats(min_value=0.3, max_value=3.0))
def test_gaussian_box_contains_oracle(box, sigma):
    x0, wx, y0, wy = box
    L = Lattice(2, Fraction(1, 8))
    A = GridSet.box(L, [x0, y0], [x0 + wx, y0 + wy])
    br = measure(A, radial_gaussian(sigma, 2))
    exact = gaussian_box_oracle([(x0 / 8, (x0 + wx) / 8), (y0 / 8, (y0 + wy) / 8)], sigma)
    assert br.lower <= exact * (1 + 1e-14) and exact <= br.upper * (1 + 1e-14)


@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=10),
       st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=10))
def test_measure_additive_and_monotone(a, b):
    L = Lattice(2, Fraction(1, 2))
    A, B = GridSet.from_cells(L, a), GridSet.from_cells(L, b)
    phi = radial_gaussian(1.0, 2)
    mu = lambda S: measure(S, phi)
    U, I = mu(A | B), mu(A & B)
    assert U.lower <= mu(A).upper + mu(B).upper - I.lower
    assert mu(A).upper + mu(B).upper >= U.lower
    assert mu(A).lower <= U.upper


@given(st.floats(min_value=0.1, max_value=2.0))
def test_refinement_keeps_measure(r):
    L = Lattice(2, Fraction(1, 4))
    A = digitize_ball(L, (0, 0), r + 0.3, "outer")
    phi = ProductDensity((Gaussian(1.0), ExpDecay(1.0)))
    m1, m2 = measure(A, phi), measure(A.refine(2), phi)
    assert m1.overlaps(m2)
