from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmlab.means import (
    INF,
    Lambda,
    bbl_exponent,
    format_p,
    p_mean,
    p_mean_weighted,
    parse_p,
    parse_rational,
    raw_power_combination,
)

pos = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)
lams = st.builds(lambda m, k: Fraction(k % (m - 1) + 1, m), st.integers(2, 200), st.integers(0, 10**6))
ps = st.one_of(st.sampled_from([-INF, INF]), st.fractions(min_value=-8, max_value=8, max_denominator=64))


def lam_of(frac):
    return Lambda(frac.numerator, frac.denominator)


# fixed values


@pytest.mark.parametrize("a,b,lam,p,expected", [
    (5, 5, "3/10", 2, 5.0),
    (4, 9, "1/2", 0, 6.0),
    (0, 7, "2/5", "1/2", 0.0),
    (2, 3, "1/2", "-inf", 2.0),
    (2, 3, "1/2", "inf", 3.0),
    (3, 3, "7/10", -1, 3.0),
    (1, 4, "1/2", 1, 2.5),
    (1, 4, "1/2", -1, 1.6),
])
def test_p_mean_values(a, b, lam, p, expected):
    assert p_mean(a, b, lam, p) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("a,b,lam,p,expected", [
    (0, 8, "1/2", 1, 4.0),
    (0, 1, "1/2", "1/2", 0.25),
    (3, 3, "7/10", -1, 3.0),
    (0, 5, "1/3", -2, 0.0),
    (0, 5, "1/3", 0, 0.0),
    (0, 5, "1/3", "inf", 5.0),
])
def test_raw_combination_values(a, b, lam, p, expected):
    assert raw_power_combination(a, b, lam, p) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("a,b,lam,p,q,expected", [
    (1, 1, "1/2", 1, 1, 1.0),
    (8, 8, "1/2", "1/3", 1, 8.0),
    (1, 1, "1/2", 1, 2, 0.5),
    (0, 3, "1/2", 1, 2, 0.0),
])
def test_weighted_mean_values(a, b, lam, p, q, expected):
    assert p_mean_weighted(a, b, lam, p, q) == pytest.approx(expected, rel=1e-14)


def test_weighted_mean_rejects_p_zero():
    with pytest.raises(ValueError):
        p_mean_weighted(1, 2, "1/2", 0, 1)


@pytest.mark.parametrize("p,m,expected", [
    (0, 3, Fraction(0)),
    ("1/2", 1, Fraction(1, 3)),
    ("inf", 2, Fraction(1, 2)),
    ("-1/2", 2, -INF),
    ("-1/4", 2, Fraction(-1, 2)),
])
def test_bbl_exponent(p, m, expected):
    assert bbl_exponent(p, m) == expected


def test_bbl_exponent_composes():
    # BBL(p, m2) followed by BBL(., m1) is BBL(p, m1 + m2)
    assert bbl_exponent(bbl_exponent(1, 1), 1) == Fraction(1, 3) == bbl_exponent(1, 2)


def test_bbl_exponent_below_range():
    with pytest.raises(ValueError):
        bbl_exponent("-1", 2)


def test_parsing():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational(" -2 ") == Fraction(-2)
    assert parse_p("inf") == INF and parse_p("-inf") == -INF
    assert format_p(parse_p("-inf")) == "-inf"
    for bad in ("0.5", "1/0", "x", 0.5, True):
        with pytest.raises((TypeError, ValueError)):
            parse_rational(bad)
    assert Lambda.of("2/4") == Lambda(1, 2)
    with pytest.raises(ValueError):
        Lambda.of(1)


def test_negative_arguments_rejected():
    with pytest.raises(ValueError):
        p_mean(-1, 2, "1/2", 1)


def test_infinite_arguments():
    assert p_mean(INF, 2, "1/2", 1) == INF
    assert p_mean(INF, 2, "1/2", 0) == INF
    # for p < 0 an infinite argument contributes nothing: (lambda b^p)^(1/p)
    assert p_mean(INF, 2, "1/2", -1) == pytest.approx(4.0)
    assert p_mean(INF, INF, "1/2", -1) == INF


def test_small_p_is_stable():
    a, b = 1e-2, 1e2
    ref = p_mean(a, b, "1/2", 0)
    for p in (Fraction(1, 10**6), Fraction(-1, 10**6)):
        assert abs(p_mean(a, b, "1/2", p) - ref) <= 1e-4 * ref


# properties


@given(pos, pos, lams, ps)
def test_between_min_and_max(a, b, lam, p):
    m = p_mean(a, b, lam_of(lam), p)
    assert min(a, b) * (1 - 1e-12) <= m <= max(a, b) * (1 + 1e-12)


@given(pos, pos, lams, ps)
def test_symmetry(a, b, lam, p):
    m1 = p_mean(a, b, lam_of(lam), p)
    m2 = p_mean(b, a, lam_of(1 - lam), p)
    assert m1 == pytest.approx(m2, rel=1e-12)


@given(pos, pos, lams, ps, st.floats(min_value=1e-3, max_value=1e3))
def test_homogeneity(a, b, lam, p, c):
    assert p_mean(c * a, c * b, lam_of(lam), p) == pytest.approx(c * p_mean(a, b, lam_of(lam), p), rel=1e-11)


@given(pos, lams, ps)
def test_idempotence(a, lam, p):
    assert p_mean(a, a, lam_of(lam), p) == a


@given(pos, pos, lams, ps, ps)
def test_monotone_in_p(a, b, lam, p, q):
    lo, hi = sorted((p, q))
    assert p_mean(a, b, lam_of(lam), lo) <= p_mean(a, b, lam_of(lam), hi) * (1 + 1e-12)


@given(pos, pos, lams, ps)
def test_raw_matches_p_mean_off_zero(a, b, lam, p):
    assert raw_power_combination(a, b, lam_of(lam), p) == pytest.approx(p_mean(a, b, lam_of(lam), p), rel=1e-15)


@given(pos, lams, st.fractions(min_value=Fraction(1, 64), max_value=8, max_denominator=64))
def test_raw_combination_with_zero(b, lam, p):
    # for p > 0 the raw combination keeps lambda^(1/p) b
    assert raw_power_combination(0.0, b, lam_of(lam), p) == pytest.approx(float(lam) ** (1 / float(p)) * b,
                                                                          rel=1e-12)
    assert p_mean(0.0, b, lam_of(lam), p) == 0.0


@given(pos, pos, lams, st.fractions(min_value=Fraction(1, 64), max_value=4, max_denominator=64))
def test_weighted_q1_is_p_mean(a, b, lam, p):
    assert p_mean_weighted(a, b, lam_of(lam), p, 1) == pytest.approx(p_mean(a, b, lam_of(lam), p), rel=1e-12)


@given(pos, pos, lams, st.fractions(min_value=Fraction(1, 64), max_value=4, max_denominator=64),
       st.floats(min_value=1.0, max_value=5.0))
def test_weighted_decreasing_in_q(a, b, lam, p, q):
    # (1-l)^q and l^q shrink as q grows
    assert p_mean_weighted(a, b, lam_of(lam), p, q) <= p_mean_weighted(a, b, lam_of(lam), p, 1) * (1 + 1e-12)


@pytest.mark.parametrize("p", [Fraction(10**6), Fraction(-10**6), Fraction(-500), Fraction(700)])
def test_extreme_p_no_overflow(p):
    a, b = 1e-3, 1e3
    m = p_mean(a, b, "1/3", p)
    # the other term is negligible: the mean is the extreme argument times its weight^(1/p)
    ext, weight = (b, 1 / 3) if p > 0 else (a, 2 / 3)
    assert m == pytest.approx(ext * weight ** (1 / float(p)), rel=1e-12)
