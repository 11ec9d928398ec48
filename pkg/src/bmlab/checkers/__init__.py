"""Certified verdicts for Brunn-Minkowski type inequalities, theorem suites and experiments."""

from .functional import GridFn, check_bbl, check_pl, hypothesis_failures, indicator_triple, sup_convolution
from .isoperimetry import (
    check_concavity_profile,
    check_isoperimetric,
    m_mu_functional,
    surface_measure,
    w1_quermassintegral,
)
from .repro import REPROS, ReproReport, cone_sets, repro
from .search import SearchReport, falsify, random_pd_piecewise, splitmix64, trial_seed
from .suites import (
    check_bm,
    check_bm_weighted_product,
    check_rescaled_bm,
    check_linear_equal_sup,
    check_linear_marginal,
    check_theorem_4_7,
    check_theorem_A,
    equalize_section_sup,
)
from .verdict import HOLDS, INCONCLUSIVE, VIOLATION, Enclosure, Hypothesis, Verdict, decide, flips

__all__ = [
    "GridFn", "check_bbl", "check_pl", "hypothesis_failures", "indicator_triple", "sup_convolution",
    "check_concavity_profile", "check_isoperimetric", "m_mu_functional", "surface_measure", "w1_quermassintegral",
    "REPROS", "ReproReport", "cone_sets", "repro",
    "SearchReport", "falsify", "random_pd_piecewise", "splitmix64", "trial_seed",
    "check_bm", "check_bm_weighted_product", "check_rescaled_bm", "check_linear_equal_sup",
    "check_linear_marginal", "check_theorem_4_7", "check_theorem_A", "equalize_section_sup",
    "HOLDS", "INCONCLUSIVE", "VIOLATION", "Enclosure", "Hypothesis", "Verdict", "decide", "flips",
]
