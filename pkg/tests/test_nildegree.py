from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilprob import corpus as cp
from nilprob.errors import CapExceeded, ChainInvalid
from nilprob.group import (commutator_word, is_k_step_nilpotent, parse_word, subgroup_generated,
                           trivial, whole)
from nilprob.nildegree import (P_k_exact, commutator_distribution, conjugacy_class_count,
                               converse_bound, dc_k_exact, descent_bound_check, dphi_exact,
                               f_k_count, gap_bound)

# values frozen from the brute-force oracle in conftest
DC_TABLE = [
    ("sym3", 1, Fraction(1, 2)), ("sym3", 2, Fraction(3, 4)), ("sym3", 3, Fraction(7, 8)),
    ("dih8", 1, Fraction(5, 8)), ("dih8", 2, Fraction(1)),
    ("q8", 1, Fraction(5, 8)),
    ("sym4", 1, Fraction(5, 24)), ("sym4", 2, Fraction(53, 144)), ("sym4", 3, Fraction(455, 864)),
    ("heis3", 1, Fraction(11, 27)), ("exsp3", 1, Fraction(11, 27)),
    ("alt5", 1, Fraction(1, 12)), ("alt5", 2, Fraction(7, 48)),
    ("sym5", 1, Fraction(7, 120)),
    ("sym3xsym3", 1, Fraction(1, 4)), ("sym3xsym3", 2, Fraction(9, 16)),
]


@pytest.mark.parametrize("name,k,value", DC_TABLE)
def test_dc_values(name, k, value):
    assert dc_k_exact(cp.builtin(name), k) == value


@pytest.mark.parametrize("name,k", [("sym3", 1), ("sym3", 2), ("dih8", 1), ("q8", 2),
                                    ("sym4", 1), ("alt4", 2), ("heis3", 1)])
def test_dc_matches_brute_force(name, k, oracle):
    G = cp.builtin(name)
    assert dc_k_exact(G, k) == oracle.dc(G, k)


def test_dih8_is_five_eighths_not_25_64(oracle):
    G = cp.builtin("dih8")
    assert oracle.dc(G, 1) == Fraction(5, 8) != Fraction(25, 64)


def test_dc_zero_is_inverse_order():
    assert dc_k_exact(cp.builtin("sym3"), 0) == Fraction(1, 6)


def test_dc1_equals_class_count_over_order():
    for name in ("sym4", "alt5", "dih12", "heis5"):
        G = cp.builtin(name)
        assert dc_k_exact(G, 1) == Fraction(conjugacy_class_count(G), G.order)


def test_P_k_distribution_sym3(oracle):
    G = cp.builtin("sym3")
    vals = [P_k_exact(G, g, 1) for g in range(6)]
    assert sum(vals) == 1
    assert vals == [oracle.P(G, 1, g) for g in range(6)]
    assert P_k_exact(G, G.lookup("(1,2,3)"), 1) == Fraction(1, 4)


def test_distribution_counts_are_exact_integers():
    G = cp.builtin("sym5")
    d = commutator_distribution(G, 3)  # [x1, x2, x3]
    assert sum(d.counts) == G.order ** 3
    assert d.probability(0) == dc_k_exact(G, 2)


@pytest.mark.parametrize("name,k", [("sym3", 1), ("sym4", 1), ("sym4", 2), ("alt5", 1),
                                    ("heis3", 1), ("sym3xsym3", 2)])
def test_dphi_on_commutator_word_equals_dc(name, k):
    G = cp.builtin(name)
    assert dphi_exact(G, commutator_word(k)) == dc_k_exact(G, k)


def test_dphi_with_constants():
    G = cp.builtin("sym3")
    # x^2 = 1 has the identity and three transpositions
    assert dphi_exact(G, parse_word("x1 x1", G.lookup)) == Fraction(4, 6)
    # x (1,2) x^-1 (1,2) = 1  iff x centralises (1,2)
    w = parse_word("x1 c:(1,2) x1^-1 c:(1,2)", G.lookup)
    assert dphi_exact(G, w) == Fraction(2, 6)


def test_dphi_cap():
    G = cp.builtin("sym4")
    with pytest.raises(CapExceeded):
        dphi_exact(G, commutator_word(3), cap=1000)


def test_f_k_count_whole_group():
    G = cp.builtin("sym4")
    assert Fraction(f_k_count(G, [whole(G)] * 2), 24 ** 2) == dc_k_exact(G, 1)


@pytest.mark.parametrize("name", [g.name for g in cp.corpus(243)])
def test_gap_bound_on_corpus(name):
    G = cp.builtin(name)
    for k in (1, 2, 3):
        if not is_k_step_nilpotent(G, k):
            assert dc_k_exact(G, k) <= gap_bound(k)
        else:
            assert dc_k_exact(G, k) == 1


def test_gap_bound_is_attained_by_sym3():
    G = cp.builtin("sym3")
    # sym3 is extremal at k = 1
    assert dc_k_exact(G, 1) < gap_bound(1) == Fraction(5, 8)


def test_descent_examples():
    G = cp.builtin("sym4")
    V = cp.named_subgroup(G, "v4")
    rep = descent_bound_check(G, [V], 1)
    assert rep.passed and rep.product == Fraction(1, 2)
    rep = descent_bound_check(G, [trivial(G)], 1)
    assert rep.passed and rep.dc_top == Fraction(5, 24)
    A = cp.named_subgroup(G, "a4")
    with pytest.raises(ChainInvalid):
        descent_bound_check(G, [A, V], 1)


def test_descent_two_steps():
    G = cp.builtin("sym3xsym3")
    # first factor sym3 x 1 is normal, then the trivial group
    S = subgroup_generated(G, [G.lookup(lbl) for lbl in _first_factor_labels(G)])
    rep = descent_bound_check(G, [S, trivial(G)], 1)
    assert rep.passed and rep.length == 2
    assert rep.bound == gap_bound(1) ** 2


def _first_factor_labels(G):
    # elements (s, 1): indices a * 6 for a in the first factor
    return [G.render(a * 6) for a in range(1, 6)]


@pytest.mark.parametrize("case", cp.CONVERSE_CASES, ids=lambda c: f"{c.group}-{c.gamma}-{c.h}-{c.k}")
def test_converse_bound_cases(case):
    G = cp.builtin(case.group)
    bound = converse_bound(G, cp.resolve_subgroup(G, case.gamma), cp.resolve_subgroup(G, case.h),
                           case.k)
    assert dc_k_exact(G, case.k) >= bound


def test_converse_bound_rejects_non_nilpotent_quotient():
    G = cp.builtin("sym4")
    with pytest.raises(ChainInvalid):
        converse_bound(G, whole(G), trivial(G), 1)


@given(st.sampled_from(["sym3", "dih8", "q8", "alt4", "sym4", "heis3", "dih12"]),
       st.integers(1, 3))
def test_dc_monotone_in_k(name, k):
    G = cp.builtin(name)
    assert dc_k_exact(G, k) <= dc_k_exact(G, k + 1) <= 1


@given(st.sampled_from(["sym3", "dih8", "sym4", "heis3"]), st.integers(1, 2), st.data())
def test_P_k_sums_to_one_and_peaks_at_identity(name, k, data):
    G = cp.builtin(name)
    vals = [P_k_exact(G, g, k) for g in range(G.order)]
    assert sum(vals) == 1
    g = data.draw(st.integers(0, G.order - 1))
    assert vals[g] <= vals[0]
