import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilprob import corpus as cp
from nilprob.errors import ArityMismatch, CapExceeded, InvalidElement, NotNormal, NotPGroup
from nilprob.group import (FiniteGroup, center, central_series, check_group_axioms,
                           commutator_word, derived_subgroup, direct_product, evaluate_word,
                           is_k_step_nilpotent, is_normal, lower_central_series,
                           maximal_subgroups_pgroup, nilpotency_class, normal_subgroups,
                           parse_word, quotient, subgroup_generated, upper_central_series,
                           whole, trivial)

SMALL = ["c4", "sym3", "dih8", "q8", "alt4", "sym4", "heis3", "sym3xc3"]


@pytest.mark.parametrize("name,order", [("sym3", 6), ("dih8", 8), ("q8", 8), ("sym4", 24),
                                        ("alt5", 60), ("heis5", 125), ("c2xc2", 4)])
def test_builtin_orders(name, order):
    G = cp.builtin(name)
    assert G.order == order
    assert check_group_axioms(G)


@pytest.mark.parametrize("name", SMALL)
def test_identity_and_inverses(name):
    G = cp.builtin(name)
    for a in range(G.order):
        assert G.mul(0, a) == a == G.mul(a, 0)
        assert G.mul(a, G.inverse(a)) == 0


def test_conventions_commutator_and_conjugation():
    G = cp.builtin("sym3")
    for x in range(6):
        for y in range(6):
            assert G.commutator(x, y) == G.mul(G.mul(G.inverse(x), G.inverse(y)), G.mul(x, y))
            assert G.conj(x, y) == G.mul(G.mul(G.inverse(y), x), y)


def test_permutations_compose_left_to_right():
    G = cp.builtin("sym3")
    a, b = G.lookup("(1,2)"), G.lookup("(2,3)")
    # apply (1,2) first, then (2,3): 1 -> 2 -> 3
    assert G.render(G.mul(a, b)) == "(1,3,2)"


@pytest.mark.parametrize("name,cls", [("c4", 1), ("sym3", None), ("dih8", 2), ("q8", 2),
                                      ("heis3", 2), ("dih16", 3), ("sym4", None)])
def test_nilpotency_class(name, cls):
    G = cp.builtin(name)
    assert nilpotency_class(G) == cls
    if cls is not None:
        assert is_k_step_nilpotent(G, cls)
        assert cls == 1 or not is_k_step_nilpotent(G, cls - 1)


def test_series_are_consistent():
    for name in ("dih8", "heis3", "dih16", "q8"):
        G = cp.builtin(name)
        lower, upper, cls = central_series(G)
        assert lower[-1].is_trivial() and upper[-1].order == G.order
        assert len(lower) - 1 == len(upper) - 1 == cls
        # gamma_{i+1} <= Z_{c-i}
        for i, L in enumerate(lower):
            assert L <= upper[cls - i]


def test_quotients_and_normality():
    G = cp.builtin("sym4")
    V = cp.named_subgroup(G, "v4")
    assert is_normal(G, V)
    Q = quotient(G, V)
    assert Q.quotient.order == 6
    for a in range(G.order):
        for b in (0, 5, 17):
            assert Q.projection[G.mul(a, b)] == Q.quotient.mul(Q.projection[a], Q.projection[b])
    H = subgroup_generated(G, [G.lookup("(1,2)")])
    with pytest.raises(NotNormal):
        quotient(G, H)


@pytest.mark.parametrize("name,count", [("sym3", 3), ("dih8", 6), ("q8", 6), ("sym4", 4),
                                        ("alt5", 2), ("c2xc2", 5)])
def test_normal_subgroup_counts(name, count):
    G = cp.builtin(name)
    Ns = normal_subgroups(G)
    assert len(Ns) == count
    assert all(is_normal(G, N) for N in Ns)


def test_center_and_derived():
    G = cp.builtin("dih8")
    assert center(G).order == 2
    assert derived_subgroup(G).order == 2
    assert derived_subgroup(cp.builtin("sym4")).order == 12
    assert center(cp.builtin("sym4")).order == 1


def test_maximal_subgroups_of_pgroup():
    G = cp.builtin("heis3")
    Ms = maximal_subgroups_pgroup(G, 3)
    assert len(Ms) == 4 and all(M.index == 3 for M in Ms)
    with pytest.raises(NotPGroup):
        maximal_subgroups_pgroup(cp.builtin("sym3"), 3)


def test_direct_product_index_convention():
    G, H = cp.builtin("c3"), cp.builtin("sym3")
    P = direct_product(G, H)
    for a in range(3):
        for b in range(6):
            for c in range(3):
                for d in (1, 4):
                    assert P.mul(a * 6 + b, c * 6 + d) == G.mul(a, c) * 6 + H.mul(b, d)


def test_from_table_moves_identity_to_zero():
    t = np.array([[1, 2, 0], [2, 0, 1], [0, 1, 2]])  # identity is element 2
    G = FiniteGroup.from_table(t, labels=["a", "b", "e"])
    assert G.render(0) == "e"
    assert G.order == 3


def test_bad_table_is_rejected():
    with pytest.raises(InvalidElement):
        FiniteGroup.from_table(np.array([[0, 1], [1, 1]]))


def test_table_cap():
    G = cp.builtin("sym4")
    small = FiniteGroup.from_right_action(G._gen_perms, G.labels, gens=G.gens, table_cap=10)
    assert small.mul(5, 7) == G.mul(5, 7)
    with pytest.raises(CapExceeded):
        small.require_table()


def test_words_parse_and_evaluate():
    G = cp.builtin("sym3")
    w = parse_word("x1 x2 x1^-1 x2^-1", G.lookup)
    assert w.arity == 2
    c = parse_word("x1 c:(1,2)", G.lookup)
    assert evaluate_word(G, c, [0]) == G.lookup("(1,2)")
    with pytest.raises(ArityMismatch):
        evaluate_word(G, w, [0])
    cw = commutator_word(2)
    assert cw.arity == 3
    for xs in [(1, 2, 3), (4, 5, 1), (2, 2, 5)]:
        assert evaluate_word(G, cw, list(xs)) == G.commutator(G.commutator(xs[0], xs[1]), xs[2])


@given(st.sampled_from(SMALL), st.data())
def test_group_axioms_property(name, data):
    G = cp.builtin(name)
    a, b, c = (data.draw(st.integers(0, G.order - 1)) for _ in range(3))
    assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
    assert G.inverse(G.mul(a, b)) == G.mul(G.inverse(b), G.inverse(a))
    # Hall-Witt style sanity: [a, b]^-1 = [b, a]
    assert G.inverse(G.commutator(a, b)) == G.commutator(b, a)


@given(st.sampled_from(SMALL), st.data())
def test_generated_subgroup_is_closed(name, data):
    G = cp.builtin(name)
    gens = data.draw(st.lists(st.integers(0, G.order - 1), min_size=1, max_size=2))
    H = subgroup_generated(G, gens)
    assert G.order % H.order == 0
    m = H.members
    assert H.mask[G.table[np.ix_(m, m)]].all()
    assert trivial(G) <= H <= whole(G)


@given(st.sampled_from(["dih8", "q8", "heis3", "dih16", "sym3xc3"]))
def test_upper_and_lower_series_lengths_agree(name):
    G = cp.builtin(name)
    lower, upper = lower_central_series(G), upper_central_series(G)
    if lower[-1].is_trivial():
        assert len(lower) == len(upper)
