import itertools
from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilprob import freegroup as fg
from nilprob import genericity as gen
from nilprob.errors import PreconditionFailed
from nilprob.sampling import block_rng

letters = st.sampled_from([1, -1, 2, -2, 3, -3])
words = st.lists(letters, max_size=12).map(fg.reduce_word)


@pytest.mark.parametrize("tup,rank", [
    ([(1,), (2,)], 2),
    ([(1,), (1, 1)], 1),
    ([(1, 1), (2, 2), (1, 2, 1, 2)], 3),
    ([(1, 2, -1), (1, 2, 2, -1)], 1),
    ([(1,), (2,), (1, 2)], 2),
    ([()], 0),
    ([(1, 2), (1, 2)], 1),
])
def test_stallings_examples(tup, rank):
    assert gen.stallings_rank(tup) == rank


def test_duplicates_and_identity_are_not_bases():
    g = (1, 2, -1)
    assert not gen.is_free_basis([g, g])
    assert not gen.delzant_condition([g, g])
    assert not gen.delzant_condition([(1,), ()])
    assert not gen.delzant_condition([(1, 2), (-2, -1)])


def test_delzant_examples():
    assert gen.delzant_condition([(1,), (2,)])  # |ab| = 2 >= 1 + 1
    assert not gen.delzant_condition([(1,), (2,)], D0=2)
    assert not gen.delzant_condition([(1, 2), (-2, 1)])  # (1 2)(-2 1) = (1 1)
    with pytest.raises(PreconditionFailed):
        gen.delzant_condition([(1,)], D0=0)


@given(st.lists(words, min_size=1, max_size=3), st.integers(0, 10 ** 6))
def test_folding_is_confluent(tup, seed):
    a = gen.fold(tup)
    b = gen.fold(tup, shuffle_seed=seed)
    assert a.canonical() == b.canonical()
    assert a.rank == b.rank


@given(st.lists(words, min_size=1, max_size=3))
def test_rank_bounds(tup):
    r = gen.stallings_rank(tup)
    assert 0 <= r <= len(tup)
    # adding a product of existing generators does not change the subgroup
    extra = tup + [fg.mul(tup[0], tup[-1])]
    assert gen.fold(extra).canonical() == gen.fold(tup).canonical()


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
def test_delzant_is_sound(seed, n):
    rng = block_rng(seed, 0)
    for tup in zip(*(fg.sample_ball(rng, 2, n, 20) for _ in range(2))):
        if gen.delzant_condition(tup):
            assert gen.is_free_basis(tup)


@pytest.mark.parametrize("r", [2, 3])
def test_ball_size_formula(r):
    for n in range(7 if r == 2 else 4):
        assert len(fg.enumerate_ball(r, n)) == fg.ball_size(r, n) == gen.ball_size_formula(r, n)


def _exact_basis_fraction(r, n):
    ball = fg.enumerate_ball(r, n)
    hits = sum(gen.is_free_basis(t) for t in itertools.product(ball, repeat=r))
    return Fraction(hits, len(ball) ** r)


def test_exact_small_fractions():
    assert _exact_basis_fraction(1, 1) == Fraction(2, 3)  # ball {1, x, x^-1}
    assert _exact_basis_fraction(1, 2) == Fraction(4, 5)  # five elements, all but 1
    assert _exact_basis_fraction(2, 1) == Fraction(8, 25)


def test_experiment_matches_exact_fraction():
    res = gen.genericity_experiment(1, 2, 20_000, 3)
    sigma = math.sqrt(0.8 * 0.2 / res.trials)
    assert abs(res.basis_frac - 0.8) < 4 * sigma
    assert res.counts["unsound"] == 0


def test_experiment_soundness_and_growth():
    fr = []
    for n in (2, 4, 6):
        res = gen.genericity_experiment(2, n, 3000, 5)
        assert res.delzant_frac <= res.basis_frac and res.counts["unsound"] == 0
        fr.append(res.basis_frac)
    assert fr == sorted(fr)
    assert gen.geometric_decay(fr)


def test_gromov_product_examples():
    e = ()
    assert gen.gromov_product(e, (1,), (2,)) == 0
    assert gen.gromov_product(e, (1, 2), (1, -2)) == 1
    assert isinstance(gen.gromov_product(e, (1,), (1,)), Fraction)


@given(words, words, words, words)
def test_free_group_is_zero_hyperbolic(w, x, y, z):
    gp = lambda a, b: gen.gromov_product(w, a, b)
    assert gp(x, z) >= min(gp(x, y), gp(y, z))
    assert 0 <= gp(x, y) <= min(fg.distance(w, x), fg.distance(w, y))
    assert gp(x, y).denominator == 1  # trees have integral products


def test_walk_bound_on_products_of_a_delzant_tuple():
    rng = np.random.default_rng(4)
    tup = [(1, 1, 2), (2, -1, 2)]
    assert gen.delzant_condition(tup)
    for _ in range(30):
        length = int(rng.integers(1, 12))
        idx = [int(rng.choice([1, -1, 2, -2]))]
        while len(idx) < length:
            c = int(rng.choice([1, -1, 2, -2]))
            if c != -idx[-1]:
                idx.append(c)
        pts = gen.partial_products(tup, idx)
        assert gen.delzant_walk_bound_check(pts, 1)
        # |w| >= word length over the tuple
        assert len(pts[-1]) >= len(idx)


def test_walk_bound_precondition():
    with pytest.raises(PreconditionFailed):
        gen.delzant_walk_bound_check([(), (1,), ()], 1)


@given(words, words)
def test_free_group_operations(u, v):
    assert fg.mul(u, v) == fg.reduce_word(u + v)
    assert fg.mul(u, fg.inverse(u)) == ()
    assert fg.distance(u, v) == fg.distance(v, u)
    assert fg.commutator(u, v) == fg.reduce_word(fg.inverse(u) + fg.inverse(v) + u + v)
