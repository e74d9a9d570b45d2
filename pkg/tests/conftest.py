"""Shared brute-force oracles.  These deliberately avoid the library's
commutator tables and dynamic programming."""
from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def brute_commutator(G, xs):
    acc = xs[0]
    for y in xs[1:]:
        # x^-1 y^-1 x y via plain multiplication
        acc = G.mul(G.mul(G.inverse(acc), G.inverse(y)), G.mul(acc, y))
    return acc


def brute_P(G, k, g=0):
    hits = 0
    for xs in itertools.product(range(G.order), repeat=k + 1):
        hits += brute_commutator(G, list(xs)) == g
    return Fraction(hits, G.order ** (k + 1))


def brute_dc(G, k):
    if k == 0:
        return Fraction(1, G.order)
    return brute_P(G, k, 0)


@pytest.fixture(scope="session")
def oracle():
    class O:
        P = staticmethod(brute_P)
        dc = staticmethod(brute_dc)
        commutator = staticmethod(brute_commutator)
    return O
