import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilprob.errors import InvalidElement, PreconditionFailed
from nilprob.group import nilpotency_class, subgroup_generated
from nilprob.pgroups import (GkElement, GkSpec, build_gk, element_coordinates,
                             no_small_nilpotent_subgroups, quasi_corank, random_subgroup,
                             sharp_subgroup, verify_gk_series)

SPECS = [(3, 1, 1), (5, 1, 1), (3, 1, 2), (3, 2, 1)]


@pytest.mark.parametrize("p,k,n", SPECS)
def test_acceptance_specs(p, k, n):
    G = build_gk(GkSpec(p, k, n))
    rep = verify_gk_series(G)
    assert rep.ok, rep.witness
    assert rep.centre_order == p
    assert rep.nil_class == k + 1
    H = sharp_subgroup(G)
    assert H.index == p ** n
    assert nilpotency_class(G, H) <= k
    if n == 2:
        assert no_small_nilpotent_subgroups(G).ok


def test_order_formula():
    for p, k, n, r, s in [(3, 1, 1, 1, 1), (3, 1, 1, 2, 1), (3, 1, 1, 1, 2), (3, 2, 1, 1, 1)]:
        spec = GkSpec(p, k, n, r, s)
        assert build_gk(spec).order == spec.order == p ** spec.log_order


def test_general_r_s_series():
    for r, s in [(2, 1), (1, 2)]:
        G = build_gk(GkSpec(3, 1, 1, r, s))
        rep = verify_gk_series(G)
        assert rep.ok and rep.centre_order == 3 ** (r * s)


def test_bad_spec():
    with pytest.raises(InvalidElement):
        GkSpec(4, 1, 1)
    with pytest.raises(InvalidElement):
        GkSpec(2, 1, 1)


def test_sharp_needs_r_s_one():
    G = build_gk(GkSpec(3, 1, 1, 2, 1))
    with pytest.raises(PreconditionFailed):
        sharp_subgroup(G)


def test_no_small_subgroups_needs_n_at_most_two():
    G = build_gk(GkSpec(3, 0, 3))
    with pytest.raises(PreconditionFailed):
        no_small_nilpotent_subgroups(G)


def test_maximal_audit_counts():
    G = build_gk(GkSpec(3, 1, 2))
    audit = no_small_nilpotent_subgroups(G)
    assert audit.checked == 1 + 40


def test_quasi_corank_examples():
    G = build_gk(GkSpec(3, 1, 2))
    assert quasi_corank(G, sharp_subgroup(G)) == 2
    G1 = build_gk(GkSpec(3, 1, 1))
    triv = subgroup_generated(G1, [])
    assert quasi_corank(G1, triv) == 2


@pytest.mark.parametrize("p,k,n", [(3, 1, 1), (3, 1, 2), (3, 2, 1)])
def test_block_product_matches_matrices(p, k, n):
    spec = GkSpec(p, k, n)
    coords = element_coordinates(spec)
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = coords[rng.integers(len(coords), size=2)]
        x, y = GkElement(spec, a), GkElement(spec, b)
        prod = (x * y).to_matrix()
        direct = (x.to_matrix() @ y.to_matrix()) % p
        assert np.array_equal(prod, direct)
        assert GkElement.from_matrix(spec, direct).to_matrix().tolist() == direct.tolist()


@given(st.integers(0, 10_000))
def test_quasi_corank_index_identity(seed):
    G = build_gk(GkSpec(3, 1, 1))
    K = random_subgroup(G, np.random.default_rng(seed))
    q = quasi_corank(G, K)  # asserts [G : K gamma_2] = p^q internally
    assert 0 <= q <= 2
