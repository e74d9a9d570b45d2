from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilprob import malcev as mc
from nilprob.errors import CapExceeded, InvalidElement, NotCoprime, ParseError, UnknownGroup
from nilprob.group import commutator_word, parse_word
from nilprob.nildegree import dc_k_exact
from nilprob.polynomial import parse_polynomial

H = mc.heisenberg()
coord = st.tuples(st.integers(-30, 30), st.integers(-30, 30), st.integers(-30, 30))


def test_heisenberg_basics():
    assert H.n0 == 2
    assert mc.check_malcev_axioms(H).ok
    x, y = H.generators
    assert H.commutator(y, x) == (1, 0, 0)
    assert H.commutator(x, y) == (-1, 0, 0)


def test_matrix_model_agrees():
    M = mc.heisenberg_from_matrices()
    rng = np.random.default_rng(1)
    for _ in range(100):
        a, b = (tuple(int(v) for v in rng.integers(-9, 10, 3)) for _ in range(2))
        assert M.mul(a, b) == H.mul(a, b)
        n = int(rng.integers(-5, 6))
        assert M.power(a, n) == H.power(a, n)


@given(coord, coord, coord)
def test_group_laws(a, b, c):
    assert H.mul(H.mul(a, b), c) == H.mul(a, H.mul(b, c))
    assert H.mul(a, H.inverse(a)) == H.identity


@given(coord, st.integers(-20, 20), st.integers(-20, 20))
def test_power_law(a, m, n):
    assert H.power(a, m + n) == H.mul(H.power(a, m), H.power(a, n))
    assert H.power(H.power(a, m), n) == H.power(a, m * n)


@given(st.lists(coord, min_size=4, max_size=4))
def test_vectorised_matches_scalar(vs):
    A = [np.array([v[i] for v in vs[:2]]) for i in range(3)]
    B = [np.array([v[i] for v in vs[2:]]) for i in range(3)]
    got = H.mul_arrays(A, B)
    for j in range(2):
        assert tuple(int(c[j]) for c in got) == H.mul(vs[j], vs[2 + j])


def test_ut4():
    U = mc.ut4()
    assert U.m == 6 and U.n0 == 6
    assert mc.check_malcev_axioms(U).ok
    with pytest.raises(NotCoprime):
        mc.finite_quotient(U, 3)
    Q = mc.finite_quotient(U, 5, cap=10 ** 5)
    assert Q.order == 5 ** 6


def test_direct_product_and_names():
    P = mc.builtin_group("heisenbergxheisenberg")
    assert P.m == 6 and mc.check_malcev_axioms(P).ok
    assert mc.builtin_group("z3").m == 3
    with pytest.raises(UnknownGroup):
        mc.builtin_group("nope")


@pytest.mark.parametrize("n", [3, 5, 7])
def test_quotients(n):
    Q = mc.finite_quotient(H, n)
    assert Q.order == n ** 3
    rep = mc.verify_chief_factors(Q)
    assert rep.ok and rep.factor_orders == [n, n, n]


def test_quotient_errors():
    with pytest.raises(NotCoprime):
        mc.finite_quotient(H, 2)
    with pytest.raises(NotCoprime):
        mc.finite_quotient(H, 6)
    with pytest.raises(CapExceeded):
        mc.finite_quotient(H, 101, cap=1000)


def test_reduction_is_a_homomorphism():
    Q = mc.finite_quotient(H, 5)
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = (tuple(int(v) for v in rng.integers(-40, 40, 3)) for _ in range(2))
        assert mc.reduce_element(Q, H.mul(a, b)) == Q.mul(mc.reduce_element(Q, a),
                                                          mc.reduce_element(Q, b))


# oracle: (p^2 + p - 1) / p^3 for odd primes, frozen from brute-force pair counts
@pytest.mark.parametrize("n,value", [(3, Fraction(11, 27)), (5, Fraction(29, 125)),
                                     (7, Fraction(55, 343)), (9, Fraction(35, 243))])
def test_dc_of_quotients(n, value, oracle):
    Q = mc.finite_quotient(H, n)
    assert dc_k_exact(Q, 1) == value
    if n == 3:
        assert oracle.dc(Q, 1) == value


def test_root_densities():
    x1 = parse_polynomial("X1", ["X1", "X2", "X3"])
    for n in (3, 5, 7, 11, 13):
        assert mc.root_density(H, x1, n) == Fraction(1, n)
    H2 = mc.builtin_group("heisenbergxheisenberg")
    comm = mc.commutation_polynomial()
    vals = [mc.root_density(H2, comm, n) for n in (3, 5, 7, 11, 13)]
    assert vals[0] == Fraction(11, 27)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(InvalidElement):
        mc.root_density(H, comm, 3)


def test_commutation_density_equals_dc_of_quotient():
    H2 = mc.builtin_group("heisenbergxheisenberg")
    for p in (3, 5):
        assert mc.root_density(H2, mc.commutation_polynomial(), p) == \
            dc_k_exact(mc.finite_quotient(H, p), 1)


def test_root_count_cap():
    with pytest.raises(CapExceeded):
        mc.root_count(mc.commutation_polynomial(), 13, cap=1000)


def test_dphi_quotient_sequence_non_increasing():
    w = commutator_word(1)
    seq = mc.dphi_quotient_sequence(H, w, [3, 9])
    assert seq == [Fraction(11, 27), Fraction(35, 243)]


def test_derivatives_and_degree():
    x, y = H.generators
    ident = mc.GroupMap(H, H, lambda v: v)
    square = mc.GroupMap(H, H, lambda v: H.power(v, 2))
    sampler = lambda rng: tuple(int(t) for t in rng.integers(-5, 6, 3))
    assert mc.degree_at_most(ident, 1, 50, sampler).consistent
    assert mc.degree_at_most(square, 2, 50, sampler).consistent
    assert not mc.degree_at_most(square, 1, 50, sampler).consistent
    # nesting agrees with the one-line formula
    rng = np.random.default_rng(0)
    for _ in range(30):
        u, v, p = sampler(rng), sampler(rng), sampler(rng)
        nested = mc.derivative_map(mc.derivative_map(square, v), u)(p)
        assert nested == mc.second_derivative_direct(square, u, v, p)


def test_equation_evaluation():
    w = parse_word("x1 x2 x1^-1 x2^-1", lambda t: t)
    x, y = H.generators
    assert mc.eval_equation(H, w, [x, x]) == H.identity
    assert mc.eval_equation(H, w, [x, y]) != H.identity


def test_malcev_file(tmp_path):
    f = tmp_path / "heis.mal"
    f.write_text("malcev m=3 n0=auto\n"
                 "mu[1] = v1 + w1 + v3*w2\nmu[2] = v2 + w2\nmu[3] = v3 + w3\n"
                 "eps[1] = n*v1 + v2*v3*n*(n-1)/2\neps[2] = n*v2\neps[3] = n*v3\n")
    G = mc.load_malcev_file(f)
    assert G.n0 == 2 and G.mul((1, 2, 3), (4, 5, 6)) == H.mul((1, 2, 3), (4, 5, 6))


@pytest.mark.parametrize("text,line", [
    ("mu[1] = v1\n", 1),
    ("malcev m=1\nmu[1] = v1 + w1\n", 1),
    ("malcev m=1\nmu[1] = v1 + w1\neps[1] = n*v1\nfoo[1] = 3\n", 4),
    ("malcev m=1\nmu[1] = v1 + w1 +\neps[1] = n*v1\n", 2),
    ("malcev m=1\nmu[1] = v1 + w1 + 1\neps[1] = n*v1\n", 1),
])
def test_malcev_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        mc.parse_malcev_text(text)
    assert exc.value.line == line


def test_polynomial_file(tmp_path):
    f = tmp_path / "c.poly"
    f.write_text("# commutation\nvars X1 X2 X3 W1 W2 W3\nX2*W3 - X3*W2\n")
    p, names = mc.load_polynomial_file(f)
    assert p == mc.commutation_polynomial() and len(names) == 6
