"""Torsion-free nilpotent groups in Mal'cev coordinates.

An element is a coordinate vector ``v`` standing for ``e_1^v1 ... e_m^vm`` with
the basis ordered centre first.  Multiplication and powers are the
polynomials ``mu`` (in ``v1..vm, w1..wm``) and ``eps`` (in ``v1..vm, n``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (CapExceeded, InvalidElement, NonIntegerResult, NotCoprime, ParseError,
                     UnknownGroup)
from .group import (DEFAULT_ORDER_CAP, FiniteGroup, GroupWord, Const, Subgroup, evaluate_word,
                    is_normal, subgroup_generated)
from .polynomial import IntPolynomial, parse_polynomial

DEFAULT_ENUM_CAP = 10 ** 8


@dataclass
class MalcevGroup:
    m: int
    mu: list  # m polynomials in 2m variables
    eps: list  # m polynomials in m+1 variables
    name: str = "G"
    generators: list = field(default_factory=list)
    n0: int = 0

    def __post_init__(self):
        if len(self.mu) != self.m or len(self.eps) != self.m:
            raise InvalidElement("need m multiplication and m power polynomials")
        for p in self.mu:
            if p.nvars != 2 * self.m:
                raise InvalidElement("mu polynomials take 2m variables")
        for p in self.eps:
            if p.nvars != self.m + 1:
                raise InvalidElement("eps polynomials take m+1 variables")
        if not self.n0:
            self.n0 = math.lcm(*(p.denominator for p in self.mu + self.eps)) if self.m else 1
        if not self.generators:
            self.generators = [tuple(int(i == j) for j in range(self.m)) for i in range(self.m)]

    @property
    def identity(self):
        return (0,) * self.m

    def _check(self, v):
        if len(v) != self.m:
            raise InvalidElement(f"expected {self.m} coordinates, got {len(v)}")

    def mul(self, v, w):
        self._check(v)
        self._check(w)
        args = tuple(v) + tuple(w)
        return tuple(p.evaluate_int(args) for p in self.mu)

    def power(self, v, n: int):
        self._check(v)
        args = tuple(v) + (n,)
        return tuple(p.evaluate_int(args) for p in self.eps)

    def inverse(self, v):
        return self.power(v, -1)

    def commutator(self, a, b):
        return self.mul(self.mul(self.inverse(a), self.inverse(b)), self.mul(a, b))

    def conj(self, a, b):
        return self.mul(self.mul(self.inverse(b), a), b)

    # vectorised forms: columns are arrays of shape (N,)

    def mul_arrays(self, V: Sequence[np.ndarray], W: Sequence[np.ndarray]):
        cols = list(V) + list(W)
        return [p.evaluate_array(cols) for p in self.mu]

    def power_arrays(self, V: Sequence[np.ndarray], n):
        cols = list(V) + [np.broadcast_to(np.asarray(n), np.shape(V[0]))]
        return [p.evaluate_array(cols) for p in self.eps]

    def __repr__(self):
        return f"MalcevGroup({self.name!r}, m={self.m}, n0={self.n0})"


def zn(m: int) -> MalcevGroup:
    nv = 2 * m
    mu = [IntPolynomial.var(nv, i) + IntPolynomial.var(nv, m + i) for i in range(m)]
    eps = [IntPolynomial.var(m + 1, i) * IntPolynomial.var(m + 1, m) for i in range(m)]
    return MalcevGroup(m, mu, eps, name=f"zn({m})")


def heisenberg() -> MalcevGroup:
    """Integral Heisenberg group; ``e1`` central and ``[e3, e2] = e1``."""
    names = ["v1", "v2", "v3", "w1", "w2", "w3"]
    mu = [parse_polynomial(s, names) for s in ("v1 + w1 + v3*w2", "v2 + w2", "v3 + w3")]
    pn = ["v1", "v2", "v3", "n"]
    eps = [parse_polynomial(s, pn) for s in ("n*v1 + v2*v3*n*(n-1)/2", "n*v2", "n*v3")]
    return MalcevGroup(3, mu, eps, name="heisenberg", generators=[(0, 1, 0), (0, 0, 1)])


# ut4: basis E14, E24, E13, E34, E23, E12 (centre first)
UT4_BASIS = [(0, 3), (1, 3), (0, 2), (2, 3), (1, 2), (0, 1)]


def _poly_matrix_from_coords(nvars, offset, basis, size):
    """Product of ``I + v_i E_i`` in basis order with symbolic ``v``."""
    one = IntPolynomial.const(nvars, 1)
    zero = IntPolynomial(nvars)
    M = [[one if i == j else zero for j in range(size)] for i in range(size)]
    for idx, (a, b) in enumerate(basis):
        v = IntPolynomial.var(nvars, offset + idx)
        E = [[one if i == j else zero for j in range(size)] for i in range(size)]
        E[a][b] = v
        M = _pmatmul(M, E)
    return M


def _pmatmul(A, B):
    n = len(A)
    nv = A[0][0].nvars
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = IntPolynomial(nv)
            for k in range(n):
                if A[i][k].terms and B[k][j].terms:
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def _peel(M, basis):
    """Coordinates of a unitriangular polynomial matrix, peeling from the right."""
    n = len(M)
    nv = M[0][0].nvars
    one = IntPolynomial.const(nv, 1)
    zero = IntPolynomial(nv)
    coords = [None] * len(basis)
    for idx in range(len(basis) - 1, -1, -1):
        a, b = basis[idx]
        c = M[a][b]
        coords[idx] = c
        E = [[one if i == j else zero for j in range(n)] for i in range(n)]
        E[a][b] = -c
        M = _pmatmul(M, E)
    return coords


def unitriangular_group(size: int, basis, name) -> MalcevGroup:
    m = len(basis)
    nv = 2 * m
    X = _poly_matrix_from_coords(nv, 0, basis, size)
    Y = _poly_matrix_from_coords(nv, m, basis, size)
    mu = _peel(_pmatmul(X, Y), basis)
    # g^n = sum_j binom(n, j) U^j with U = g - I nilpotent
    pv = m + 1
    G = _poly_matrix_from_coords(pv, 0, basis, size)
    nvar = IntPolynomial.var(pv, m)
    U = [[G[i][j] - (1 if i == j else 0) for j in range(size)] for i in range(size)]
    P = [[IntPolynomial.const(pv, int(i == j)) for j in range(size)] for i in range(size)]
    Uj = P
    binom = IntPolynomial.const(pv, 1)
    total = [[P[i][j] for j in range(size)] for i in range(size)]
    for j in range(1, size):
        Uj = _pmatmul(Uj, U)
        binom = binom * (nvar - (j - 1)) / j
        total = [[total[a][b] + binom * Uj[a][b] for b in range(size)] for a in range(size)]
    eps = _peel(total, basis)
    gens = [tuple(int(i == j) for j in range(m)) for i in range(m) if basis[i][1] == basis[i][0] + 1]
    return MalcevGroup(m, mu, eps, name=name, generators=gens)


def ut4() -> MalcevGroup:
    return unitriangular_group(4, UT4_BASIS, "ut4")


def heisenberg_from_matrices() -> MalcevGroup:
    """Heisenberg rebuilt from 3x3 matrices (basis E13, E23, E12); a cross-check."""
    return unitriangular_group(3, [(0, 2), (1, 2), (0, 1)], "heisenberg-matrix")


def malcev_direct_product(G: MalcevGroup, H: MalcevGroup, name=None) -> MalcevGroup:
    """``G x H`` with coordinates ``(v_G, v_H)``."""
    m = G.m + H.m
    nv = 2 * m

    def embed(p, src_blocks, nvars):
        # src_blocks: target variable index of each source variable
        terms = {}
        for e, c in p.terms.items():
            new = [0] * nvars
            for i, k in enumerate(e):
                new[src_blocks[i]] += k
            terms[tuple(new)] = c
        return IntPolynomial(nvars, terms)

    g_mu_map = list(range(G.m)) + list(range(m, m + G.m))
    h_mu_map = list(range(G.m, m)) + list(range(m + G.m, 2 * m))
    mu = [embed(p, g_mu_map, nv) for p in G.mu] + [embed(p, h_mu_map, nv) for p in H.mu]
    g_eps_map = list(range(G.m)) + [m]
    h_eps_map = list(range(G.m, m)) + [m]
    eps = [embed(p, g_eps_map, m + 1) for p in G.eps] + [embed(p, h_eps_map, m + 1) for p in H.eps]
    gens = [tuple(g) + (0,) * H.m for g in G.generators] + [(0,) * G.m + tuple(h) for h in H.generators]
    return MalcevGroup(m, mu, eps, name=name or f"{G.name}x{H.name}", generators=gens)


def builtin_group(name: str) -> MalcevGroup:
    key = name.strip().lower().replace(" ", "")
    if "x" in key and not key.startswith("zn"):
        parts = key.split("x")
        out = builtin_group(parts[0])
        for part in parts[1:]:
            out = malcev_direct_product(out, builtin_group(part))
        return out
    if key == "heisenberg":
        return heisenberg()
    if key == "ut4":
        return ut4()
    if key.startswith("zn(") and key.endswith(")"):
        return zn(int(key[3:-1]))
    if key.startswith("z") and key[1:].isdigit():
        return zn(int(key[1:]))
    raise UnknownGroup(f"unknown Mal'cev group {name!r}")


# axioms ------------------------------------------------------------------

@dataclass
class AxiomReport:
    ok: bool
    checked: int
    witness: str | None = None


def check_malcev_axioms(G: MalcevGroup, samples: int = 200, bound: int = 6, seed: int = 0) -> AxiomReport:
    """Identity, associativity, power laws and integrality on random vectors."""
    rng = np.random.default_rng(seed)
    zero = G.identity
    try:
        for t in range(samples):
            u, v, w = (tuple(int(x) for x in rng.integers(-bound, bound + 1, G.m)) for _ in range(3))
            a, b = (int(x) for x in rng.integers(-bound, bound + 1, 2))
            if G.mul(v, zero) != v or G.mul(zero, v) != v:
                return AxiomReport(False, t, f"identity law fails at {v}")
            if G.mul(G.mul(u, v), w) != G.mul(u, G.mul(v, w)):
                return AxiomReport(False, t, f"associativity fails at {u}, {v}, {w}")
            if G.power(v, 1) != v or G.power(v, 0) != zero:
                return AxiomReport(False, t, f"power law eps(v,0/1) fails at {v}")
            if G.power(v, a + b) != G.mul(G.power(v, a), G.power(v, b)):
                return AxiomReport(False, t, f"eps(v,a+b) != eps(v,a)eps(v,b) at {v}, {a}, {b}")
    except NonIntegerResult as exc:
        return AxiomReport(False, samples, str(exc))
    return AxiomReport(True, samples)


# finite quotients ----------------------------------------------------------

def _require_coprime(G: MalcevGroup, n: int, extra: int = 1):
    if n < 2:
        raise InvalidElement("modulus must be >= 2")
    if math.gcd(n, G.n0) != 1 or math.gcd(n, extra) != 1:
        raise NotCoprime(f"modulus {n} is not coprime to n0={G.n0 * extra // math.gcd(G.n0, extra)}")


def _residue_grid(m: int, n: int) -> np.ndarray:
    idx = np.arange(n ** m, dtype=np.int64)
    out = np.empty((n ** m, m), dtype=np.int64)
    for c in range(m - 1, -1, -1):
        out[:, c] = idx % n
        idx //= n
    return out


def finite_quotient(G: MalcevGroup, n: int, cap: int = DEFAULT_ORDER_CAP) -> FiniteGroup:
    """``G(n)``: coordinates mod ``n`` with multiplication ``mu`` mod ``n``."""
    _require_coprime(G, n)
    if n ** G.m > cap:
        raise CapExceeded(f"|G(n)| = {n ** G.m} exceeds cap {cap}")
    grid = _residue_grid(G.m, n)
    weights = n ** np.arange(G.m - 1, -1, -1, dtype=np.int64)
    perms, gens = [], []
    for i in range(G.m):
        u = np.zeros(G.m, dtype=np.int64)
        u[i] = 1
        cols = [grid[:, j] for j in range(G.m)] + [np.full(len(grid), u[j]) for j in range(G.m)]
        img = np.stack([p.evaluate_mod(cols, n) for p in G.mu], axis=1)
        perms.append(img @ weights)
        gens.append(int(u @ weights))
    labels = [tuple(int(x) for x in row) for row in grid]
    render = lambda t: "(" + ",".join(map(str, t)) + ")"
    Q = FiniteGroup.from_right_action(perms, labels, gens=gens, name=f"{G.name}({n})", render=render)
    Q.malcev = G
    Q.modulus = n
    return Q


def reduce_element(Q: FiniteGroup, v) -> int:
    """Index in ``G(n)`` of the reduction of the integer vector ``v``."""
    n = Q.modulus
    idx = 0
    for x in v:
        idx = idx * n + int(x) % n
    return idx


@dataclass
class ChiefReport:
    ok: bool
    order: int
    factor_orders: list
    witness: str | None = None


def verify_chief_factors(Q: FiniteGroup) -> ChiefReport:
    """``G_i(n) / G_{i-1}(n)`` is cyclic of order ``n`` and central, each ``G_i(n)`` normal."""
    G, n = Q.malcev, Q.modulus
    m = G.m
    if Q.order != n ** m:
        return ChiefReport(False, Q.order, [], f"order {Q.order} != n^m")
    grid = np.array(Q.labels, dtype=np.int64)
    prev = None
    factors = []
    for i in range(m + 1):
        mask = ~grid[:, i:].any(axis=1) if i < m else np.ones(Q.order, dtype=bool)
        Gi = Subgroup(Q, mask)
        gen_sub = subgroup_generated(Q, [Q.gens[j] for j in range(i)])
        if gen_sub != Gi:
            return ChiefReport(False, Q.order, factors, f"G_{i}(n) is not generated by e_1..e_{i}")
        if not is_normal(Q, Gi):
            return ChiefReport(False, Q.order, factors, f"G_{i}(n) is not normal")
        if prev is not None:
            factors.append(Gi.order // prev.order)
            # e_i has order n modulo G_{i-1} and the factor is central
            e = Q.gens[i - 1]
            x, k = e, 1
            while not prev.mask[x]:
                x, k = Q.mul(x, e), k + 1
            if k != n or Gi.order // prev.order != n:
                return ChiefReport(False, Q.order, factors, f"factor {i} is not cyclic of order {n}")
            C = Q.commutator_table
            if not prev.mask[C[np.ix_(Gi.members, np.arange(Q.order))]].all():
                return ChiefReport(False, Q.order, factors, f"factor {i} is not central")
        prev = Gi
    return ChiefReport(True, Q.order, factors)


# root densities ------------------------------------------------------------

def root_count(p: IntPolynomial, n: int, cap: int = DEFAULT_ENUM_CAP, block: int = 1 << 20) -> int:
    """``#{v in (Z/n)^m : p(v) = 0 mod n}`` by chunked enumeration."""
    m = p.nvars
    total = n ** m
    if total > cap:
        raise CapExceeded(f"{total} residue vectors exceed cap {cap}")
    if m == 0:
        return int(p.evaluate(()) % n == 0) if p.denominator % n else 0
    # split coordinates into an outer prefix and an inner vectorised block
    inner = m
    while inner > 1 and n ** inner > block:
        inner -= 1
    inner_grid = _residue_grid(inner, n)
    inner_cols = [inner_grid[:, j] for j in range(inner)]
    count = 0
    for prefix in itertools.product(range(n), repeat=m - inner):
        cols = [np.full(1, x, dtype=np.int64) for x in prefix] + inner_cols
        vals = p.evaluate_mod(cols, n)
        count += int(np.count_nonzero(np.broadcast_to(vals, (len(inner_grid),)) == 0))
    return count


def root_density(G: MalcevGroup, p: IntPolynomial, n: int, cap: int = DEFAULT_ENUM_CAP) -> Fraction:
    """Density of the mod-``n`` vanishing locus of ``p`` on coordinates.

    This bounds the image density of the integer roots from above.
    """
    if p.nvars != G.m:
        raise InvalidElement(f"polynomial has {p.nvars} variables, group has {G.m} coordinates")
    _require_coprime(G, n, p.denominator)
    return Fraction(root_count(p, n, cap), n ** G.m)


def commutation_polynomial() -> IntPolynomial:
    """``X2 W3 - X3 W2``: vanishes exactly when two Heisenberg elements commute."""
    return parse_polynomial("X2*W3 - X3*W2", ["X1", "X2", "X3", "W1", "W2", "W3"])


# equations and derivatives ------------------------------------------------

def eval_equation(G: MalcevGroup, w: GroupWord, assignment):
    return evaluate_word(G, w, [tuple(a) for a in assignment])


@dataclass
class GroupMap:
    """A map between groups exposing ``mul``, ``inverse`` and ``identity``."""

    domain: object
    codomain: object
    fn: Callable

    def __call__(self, x):
        return self.fn(x)


def derivative_map(phi: GroupMap, u) -> GroupMap:
    """``x -> phi(x)^-1 phi(x u)``."""
    D, C = phi.domain, phi.codomain
    return GroupMap(D, C, lambda x: C.mul(C.inverse(phi(x)), phi(D.mul(x, u))))


def second_derivative_direct(phi: GroupMap, u, v, x):
    """``d_u d_v phi(x)`` expanded in one formula, for cross-checking nesting."""
    D, C = phi.domain, phi.codomain
    inv = C.inverse
    a = C.mul(inv(phi(x)), phi(D.mul(x, v)))
    b = C.mul(inv(phi(D.mul(x, u))), phi(D.mul(D.mul(x, u), v)))
    return C.mul(inv(a), b)


@dataclass
class DegreeVerdict:
    consistent: bool
    samples: int
    witness: tuple | None = None


def degree_at_most(phi: GroupMap, d: int, samples: int, sampler: Callable, seed: int = 0) -> DegreeVerdict:
    """Refute ``deg phi <= d`` by finding a nontrivial ``(d+1)``-fold derivative.

    ``sampler(rng)`` draws a domain element.  Passing is evidence, not proof.
    """
    rng = np.random.default_rng(seed)
    C = phi.codomain
    for t in range(samples):
        us = [sampler(rng) for _ in range(d + 1)]
        x = sampler(rng)
        f = phi
        for u in us:
            f = derivative_map(f, u)
        val = f(x)
        if val != C.identity:
            return DegreeVerdict(False, t + 1, (tuple(us), x, val))
    return DegreeVerdict(True, samples)


def product_ops(G, H):
    """Direct product of two groups exposing mul/inverse/identity, on pairs."""

    class _Prod:
        identity = (G.identity, H.identity)

        @staticmethod
        def mul(a, b):
            return (G.mul(a[0], b[0]), H.mul(a[1], b[1]))

        @staticmethod
        def inverse(a):
            return (G.inverse(a[0]), H.inverse(a[1]))

    return _Prod()


def dphi_quotient_sequence(G: MalcevGroup, w: GroupWord, moduli: Sequence[int],
                           cap: int = 10 ** 8, order_cap: int = DEFAULT_ORDER_CAP):
    """Exact ``dphi(G(n))`` for each modulus; non-increasing along divisibility chains."""
    from .nildegree import dphi_exact

    out = []
    for n in moduli:
        Q = finite_quotient(G, n, cap=order_cap)
        letters = [Const(reduce_element(Q, t.value)) if isinstance(t, Const) else t for t in w.letters]
        out.append(dphi_exact(Q, GroupWord(w.arity, letters), cap=cap))
    for (n1, d1), (n2, d2) in zip(zip(moduli, out), zip(moduli[1:], out[1:])):
        if n2 % n1 == 0 and d2 > d1:
            raise AssertionError(f"dphi increased from {d1} at n={n1} to {d2} at n={n2}")
    return out


# file format ---------------------------------------------------------------

def parse_malcev_text(text: str, name="G") -> MalcevGroup:
    """Header ``malcev m=<m> n0=auto`` then ``mu[i] = ...`` / ``eps[i] = ...`` lines."""
    lines = [(i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines or not lines[0][1].startswith("malcev"):
        raise ParseError("missing 'malcev m=<m>' header", lines[0][0] if lines else 1)
    hdr_line, hdr = lines[0]
    opts = dict(tok.split("=", 1) for tok in hdr.split()[1:] if "=" in tok)
    try:
        m = int(opts["m"])
    except (KeyError, ValueError):
        raise ParseError("header must give m=<integer>", hdr_line) from None
    n0_opt = opts.get("n0", "auto")
    vnames = [f"v{i}" for i in range(1, m + 1)]
    wnames = [f"w{i}" for i in range(1, m + 1)]
    mu: list = [None] * m
    eps: list = [None] * m
    gens = []
    for lineno, ln in lines[1:]:
        if ln.startswith("gen"):
            body = ln.split("=", 1)[-1] if "=" in ln else ln[3:]
            gens.append(tuple(int(t) for t in body.replace("(", " ").replace(")", " ").replace(",", " ").split()))
            continue
        if "=" not in ln:
            raise ParseError("expected 'mu[i] = ...' or 'eps[i] = ...'", lineno)
        lhs, rhs = (s.strip() for s in ln.split("=", 1))
        kind, _, rest = lhs.partition("[")
        try:
            i = int(rest.rstrip("]")) - 1
        except ValueError:
            raise ParseError(f"bad index in {lhs!r}", lineno) from None
        if not 0 <= i < m:
            raise ParseError(f"index {i + 1} outside 1..{m}", lineno)
        if kind == "mu":
            mu[i] = parse_polynomial(rhs, vnames + wnames, lineno)
        elif kind == "eps":
            eps[i] = parse_polynomial(rhs, vnames + ["n"], lineno)
        else:
            raise ParseError(f"unknown left-hand side {lhs!r}", lineno)
    missing = [f"mu[{i + 1}]" for i, p in enumerate(mu) if p is None] + \
              [f"eps[{i + 1}]" for i, p in enumerate(eps) if p is None]
    if missing:
        raise ParseError("missing definitions: " + ", ".join(missing), hdr_line)
    G = MalcevGroup(m, mu, eps, name=name, generators=gens)
    if n0_opt != "auto":
        given = int(n0_opt)
        if given % G.n0:
            raise ParseError(f"n0={given} is not a multiple of the denominator lcm {G.n0}", hdr_line)
        G.n0 = given
    report = check_malcev_axioms(G)
    if not report.ok:
        raise ParseError(f"group axioms fail: {report.witness}", hdr_line)
    return G


def load_malcev_file(path) -> MalcevGroup:
    path = Path(path)
    return parse_malcev_text(path.read_text(), name=path.stem)


def load_polynomial_file(path):
    return load_polynomial_text(Path(path).read_text())


def load_polynomial_text(text: str):
    """``vars X1 X2 ...`` line followed by one polynomial (may span lines)."""
    names = None
    body = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        if ln.startswith("vars"):
            names = ln[4:].replace(",", " ").split()
            continue
        body.append(ln.split("=", 1)[1] if ln.startswith("poly") and "=" in ln else ln)
    if names is None:
        raise ParseError("missing 'vars' line", 1)
    return parse_polynomial(" ".join(body), names), names
