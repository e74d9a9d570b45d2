"""The Gamma multigraph behind submultiplicativity of dc^k under quotients.

Fix ``G``, a normal ``N``, ``g`` in ``G`` and a coset ``xN``.  Vertices are
tuples ``v = (n_3, .., n_{k+1})`` in ``N^(k-1)``; every ``y`` in ``xN`` with
``[y, g, v] = 1`` gives an edge ``v -> (a_3 n_3 a_3^-1, .., a_{k+1} n_{k+1} a_{k+1}^-1)``
where ``a_i`` is the alpha sequence of ``(y, g, v)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NotNormal, PreconditionFailed, SizeCap
from .group import FiniteGroup, Subgroup, is_normal, quotient, simple_commutator
from .nildegree import dc_k_exact, f_k_count

DEFAULT_VERTEX_CAP = 10 ** 6


def alpha_sequence(G: FiniteGroup, y: int, g: int, ns: Sequence[int]) -> list:
    """``(alpha_3, .., alpha_{k+2})`` for ``ns = (n_3, .., n_{k+1})``."""
    out = [y]
    c = G.commutator(y, g)
    acc = y
    for n in ns:
        acc = G.mul(acc, c)
        out.append(acc)
        c = G.commutator(c, n)
    return out


def main_identity_sides(G: FiniteGroup, z: int, y: int, g: int, ns: Sequence[int]):
    """Both sides of ``[zy, g, n..] = [z, g, n^(a^-1)..]^(a_{k+2}) [y, g, n..]``."""
    alphas = alpha_sequence(G, y, g, ns)
    lhs = simple_commutator(G, [G.mul(z, y), g, *ns])
    moved = [G.conj(n, G.inverse(a)) for n, a in zip(ns, alphas)]
    left = G.conj(simple_commutator(G, [z, g, *moved]), alphas[-1])
    rhs = G.mul(left, simple_commutator(G, [y, g, *ns]))
    return lhs, rhs


def check_main_identity(G: FiniteGroup, z: int, y: int, g: int, ns: Sequence[int]) -> bool:
    lhs, rhs = main_identity_sides(G, z, y, g, ns)
    return lhs == rhs


def coset_order(G: FiniteGroup, N: Subgroup, x: int) -> int:
    o, y = 1, x
    while not N.mask[y]:
        y = G.mul(y, x)
        o += 1
    return o


@dataclass
class Component:
    base: int  # vertex index (lexicographically least tuple)
    vertices: np.ndarray
    period: int
    levels: np.ndarray  # level of each vertex in ``vertices``
    edge_count: int


@dataclass
class GammaGraph:
    group: FiniteGroup
    N: Subgroup
    g: int
    x: int
    k: int
    o: int
    vertex_tuples: np.ndarray  # (V, k-1) element indices
    src: np.ndarray
    dst: np.ndarray
    label: np.ndarray
    components: list = field(default_factory=list)
    comp_of: np.ndarray | None = None
    level_of: np.ndarray | None = None

    @property
    def vertex_count(self):
        return len(self.vertex_tuples)

    @property
    def edge_count(self):
        return len(self.src)

    def vertex_index(self, tup) -> int:
        m = self.N.order
        pos = np.searchsorted(self.N.members, np.asarray(tup, dtype=np.int64))
        idx = 0
        for p in pos:
            idx = idx * m + int(p)
        return idx


def _vertex_tuples(N: Subgroup, k: int) -> np.ndarray:
    m = N.order
    V = m ** (k - 1)
    idx = np.arange(V, dtype=np.int64)
    out = np.empty((V, k - 1), dtype=np.int64)
    for c in range(k - 2, -1, -1):
        out[:, c] = N.members[idx % m]
        idx //= m
    return out


def _tuples_to_index(N: Subgroup, tuples: np.ndarray) -> np.ndarray:
    m = N.order
    pos = np.searchsorted(N.members, tuples)
    idx = np.zeros(len(tuples), dtype=np.int64)
    for c in range(tuples.shape[1]):
        idx = idx * m + pos[:, c]
    return idx


def _chain(G: FiniteGroup, y: int, g: int, verts: np.ndarray):
    """Commutator values ``[y, g, v]`` and alpha-conjugated targets for all ``v``."""
    t, inv, C = G.table, G.inv, G.commutator_table
    V = len(verts)
    c = np.full(V, C[y, g], dtype=np.int64)
    acc = np.full(V, y, dtype=np.int64)
    targets = np.empty_like(verts)
    for col in range(verts.shape[1]):
        n = verts[:, col]
        targets[:, col] = t[t[acc, n], inv[acc]]
        acc = t[acc, c]
        c = C[c, n]
    return c, targets


def build_gamma(G: FiniteGroup, N: Subgroup, g: int, x: int, k: int,
                vertex_cap: int = DEFAULT_VERTEX_CAP, tree: str = "bfs") -> GammaGraph:
    """Build Gamma for the coset ``xN`` and compute periods and levels."""
    if k < 1:
        raise PreconditionFailed("k must be >= 1")
    if not is_normal(G, N):
        raise NotNormal("N must be normal in G")
    V = N.order ** (k - 1)
    if V > vertex_cap:
        raise SizeCap(f"|N|^(k-1) = {V} exceeds vertex cap {vertex_cap}")
    G.require_table()
    verts = _vertex_tuples(N, k)
    coset = G.table[x, N.members]
    src, dst, lab = [], [], []
    for y in coset:
        c, targets = _chain(G, int(y), g, verts)
        hit = np.flatnonzero(c == 0)
        if len(hit):
            src.append(hit)
            dst.append(_tuples_to_index(N, targets[hit]))
            lab.append(np.full(len(hit), int(y), dtype=np.int64))
    cat = lambda parts: np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    gam = GammaGraph(G, N, g, x, k, coset_order(G, N, x), verts, cat(src), cat(dst), cat(lab))
    _components(gam, tree)
    return gam


def _potentials(V, src, dst, tree):
    """Spanning-forest potentials; roots are the least vertex of each component."""
    # undirected adjacency with signed steps
    a = np.concatenate([src, dst])
    b = np.concatenate([dst, src])
    step = np.concatenate([np.ones(len(src), dtype=np.int64), -np.ones(len(src), dtype=np.int64)])
    order = np.argsort(a, kind="stable")
    a, b, step = a[order], b[order], step[order]
    indptr = np.searchsorted(a, np.arange(V + 1))
    comp = np.full(V, -1, dtype=np.int64)
    pot = np.zeros(V, dtype=np.int64)
    roots = []
    for root in range(V):
        if comp[root] >= 0:
            continue
        cid = len(roots)
        roots.append(root)
        comp[root] = cid
        if indptr[root] == indptr[root + 1]:
            continue
        if tree == "bfs":
            frontier = np.array([root], dtype=np.int64)
            while len(frontier):
                starts, ends = indptr[frontier], indptr[frontier + 1]
                counts = ends - starts
                if counts.sum() == 0:
                    break
                owner = np.repeat(frontier, counts)
                eidx = np.repeat(starts - np.cumsum(np.concatenate([[0], counts[:-1]])), counts) \
                    + np.arange(counts.sum())
                nbr = b[eidx]
                fresh = comp[nbr] < 0
                nbr, owner, st = nbr[fresh], owner[fresh], step[eidx][fresh]
                nbr, first = np.unique(nbr, return_index=True)
                comp[nbr] = cid
                pot[nbr] = pot[owner[first]] + st[first]
                frontier = nbr
        else:
            stack = [root]
            while stack:
                u = stack.pop()
                for e in range(indptr[u], indptr[u + 1]):
                    w = b[e]
                    if comp[w] < 0:
                        comp[w] = cid
                        pot[w] = pot[u] + step[e]
                        stack.append(w)
    return comp, pot, roots


def _components(gam: GammaGraph, tree: str):
    V = gam.vertex_count
    comp, pot, roots = _potentials(V, gam.src, gam.dst, tree)
    ncomp = len(roots)
    # period: gcd of o and the directed length of every fundamental cycle
    period = np.full(ncomp, gam.o, dtype=np.int64)
    if len(gam.src):
        cyc = np.abs(pot[gam.src] + 1 - pot[gam.dst])
        ec = comp[gam.src]
        order = np.argsort(ec, kind="stable")
        ec, cyc = ec[order], cyc[order]
        bounds = np.flatnonzero(np.diff(ec)) + 1
        for chunk_c, chunk in zip(np.split(ec, bounds), np.split(cyc, bounds)):
            cid = chunk_c[0]
            period[cid] = math.gcd(int(period[cid]), int(np.gcd.reduce(chunk)))
        edge_counts = np.bincount(comp[gam.src], minlength=ncomp)
    else:
        edge_counts = np.zeros(ncomp, dtype=np.int64)
    level = pot % period[comp]
    gam.comp_of = comp
    gam.level_of = level
    members = np.argsort(comp, kind="stable")
    splits = np.searchsorted(comp[members], np.arange(1, ncomp))
    gam.components = [
        Component(int(roots[c]), vs, int(period[c]), level[vs], int(edge_counts[c]))
        for c, vs in enumerate(np.split(members, splits))
    ]


def coset_counts(gam: GammaGraph) -> np.ndarray:
    """``F[i, v] = f_k(x^i N, g, v)`` for ``i`` in ``0 .. o-1``."""
    G, N = gam.group, gam.N
    F = np.zeros((gam.o, gam.vertex_count), dtype=np.int64)
    xi = 0
    for i in range(gam.o):
        for y in G.table[xi, N.members]:
            c, _ = _chain(G, int(y), gam.g, gam.vertex_tuples)
            F[i] += c == 0
        xi = G.mul(xi, gam.x)
    return F


@dataclass
class CheckResult:
    ok: bool
    witness: str | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def level_histograms(gam: GammaGraph, F: np.ndarray | None = None):
    """Per component: ``(r_j, h_j)`` with ``h_j`` read off at any vertex and coset."""
    F = coset_counts(gam) if F is None else F
    out = []
    for comp in gam.components:
        d = comp.period
        r = np.bincount(comp.levels, minlength=d)
        h = np.full(d, -1, dtype=np.int64)
        v0, l0 = comp.vertices[0], comp.levels[0]
        for i in range(d):
            h[(l0 + i) % d] = F[i % gam.o, v0]
        out.append((r.tolist(), h.tolist()))
    return out


def check_period_property(gam: GammaGraph, F: np.ndarray | None = None) -> CheckResult:
    """``f_k(x^i N, g, v)`` depends only on ``L(v) + i`` mod ``d``."""
    F = coset_counts(gam) if F is None else F
    for ci, comp in enumerate(gam.components):
        d = comp.period
        if gam.o % d:
            return CheckResult(False, f"component {ci}: period {d} does not divide o={gam.o}")
        seen = {}
        for i in range(gam.o):
            keys = (comp.levels + i) % d
            vals = F[i, comp.vertices]
            for key in range(d):
                sel = vals[keys == key]
                if len(sel) == 0:
                    continue
                if sel.min() != sel.max() or seen.setdefault(key, int(sel[0])) != sel[0]:
                    return CheckResult(False, f"component {ci}, residue {key}, coset power {i}")
    return CheckResult(True)


def check_adjacent_property(gam: GammaGraph, F: np.ndarray | None = None) -> CheckResult:
    """``r_j h_{j+1} = r_{j+1} h_j`` on every component."""
    for ci, (r, h) in enumerate(level_histograms(gam, F)):
        d = len(r)
        for j in range(d):
            if r[j] * h[(j + 1) % d] != r[(j + 1) % d] * h[j]:
                return CheckResult(False, f"component {ci}, j={j}: r={r}, h={h}")
    return CheckResult(True)


def check_rearrangement_lemma(r: Sequence[int], h: Sequence[int]) -> bool:
    """``sum r_j h_{j+1} <= sum r_j h_j`` for cyclically proportional sequences."""
    d = len(r)
    if d < 1 or len(h) != d:
        raise PreconditionFailed("r and h must have the same positive length")
    if any(v < 0 for v in list(r) + list(h)):
        raise PreconditionFailed("entries must be non-negative")
    for j in range(d):
        if r[j] * h[(j + 1) % d] != r[(j + 1) % d] * h[j]:
            raise PreconditionFailed(f"r_j h_(j+1) != r_(j+1) h_j at j={j}")
    lhs = sum(r[j] * h[(j + 1) % d] for j in range(d))
    rhs = sum(r[j] * h[j] for j in range(d))
    return lhs <= rhs


def check_edges(gam: GammaGraph) -> CheckResult:
    """Every stored edge satisfies the defining condition, target included."""
    G = gam.group
    for e in range(gam.edge_count):
        v = gam.vertex_tuples[gam.src[e]].tolist()
        y = int(gam.label[e])
        if simple_commutator(G, [y, gam.g, *v]) != 0:
            return CheckResult(False, f"edge {e}: commutator is not trivial")
        alphas = alpha_sequence(G, y, gam.g, v)
        w = [G.conj(n, G.inverse(a)) for n, a in zip(v, alphas)]
        if gam.vertex_index(w) != gam.dst[e]:
            return CheckResult(False, f"edge {e}: wrong target")
    return CheckResult(True)


def check_theta_bijection(gam: GammaGraph) -> CheckResult:
    """theta: (y, v) -> (y^-1, alpha-conjugated v) is a bijection from
    ``xN x N^(k-1)`` to ``x^-1 N x N^(k-1)`` that matches solutions and
    raises the level of solutions by one."""
    G, N = gam.group, gam.N
    inv_coset_mask = np.zeros(G.order, dtype=bool)
    inv_coset_mask[G.table[G.inverse(gam.x), N.members]] = True
    V = gam.vertex_count
    images = set()
    for y in G.table[gam.x, N.members]:
        y = int(y)
        yi = G.inverse(y)
        if not inv_coset_mask[yi]:
            return CheckResult(False, f"y^-1 not in x^-1 N for y={y}")
        c, targets = _chain(G, y, gam.g, gam.vertex_tuples)
        w = _tuples_to_index(N, targets)
        if len(np.unique(w)) != V:
            return CheckResult(False, f"theta is not injective on the fibre over y={y}")
        images.update((yi * V + w).tolist())
        c2, _ = _chain(G, yi, gam.g, targets)
        if not np.array_equal(c == 0, c2 == 0):
            return CheckResult(False, f"theta does not match solutions for y={y}")
        sol = np.flatnonzero(c == 0)
        same = gam.comp_of[sol] == gam.comp_of[w[sol]]
        if not same.all():
            return CheckResult(False, "edge endpoints in different components")
        d = np.array([gam.components[q].period for q in gam.comp_of[sol]], dtype=np.int64)
        if len(sol) and not np.all((gam.level_of[w[sol]] - gam.level_of[sol] - 1) % d == 0):
            return CheckResult(False, f"theta does not raise the level by one for y={y}")
    if len(images) != N.order * V:
        return CheckResult(False, "theta is not injective")
    return CheckResult(True)


def gallagher_inequality(gam: GammaGraph, F: np.ndarray | None = None) -> CheckResult:
    """``f_k(xN, g, N..N) <= f_k(N, g, N..N)``, also per component."""
    F = coset_counts(gam) if F is None else F
    one = 1 % gam.o
    for ci, comp in enumerate(gam.components):
        a = int(F[one, comp.vertices].sum())
        b = int(F[0, comp.vertices].sum())
        if a > b:
            return CheckResult(False, f"component {ci}: {a} > {b}")
    lhs, rhs = int(F[one].sum()), int(F[0].sum())
    return CheckResult(lhs <= rhs, None if lhs <= rhs else f"{lhs} > {rhs}", {"lhs": lhs, "rhs": rhs})


def levels_agree(gam: GammaGraph) -> bool:
    """Levels and periods from a DFS forest agree with the BFS ones."""
    other = GammaGraph(gam.group, gam.N, gam.g, gam.x, gam.k, gam.o, gam.vertex_tuples,
                       gam.src, gam.dst, gam.label)
    _components(other, "dfs")
    if [c.period for c in other.components] != [c.period for c in gam.components]:
        return False
    return bool(np.array_equal(other.level_of, gam.level_of))


def lemma_frN(G: FiniteGroup, N: Subgroup, k: int, cosets: Sequence[int] | None = None) -> CheckResult:
    """``f_k(x_1 N, .., x_{k+1} N) <= f_k(N, .., N)`` for all coset tuples."""
    import itertools

    Q = quotient(G, N)
    reps = Q.section if cosets is None else cosets
    base = f_k_count(G, [N] * (k + 1))
    for tup in itertools.product(reps, repeat=k + 1):
        sets = [G.table[int(x), N.members] for x in tup]
        val = f_k_count(G, sets)
        if val > base:
            return CheckResult(False, f"coset tuple {tup}: {val} > {base}")
    return CheckResult(True, details={"f_N": base})


@dataclass
class SubmultReport:
    lhs: Fraction
    rhs: Fraction
    dc_N: Fraction
    dc_Q: Fraction

    @property
    def ok(self):
        return self.lhs <= self.rhs


def verify_submultiplicativity(G: FiniteGroup, N: Subgroup, k: int) -> SubmultReport:
    """``dc^k(G) <= dc^k(N) dc^k(G/N)``, all exact."""
    if not is_normal(G, N):
        raise NotNormal("N must be normal in G")
    dN = dc_k_exact(N.as_group, k)
    dQ = dc_k_exact(quotient(G, N).quotient, k)
    return SubmultReport(dc_k_exact(G, k), dN * dQ, dN, dQ)


@dataclass
class GammaAudit:
    instances: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def full_audit(G: FiniteGroup, N: Subgroup, k: int, vertex_cap=DEFAULT_VERTEX_CAP) -> GammaAudit:
    """Run every Gamma check for all ``g`` in ``G`` and all cosets ``xN``."""
    audit = GammaAudit()
    reps = quotient(G, N).section
    for g in range(G.order):
        for x in reps:
            gam = build_gamma(G, N, g, int(x), k, vertex_cap)
            F = coset_counts(gam)
            audit.instances += 1
            checks = {
                "period": check_period_property(gam, F),
                "adjacent": check_adjacent_property(gam, F),
                "gallagher": gallagher_inequality(gam, F),
                "theta": check_theta_bijection(gam),
                "edges": check_edges(gam),
            }
            for name, res in checks.items():
                if not res.ok:
                    audit.failures.append((g, int(x), name, res.witness))
            if not levels_agree(gam):
                audit.failures.append((g, int(x), "levels", "BFS and DFS levels differ"))
    return audit
