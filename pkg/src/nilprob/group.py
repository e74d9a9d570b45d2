"""Exact finite-group arithmetic on indexed elements.

Elements of a :class:`FiniteGroup` are the integers ``0 .. order-1`` with the
identity at index 0.  Multiplication is a Cayley table lookup when the table is
materialised and a walk along generator words otherwise.

Conventions used throughout the package: ``[x, y] = x^-1 y^-1 x y``,
``x^y = y^-1 x y``, simple commutators are left-nested, and permutations
compose left to right (``x*y`` applies ``x`` first).
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import ArityMismatch, CapExceeded, InvalidElement, NotNormal, NotPGroup

DEFAULT_ORDER_CAP = 200_000
DEFAULT_TABLE_CAP = 20_000
EXHAUSTIVE_AXIOM_LIMIT = 512
TABLE_DTYPE = np.int32  # halves memory near the table cap


class FiniteGroup:
    """A finite group on element indices ``0 .. order-1`` (identity 0).

    Build one with :func:`close_generators`, :meth:`from_table` or
    :meth:`from_right_action` rather than calling the constructor directly.
    """

    def __init__(self, labels, gen_perms, tree_parent, tree_gen, *, gens, table=None,
                 name="G", render=None, table_cap=DEFAULT_TABLE_CAP):
        self.labels = list(labels)
        self.order = len(self.labels)
        self.name = name
        self.gens = list(gens)
        self._render = render or str
        self._gen_perms = gen_perms  # right-regular permutation per generator
        self._tree_parent = tree_parent
        self._tree_gen = tree_gen
        self._memo: dict[tuple[int, int], int] = {}
        self.table_cap = table_cap
        if table is None and self.order <= table_cap:
            table = _table_from_tree(gen_perms, tree_parent, tree_gen)
        self.table = table
        if table is not None:
            self.inv = np.argmax(table == 0, axis=1).astype(np.int64) if self.order <= 4096 \
                else _inverses_chunked(table)
        else:
            self.inv = self._inverses_from_words()

    # construction -------------------------------------------------------

    @classmethod
    def from_right_action(cls, gen_perms, labels, *, gens=None, name="G", render=None,
                          table_cap=DEFAULT_TABLE_CAP):
        """Group from right-regular permutations of a generating set.

        ``gen_perms[s][a]`` is the index of ``a * s``.  The indexing of
        ``labels`` is kept as is; index 0 must be the identity.
        """
        gen_perms = [np.asarray(p, dtype=np.int64) for p in gen_perms]
        n = len(labels)
        parent = np.full(n, -1, dtype=np.int64)
        pgen = np.full(n, -1, dtype=np.int64)
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            a = queue.popleft()
            for s, perm in enumerate(gen_perms):
                b = int(perm[a])
                if not seen[b]:
                    seen[b] = True
                    parent[b] = a
                    pgen[b] = s
                    queue.append(b)
        if not seen.all():
            raise InvalidElement("generators do not generate the whole element set")
        if gens is None:
            gens = [int(p[0]) for p in gen_perms]
        return cls(labels, gen_perms, parent, pgen, gens=gens, name=name, render=render,
                   table_cap=table_cap)

    @classmethod
    def from_table(cls, table, labels=None, *, name="G", render=None, check=True):
        """Group from an explicit multiplication table (any identity position)."""
        table = np.asarray(table, dtype=np.int64)
        n = table.shape[0]
        if table.shape != (n, n) or n == 0:
            raise InvalidElement("multiplication table must be a non-empty square array")
        if table.min() < 0 or table.max() >= n:
            raise InvalidElement("table entries out of range")
        ids = [e for e in range(n) if np.array_equal(table[e], np.arange(n))
               and np.array_equal(table[:, e], np.arange(n))]
        if not ids:
            raise InvalidElement("table has no two-sided identity")
        e = ids[0]
        order = [e] + [i for i in range(n) if i != e]
        pos = np.empty(n, dtype=np.int64)
        pos[order] = np.arange(n)
        new = pos[table[np.ix_(order, order)]].astype(TABLE_DTYPE)
        labels = list(range(n)) if labels is None else list(labels)
        labels = [labels[i] for i in order]
        if check:
            _check_table_axioms(new)
        gens = list(range(1, n))
        perms = [new[:, s] for s in gens]
        parent = np.zeros(n, dtype=np.int64)
        parent[0] = -1
        pgen = np.arange(-1, n - 1, dtype=np.int64)
        return cls(labels, perms, parent, pgen, gens=gens, table=new, name=name, render=render)

    # element access -----------------------------------------------------

    identity = 0

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def elements(self):
        return range(self.order)

    def mul(self, a, b):
        if self.table is not None:
            return int(self.table[a, b])
        key = (a, b)
        hit = self._memo.get(key)
        if hit is None:
            hit = a
            for s in self._word(b):
                hit = int(self._gen_perms[s][hit])
            self._memo[key] = hit
        return hit

    def inverse(self, a):
        return int(self.inv[a])

    def power(self, a, e):
        if e < 0:
            a, e = self.inverse(a), -e
        out, base = 0, a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def conj(self, a, b):
        """``a^b = b^-1 a b``."""
        return self.mul(self.mul(self.inverse(b), a), b)

    def commutator(self, a, b):
        return self.mul(self.mul(self.inverse(a), self.inverse(b)), self.mul(a, b))

    def element_order(self, a):
        k, x = 1, a
        while x != 0:
            x = self.mul(x, a)
            k += 1
        return k

    def render(self, a):
        return self._render(self.labels[a])

    @cached_property
    def _lookup(self):
        return {self.render(i): i for i in range(self.order)}

    def lookup(self, text):
        """Element index from its rendered label, or ``#<index>``."""
        if text.startswith("#"):
            i = int(text[1:])
            if not 0 <= i < self.order:
                raise InvalidElement(f"element index {i} out of range")
            return i
        try:
            return self._lookup[text]
        except KeyError:
            raise InvalidElement(f"unknown element label {text!r} in {self.name}") from None

    def require_table(self):
        if self.table is None:
            raise CapExceeded(
                f"{self.name} has order {self.order} > table cap {self.table_cap}; "
                "this operation needs a materialised Cayley table")
        return self.table

    @cached_property
    def commutator_table(self):
        """``C[a, b] = [a, b]`` for all pairs."""
        t = self.require_table()
        inv = self.inv
        left = t[inv[:, None], inv[None, :]]
        return t[left, t]

    def is_abelian(self):
        t = self.require_table()
        return bool(np.array_equal(t, t.T))

    # internals ----------------------------------------------------------

    def _word(self, b):
        word = []
        while b != 0:
            word.append(int(self._tree_gen[b]))
            b = int(self._tree_parent[b])
        word.reverse()
        return word

    def _inverses_from_words(self):
        inv_perms = []
        for perm in self._gen_perms:
            ip = np.empty_like(perm)
            ip[perm] = np.arange(len(perm))
            inv_perms.append(ip)
        out = np.empty(self.order, dtype=np.int64)
        for b in range(self.order):
            x = 0
            for s in reversed(self._word(b)):
                x = int(inv_perms[s][x])
            # x * b = 0 by construction
            out[b] = x
        return out


def _table_from_tree(gen_perms, parent, pgen):
    n = len(parent)
    table = np.empty((n, n), dtype=TABLE_DTYPE)
    table[:, 0] = np.arange(n)
    order = np.argsort(_depths(parent), kind="stable")
    for b in order:
        if b == 0:
            continue
        # a*b = (a*parent(b))*s
        table[:, b] = gen_perms[pgen[b]][table[:, parent[b]]]
    return table


def _depths(parent):
    n = len(parent)
    depth = np.full(n, -1, dtype=np.int64)
    depth[0] = 0
    for i in range(n):
        chain = []
        j = i
        while depth[j] < 0:
            chain.append(j)
            j = parent[j]
        d = depth[j]
        for c in reversed(chain):
            d += 1
            depth[c] = d
    return depth


def _inverses_chunked(table, chunk=1024):
    n = table.shape[0]
    out = np.empty(n, dtype=np.int64)
    for lo in range(0, n, chunk):
        out[lo:lo + chunk] = np.argmax(table[lo:lo + chunk] == 0, axis=1)
    return out


def _check_table_axioms(table, rng_seed=0, samples=200_000):
    n = table.shape[0]
    if n <= EXHAUSTIVE_AXIOM_LIMIT:
        for a in range(n):
            # (a b) c == a (b c) for all b, c
            if not np.array_equal(table[table[a]], table[a][table]):
                raise InvalidElement(f"multiplication is not associative (witness a={a})")
    else:
        rng = np.random.default_rng(rng_seed)
        a, b, c = rng.integers(0, n, size=(3, samples))
        if not np.array_equal(table[table[a, b], c], table[a, table[b, c]]):
            raise InvalidElement("multiplication is not associative on sampled triples")
    if not np.all((table == 0).sum(axis=1) == 1):
        raise InvalidElement("some element has no unique inverse")
    for row in table:
        if len(np.unique(row)) != n:
            raise InvalidElement("table rows are not permutations")


def close_generators(gens: Sequence[Hashable], mul: Callable, identity: Hashable, *,
                     inv: Callable | None = None, cap: int = DEFAULT_ORDER_CAP,
                     table_cap: int = DEFAULT_TABLE_CAP, name="G", render=None) -> FiniteGroup:
    """Close ``gens`` under ``mul`` breadth-first from ``identity``.

    Elements are indexed in BFS order (identity first, ties broken by
    generator order).  ``mul`` must accept and return hashable elements.
    """
    gens = list(dict.fromkeys(gens))  # drop repeats, keep order
    if inv is not None:
        for g in gens:
            if _safe(mul, g, inv(g)) != identity:
                raise InvalidElement(f"inv rule is not an inverse for {g!r}")
    labels = [identity]
    index = {identity: 0}
    perms: list[list[int]] = [[] for _ in gens]
    i = 0
    while i < len(labels):
        a = labels[i]
        for s, g in enumerate(gens):
            b = _safe(mul, a, g)
            j = index.get(b)
            if j is None:
                j = len(labels)
                if j >= cap:
                    raise CapExceeded(f"closure exceeds order cap {cap}")
                index[b] = j
                labels.append(b)
            perms[s].append(j)
        i += 1
    gen_idx = [index[g] for g in gens]
    return FiniteGroup.from_right_action(perms, labels, gens=gen_idx, name=name, render=render,
                                         table_cap=table_cap)


def _safe(mul, a, b):
    try:
        out = mul(a, b)
    except (KeyError, IndexError, ValueError, TypeError) as exc:
        raise InvalidElement(f"multiplication rule failed on {a!r} * {b!r}: {exc}") from exc
    if out is None:
        raise InvalidElement(f"multiplication rule undefined on {a!r} * {b!r}")
    return out


def check_group_axioms(G: FiniteGroup, samples=100_000, seed=0):
    """Raise :class:`InvalidElement` if ``G`` violates a group axiom."""
    t = G.require_table()
    if not (np.array_equal(t[0], np.arange(G.order)) and np.array_equal(t[:, 0], np.arange(G.order))):
        raise InvalidElement("index 0 is not a two-sided identity")
    _check_table_axioms(t, rng_seed=seed, samples=samples)
    inv = G.inv
    if not np.array_equal(inv[inv], np.arange(G.order)):
        raise InvalidElement("inv(inv(x)) != x")
    return True


# ---------------------------------------------------------------------------
# subgroups


class Subgroup:
    """A subgroup of ``parent`` stored as sorted member indices plus a mask."""

    def __init__(self, parent: FiniteGroup, mask: np.ndarray, gens=None):
        self.parent = parent
        self.mask = np.asarray(mask, dtype=bool)
        self.members = np.flatnonzero(self.mask)
        self.gens = list(gens) if gens is not None else None

    @property
    def order(self):
        return len(self.members)

    def __len__(self):
        return self.order

    def __contains__(self, g):
        return bool(self.mask[g])

    def __eq__(self, other):
        return isinstance(other, Subgroup) and other.parent is self.parent \
            and np.array_equal(other.mask, self.mask)

    def __hash__(self):
        return hash(self.mask.tobytes())

    def __le__(self, other):
        return bool(np.all(other.mask[self.members]))

    def __repr__(self):
        return f"Subgroup(order={self.order} of {self.parent.name})"

    @property
    def index(self):
        return self.parent.order // self.order

    def is_trivial(self):
        return self.order == 1

    @cached_property
    def as_group(self) -> FiniteGroup:
        """This subgroup as a standalone group (members keep their order)."""
        G = self.parent
        t = G.require_table()
        pos = np.full(G.order, -1, dtype=np.int64)
        pos[self.members] = np.arange(self.order)
        sub = pos[t[np.ix_(self.members, self.members)]]
        labels = [G.labels[i] for i in self.members]
        H = FiniteGroup.from_table(sub, labels, name=f"{G.name}:sub{self.order}",
                                   render=G._render, check=False)
        H.embedding = self.members.copy()
        return H


def subgroup_generated(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    t = G.require_table()
    gens = np.unique(np.asarray(list(gens), dtype=np.int64))
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    frontier = np.array([0], dtype=np.int64)
    gens = gens[gens != 0]
    while len(frontier) and len(gens):
        new = np.unique(t[np.ix_(frontier, gens)].ravel())
        new = new[~mask[new]]
        mask[new] = True
        frontier = new
    return Subgroup(G, mask, gens=gens.tolist())


def whole(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, np.ones(G.order, dtype=bool), gens=G.gens)


def trivial(G: FiniteGroup) -> Subgroup:
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    return Subgroup(G, mask, gens=[])


def subgroup_from_mask(G: FiniteGroup, mask, check=True) -> Subgroup:
    H = Subgroup(G, mask)
    if check:
        t = G.require_table()
        m = H.members
        if not H.mask[0] or not np.all(H.mask[t[np.ix_(m, m)]]) or not np.all(H.mask[G.inv[m]]):
            raise InvalidElement("element set is not a subgroup")
    return H


def is_normal(G: FiniteGroup, H: Subgroup) -> bool:
    t = G.require_table()
    gens = G.gens or range(G.order)
    for g in gens:
        conj = t[t[G.inv[g], H.members], g]
        if not np.all(H.mask[conj]):
            return False
    return True


def normal_closure(G: FiniteGroup, elems: Iterable[int]) -> Subgroup:
    t = G.require_table()
    elems = list(elems)
    conj_all = t[t[G.inv[:, None], np.asarray(elems, dtype=np.int64)[None, :]], np.arange(G.order)[:, None]] \
        if elems else np.zeros((0,), dtype=np.int64)
    return subgroup_generated(G, np.unique(conj_all))


def product_of_subgroups(A: Subgroup, B: Subgroup) -> Subgroup:
    """``AB`` as a subgroup (valid when one factor normalises the other)."""
    G = A.parent
    t = G.require_table()
    mask = np.zeros(G.order, dtype=bool)
    mask[np.unique(t[np.ix_(A.members, B.members)])] = True
    return Subgroup(G, mask)


def intersection(A: Subgroup, B: Subgroup) -> Subgroup:
    return Subgroup(A.parent, A.mask & B.mask)


def commutator_subgroup(G: FiniteGroup, A: Subgroup, B: Subgroup) -> Subgroup:
    """``[A, B]``: the subgroup generated by all ``[a, b]``."""
    C = G.commutator_table
    return subgroup_generated(G, np.unique(C[np.ix_(A.members, B.members)]))


def centralizer(G: FiniteGroup, g: int) -> Subgroup:
    t = G.require_table()
    return Subgroup(G, t[g, :] == t[:, g])


def center(G: FiniteGroup) -> Subgroup:
    t = G.require_table()
    gens = G.gens or list(range(G.order))
    mask = np.ones(G.order, dtype=bool)
    for s in gens:
        mask &= t[:, s] == t[s, :]
    return Subgroup(G, mask)


def derived_subgroup(G: FiniteGroup) -> Subgroup:
    W = whole(G)
    return commutator_subgroup(G, W, W)


def lower_central_series(G: FiniteGroup, H: Subgroup | None = None, max_len=10_000):
    """``[gamma_1(H), gamma_2(H), ...]`` until it stabilises."""
    H = whole(G) if H is None else H
    series = [H]
    while len(series) < max_len:
        nxt = commutator_subgroup(G, series[-1], H)
        if nxt == series[-1]:
            break
        series.append(nxt)
    return series


def upper_central_series(G: FiniteGroup):
    C = G.commutator_table
    series = [trivial(G)]
    while True:
        mask = series[-1].mask
        nxt = np.all(mask[C], axis=1)
        if np.array_equal(nxt, mask):
            break
        series.append(Subgroup(G, nxt))
    return series


def nilpotency_class(G: FiniteGroup, H: Subgroup | None = None):
    """Least ``c`` with ``gamma_{c+1}`` trivial, or ``None`` when not nilpotent."""
    lower = lower_central_series(G, H)
    if not lower[-1].is_trivial():
        return None
    return len(lower) - 1


def central_series(G: FiniteGroup):
    """``(lower, upper, class)`` with ``class`` ``None`` for non-nilpotent groups."""
    lower = lower_central_series(G)
    upper = upper_central_series(G)
    cls = len(lower) - 1 if lower[-1].is_trivial() else None
    return lower, upper, cls


def is_k_step_nilpotent(G: FiniteGroup, k: int, H: Subgroup | None = None) -> bool:
    """Whether every simple commutator of weight ``k+1`` in ``H`` is trivial."""
    C = G.commutator_table
    H = whole(G) if H is None else H
    vals = H.members
    for _ in range(k):
        vals = np.unique(C[np.ix_(vals, H.members)])
        if len(vals) == 1 and vals[0] == 0:
            return True
    return len(vals) == 1 and vals[0] == 0


# ---------------------------------------------------------------------------
# quotients


@dataclass
class QuotientData:
    quotient: FiniteGroup
    projection: np.ndarray  # parent index -> quotient index
    section: np.ndarray  # quotient index -> least coset representative
    normal: Subgroup


def quotient(G: FiniteGroup, N: Subgroup) -> QuotientData:
    """``G/N`` on left cosets ``xN`` ordered by least representative."""
    if N.parent is not G:
        raise NotNormal("subgroup belongs to a different group")
    if not is_normal(G, N):
        raise NotNormal(f"subgroup of order {N.order} is not normal in {G.name}")
    t = G.require_table()
    proj = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for x in range(G.order):
        if proj[x] < 0:
            proj[t[x, N.members]] = len(reps)
            reps.append(x)
    section = np.asarray(reps, dtype=np.int64)
    qt = proj[t[np.ix_(section, section)]]
    labels = [tuple(sorted(G.render(i) for i in t[r, N.members][:4])) for r in section]
    Q = FiniteGroup.from_table(qt, labels, name=f"{G.name}/{N.order}", check=False,
                               render=lambda lab: "{" + "|".join(lab) + ("|..}" if N.order > 4 else "}"))
    return QuotientData(Q, proj, section, N)


def direct_product(G: FiniteGroup, H: FiniteGroup, name=None) -> FiniteGroup:
    tg, th = G.require_table(), H.require_table()
    n, m = G.order, H.order
    # index (a, b) -> a*m + b
    a = np.arange(n * m) // m
    b = np.arange(n * m) % m
    table = tg[a[:, None], a[None, :]].astype(np.int64) * m + th[b[:, None], b[None, :]]
    labels = [(G.labels[i], H.labels[j]) for i in range(n) for j in range(m)]
    rg, rh = G._render, H._render
    return FiniteGroup.from_table(table, labels, name=name or f"{G.name}x{H.name}", check=False,
                                  render=lambda lab: f"<{rg(lab[0])};{rh(lab[1])}>")


def normal_subgroups(G: FiniteGroup, cap=100_000) -> list[Subgroup]:
    """All normal subgroups, as joins of normal closures of single elements."""
    closures: dict[bytes, Subgroup] = {}
    done = np.zeros(G.order, dtype=bool)
    for g in range(G.order):
        if done[g]:
            continue
        N = normal_closure(G, [g])
        # every conjugate of g has the same normal closure
        t = G.require_table()
        cls = np.unique(t[t[G.inv, g], np.arange(G.order)])
        done[cls] = True
        closures.setdefault(N.mask.tobytes(), N)
    atoms = list(closures.values())
    found = dict(closures)
    queue = deque(atoms)
    while queue:
        A = queue.popleft()
        for B in atoms:
            if B <= A:
                continue
            J = product_of_subgroups(A, B)
            key = J.mask.tobytes()
            if key not in found:
                found[key] = J
                queue.append(J)
                if len(found) > cap:
                    raise CapExceeded("too many normal subgroups")
    return sorted(found.values(), key=lambda S: (S.order, S.members.tolist()))


# ---------------------------------------------------------------------------
# maximal subgroups of p-groups


def _is_prime_power(n, p):
    while n % p == 0:
        n //= p
    return n == 1


def frattini_subgroup_pgroup(G: FiniteGroup, p: int) -> Subgroup:
    t = G.require_table()
    powers = np.arange(G.order)
    for _ in range(p - 1):
        powers = t[powers, np.arange(G.order)]
    D = derived_subgroup(G)
    return subgroup_generated(G, np.union1d(D.members, np.unique(powers)))


def maximal_subgroups_pgroup(G: FiniteGroup, p: int) -> list[Subgroup]:
    """All index-``p`` subgroups of a ``p``-group.

    They are the preimages of hyperplanes of the Frattini quotient
    ``G/[G,G]G^p`` viewed as an ``F_p``-vector space.
    """
    if not _is_prime_power(G.order, p):
        raise NotPGroup(f"order {G.order} is not a power of {p}")
    if G.order == 1:
        return []
    Phi = frattini_subgroup_pgroup(G, p)
    # greedy basis of G/Phi
    basis = []
    span = Phi
    for g in range(G.order):
        if not span.mask[g]:
            basis.append(g)
            # Phi is normal and contains G', so span*<g> is a subgroup
            span = product_of_subgroups(span, subgroup_generated(G, [g]))
        if span.order == G.order:
            break
    d = len(basis)
    coords = _frattini_coordinates(G, Phi, basis, p)
    out = []
    for f in _projective_points(d, p):
        vals = (coords @ np.asarray(f, dtype=np.int64)) % p
        out.append(Subgroup(G, vals == 0))
    return out


def _frattini_coordinates(G, Phi, basis, p):
    t = G.require_table()
    coords = np.full((G.order, len(basis)), -1, dtype=np.int64)
    for exps in itertools.product(range(p), repeat=len(basis)):
        x = 0
        for b, e in zip(basis, exps):
            x = G.mul(x, G.power(b, e))
        coords[t[x, Phi.members]] = exps
    assert (coords >= 0).all()
    return coords


def _projective_points(d, p):
    """Nonzero vectors of ``F_p^d`` whose first nonzero entry is 1."""
    for v in itertools.product(range(p), repeat=d):
        nz = [x for x in v if x]
        if nz and nz[0] == 1:
            yield v


# ---------------------------------------------------------------------------
# words and commutators


def simple_commutator(G, xs: Sequence):
    """Left-nested ``[x1, ..., xk]``; a single element is returned as is."""
    if not xs:
        raise ValueError("simple_commutator needs at least one element")
    acc = xs[0]
    for y in xs[1:]:
        acc = G.commutator(acc, y)
    return acc


@dataclass(frozen=True)
class Var:
    i: int  # 1-based variable index
    sign: int = 1


@dataclass(frozen=True)
class Const:
    value: Hashable


@dataclass(frozen=True)
class GroupWord:
    """An equation in ``arity`` variables with constants from the group."""

    arity: int
    letters: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        for t in self.letters:
            if isinstance(t, Var):
                if not 1 <= t.i <= self.arity or t.sign not in (1, -1):
                    raise ArityMismatch(f"variable x{t.i} outside arity {self.arity}")

    def inverse(self, G=None):
        out = []
        for t in reversed(self.letters):
            if isinstance(t, Var):
                out.append(Var(t.i, -t.sign))
            else:
                if G is None:
                    raise ValueError("inverting a word with constants needs the group")
                out.append(Const(G.inverse(t.value)))
        return GroupWord(self.arity, out)

    def __mul__(self, other):
        return GroupWord(max(self.arity, other.arity), self.letters + other.letters)

    def __str__(self):
        parts = []
        for t in self.letters:
            if isinstance(t, Var):
                parts.append(f"x{t.i}" + ("^-1" if t.sign < 0 else ""))
            else:
                parts.append(f"c:{t.value}")
        return " ".join(parts) or "1"


def commutator_word(k: int) -> GroupWord:
    """The word ``[x1, ..., x_{k+1}]``; ``k = 0`` gives ``x1``."""
    w = GroupWord(k + 1, [Var(1)])
    for j in range(2, k + 2):
        x = GroupWord(k + 1, [Var(j)])
        w = GroupWord(k + 1, w.inverse().letters + x.inverse().letters + w.letters + x.letters)
    return w


def evaluate_word(G, w: GroupWord, assignment: Sequence):
    """Value of ``w`` at ``assignment`` in any group exposing mul/inverse/identity."""
    if len(assignment) != w.arity:
        raise ArityMismatch(f"word has arity {w.arity}, got {len(assignment)} values")
    out = G.identity
    inverses = {}
    for t in w.letters:
        if isinstance(t, Var):
            v = assignment[t.i - 1]
            if t.sign < 0:
                if t.i not in inverses:
                    inverses[t.i] = G.inverse(v)
                v = inverses[t.i]
        else:
            v = t.value
        out = G.mul(out, v)
    return out


def parse_word(text: str, lookup: Callable[[str], Hashable], arity: int | None = None) -> GroupWord:
    """Parse tokens ``x1 x2^-1 x3^2 c:<label>`` into a :class:`GroupWord`."""
    from .errors import ParseError

    letters = []
    max_var = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0] if not line.lstrip().startswith("c:#") else line
        for tok in line.split():
            if tok.startswith("c:"):
                try:
                    letters.append(Const(lookup(tok[2:])))
                except Exception as exc:
                    raise ParseError(str(exc), lineno) from exc
                continue
            if not tok.startswith("x"):
                raise ParseError(f"bad token {tok!r}", lineno)
            body, _, exp = tok[1:].partition("^")
            try:
                i = int(body)
                e = int(exp) if exp else 1
            except ValueError:
                raise ParseError(f"bad token {tok!r}", lineno) from None
            if i < 1:
                raise ParseError(f"variable index must be >= 1 in {tok!r}", lineno)
            max_var = max(max_var, i)
            letters.extend([Var(i, 1 if e > 0 else -1)] * abs(e))
    arity = max_var if arity is None else arity
    if max_var > arity:
        raise ArityMismatch(f"word uses x{max_var} but arity is {arity}")
    return GroupWord(max(arity, 1) if letters or arity else 1, letters)


def gcd_list(values):
    out = 0
    for v in values:
        out = math.gcd(out, v)
    return out
