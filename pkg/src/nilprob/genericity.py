"""Free bases in free groups: a length criterion versus Stallings folding.

Words are reduced tuples of nonzero integers as in :mod:`nilprob.freegroup`.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import freegroup as fg
from .errors import PreconditionFailed
from .sampling import BLOCK, EstimateResult, block_rng


def symmetrize(words: Sequence) -> list:
    out = []
    for w in words:
        w = fg.reduce_word(w)
        out.extend([w, fg.inverse(w)])
    return out


def delzant_condition(words: Sequence, D0: int = 1) -> bool:
    """``|ab| >= max(|a|, |b|) + D0`` for all ``a, b`` in the symmetrized tuple
    with ``a != b^-1``.

    A tuple whose symmetrization has repeated entries (the identity, a
    duplicate, or an entry equal to another one's inverse) cannot be a basis
    and is rejected outright.
    """
    if D0 < 1:
        raise PreconditionFailed("D0 must be >= 1")
    sym = symmetrize(words)
    if len(set(sym)) != len(sym):
        return False
    for a in sym:
        for b in sym:
            if a == fg.inverse(b):
                continue
            if len(fg.mul(a, b)) < max(len(a), len(b)) + D0:
                return False
    return True


# Stallings folding ---------------------------------------------------------

@dataclass
class CoreGraph:
    """Folded, trimmed graph; vertex 0 is the base point."""
    vertices: int
    edges: list  # (u, label > 0, v)

    @property
    def rank(self) -> int:
        return len(self.edges) - self.vertices + 1

    def canonical(self) -> tuple:
        """Relabel vertices in BFS order from the base, visiting labels in
        increasing order; equal graphs give equal tuples."""
        adj: dict = {}
        for u, a, v in self.edges:
            adj.setdefault(u, {})[a] = v
            adj.setdefault(v, {})[-a] = u
        name = {0: 0}
        queue = [0]
        for u in queue:
            for a in sorted(adj.get(u, {})):
                v = adj[u][a]
                if v not in name:
                    name[v] = len(name)
                    queue.append(v)
        return tuple(sorted((name[u], a, name[v]) for u, a, v in self.edges))


def fold(words: Sequence, shuffle_seed: int | None = None) -> CoreGraph:
    """Stallings graph of ``<words>``: wedge of loops, folded, with hanging
    trees trimmed back to the base point.

    ``shuffle_seed`` randomizes the order in which edges are inserted, which
    changes the folding order but not the result.
    """
    parent: list = [0]
    out: list = [{}]

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    def new_vertex():
        parent.append(len(parent))
        out.append({})
        return len(parent) - 1

    pending: list = []

    def attach(u, a, v):
        u, v = find(u), find(v)
        if a in out[u]:
            pending.append((out[u][a], v))
        else:
            out[u][a] = v
        if -a in out[v]:
            pending.append((out[v][-a], u))
        else:
            out[v][-a] = u

    def merge(x, y):
        x, y = find(x), find(y)
        if x == y:
            return
        if len(out[x]) < len(out[y]):
            x, y = y, x
        parent[y] = x
        for a, t in out[y].items():
            if a in out[x]:
                pending.append((out[x][a], t))
            else:
                out[x][a] = t
        out[y] = {}

    raw = []
    for w in words:
        w = fg.reduce_word(w)
        if not w:
            continue
        path = [0] + [new_vertex() for _ in range(len(w) - 1)] + [0]
        raw.extend((path[i], a, path[i + 1]) for i, a in enumerate(w))
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(raw)
    for u, a, v in raw:
        attach(u, a, v)
        while pending:
            merge(*pending.pop())

    # collect the folded graph on representatives
    edges = set()
    for u in range(len(parent)):
        if find(u) != u:
            continue
        for a, t in out[u].items():
            if a > 0:
                edges.add((u, a, find(t)))
    # trim vertices of degree one, except the base point
    base = find(0)
    deg: dict = {}
    for u, _, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    incident: dict = {}
    for e in edges:
        incident.setdefault(e[0], set()).add(e)
        incident.setdefault(e[2], set()).add(e)
    stack = [u for u, d in deg.items() if d == 1 and u != base]
    while stack:
        u = stack.pop()
        if deg.get(u) != 1:
            continue
        (e,) = incident[u]
        edges.discard(e)
        other = e[2] if e[0] == u else e[0]
        for x in (u, other):
            incident[x].discard(e)
            deg[x] -= 1
        del deg[u]
        if deg[other] == 1 and other != base:
            stack.append(other)
    verts = {base} | {u for u, _, _ in edges} | {v for _, _, v in edges}
    rename = {base: 0}
    for u in sorted(verts - {base}):
        rename[u] = len(rename)
    return CoreGraph(len(verts), sorted((rename[u], a, rename[v]) for u, a, v in edges))


def stallings_rank(words: Sequence) -> int:
    """Rank of the subgroup generated by ``words``."""
    return fold(words).rank


def is_free_basis(words: Sequence) -> bool:
    return stallings_rank(words) == len(words)


# distances -----------------------------------------------------------------

def gromov_product(x, y, z) -> Fraction:
    """``(y . z)_x = (d(x,y) + d(x,z) - d(y,z)) / 2``."""
    return Fraction(fg.distance(x, y) + fg.distance(x, z) - fg.distance(y, z), 2)


def delzant_walk_bound_check(points: Sequence, a: int) -> bool:
    """Given ``d(x_{n+2}, x_n) >= max(d(x_{n+2}, x_{n+1}), d(x_{n+1}, x_n)) + a``
    for all ``n``, check ``d(x_n, x_m) >= a |m - n|`` for every pair."""
    pts = [fg.reduce_word(p) for p in points]
    for n in range(len(pts) - 2):
        d20 = fg.distance(pts[n + 2], pts[n])
        need = max(fg.distance(pts[n + 2], pts[n + 1]), fg.distance(pts[n + 1], pts[n])) + a
        if d20 < need:
            raise PreconditionFailed(f"gap hypothesis fails at n={n}: {d20} < {need}")
    return all(fg.distance(pts[n], pts[m]) >= a * (m - n)
               for n, m in itertools.combinations(range(len(pts)), 2))


def partial_products(tuple_words: Sequence, letters: Sequence[int]) -> list:
    """``x_0 = 1, x_j = z_1 ... z_j`` for a word over ``tuple_words`` given as
    signed 1-based indices."""
    out = [()]
    for i in letters:
        z = tuple_words[abs(i) - 1]
        out.append(fg.mul(out[-1], z if i > 0 else fg.inverse(z)))
    return out


# experiment ----------------------------------------------------------------

@dataclass
class GenericityResult:
    rank: int
    radius: int
    trials: int
    seed: int
    counts: dict = field(default_factory=dict)

    @property
    def delzant_frac(self) -> float:
        return self.counts["delzant"] / self.trials

    @property
    def basis_frac(self) -> float:
        return self.counts["basis"] / self.trials

    @property
    def basis_estimate(self) -> EstimateResult:
        return EstimateResult(self.counts["basis"], self.trials, self.seed)

    @property
    def delzant_estimate(self) -> EstimateResult:
        return EstimateResult(self.counts["delzant"], self.trials, self.seed)


def genericity_experiment(r: int, n: int, trials: int, seed: int, D0: int = 1) -> GenericityResult:
    """Sample ``r``-tuples uniformly from ``B(n)^r`` in ``F_r``; count tuples
    passing the length criterion and tuples that are free bases."""
    if r < 1 or n < 0 or trials < 1:
        raise PreconditionFailed("need r >= 1, n >= 0 and trials >= 1")
    counts = {"delzant": 0, "basis": 0, "both": 0, "unsound": 0}
    for b, lo in enumerate(range(0, trials, BLOCK)):
        size = min(BLOCK, trials - lo)
        rng = block_rng(seed, b)
        draws = [fg.sample_ball(rng, r, n, size) for _ in range(r)]
        for tup in zip(*draws):
            dz = delzant_condition(tup, D0)
            basis = is_free_basis(tup)
            counts["delzant"] += dz
            counts["basis"] += basis
            counts["both"] += dz and basis
            counts["unsound"] += dz and not basis
    return GenericityResult(r, n, trials, seed, counts)


def ball_size_formula(r: int, n: int) -> Fraction:
    """Closed form of ``|B(n)|``; needs ``r >= 2``."""
    return 1 + Fraction(2 * r * ((2 * r - 1) ** n - 1), 2 * r - 2)


def geometric_decay(fracs: Sequence[float]) -> bool:
    """``1 - basis_frac`` never increases along the grid (ratio at most one)."""
    miss = [1 - f for f in fracs]
    return all(b <= a for a, b in zip(miss, miss[1:]))


__all__ = [
    "CoreGraph", "GenericityResult", "ball_size_formula", "delzant_condition",
    "delzant_walk_bound_check", "fold", "genericity_experiment", "gromov_product",
    "is_free_basis", "partial_products", "stallings_rank", "symmetrize",
]
