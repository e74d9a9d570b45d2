"""Exact degrees of k-step nilpotence and related counts.

Everything here returns exact integers or :class:`fractions.Fraction`.
Floating point only appears as an exact carrier: counts are split into
20-bit limbs so every weighted ``bincount`` sum stays below ``2**53``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapExceeded, ChainInvalid
from .group import (FiniteGroup, GroupWord, Subgroup, Const, Var, is_k_step_nilpotent, is_normal,
                    quotient, whole)

LIMB_BITS = 20
DEFAULT_EVAL_CAP = 10 ** 8
_CHUNK = 1 << 18


@dataclass
class CommutatorDistribution:
    group: FiniteGroup
    level: int
    counts: list  # python ints, counts[g] = #{(x1..xj) : [x1..xj] = g}

    @property
    def total(self):
        return sum(self.counts)

    def probability(self, g=0) -> Fraction:
        return Fraction(self.counts[g], self.group.order ** self.level)


def _push(C: np.ndarray, counts: Sequence[int], cols: np.ndarray | None = None) -> list:
    """``out[g] = sum over (h, y) with C[h, y] = g of counts[h]`` (y in ``cols``)."""
    n = C.shape[0]
    sub = C if cols is None else C[:, cols]
    width = sub.shape[1]
    flat = sub.ravel()
    out = [0] * n
    rest = [int(c) for c in counts]
    shift = 0
    mask = (1 << LIMB_BITS) - 1
    while any(rest):
        limb = np.array([c & mask for c in rest], dtype=np.float64)
        rest = [c >> LIMB_BITS for c in rest]
        if limb.any():
            # partial sums are integers below 2**20 * n * width < 2**53
            part = np.bincount(flat, weights=np.repeat(limb, width), minlength=n)
            part = np.rint(part).astype(np.int64)
            for g in np.flatnonzero(part):
                out[g] += int(part[g]) << shift
        shift += LIMB_BITS
    return out


def _check_exact_range(n, width):
    if (1 << LIMB_BITS) * n * width >= 1 << 53:
        raise CapExceeded("group too large for exact limb accumulation")


def commutator_distribution(G: FiniteGroup, j: int) -> CommutatorDistribution:
    """Distribution of ``[x1, ..., xj]`` over ``G^j``."""
    if j < 1:
        raise ValueError("level must be >= 1")
    return _distribution_cached(G, j)


@lru_cache(maxsize=256)
def _distribution_cached(G, j):
    if j == 1:
        return CommutatorDistribution(G, 1, [1] * G.order)
    prev = _distribution_cached(G, j - 1)
    C = G.commutator_table
    _check_exact_range(G.order, G.order)
    return CommutatorDistribution(G, j, _push(C, prev.counts))


def dc_k_exact(G: FiniteGroup, k: int) -> Fraction:
    """Probability that ``[x1, ..., x_{k+1}] = 1``; ``1/|G|`` when ``k = 0``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return Fraction(1, G.order)
    return commutator_distribution(G, k + 1).probability(0)


def P_k_exact(G: FiniteGroup, g: int, k: int) -> Fraction:
    if k < 1:
        raise ValueError("k must be >= 1")
    return commutator_distribution(G, k + 1).probability(g)


def _as_index_set(G, A):
    if isinstance(A, Subgroup):
        return A.members
    if isinstance(A, (int, np.integer)):
        return np.array([int(A)], dtype=np.int64)
    arr = np.asarray(A)
    if arr.dtype == bool:
        return np.flatnonzero(arr)
    return np.unique(arr.astype(np.int64))


def f_k_count(G: FiniteGroup, sets: Sequence) -> int:
    """``#{(x1..x_{k+1}) in A1 x .. x A_{k+1} : [x1, .., x_{k+1}] = 1}``.

    Each ``A_i`` may be a :class:`Subgroup`, an element, an index array or a
    boolean mask.
    """
    if not sets:
        raise ValueError("need at least one set")
    return f_k_distribution(G, sets)[0]


def f_k_distribution(G: FiniteGroup, sets: Sequence) -> list:
    """Counts of every value of ``[x1, .., x_j]`` with ``x_i`` in ``A_i``."""
    first = _as_index_set(G, sets[0])
    counts = [0] * G.order
    for a in first:
        counts[int(a)] += 1
    if len(sets) == 1:
        return counts
    C = G.commutator_table
    for A in sets[1:]:
        cols = _as_index_set(G, A)
        if len(cols) == 0:
            return [0] * G.order
        _check_exact_range(G.order, len(cols))
        counts = _push(C, counts, cols)
    return counts


def _word_arrays(G, w):
    letters = []
    for t in w.letters:
        if isinstance(t, Var):
            letters.append(("v", t.i - 1, t.sign))
        else:
            letters.append(("c", int(t.value), 1))
    return letters


def evaluate_word_batch(G: FiniteGroup, w: GroupWord, values: np.ndarray) -> np.ndarray:
    """Evaluate ``w`` at every row of ``values`` (shape ``(N, arity)``)."""
    t = G.require_table()
    out = np.zeros(len(values), dtype=np.int64)
    for kind, i, sign in _word_arrays(G, w):
        if kind == "c":
            out = t[out, i]
        else:
            col = values[:, i]
            out = t[out, col if sign > 0 else G.inv[col]]
    return out


def dphi_count(G: FiniteGroup, w: GroupWord, cap: int = DEFAULT_EVAL_CAP) -> int:
    n, a = G.order, w.arity
    total = n ** a
    if total > cap:
        raise CapExceeded(f"{total} evaluations exceed cap {cap}")
    G.require_table()
    hits = 0
    powers = n ** np.arange(a - 1, -1, -1, dtype=np.int64)
    for lo in range(0, total, _CHUNK):
        flat = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        vals = (flat[:, None] // powers[None, :]) % n
        hits += int(np.count_nonzero(evaluate_word_batch(G, w, vals) == 0))
    return hits


def dphi_exact(G: FiniteGroup, w: GroupWord, cap: int = DEFAULT_EVAL_CAP) -> Fraction:
    """Exact fraction of assignments in ``G^arity`` solving ``w = 1``."""
    return Fraction(dphi_count(G, w, cap), G.order ** w.arity)


def gap_bound(k: int) -> Fraction:
    """``(2^(k+2) - 3) / 2^(k+2)``."""
    return Fraction(2 ** (k + 2) - 3, 2 ** (k + 2))


def quotient_group(G: FiniteGroup, N: Subgroup, M: Subgroup | None = None) -> FiniteGroup:
    """``M/N`` as a group, ``M`` defaulting to ``G`` (``N`` normal in ``M``)."""
    if M is None or M.order == G.order:
        return quotient(G, N).quotient
    Mg = M.as_group
    pos = {int(x): i for i, x in enumerate(M.members)}
    mask = np.zeros(Mg.order, dtype=bool)
    mask[[pos[int(x)] for x in N.members]] = True
    return quotient(Mg, Subgroup(Mg, mask)).quotient


@dataclass
class DescentReport:
    k: int
    length: int
    dc_top: Fraction  # dc^k(G / G_n)
    product: Fraction  # product of dc^k(G_{i-1} / G_i)
    bound: Fraction  # gamma_k ** n
    factors: list = field(default_factory=list)

    @property
    def passed(self):
        return self.dc_top <= self.product <= self.bound


def descent_bound_check(G: FiniteGroup, chain: Sequence[Subgroup], k: int) -> DescentReport:
    """Check ``dc^k(G/G_n) <= prod dc^k(G_{i-1}/G_i) <= gamma_k^n``."""
    chain = list(chain)
    if chain and chain[0].order == G.order:
        chain = chain[1:]
    prev = whole(G)
    factors = []
    for i, Gi in enumerate(chain, 1):
        if not is_normal(G, Gi):
            raise ChainInvalid(f"G_{i} is not normal in G")
        if not Gi <= prev or Gi.order == prev.order:
            raise ChainInvalid(f"G_{i} is not a proper subgroup of G_{i - 1}")
        Q = quotient_group(G, Gi, prev)
        if is_k_step_nilpotent(Q, k):
            raise ChainInvalid(f"G_{i - 1}/G_{i} is {k}-step nilpotent")
        factors.append(dc_k_exact(Q, k))
        prev = Gi
    top = dc_k_exact(quotient(G, prev).quotient, k)
    product = Fraction(1)
    for f in factors:
        product *= f
    return DescentReport(k, len(chain), top, product, gap_bound(k) ** len(chain), factors)


def converse_bound(G: FiniteGroup, Gamma: Subgroup, H: Subgroup, k: int) -> Fraction:
    """``1/(m^(k+1) d)`` for ``[G:Gamma] = m``, ``|H| = d``, after checking
    ``H`` is normal in ``Gamma`` with ``Gamma/H`` ``k``-step nilpotent."""
    if not H <= Gamma:
        raise ChainInvalid("H is not contained in Gamma")
    Gg = Gamma.as_group
    pos = {int(x): i for i, x in enumerate(Gamma.members)}
    mask = np.zeros(Gg.order, dtype=bool)
    mask[[pos[int(x)] for x in H.members]] = True
    Hg = Subgroup(Gg, mask)
    if not is_normal(Gg, Hg):
        raise ChainInvalid("H is not normal in Gamma")
    if not is_k_step_nilpotent(quotient(Gg, Hg).quotient, k):
        raise ChainInvalid(f"Gamma/H is not {k}-step nilpotent")
    m = G.order // Gamma.order
    return Fraction(1, m ** (k + 1) * H.order)


def conjugacy_class_count(G: FiniteGroup) -> int:
    """Number of conjugacy classes (used only as a cross-check for dc^1)."""
    t = G.require_table()
    seen = np.zeros(G.order, dtype=bool)
    count = 0
    for x in range(G.order):
        if not seen[x]:
            seen[t[t[G.inv, x], np.arange(G.order)]] = True
            count += 1
    return count
