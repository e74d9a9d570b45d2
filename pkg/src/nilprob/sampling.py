"""Samplers on finite, Mal'cev and free groups and Monte Carlo estimators.

Trials are processed in fixed blocks of ``BLOCK`` draws.  Block ``b`` uses its
own generator seeded by ``SeedSequence(seed, spawn_key=(b,))``, so results do
not depend on how blocks are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Sequence

import numpy as np

from . import freegroup as fg
from .errors import ArityMismatch, InvalidElement
from .group import Const, FiniteGroup, GroupWord, Var
from .malcev import MalcevGroup

BLOCK = 16_384


# batch arithmetic backends -------------------------------------------------

class FiniteOps:
    """Batches are int64 index arrays."""

    def __init__(self, G: FiniteGroup):
        self.group = G
        self.table = G.require_table()

    def const(self, g, size):
        return np.full(size, int(g), dtype=np.int64)

    def gather(self, elems, idx):
        return np.asarray(elems, dtype=np.int64)[idx]

    def mul(self, a, b):
        return self.table[a, b].astype(np.int64)

    def inv(self, a):
        return self.group.inv[a]

    def equals(self, a, g):
        return a == int(g)

    def is_identity(self, a):
        return a == 0


class MalcevOps:
    """Batches are lists of ``m`` coordinate columns (int64, object on overflow)."""

    def __init__(self, G: MalcevGroup):
        self.group = G

    def const(self, g, size):
        return [np.full(size, int(x), dtype=np.int64) for x in g]

    def gather(self, elems, idx):
        arr = np.asarray(elems, dtype=np.int64)
        return [arr[idx, j] for j in range(self.group.m)]

    def mul(self, a, b):
        return self.group.mul_arrays(a, b)

    def inv(self, a):
        return self.group.power_arrays(a, -1)

    def equals(self, a, g):
        out = np.ones(len(a[0]), dtype=bool)
        for col, x in zip(a, g):
            out &= col == int(x)
        return out

    def is_identity(self, a):
        return self.equals(a, self.group.identity)

    def reduce_mod(self, a, n):
        """Mixed-radix index of the reduction mod ``n`` (matches ``finite_quotient``)."""
        idx = np.zeros(len(a[0]), dtype=np.int64)
        for col in a:
            idx = idx * n + np.asarray(col % n, dtype=np.int64)
        return idx


class FreeOps:
    """Batches are lists of reduced words."""

    def __init__(self, r: int):
        self.r = r

    def const(self, g, size):
        return [tuple(g)] * size

    def gather(self, elems, idx):
        return [tuple(elems[i]) for i in idx]

    def mul(self, a, b):
        return [fg.mul(u, v) for u, v in zip(a, b)]

    def inv(self, a):
        return [fg.inverse(u) for u in a]

    def equals(self, a, g):
        g = tuple(g)
        return np.array([u == g for u in a], dtype=bool)

    def is_identity(self, a):
        return np.array([len(u) == 0 for u in a], dtype=bool)


class ProductOps:
    """Batches are pairs of batches; elements are pairs."""

    def __init__(self, left, right):
        self.left, self.right = left, right

    def const(self, g, size):
        return (self.left.const(g[0], size), self.right.const(g[1], size))

    def gather(self, elems, idx):
        return (self.left.gather([e[0] for e in elems], idx), self.right.gather([e[1] for e in elems], idx))

    def mul(self, a, b):
        return (self.left.mul(a[0], b[0]), self.right.mul(a[1], b[1]))

    def inv(self, a):
        return (self.left.inv(a[0]), self.right.inv(a[1]))

    def equals(self, a, g):
        return self.left.equals(a[0], g[0]) & self.right.equals(a[1], g[1])

    def is_identity(self, a):
        return self.left.is_identity(a[0]) & self.right.is_identity(a[1])


def ops_for(group):
    if isinstance(group, FiniteGroup):
        return FiniteOps(group)
    if isinstance(group, MalcevGroup):
        return MalcevOps(group)
    if isinstance(group, tuple) and len(group) == 2:
        return ProductOps(ops_for(group[0]), ops_for(group[1]))
    raise InvalidElement(f"no batch arithmetic for {group!r}")


def batch_commutator(ops, a, b):
    return ops.mul(ops.mul(ops.inv(a), ops.inv(b)), ops.mul(a, b))


# step distributions and samplers ------------------------------------------

@dataclass
class StepDistribution:
    support: list  # elements
    weights: list  # positive, summing to 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.support) or np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
            raise InvalidElement("step weights must be positive and sum to 1")

    @property
    def probabilities(self):
        return np.asarray(self.weights, dtype=float)


def lazy_generator_steps(identity, gens, inverse) -> StepDistribution:
    """Uniform on ``{1} u {s, s^-1}``; symmetric with positive identity mass."""
    support = [identity]
    for s in gens:
        support.extend([s, inverse(s)])
    return StepDistribution(support, [1 / len(support)] * len(support))


class Sampler:
    ops = None

    def draw(self, rng: np.random.Generator, size: int):
        raise NotImplementedError

    def describe(self) -> dict:
        return {}


class RandomWalk(Sampler):
    """Position of a random walk after ``steps`` independent steps."""

    def __init__(self, ops, step: StepDistribution, steps: int, identity):
        self.ops, self.step, self.steps, self.identity = ops, step, steps, identity

    def draw(self, rng, size):
        cur = self.ops.const(self.identity, size)
        p = self.step.probabilities
        for _ in range(self.steps):
            idx = rng.choice(len(p), size=size, p=p)
            cur = self.ops.mul(cur, self.ops.gather(self.step.support, idx))
        return cur

    def describe(self):
        return {"kind": "random_walk", "steps": self.steps, "support": len(self.step.support)}


def heisenberg_walk(G: MalcevGroup, steps: int) -> RandomWalk:
    step = lazy_generator_steps(G.identity, G.generators, G.inverse)
    return RandomWalk(MalcevOps(G), step, steps, G.identity)


def finite_walk(G: FiniteGroup, steps: int, gens=None) -> RandomWalk:
    gens = G.gens if gens is None else gens
    step = lazy_generator_steps(0, gens, G.inverse)
    return RandomWalk(FiniteOps(G), step, steps, 0)


class UniformFinite(Sampler):
    def __init__(self, G: FiniteGroup):
        self.G, self.ops = G, FiniteOps(G)

    def draw(self, rng, size):
        return rng.integers(0, self.G.order, size=size)

    def describe(self):
        return {"kind": "uniform", "order": self.G.order}


class FolnerBox(Sampler):
    """Uniform coordinates with ``|v_i| <= n^(w_i)``."""

    def __init__(self, G: MalcevGroup, n: int, weights: Sequence[int] | None = None):
        if weights is None:
            weights = (2, 1, 1) if G.name == "heisenberg" else (1,) * G.m
        if len(weights) != G.m:
            raise InvalidElement("one weight per coordinate")
        self.G, self.n, self.weights = G, n, tuple(weights)
        self.ops = MalcevOps(G)

    @property
    def bounds(self):
        return [self.n ** w for w in self.weights]

    def draw(self, rng, size):
        return [rng.integers(-b, b + 1, size=size, dtype=np.int64) for b in self.bounds]

    def describe(self):
        return {"kind": "folner_box", "n": self.n, "weights": list(self.weights)}


class FreeBall(Sampler):
    def __init__(self, r: int, n: int):
        self.r, self.n = r, n
        self.ops = FreeOps(r)

    def draw(self, rng, size):
        return fg.sample_ball(rng, self.r, self.n, size)

    def describe(self):
        return {"kind": "free_ball", "rank": self.r, "radius": self.n}


class ProductSampler(Sampler):
    """Independent draws from two samplers, paired."""

    def __init__(self, left: Sampler, right: Sampler):
        self.left, self.right = left, right
        self.ops = ProductOps(left.ops, right.ops)

    def draw(self, rng, size):
        return (self.left.draw(rng, size), self.right.draw(rng, size))

    def describe(self):
        return {"kind": "product", "left": self.left.describe(), "right": self.right.describe()}


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def sample(s: Sampler, size: int = 1, seed: int = 0):
    """Draw ``size`` elements (first block only, for convenience)."""
    return s.draw(block_rng(seed, 0), size)


# estimates ----------------------------------------------------------------

def wilson_interval(successes: int, trials: int, confidence: float = 0.95):
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, float(centre - half))
    hi = 1.0 if successes == trials else min(1.0, float(centre + half))
    return lo, hi


@dataclass
class EstimateResult:
    successes: int
    trials: int
    seed: int
    ci_low: float = 0.0
    ci_high: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ci_low, self.ci_high = wilson_interval(self.successes, self.trials)
        self.ci_low = min(self.ci_low, self.point)
        self.ci_high = max(self.ci_high, self.point)

    @property
    def point(self) -> float:
        return self.successes / self.trials

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.successes, self.trials)

    def contains(self, value) -> bool:
        return self.ci_low <= float(value) <= self.ci_high


def _run_blocks(trials, seed, body):
    """Sum ``body(rng, size)`` over fixed-size blocks; returns total hits and
    the per-block extras in block order."""
    hits = 0
    extras = []
    for b, lo in enumerate(range(0, trials, BLOCK)):
        size = min(BLOCK, trials - lo)
        h, extra = body(block_rng(seed, b), size)
        hits += int(h)
        extras.append(extra)
    return hits, extras


def _commutator_draws(s: Sampler, k: int, rng, size):
    xs = [s.draw(rng, size) for _ in range(k + 1)]
    acc = xs[0]
    for x in xs[1:]:
        acc = batch_commutator(s.ops, acc, x)
    return xs, acc


def estimate_P_k(s: Sampler, g, k: int, trials: int, seed: int, project=None) -> EstimateResult:
    """Frequency of ``[x1, .., x_{k+1}] = g``.

    ``project(xs)``, if given, is called on every block's raw draws and its
    return values are collected in ``extra["projected"]``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def body(rng, size):
        xs, val = _commutator_draws(s, k, rng, size)
        ok = s.ops.equals(val, g)
        return ok.sum(), project(xs) if project else None

    hits, extras = _run_blocks(trials, seed, body)
    res = EstimateResult(hits, trials, seed)
    if project:
        res.extra["projected"] = extras
    return res


def estimate_dc_k(s: Sampler, k: int, trials: int, seed: int, project=None) -> EstimateResult:
    identity = _identity_of(s)
    return estimate_P_k(s, identity, k, trials, seed, project)


def _identity_of(s: Sampler):
    ops = s.ops
    if isinstance(ops, FiniteOps):
        return 0
    if isinstance(ops, MalcevOps):
        return ops.group.identity
    if isinstance(ops, FreeOps):
        return ()
    if isinstance(ops, ProductOps):
        return (_identity_of(_Fake(ops.left)), _identity_of(_Fake(ops.right)))
    raise InvalidElement("unknown sampler backend")


@dataclass
class _Fake:
    ops: object


def evaluate_word_batches(ops, w: GroupWord, values: Sequence):
    if len(values) != w.arity:
        raise ArityMismatch(f"word has arity {w.arity}, got {len(values)} batches")
    size = _batch_len(values[0]) if values else 1
    out = None
    inverses = {}
    for t in w.letters:
        if isinstance(t, Var):
            v = values[t.i - 1]
            if t.sign < 0:
                if t.i not in inverses:
                    inverses[t.i] = ops.inv(v)
                v = inverses[t.i]
        else:
            v = ops.const(t.value, size)
        out = v if out is None else ops.mul(out, v)
    return out


def _batch_len(batch):
    if isinstance(batch, tuple):
        return _batch_len(batch[0])
    if isinstance(batch, list) and batch and isinstance(batch[0], np.ndarray):
        return len(batch[0])
    return len(batch)


def estimate_dphi(s: Sampler, w: GroupWord, trials: int, seed: int) -> EstimateResult:
    """Frequency of ``w(x1, .., x_arity) = 1`` over independent draws."""

    def body(rng, size):
        xs = [s.draw(rng, size) for _ in range(w.arity)]
        val = evaluate_word_batches(s.ops, w, xs)
        if val is None:
            return size, None
        return s.ops.is_identity(val).sum(), None

    hits, _ = _run_blocks(trials, seed, body)
    return EstimateResult(hits, trials, seed)


# exact walk laws on finite groups ------------------------------------------

def walk_distribution(G: FiniteGroup, step_elems: Sequence[int], weights: Sequence[float], steps: int) -> np.ndarray:
    """Exact law of ``s_1 ... s_steps`` with i.i.d. steps, as a float vector."""
    t = G.require_table()
    p = np.zeros(G.order)
    p[0] = 1.0
    elems = np.asarray(step_elems, dtype=np.int64)
    w = np.asarray(weights, dtype=float)
    for _ in range(steps):
        nxt = np.zeros(G.order)
        for e, wt in zip(elems, w):
            np.add.at(nxt, t[:, e], wt * p)
        p = nxt
    return p


def commuting_probability(G: FiniteGroup, p: np.ndarray, q: np.ndarray | None = None) -> float:
    """``P([x, y] = 1)`` for independent ``x ~ p``, ``y ~ q``."""
    q = p if q is None else q
    C = G.commutator_table
    return float(p @ (C == 0).astype(float) @ q)


def coset_measure(G: FiniteGroup, p: np.ndarray, x: int, H) -> float:
    """``p(xH)``."""
    return float(p[G.table[x, H.members]].sum())


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def convolve(G: FiniteGroup, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Law of ``x y`` for independent ``x ~ p`` and ``y ~ q``."""
    t = G.require_table()
    out = np.zeros(G.order)
    np.add.at(out, t.ravel(), np.outer(p, q).ravel())
    return out
