"""Reduced words in the free group ``F_r``.

A word is a tuple of nonzero integers: ``i`` is the generator ``x_i`` and
``-i`` its inverse.
"""
from __future__ import annotations

import numpy as np


def reduce_word(letters) -> tuple:
    out: list = []
    for a in letters:
        if a == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def mul(u, v) -> tuple:
    # cancel at the seam only; both inputs are reduced
    i = 0
    n = min(len(u), len(v))
    while i < n and u[len(u) - 1 - i] == -v[i]:
        i += 1
    return tuple(u[:len(u) - i]) + tuple(v[i:])


def inverse(u) -> tuple:
    return tuple(-a for a in reversed(u))


def commutator(u, v) -> tuple:
    return mul(mul(inverse(u), inverse(v)), mul(u, v))


def word_length(u) -> int:
    return len(u)


def distance(u, v) -> int:
    return len(mul(inverse(u), v))


def sphere_size(r: int, n: int) -> int:
    return 1 if n == 0 else 2 * r * (2 * r - 1) ** (n - 1)


def ball_size(r: int, n: int) -> int:
    return sum(sphere_size(r, l) for l in range(n + 1))


def enumerate_ball(r: int, n: int):
    """Every reduced word of length at most ``n`` (for small checks)."""
    out = [()]
    frontier = [()]
    letters = [a for i in range(1, r + 1) for a in (i, -i)]
    for _ in range(n):
        nxt = []
        for w in frontier:
            for a in letters:
                if not w or w[-1] != -a:
                    nxt.append(w + (a,))
        out.extend(nxt)
        frontier = nxt
    return out


def _letter_table(r):
    # index 0..2r-1 -> letter; inverse index
    letters = np.array([a for i in range(1, r + 1) for a in (i, -i)], dtype=np.int64)
    inv_idx = np.array([i ^ 1 for i in range(2 * r)], dtype=np.int64)
    return letters, inv_idx


def sample_ball(rng: np.random.Generator, r: int, n: int, size: int) -> list:
    """``size`` independent uniform draws from the ball of radius ``n`` in ``F_r``."""
    sizes = np.array([sphere_size(r, l) for l in range(n + 1)], dtype=float)
    lengths = rng.choice(n + 1, size=size, p=sizes / sizes.sum())
    return sample_words_of_lengths(rng, r, lengths)


def sample_words_of_lengths(rng, r, lengths) -> list:
    lengths = np.asarray(lengths, dtype=np.int64)
    size = len(lengths)
    n = int(lengths.max()) if size else 0
    letters, inv_idx = _letter_table(r)
    idx = np.zeros((size, max(n, 1)), dtype=np.int64)
    if n:
        idx[:, 0] = rng.integers(0, 2 * r, size=size)
        for t in range(1, n):
            pick = rng.integers(0, 2 * r - 1, size=size)
            banned = inv_idx[idx[:, t - 1]]
            idx[:, t] = pick + (pick >= banned)
    words = letters[idx]
    return [tuple(words[i, :lengths[i]].tolist()) for i in range(size)]
