"""Block unitriangular p-groups ``G_k(n, r, s)`` over the field with ``p`` elements.

Block rows/columns are numbered ``0 .. k+1`` with sizes ``r, n, .., n, s``.
``A_j`` sits at block ``(0, j+1)``, ``C`` at ``(0, k+1)``, ``D_{i,j}`` at
``(i, j+1)`` and ``B_i`` at ``(i, k+1)``.  Elements are indexed by their block
coordinates in lexicographic (mixed radix) order, so the identity is 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CapExceeded, InvalidElement, PreconditionFailed
from .group import (DEFAULT_ORDER_CAP, DEFAULT_TABLE_CAP, FiniteGroup, Subgroup,
                    is_k_step_nilpotent, lower_central_series, maximal_subgroups_pgroup,
                    nilpotency_class, product_of_subgroups, subgroup_generated,
                    upper_central_series)


@dataclass(frozen=True)
class GkSpec:
    p: int
    k: int
    n: int = 1
    r: int = 1
    s: int = 1

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0 or any(self.p % d == 0 for d in range(3, int(self.p ** 0.5) + 1)):
            raise InvalidElement(f"p must be an odd prime, got {self.p}")
        if self.k < 0 or min(self.n, self.r, self.s) < 1:
            raise InvalidElement("need k >= 0 and n, r, s >= 1")

    @property
    def dim(self):
        return self.r + self.k * self.n + self.s

    @property
    def log_order(self):
        k, n, r, s = self.k, self.n, self.r, self.s
        return k * r * n + k * n * s + r * s + n * n * k * (k - 1) // 2

    @property
    def order(self):
        return self.p ** self.log_order

    @cached_property
    def block_sizes(self):
        return [self.r] + [self.n] * self.k + [self.s]

    @cached_property
    def block_offsets(self):
        return np.concatenate([[0], np.cumsum(self.block_sizes)]).tolist()

    @cached_property
    def blocks(self):
        """``(name, (row block, col block))`` in coordinate order."""
        k = self.k
        out = [(f"A{j}", (0, j + 1)) for j in range(k)]
        out += [(f"B{i}", (i, k + 1)) for i in range(1, k + 1)]
        out.append(("C", (0, k + 1)))
        out += [(f"D{i},{j}", (i, j + 1)) for i in range(1, k) for j in range(i, k)]
        return out

    @cached_property
    def positions(self):
        """Matrix entry ``(row, col)`` of every coordinate, in order."""
        off, sz = self.block_offsets, self.block_sizes
        pos = []
        for _, (a, b) in self.blocks:
            for i in range(sz[a]):
                for j in range(sz[b]):
                    pos.append((off[a] + i, off[b] + j))
        return pos

    def block_slice(self, name):
        """Coordinate slice of a named block."""
        start = 0
        for nm, (a, b) in self.blocks:
            size = self.block_sizes[a] * self.block_sizes[b]
            if nm == name:
                return slice(start, start + size)
            start += size
        raise KeyError(name)

    def __str__(self):
        return f"G_{self.k}(n={self.n},r={self.r},s={self.s}) mod {self.p}"


@dataclass(frozen=True)
class GkElement:
    """An element as its block coordinates (entries in ``0..p-1``)."""

    spec: GkSpec
    coords: tuple = field(default_factory=tuple)

    @classmethod
    def from_matrix(cls, spec, mat):
        mat = np.asarray(mat, dtype=np.int64) % spec.p
        if mat.shape != (spec.dim, spec.dim):
            raise InvalidElement("matrix has the wrong size")
        expected = np.eye(spec.dim, dtype=np.int64)
        rows, cols = zip(*spec.positions) if spec.positions else ((), ())
        free = np.zeros_like(mat, dtype=bool)
        free[list(rows), list(cols)] = True
        if not np.array_equal(np.where(free, 0, mat), expected):
            raise InvalidElement("matrix is not in G_k(n,r,s)")
        return cls(spec, tuple(int(mat[i, j]) for i, j in spec.positions))

    def to_matrix(self):
        m = np.eye(self.spec.dim, dtype=np.int64)
        for (i, j), v in zip(self.spec.positions, self.coords):
            m[i, j] = v
        return m

    def block(self, a, b):
        """Block ``(a, b)`` as a matrix (identity or zero off the free pattern)."""
        off = self.spec.block_offsets
        return self.to_matrix()[off[a]:off[a + 1], off[b]:off[b + 1]]

    def __mul__(self, other):
        # Z_ab = X_ab + Y_ab + sum_{a<c<b} X_ac Y_cb
        spec, p = self.spec, self.spec.p
        nb = spec.k + 2
        X = [[self.block(a, b) for b in range(nb)] for a in range(nb)]
        Y = [[other.block(a, b) for b in range(nb)] for a in range(nb)]
        off = spec.block_offsets
        Z = np.eye(spec.dim, dtype=np.int64)
        for a in range(nb):
            for b in range(a + 1, nb):
                acc = X[a][b] + Y[a][b]
                for c in range(a + 1, b):
                    acc = acc + X[a][c] @ Y[c][b]
                Z[off[a]:off[a + 1], off[b]:off[b + 1]] = acc % p
        return GkElement.from_matrix(spec, Z)

    def __str__(self):
        parts = []
        for nm, _ in self.spec.blocks:
            vals = self.coords[self.spec.block_slice(nm)]
            parts.append(f"{nm}=" + "".join(str(v) for v in vals))
        return " ".join(parts) or "1"


def element_coordinates(spec: GkSpec) -> np.ndarray:
    """All coordinate vectors, row ``i`` belonging to element index ``i``."""
    D, p = spec.log_order, spec.p
    idx = np.arange(spec.order, dtype=np.int64)
    out = np.empty((spec.order, D), dtype=np.int64)
    for c in range(D - 1, -1, -1):
        out[:, c] = idx % p
        idx //= p
    return out


def coordinates_to_index(spec: GkSpec, coords) -> np.ndarray:
    weights = spec.p ** np.arange(spec.log_order - 1, -1, -1, dtype=np.int64)
    return np.asarray(coords, dtype=np.int64) @ weights


def _matrices(spec, coords):
    mats = np.broadcast_to(np.eye(spec.dim, dtype=np.int64), (len(coords), spec.dim, spec.dim)).copy()
    if spec.positions:
        rows, cols = map(list, zip(*spec.positions))
        mats[:, rows, cols] = coords
    return mats


def build_gk(spec: GkSpec, cap=DEFAULT_ORDER_CAP, table_cap=DEFAULT_TABLE_CAP) -> FiniteGroup:
    """``G_k(n,r,s)`` as a :class:`FiniteGroup` indexed by block coordinates."""
    if spec.order > cap:
        raise CapExceeded(f"{spec} has order {spec.order} > cap {cap}")
    coords = element_coordinates(spec)
    mats = _matrices(spec, coords)
    rows, cols = (map(list, zip(*spec.positions)) if spec.positions else ([], []))
    rows, cols = list(rows), list(cols)
    perms = []
    gens = []
    for c in range(spec.log_order):
        g = np.zeros(spec.log_order, dtype=np.int64)
        g[c] = 1
        gm = _matrices(spec, g[None, :])[0]
        prod = (mats @ gm) % spec.p
        perms.append(coordinates_to_index(spec, prod[:, rows, cols]))
        gens.append(int(coordinates_to_index(spec, g)))
    labels = [tuple(int(v) for v in row) for row in coords]
    render = lambda c: str(GkElement(spec, c))
    G = FiniteGroup.from_right_action(perms, labels, gens=gens, name=f"gk(p={spec.p},k={spec.k},n={spec.n},r={spec.r},s={spec.s})",
                                      render=render, table_cap=table_cap)
    G.gk_spec = spec
    G.gk_coords = coords
    return G


def _spec_of(G):
    spec = getattr(G, "gk_spec", None)
    if spec is None:
        raise PreconditionFailed("group was not built by build_gk")
    return spec


def block_vanishing_mask(G: FiniteGroup, ell: int) -> np.ndarray:
    """Members of ``{A_j = 0 (j < l), B_i = 0 (k-i < l), D_ij = 0 (j-i < l)}``."""
    spec = _spec_of(G)
    coords = G.gk_coords
    mask = np.ones(G.order, dtype=bool)
    k = spec.k
    for nm, _ in spec.blocks:
        if nm.startswith("A"):
            zero = int(nm[1:]) < ell
        elif nm.startswith("B"):
            zero = k - int(nm[1:]) < ell
        elif nm.startswith("D"):
            i, j = map(int, nm[1:].split(","))
            zero = j - i < ell
        else:
            zero = False
        if zero:
            mask &= ~coords[:, spec.block_slice(nm)].any(axis=1)
    return mask


@dataclass
class SeriesReport:
    ok: bool
    lower_orders: list
    upper_orders: list
    nil_class: int | None
    centre_order: int
    witness: str | None = None


def verify_gk_series(G: FiniteGroup) -> SeriesReport:
    spec = _spec_of(G)
    lower = lower_central_series(G)
    upper = upper_central_series(G)
    cls = nilpotency_class(G)
    centre = upper[1].order if len(upper) > 1 else 1
    witness = None
    k = spec.k
    for ell in range(k + 1):
        expected = block_vanishing_mask(G, ell)
        gam = lower[ell].mask if ell < len(lower) else lower[-1].mask
        zi = k + 1 - ell
        z = upper[zi].mask if zi < len(upper) else upper[-1].mask
        if not np.array_equal(gam, expected):
            witness = f"gamma_{ell + 1} differs from the block description"
            break
        if not np.array_equal(z, expected):
            witness = f"Z_{zi} differs from the block description"
            break
    if witness is None and k >= 1 and cls != k + 1:
        witness = f"class {cls} != {k + 1}"
    if witness is None and k == 0 and cls not in (0, 1):
        witness = f"G_0 has class {cls}"
    if witness is None and centre != spec.p ** (spec.r * spec.s) and k >= 1:
        witness = f"centre order {centre} != p^(rs)"
    return SeriesReport(witness is None, [H.order for H in lower], [H.order for H in upper],
                        cls, centre if k >= 1 else G.order, witness)


def sharp_subgroup(G: FiniteGroup) -> Subgroup:
    """``{A_0 = 0}`` inside ``G_k(n,1,1)``."""
    spec = _spec_of(G)
    if spec.r != 1 or spec.s != 1:
        raise PreconditionFailed("the sharp subgroup needs r = s = 1")
    if spec.k == 0:
        raise PreconditionFailed("G_0 has no A_0 block")
    mask = ~G.gk_coords[:, spec.block_slice("A0")].any(axis=1)
    return Subgroup(G, mask)


@dataclass
class MaximalAudit:
    ok: bool
    checked: int
    offenders: list


def no_small_nilpotent_subgroups(G: FiniteGroup, k: int | None = None) -> MaximalAudit:
    """Check that no subgroup of index ``< p^n`` is ``k``-step nilpotent (n <= 2)."""
    spec = _spec_of(G)
    k = spec.k if k is None else k
    if spec.n > 2:
        raise PreconditionFailed("only n <= 2 is supported (maximal subgroups suffice)")
    candidates = [("G", None)]
    if spec.n == 2:
        candidates += [(f"M{i}", M) for i, M in enumerate(maximal_subgroups_pgroup(G, spec.p))]
    offenders = []
    for name, H in candidates:
        if is_k_step_nilpotent(G, k, H):
            offenders.append(name)
    return MaximalAudit(not offenders, len(candidates), offenders)


def rho_coordinates(G: FiniteGroup) -> np.ndarray:
    """Superdiagonal blocks of every element (``C`` alone when ``k = 0``)."""
    spec = _spec_of(G)
    if spec.k == 0:
        names = ["C"]
    else:
        names = ["A0"] + [f"D{i},{i}" for i in range(1, spec.k)] + [f"B{spec.k}"]
    return np.concatenate([G.gk_coords[:, spec.block_slice(nm)] for nm in names], axis=1)


def rank_mod_p(rows, p) -> int:
    """Rank over the field with ``p`` elements by row reduction."""
    a = np.asarray(rows, dtype=np.int64) % p
    if a.size == 0:
        return 0
    a = a.copy()
    rank = 0
    nrows, ncols = a.shape
    for c in range(ncols):
        piv = None
        for r in range(rank, nrows):
            if a[r, c]:
                piv = r
                break
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank] = a[rank] * pow(int(a[rank, c]), -1, p) % p
        others = np.arange(nrows) != rank
        a[others] = (a[others] - np.outer(a[others, c], a[rank])) % p
        rank += 1
        if rank == nrows:
            break
    return rank


def quasi_corank(G: FiniteGroup, K: Subgroup) -> int:
    """Codimension of ``rho(K)``; also asserts ``[G : K gamma_2] = p^q``."""
    spec = _spec_of(G)
    rho = rho_coordinates(G)
    src = K.gens if K.gens else K.members
    q = rho.shape[1] - rank_mod_p(rho[np.asarray(src, dtype=np.int64)], spec.p) if len(src) else rho.shape[1]
    gamma2 = lower_central_series(G)
    gamma2 = gamma2[1] if len(gamma2) > 1 else gamma2[0]
    Kg = product_of_subgroups(K, gamma2)
    if G.order // Kg.order != spec.p ** q:
        raise AssertionError(f"[G : K gamma_2] = {G.order // Kg.order} but p^q = {spec.p ** q}")
    return q


def random_subgroup(G: FiniteGroup, rng, ngens=2) -> Subgroup:
    gens = rng.integers(0, G.order, size=ngens)
    return subgroup_generated(G, gens.tolist())
