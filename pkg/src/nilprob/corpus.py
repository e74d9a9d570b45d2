"""Built-in groups, named subgroups and the converse-bound metadata."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidElement, UnknownGroup
from .group import (DEFAULT_ORDER_CAP, FiniteGroup, Subgroup, center, close_generators,
                    derived_subgroup, direct_product, normal_closure, subgroup_generated,
                    trivial, whole)
from .groupfile import perm_group


def cyclic(n: int) -> FiniteGroup:
    return close_generators([1 % n] if n > 1 else [], lambda a, b: (a + b) % n, 0,
                            name=f"c{n}")


def dihedral(order: int) -> FiniteGroup:
    """Symmetries of a regular ``order/2``-gon (``dihedral(8)`` has order 8)."""
    if order < 4 or order % 2:
        raise UnknownGroup(f"dihedral order must be even and >= 4, got {order}")
    m = order // 2
    if m == 2:
        return perm_group(["(1,2)", "(3,4)"], 4, name="dih4")
    rot = "(" + ",".join(str(i) for i in range(1, m + 1)) + ")"
    refl = "".join(f"({i},{m + 2 - i})" for i in range(2, m // 2 + 1 + (m % 2)) if i < m + 2 - i)
    return perm_group([refl or "()", rot], m, name=f"dih{order}")


def quaternion() -> FiniteGroup:
    # elements (sign, unit) with unit in 1, i, j, k
    table = {("1", u): (1, u) for u in "1ijk"}
    table.update({(u, "1"): (1, u) for u in "ijk"})
    table.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
                  ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
                  ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})

    def mul(a, b):
        s, u = table[(a[1], b[1])]
        return (a[0] * b[0] * s, u)

    render = lambda q: ("-" if q[0] < 0 else "") + q[1]
    return close_generators([(1, "i"), (1, "j")], mul, (1, "1"), name="q8", render=render)


def symmetric(n: int) -> FiniteGroup:
    if not 1 <= n <= 5:
        raise UnknownGroup("symmetric groups are built in for degree <= 5")
    if n == 1:
        return perm_group([], 1, name="sym1")
    if n == 2:
        return perm_group(["(1,2)"], 2, name="sym2")
    return perm_group(["(1,2)", "(" + ",".join(map(str, range(1, n + 1))) + ")"], n, name=f"sym{n}")


def alternating(n: int) -> FiniteGroup:
    if not 1 <= n <= 6:
        raise UnknownGroup("alternating groups are built in for degree <= 6")
    if n <= 2:
        return perm_group([], max(n, 1), name=f"alt{n}")
    gens = [f"(1,2,{i})" for i in range(3, n + 1)]
    return perm_group(gens, n, name=f"alt{n}")


def heisenberg_mod(p: int) -> FiniteGroup:
    """Upper unitriangular 3x3 matrices mod ``p`` (labels ``(a, b, c)``)."""
    def mul(x, y):
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p)
    render = lambda t: f"[{t[0]},{t[1]};{t[2]}]"
    return close_generators([(1, 0, 0), (0, 1, 0)], mul, (0, 0, 0), name=f"heis{p}", render=render)


def extraspecial_exp_p2(p: int) -> FiniteGroup:
    """``Z/p^2 x| Z/p`` with ``b^-1 a b = a^(1+p)``; elements ``a^i b^j``."""
    q = p * p
    def mul(x, y):
        return ((x[0] + y[0] * pow(1 - p, x[1], q)) % q, (x[1] + y[1]) % p)
    render = lambda t: f"a^{t[0]}b^{t[1]}"
    return close_generators([(1, 0), (0, 1)], mul, (0, 0), name=f"exsp{p}", render=render)


_TOKEN = re.compile(r"gk\([^)]*\)|heisq\d+|heis\d+|exsp\d+|dih\d+|sym\d+|alt\d+|q8|c\d+")


def _one(name: str, cap: int) -> FiniteGroup:
    m = re.fullmatch(r"([a-z]+)(\d*)", name)
    if name.startswith("gk("):
        from .pgroups import GkSpec, build_gk
        args = dict(kv.split("=") for kv in name[3:-1].replace(" ", "").split(",") if kv)
        try:
            spec = GkSpec(**{k: int(v) for k, v in args.items()})
        except TypeError as exc:
            raise UnknownGroup(f"bad gk arguments in {name!r}: {exc}") from None
        return build_gk(spec, cap=cap)
    if m is None:
        raise UnknownGroup(f"unknown builtin group {name!r}")
    kind, num = m.group(1), m.group(2)
    n = int(num) if num else None
    if kind == "q" and n == 8:
        return quaternion()
    if n is None:
        raise UnknownGroup(f"unknown builtin group {name!r}")
    if kind == "c":
        return cyclic(n)
    if kind == "dih":
        return dihedral(n)
    if kind == "sym":
        return symmetric(n)
    if kind == "alt":
        return alternating(n)
    if kind == "heis":
        return heisenberg_mod(n)
    if kind == "exsp":
        return extraspecial_exp_p2(n)
    if kind == "heisq":
        from .malcev import finite_quotient, heisenberg
        return finite_quotient(heisenberg(), n, cap=cap)
    raise UnknownGroup(f"unknown builtin group {name!r}")


@lru_cache(maxsize=64)
def builtin(name: str, cap: int = DEFAULT_ORDER_CAP) -> FiniteGroup:
    """Build a named group; ``AxB`` names give direct products."""
    name = name.strip().lower()
    parts = []
    pos = 0
    while pos < len(name):
        m = _TOKEN.match(name, pos)
        if m is None:
            raise UnknownGroup(f"cannot parse group name {name!r} at position {pos}")
        parts.append(m.group(0))
        pos = m.end()
        if pos < len(name):
            if name[pos] != "x":
                raise UnknownGroup(f"expected 'x' between factors in {name!r}")
            pos += 1
    if not parts:
        raise UnknownGroup("empty group name")
    G = _one(parts[0], cap)
    for part in parts[1:]:
        G = direct_product(G, _one(part, cap))
    if len(parts) > 1:
        G.name = name
    return G


def named_subgroup(G: FiniteGroup, name: str) -> Subgroup:
    """``whole``, ``trivial``, ``center``, ``derived``, ``v4``/``a4`` in sym4,
    ``gen:<l1>;<l2>`` (generated) or ``ncl:<l1>;..`` (normal closure)."""
    key = name.strip()
    low = key.lower()
    if low in ("whole", "g"):
        return whole(G)
    if low in ("trivial", "1"):
        return trivial(G)
    if low in ("center", "centre", "z"):
        return center(G)
    if low == "derived":
        return derived_subgroup(G)
    if low.startswith("gen:") or low.startswith("ncl:"):
        labels = [t for t in key[4:].split(";") if t]
        elems = [G.lookup(t) for t in labels]
        return subgroup_generated(G, elems) if low.startswith("gen:") else normal_closure(G, elems)
    if G.name == "sym4" and low == "v4":
        return subgroup_generated(G, [G.lookup("(1,2)(3,4)"), G.lookup("(1,3)(2,4)")])
    if G.name == "sym4" and low == "a4":
        return derived_subgroup(G)
    if G.name in ("dih8", "q8", "heis2") and low == "rot":
        return subgroup_generated(G, [max(range(G.order), key=G.element_order)])
    raise InvalidElement(f"unknown subgroup {name!r} for {G.name}")


# groups used by the exact acceptance sweeps (orders <= 729)
CORPUS_NAMES = [
    "c2", "c3", "c4", "c6", "c2xc2",
    "sym3", "dih8", "q8", "dih10", "dih12", "alt4", "dih16", "sym3xc3",
    "sym4", "sym3xsym3", "heis3", "exsp3", "alt5", "heis5", "exsp5", "sym5",
    "gk(p=3,k=1,n=1,r=1,s=1)", "gk(p=5,k=1,n=1,r=1,s=1)", "gk(p=3,k=1,n=2,r=1,s=1)",
    "gk(p=3,k=2,n=1,r=1,s=1)", "gk(p=3,k=1,n=1,r=2,s=1)", "gk(p=3,k=1,n=1,r=1,s=2)",
]


def corpus(max_order: int = 729) -> list[FiniteGroup]:
    out = []
    for nm in CORPUS_NAMES:
        G = builtin(nm)
        if G.order <= max_order:
            out.append(G)
    return out


@dataclass(frozen=True)
class ConverseCase:
    """``G`` with ``Gamma`` of index ``m`` and ``H <= Gamma`` of order ``d``
    such that ``Gamma/H`` is ``k``-step nilpotent."""

    group: str
    gamma: str
    h: str
    k: int


CONVERSE_CASES = [
    ConverseCase("sym3", "derived", "trivial", 1),
    ConverseCase("sym3", "whole", "derived", 1),
    ConverseCase("dih8", "rot", "trivial", 1),
    ConverseCase("dih8", "whole", "trivial", 2),
    ConverseCase("q8", "rot", "trivial", 1),
    ConverseCase("sym4", "v4", "trivial", 1),
    ConverseCase("sym4", "a4", "v4", 1),
    ConverseCase("sym4", "whole", "a4", 1),
    ConverseCase("sym4", "v4", "trivial", 2),
    ConverseCase("alt4", "derived", "trivial", 1),
    ConverseCase("alt5", "gen:(1,2,3,4,5)", "trivial", 1),
    ConverseCase("alt5", "gen:(1,2)(3,4);(1,3)(2,4)", "trivial", 2),
    ConverseCase("sym3xsym3", "derived", "trivial", 1),
    ConverseCase("gk(p=3,k=1,n=1,r=1,s=1)", "whole", "center", 1),
    ConverseCase("gk(p=3,k=1,n=2,r=1,s=1)", "sharp", "trivial", 1),
    ConverseCase("gk(p=3,k=2,n=1,r=1,s=1)", "sharp", "trivial", 2),
    ConverseCase("gk(p=3,k=2,n=1,r=1,s=1)", "whole", "center", 2),
]


def resolve_subgroup(G: FiniteGroup, name: str) -> Subgroup:
    if name == "sharp":
        from .pgroups import sharp_subgroup
        return sharp_subgroup(G)
    return named_subgroup(G, name)
