"""Permutation and matrix helpers plus the text group-definition format.

A group file holds one or more blocks; several blocks give their direct
product.  Lines starting with ``#`` are comments.

    perm [degree]
    (1,2)
    (1,2,3)
    end

    table <n>
    0 1 2
    1 2 0
    2 0 1
    end

    matfp <p>
    1 1 0; 0 1 0; 0 0 1
    end
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import InvalidElement, ParseError
from .group import DEFAULT_ORDER_CAP, FiniteGroup, close_generators, direct_product

_CYCLE = re.compile(r"\(([^()]*)\)")


# permutations are tuples on 0..d-1; (x*y)[i] = y[x[i]]

def perm_mul(x, y):
    return tuple(y[i] for i in x)


def perm_inv(x):
    out = [0] * len(x)
    for i, j in enumerate(x):
        out[j] = i
    return tuple(out)


def perm_from_cycles(text: str, degree: int | None = None):
    """Parse ``(1,2,3)(4,5)`` (1-based points) into a tuple permutation."""
    text = text.strip()
    stripped = _CYCLE.sub("", text).strip()
    if stripped:
        raise ValueError(f"unexpected text {stripped!r} in cycle notation")
    cycles = []
    top = 0
    for body in _CYCLE.findall(text):
        pts = [int(t) for t in re.split(r"[,\s]+", body.strip()) if t]
        if any(p < 1 for p in pts) or len(set(pts)) != len(pts):
            raise ValueError(f"bad cycle ({body})")
        cycles.append(pts)
        top = max([top, *pts])
    degree = top if degree is None else degree
    if top > degree:
        raise ValueError(f"point {top} exceeds degree {degree}")
    img = list(range(degree))
    seen = set()
    for cyc in cycles:
        if seen & set(cyc):
            raise ValueError("cycles are not disjoint")
        seen |= set(cyc)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            img[a - 1] = b - 1
    return tuple(img)


def perm_to_cycles(x) -> str:
    seen = [False] * len(x)
    parts = []
    for i in range(len(x)):
        if seen[i] or x[i] == i:
            continue
        cyc = []
        j = i
        while not seen[j]:
            seen[j] = True
            cyc.append(str(j + 1))
            j = x[j]
        parts.append("(" + ",".join(cyc) + ")")
    return "".join(parts) or "()"


def perm_group(gens, degree=None, name="G", cap=DEFAULT_ORDER_CAP) -> FiniteGroup:
    gens = [tuple(g) if not isinstance(g, str) else perm_from_cycles(g, degree) for g in gens]
    if degree is None:
        degree = max((len(g) for g in gens), default=1)
    gens = [g + tuple(range(len(g), degree)) for g in gens]
    ident = tuple(range(degree))
    return close_generators(gens, perm_mul, ident, inv=perm_inv, cap=cap, name=name,
                            render=perm_to_cycles)


# matrices over F_p are tuples of row tuples

def mat_mul_mod(p):
    def mul(a, b):
        n = len(a)
        return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) % p for j in range(n))
                     for i in range(n))
    return mul


def mat_render(m) -> str:
    return "[" + "; ".join(" ".join(str(v) for v in row) for row in m) + "]"


def matrix_group(gens, p, name="G", cap=DEFAULT_ORDER_CAP) -> FiniteGroup:
    gens = [tuple(tuple(int(v) % p for v in row) for row in g) for g in gens]
    if not gens:
        return close_generators([], mat_mul_mod(p), ((1,),), name=name, render=mat_render)
    n = len(gens[0])
    for g in gens:
        if len(g) != n or any(len(r) != n for r in g):
            raise InvalidElement("generator matrices must be square of equal size")
        if round(np.linalg.det(np.array(g, dtype=float))) % p == 0 and _det_mod(g, p) == 0:
            raise InvalidElement("generator matrix is singular mod p")
    ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return close_generators(gens, mat_mul_mod(p), ident, cap=cap, name=name, render=mat_render)


def _det_mod(m, p):
    a = [list(r) for r in m]
    n = len(a)
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c] % p
        inv = pow(a[c][c], -1, p)
        for r in range(c + 1, n):
            f = a[r][c] * inv % p
            a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
    return det % p


def _is_prime(p):
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


# file parsing

def parse_group_text(text: str, name="G", cap=DEFAULT_ORDER_CAP) -> FiniteGroup:
    groups = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i].split("#", 1)[0].strip()
        i += 1
        if not raw:
            continue
        head = raw.split()
        kind = head[0]
        start = i
        body = []
        while True:
            if i >= len(lines):
                raise ParseError(f"block '{kind}' opened here is missing 'end'", start)
            row = lines[i].split("#", 1)[0].strip()
            i += 1
            if row == "end":
                break
            if row:
                body.append((i, row))
        try:
            groups.append(_parse_block(kind, head[1:], body, start, name, cap))
        except ParseError:
            raise
        except InvalidElement as exc:
            raise ParseError(str(exc), start) from exc
    if not groups:
        raise ParseError("no group block found", 1)
    G = groups[0]
    for H in groups[1:]:
        G = direct_product(G, H)
    G.name = name
    return G


def _parse_block(kind, args, body, start, name, cap):
    if kind == "perm":
        degree = None
        if args:
            degree = _int(args[0], start)
        gens = []
        for lineno, row in body:
            try:
                gens.append(perm_from_cycles(row, degree))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
        if degree is None:
            degree = max((len(g) for g in gens), default=1)
        return perm_group(gens, degree, name=name, cap=cap)
    if kind == "table":
        if len(args) != 1:
            raise ParseError("table header must be 'table <n>'", start)
        n = _int(args[0], start)
        if len(body) != n:
            raise ParseError(f"table expects {n} rows, found {len(body)}", start)
        rows = []
        for lineno, row in body:
            vals = [_int(t, lineno) for t in row.split()]
            if len(vals) != n:
                raise ParseError(f"row has {len(vals)} entries, expected {n}", lineno)
            rows.append(vals)
        return FiniteGroup.from_table(np.array(rows), name=name)
    if kind == "matfp":
        if len(args) != 1:
            raise ParseError("matfp header must be 'matfp <p>'", start)
        p = _int(args[0], start)
        if not _is_prime(p):
            raise ParseError(f"{p} is not prime", start)
        gens = []
        for lineno, row in body:
            mat = [[_int(t, lineno) for t in r.split()] for r in row.split(";")]
            if any(len(r) != len(mat) for r in mat):
                raise ParseError("matrix rows must form a square", lineno)
            gens.append(mat)
        return matrix_group(gens, p, name=name, cap=cap)
    raise ParseError(f"unknown block type {kind!r}", start)


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", lineno) from None


def load_group_file(path, cap=DEFAULT_ORDER_CAP) -> FiniteGroup:
    path = Path(path)
    return parse_group_text(path.read_text(), name=path.stem, cap=cap)
