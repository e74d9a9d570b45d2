"""Multivariate polynomials with rational coefficients, exact and vectorised."""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import NonIntegerResult, ParseError

_INT64_SAFE = 1 << 62


def _magnitude(c: np.ndarray) -> int:
    if not c.size:
        return 0
    if c.dtype == object:
        return int(np.max(np.abs(c)))
    return max(abs(int(c.max())), abs(int(c.min())))


class IntPolynomial:
    """``sum c_e x^e`` over exponent tuples ``e``; zero coefficients are dropped."""

    def __init__(self, nvars: int, terms: Mapping[tuple, Fraction | int] | None = None):
        self.nvars = nvars
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps} for {nvars} variables")
            c = Fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self.terms = clean

    # constructors -------------------------------------------------------

    @classmethod
    def const(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    # arithmetic ---------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, IntPolynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable counts differ")
            return other
        return IntPolynomial.const(self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return IntPolynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return IntPolynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = IntPolynomial.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, d):
        d = Fraction(d)
        return IntPolynomial(self.nvars, {e: c / d for e, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, IntPolynomial) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def is_zero(self):
        return not self.terms

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    @cached_property
    def denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.terms.values())) if self.terms else 1

    @cached_property
    def _int_terms(self):
        D = self.denominator
        return [(int(c * D), e) for e, c in self.terms.items()]

    def substitute(self, polys: Sequence["IntPolynomial"]) -> "IntPolynomial":
        """Compose with ``polys`` (one per variable, all in a common ring)."""
        if len(polys) != self.nvars:
            raise ValueError("need one polynomial per variable")
        nv = polys[0].nvars if polys else 0
        out = IntPolynomial(nv)
        for e, c in self.terms.items():
            mono = IntPolynomial.const(nv, c)
            for p, k in zip(polys, e):
                if k:
                    mono = mono * p ** k
            out = out + mono
        return out

    # evaluation ---------------------------------------------------------

    def __call__(self, *values) -> Fraction:
        return self.evaluate(values)

    def evaluate(self, values: Sequence) -> Fraction:
        total = 0
        for num, e in self._int_terms:
            t = num
            for v, k in zip(values, e):
                if k:
                    t *= v ** k
            total += t
        return Fraction(total, self.denominator)

    def evaluate_int(self, values: Sequence[int]) -> int:
        total = 0
        for num, e in self._int_terms:
            t = num
            for v, k in zip(values, e):
                if k:
                    t *= v ** k
            total += t
        q, r = divmod(total, self.denominator)
        if r:
            raise NonIntegerResult(f"polynomial {self} is not integral at {tuple(values)}")
        return q

    def evaluate_mod(self, columns: Sequence[np.ndarray], n: int) -> np.ndarray:
        """Values mod ``n`` at arrays of residues; denominators must be units mod ``n``."""
        if math.gcd(self.denominator, n) != 1:
            raise ValueError("denominator not invertible mod n")
        shape = np.broadcast(*columns).shape if columns else ()
        out = np.zeros(shape, dtype=np.int64)
        dinv = pow(self.denominator, -1, n)
        cache = {}
        for num, e in self._int_terms:
            t = np.full(shape, (num * dinv) % n, dtype=np.int64)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in cache:
                        base = np.asarray(columns[i], dtype=np.int64) % n
                        acc = np.ones_like(base)
                        for _ in range(k):
                            acc = acc * base % n
                        cache[key] = acc
                    t = t * cache[key] % n
            out = (out + t) % n
        return out

    def evaluate_array(self, columns: Sequence[np.ndarray]) -> np.ndarray:
        """Exact integer values at integer arrays; int64 when safe, else object."""
        cols = [np.asarray(c) for c in columns]
        shape = np.broadcast(*cols).shape if cols else ()
        bound = 0
        mags = [_magnitude(c) for c in cols]
        for num, e in self._int_terms:
            t = abs(num)
            for m, k in zip(mags, e):
                t *= max(m, 1) ** k
            bound += t
        use64 = bound < _INT64_SAFE and all(c.dtype != object for c in cols)
        dtype = np.int64 if use64 else object
        cols = [c.astype(dtype) for c in cols]
        out = np.zeros(shape, dtype=dtype)
        for num, e in self._int_terms:
            t = np.full(shape, num, dtype=dtype)
            for c, k in zip(cols, e):
                for _ in range(k):
                    t = t * c
            out = out + t
        D = self.denominator
        if D != 1:
            q, r = np.divmod(out, D) if use64 else (out // D, out % D)
            if np.any(r != 0):
                raise NonIntegerResult(f"polynomial {self} is not integral on the sample")
            out = q
        return out

    def __str__(self):
        return self.format()

    def format(self, names: Sequence[str] | None = None):
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ") or "0"

    def __repr__(self):
        return f"IntPolynomial({self.nvars}, {self.format()!r})"


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_]*\d*)|(\*\*|[-+*/^()]))")


def parse_polynomial(text: str, names: Sequence[str], line: int | None = None) -> IntPolynomial:
    """Parse ``+ - * / ^ ( )`` with integer literals; ``/`` needs an integer
    divisor.  Adjacent factors multiply, so ``X2W3`` means ``X2*W3``."""
    index = {nm: i for i, nm in enumerate(names)}
    lowered = {nm.lower(): i for i, nm in enumerate(names)}
    nv = len(names)
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r} in polynomial", line)
        pos = m.end()
        if m.group(1):
            toks.append(("num", int(m.group(1))))
        elif m.group(2):
            nm = m.group(2)
            if nm in index:
                toks.append(("var", index[nm]))
            elif nm.lower() in lowered:
                toks.append(("var", lowered[nm.lower()]))
            else:
                raise ParseError(f"unknown variable {nm!r}", line)
        else:
            op = m.group(3)
            toks.append(("op", "^" if op == "**" else op))
    toks.append(("end", None))
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        i += 1
        return toks[i - 1]

    def expr():
        out = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term():
        out = unary()
        while True:
            tok = peek()
            if tok == ("op", "*"):
                take()
                out = out * unary()
            elif tok == ("op", "/"):
                take()
                kind, val = take()
                if kind != "num" or val == 0:
                    raise ParseError("'/' must be followed by a nonzero integer", line)
                out = out / val
            elif tok[0] in ("num", "var") or tok == ("op", "("):
                out = out * power()
            else:
                return out

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num":
                raise ParseError("exponent must be a non-negative integer", line)
            base = base ** val
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return IntPolynomial.const(nv, val)
        if kind == "var":
            return IntPolynomial.var(nv, val)
        if (kind, val) == ("op", "("):
            out = expr()
            if take() != ("op", ")"):
                raise ParseError("missing ')'", line)
            return out
        raise ParseError(f"unexpected token {val!r}", line)

    out = expr()
    if peek()[0] != "end":
        raise ParseError(f"trailing input near token {peek()[1]!r}", line)
    return out
