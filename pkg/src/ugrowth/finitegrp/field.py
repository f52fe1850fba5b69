"""Finite fields F_q as integer codes 0..q-1.

The base-p digits of a code are the coefficients of a polynomial of degree
< k, reduced modulo a fixed monic irreducible of degree k.  Addition and
multiplication are table lookups; the multiplication table is built from
discrete logarithms of a primitive element.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import sympy

from ..errors import InputError, MemoryBudget, NotPrimePower, ReducibleModulus

TABLE_CAP = 1 << 12     # largest q for which full q x q tables are built
MODULUS_CAP = 1 << 16


def prime_power(q: int):
    """(p, k) with q = p^k, else NotPrimePower."""
    if not isinstance(q, int) or q < 2:
        raise NotPrimePower(f"{q!r} is not a prime power")
    f = sympy.factorint(q)
    if len(f) != 1:
        raise NotPrimePower(f"{q} is not a prime power")
    (p, k), = f.items()
    return int(p), int(k)


# --- polynomials over F_p as coefficient lists, lowest degree first ---------
def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a: Sequence[int], m: Sequence[int], p: int) -> list:
    a = _trim([x % p for x in a])
    m = _trim([x % p for x in m])
    inv_lead = pow(m[-1], -1, p)
    while len(a) >= len(m):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, x in enumerate(m):
            a[shift + i] = (a[shift + i] - c * x) % p
        _trim(a)
    return a


def _polymul(a: Sequence[int], b: Sequence[int], p: int) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _monic(deg: int, code: int, p: int) -> list:
    """Monic polynomial x^deg + sum c_i x^i, with code = sum c_i p^i."""
    coeffs = []
    for _ in range(deg):
        coeffs.append(code % p)
        code //= p
    return coeffs + [1]


def is_irreducible(m: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg(m)/2."""
    m = _trim([x % p for x in m])
    k = len(m) - 1
    if k < 1:
        return False
    for deg in range(1, k // 2 + 1):
        for code in range(p ** deg):
            if not _polymod(m, _monic(deg, code, p), p):
                return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p: int, k: int) -> tuple:
    """Lexicographically least monic irreducible of degree k over F_p.

    Candidates x^k + sum c_i x^i are ordered by the integer sum c_i p^i."""
    if k == 1:
        return (0, 1)
    if p ** k > MODULUS_CAP:
        raise InputError(f"no default modulus for q = {p}^{k} > 2^16; pass one explicitly")
    for code in range(p ** k):
        m = _monic(k, code, p)
        if is_irreducible(m, p):
            return tuple(m)
    raise AssertionError("irreducible polynomials exist in every degree")


def parse_modulus(spec, p: int) -> tuple:
    """Accept a coefficient list (lowest degree first) or a string like 'x^2+x+1'."""
    if isinstance(spec, str):
        x = sympy.Symbol("x")
        poly = sympy.Poly(sympy.sympify(spec.replace("^", "**")), x)
        return tuple(int(c) % p for c in reversed(poly.all_coeffs()))
    return tuple(int(c) % p for c in spec)


class Field:
    """F_q with add/mul/neg/inv tables indexed by element codes."""

    def __init__(self, q: int, modulus=None):
        p, k = prime_power(q)
        if q > TABLE_CAP:
            raise MemoryBudget(f"q = {q} exceeds the table cap {TABLE_CAP}")
        self.q, self.p, self.k = q, p, k
        if k == 1:
            self.modulus = None
        else:
            m = default_modulus(p, k) if modulus is None else parse_modulus(modulus, p)
            m = tuple(_trim(list(m)))
            if len(m) != k + 1:
                raise ReducibleModulus(f"modulus must have degree {k}")
            if m[-1] != 1:
                inv = pow(m[-1], -1, p)
                m = tuple(c * inv % p for c in m)
            if not is_irreducible(m, p):
                raise ReducibleModulus(f"{self.modulus_str(m)} is reducible over F_{p}")
            self.modulus = m
        self._build_tables()

    # codes <-> digit vectors
    def digits(self, x: int) -> list:
        out = []
        for _ in range(self.k):
            out.append(x % self.p)
            x //= self.p
        return out

    def code(self, digits: Sequence[int]) -> int:
        c = 0
        for d in reversed(list(digits)[:self.k]):
            c = c * self.p + d % self.p
        return c

    def _mul_slow(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        prod = _polymul(_trim(self.digits(a)), _trim(self.digits(b)), self.p)
        return self.code(_polymod(prod, self.modulus, self.p) + [0] * self.k)

    def _build_tables(self):
        q, p = self.q, self.p
        codes = np.arange(q, dtype=np.int64)
        dig = np.stack([(codes // p ** i) % p for i in range(self.k)])        # k x q
        weights = np.array([p ** i for i in range(self.k)], dtype=np.int64)
        summed = (dig[:, :, None] + dig[:, None, :]) % p
        self.add = np.tensordot(weights, summed, axes=1).astype(np.int32)
        self.neg = np.tensordot(weights, (-dig) % p, axes=1).astype(np.int32)
        # discrete logs of a primitive element
        g = self._primitive()
        exp = np.empty(q - 1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            x = self._mul_slow(x, g)
        log = np.zeros(q, dtype=np.int64)
        log[exp] = np.arange(q - 1)
        la = log[:, None] + log[None, :]
        mul = exp[la % (q - 1)]
        mul[0, :] = 0
        mul[:, 0] = 0
        self.mul = mul.astype(np.int32)
        self.inv = np.zeros(q, dtype=np.int32)
        self.inv[exp] = exp[(-np.arange(q - 1)) % (q - 1)]
        self.generator = g

    def _primitive(self) -> int:
        q = self.q
        if q == 2:
            return 1
        ps = list(sympy.factorint(q - 1))
        for g in range(2, q):
            if all(self._pow_slow(g, (q - 1) // r) != 1 for r in ps):
                return g
        raise AssertionError("multiplicative group is cyclic")

    def _pow_slow(self, a: int, n: int) -> int:
        out, base = 1, a
        while n:
            if n & 1:
                out = self._mul_slow(out, base)
            base = self._mul_slow(base, base)
            n >>= 1
        return out

    # scalar helpers
    def sub(self, a: int, b: int) -> int:
        return int(self.add[a, self.neg[b]])

    def from_int(self, n: int) -> int:
        """Image of an integer in the prime subfield."""
        return n % self.p

    def from_fraction(self, x) -> int:
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise InputError(f"{x} is not {self.p}-integral")
        return int(self.mul[x.numerator % self.p, self.inv[x.denominator % self.p]])

    def modulus_str(self, m: Optional[Sequence[int]] = None) -> str:
        m = self.modulus if m is None else m
        if m is None:
            return ""
        terms = []
        for i in range(len(m) - 1, -1, -1):
            c = m[i]
            if not c:
                continue
            mono = "1" if i == 0 else ("x" if i == 1 else f"x^{i}")
            terms.append(mono if c == 1 and i else (f"{c}" if i == 0 else f"{c}*{mono}"))
        return "+".join(terms)
