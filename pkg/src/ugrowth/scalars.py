"""Exact scalars and certified magnitudes at the places of Q.

Scalars are ``Fraction`` or :class:`Quad` (``x + y*sqrt(D)``).  Arithmetic on
a ``Quad`` collapses back to ``Fraction`` as soon as the irrational part
vanishes, so rational code paths never see a ``Quad`` by accident.

Magnitudes are one of :class:`Zero`, :class:`PPower` (the value ``p**-e`` at a
finite place) or :class:`RealInterval` (a certified enclosure with rational
endpoints).  Real enclosures live on dyadic grids so that refining the
precision only ever shrinks an interval.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Union

from sympy import isprime

from .errors import (
    IncompatibleFields,
    InvalidPlace,
    MixedPlaceKinds,
    NotRealPlace,
    QuadraticAtFinitePlace,
)

__all__ = [
    "Place", "Quad", "quad", "Interval", "Zero", "PPower", "RealInterval",
    "Cmp", "ZERO", "abs_at_place", "mag_compare", "mag_refine", "mag_max",
    "certified_le", "certified_lt", "vp", "sign", "enclose", "sqrt_bounds",
    "root_bounds", "as_fraction", "is_rational", "parse_scalar", "scalar_record",
]

Scalar = Union[Fraction, "Quad"]

_SQUARE_TRIAL_LIMIT = 1000


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


def is_rational(x) -> bool:
    return not isinstance(x, Quad)


def vp(x, p: int) -> int | None:
    """p-adic valuation of a rational; ``None`` stands for +infinity."""
    x = as_fraction(x)
    if x == 0:
        return None
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


# ---------------------------------------------------------------------------
# places
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Place:
    p: int | None = None

    def __post_init__(self):
        if self.p is not None:
            if not isinstance(self.p, int) or self.p < 2 or not isprime(self.p):
                raise InvalidPlace(f"{self.p!r} is not a prime")

    @classmethod
    def real(cls) -> "Place":
        return cls(None)

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls(p)

    @property
    def is_real(self) -> bool:
        return self.p is None

    def __str__(self) -> str:
        return "Real" if self.p is None else f"Finite({self.p})"

    def to_record(self):
        return "real" if self.p is None else {"p": self.p}

    @classmethod
    def parse(cls, text) -> "Place":
        if isinstance(text, Place):
            return text
        if isinstance(text, dict):
            return cls(int(text["p"]))
        t = str(text).strip().lower()
        if t in ("real", "inf", "infinity", "r"):
            return cls(None)
        if t.startswith("finite(") and t.endswith(")"):
            t = t[7:-1]
        if t.startswith("p="):
            t = t[2:]
        try:
            return cls(int(t))
        except ValueError:
            raise InvalidPlace(f"cannot parse place {text!r}") from None


REAL = Place.real()


# ---------------------------------------------------------------------------
# real quadratic scalars
# ---------------------------------------------------------------------------
@lru_cache(maxsize=4096)
def _reduce_radicand(D: int) -> tuple[int, int]:
    """Write D = s*s*r with small square factors pulled out; returns (s, r)."""
    if D <= 0:
        raise ValueError("radicand must be positive")
    r = isqrt(D)
    if r * r == D:
        return r, 1
    s = 1
    k = 2
    while k <= _SQUARE_TRIAL_LIMIT and k * k <= D:
        kk = k * k
        while D % kk == 0:
            D //= kk
            s *= k
        k += 1
    r = isqrt(D)
    if r * r == D:
        return s * r, 1
    return s, D


def quad(x, y, D: int):
    """Return ``x + y*sqrt(D)``, as a Fraction whenever that is exact."""
    x = as_fraction(x)
    y = as_fraction(y)
    if y == 0:
        return x
    s, r = _reduce_radicand(int(D))
    if r == 1:
        return x + y * s
    return Quad(x, y * s, r)


class Quad:
    """``x + y*sqrt(D)`` with rational x, y (y != 0) and D > 1 not a square.

    Small square factors of D are removed on construction; for very large
    discriminants D is only guaranteed not to be a perfect square.
    """

    __slots__ = ("x", "y", "D")

    def __init__(self, x: Fraction, y: Fraction, D: int):
        self.x = x
        self.y = y
        self.D = D

    # -- coercion ----------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Quad):
            if other.D == self.D:
                return other.x, other.y
            # sqrt(D2) = sqrt(D1*D2)/D1 * sqrt(D1) when D1*D2 is a square
            prod = self.D * other.D
            r = isqrt(prod)
            if r * r == prod:
                return other.x, other.y * Fraction(r, self.D)
            raise IncompatibleFields(f"sqrt({self.D}) and sqrt({other.D}) generate different fields")
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return NotImplemented

    def _make(self, x, y):
        if y == 0:
            return x
        return Quad(x, y, self.D)

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self._make(self.x + o[0], self.y + o[1])

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.x, -self.y, self.D)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self._make(self.x - o[0], self.y - o[1])

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self._make(o[0] - self.x, o[1] - self.y)

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        a, b = o
        return self._make(self.x * a + self.y * b * self.D, self.x * b + self.y * a)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.x * self.x - self.D * self.y * self.y

    def conjugate(self) -> "Quad":
        return Quad(self.x, -self.y, self.D)

    def inverse(self):
        n = self.norm()
        return Quad(self.x / n, -self.y / n, self.D)

    def __truediv__(self, other):
        if isinstance(other, Quad):
            return self * other.inverse()
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Quad(self.x / o[0], self.y / o[0], self.D)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self.inverse() * o[0]

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = Fraction(1)
        base = self
        while n:
            if n & 1:
                result = base * result
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison --------------------------------------------------------
    def sign(self) -> int:
        sx = (self.x > 0) - (self.x < 0)
        sy = (self.y > 0) - (self.y < 0)
        if sx == sy or sx == 0:
            return sy
        # opposite signs: compare x^2 with D*y^2
        diff = self.x * self.x - self.D * self.y * self.y
        return sx if diff > 0 else sy

    def __eq__(self, other):
        if isinstance(other, Quad):
            try:
                x, y = self._lift(other)
            except IncompatibleFields:
                return False
            return self.x == x and self.y == y
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        return hash((self.x, self.y, self.D))

    def __lt__(self, other):
        return sign(self - other) < 0

    def __le__(self, other):
        return sign(self - other) <= 0

    def __gt__(self, other):
        return sign(self - other) > 0

    def __ge__(self, other):
        return sign(self - other) >= 0

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def __bool__(self):
        return True

    def __float__(self):
        return float(self.x) + float(self.y) * self.D ** 0.5

    def __repr__(self):
        return f"Quad({self.x}, {self.y}, {self.D})"

    def __str__(self):
        return f"{self.x}+{self.y}*sqrt({self.D})"


def sign(x) -> int:
    if isinstance(x, Quad):
        return x.sign()
    return (x > 0) - (x < 0)


def common_radicand(values) -> int | None:
    """The radicand shared by all Quad values, ``None`` if all rational."""
    D = None
    for v in values:
        if isinstance(v, Quad):
            if D is None:
                D = v.D
            elif v.D != D:
                v._lift(Quad(Fraction(0), Fraction(1), D))  # raises if incompatible
    return D


# ---------------------------------------------------------------------------
# dyadic interval arithmetic
# ---------------------------------------------------------------------------
def _floor_div(n: int, d: int) -> int:
    return n // d


def _ceil_div(n: int, d: int) -> int:
    return -((-n) // d)


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    if k == 1:
        return n
    if k == 2:
        return isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def sqrt_bounds(q, bits: int) -> tuple[Fraction, Fraction]:
    """Nested dyadic enclosure of sqrt(q), exact when q is a rational square."""
    q = as_fraction(q)
    if q < 0:
        raise ValueError("sqrt of a negative number")
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        r = Fraction(rn, rd)
        return r, r
    scale = 1 << bits
    s = isqrt(q.numerator * scale * scale // q.denominator)
    return Fraction(s, scale), Fraction(s + 1, scale)


def root_bounds(q, n: int, bits: int) -> tuple[Fraction, Fraction]:
    """Nested dyadic enclosure of q**(1/n) for q >= 0."""
    q = as_fraction(q)
    if n == 1:
        return q, q
    if q < 0:
        raise ValueError("root of a negative number")
    rn, rd = _iroot(q.numerator, n), _iroot(q.denominator, n)
    if rn ** n == q.numerator and rd ** n == q.denominator:
        r = Fraction(rn, rd)
        return r, r
    scale = 1 << bits
    s = _iroot(q.numerator * scale ** n // q.denominator, n)
    return Fraction(s, scale), Fraction(s + 1, scale)


def _round_down(x: Fraction, bits: int) -> Fraction:
    if x.denominator & (x.denominator - 1) == 0 and x.denominator <= (1 << bits):
        return x
    scale = 1 << bits
    return Fraction(_floor_div(x.numerator * scale, x.denominator), scale)


def _round_up(x: Fraction, bits: int) -> Fraction:
    if x.denominator & (x.denominator - 1) == 0 and x.denominator <= (1 << bits):
        return x
    scale = 1 << bits
    return Fraction(_ceil_div(x.numerator * scale, x.denominator), scale)


@dataclass(frozen=True)
class Interval:
    """Closed interval with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        x = as_fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, Quad):
            return sign(x - self.lo) >= 0 and sign(self.hi - x) >= 0
        return self.lo <= x <= self.hi

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        o = as_fraction(other)
        return Interval(self.lo + o, self.hi + o)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Interval) else -as_fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Interval):
            o = as_fraction(other)
            return Interval(min(self.lo * o, self.hi * o), max(self.lo * o, self.hi * o))
        options = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(options), max(options))

    __rmul__ = __mul__

    def inverse(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        if isinstance(other, Interval):
            return self * other.inverse()
        return self * (1 / as_fraction(other))

    def __rtruediv__(self, other):
        return self.inverse() * as_fraction(other)

    def square(self) -> "Interval":
        a, b = self.lo * self.lo, self.hi * self.hi
        if self.lo <= 0 <= self.hi:
            return Interval(Fraction(0), max(a, b))
        return Interval(min(a, b), max(a, b))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(Fraction(0), max(-self.lo, self.hi))

    def sqrt(self, bits: int) -> "Interval":
        lo = max(self.lo, Fraction(0))
        if self.hi < 0:
            raise ValueError("sqrt of a negative interval")
        return Interval(sqrt_bounds(lo, bits)[0], sqrt_bounds(self.hi, bits)[1])

    def root(self, n: int, bits: int) -> "Interval":
        lo = max(self.lo, Fraction(0))
        return Interval(root_bounds(lo, n, bits)[0], root_bounds(self.hi, n, bits)[1])

    def __pow__(self, n: int) -> "Interval":
        if n == 0:
            return Interval.point(1)
        if n % 2 == 0:
            return self.square() ** (n // 2) if n > 2 else self.square()
        r = self
        for _ in range(n - 1):
            r = r * self
        return r

    def round_out(self, bits: int) -> "Interval":
        return Interval(_round_down(self.lo, bits), _round_up(self.hi, bits))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


def enclose(x, bits: int) -> Interval:
    """Certified enclosure of a scalar, of width at most about 2**-bits * (1+|y|)."""
    if isinstance(x, Quad):
        extra = max(abs(x.y).numerator.bit_length() - abs(x.y).denominator.bit_length(), 0) + 2
        lo, hi = sqrt_bounds(x.D, bits + extra)
        return Interval.point(x.x) + Interval(lo, hi) * x.y
    return Interval.point(x)


# ---------------------------------------------------------------------------
# magnitudes
# ---------------------------------------------------------------------------
class Cmp(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Zero:
    kind = "zero"

    def __mul__(self, other):
        return self

    __rmul__ = __mul__

    def pow(self, n: int):
        return self

    def root(self, n: int, bits: int = 64):
        return self

    def scale(self, c):
        return self

    def to_record(self):
        return {"kind": "zero"}

    def upper(self) -> Fraction:
        return Fraction(0)

    def lower(self) -> Fraction:
        return Fraction(0)

    def __float__(self):
        return 0.0

    def __repr__(self):
        return "Zero"


ZERO = Zero()


@dataclass(frozen=True)
class PPower:
    """The value ``p ** (-exponent)``."""

    exponent: Fraction
    p: int

    kind = "ppower"

    def __post_init__(self):
        object.__setattr__(self, "exponent", as_fraction(self.exponent))

    def __mul__(self, other):
        if isinstance(other, Zero):
            return other
        if isinstance(other, PPower):
            if other.p != self.p:
                raise MixedPlaceKinds("different primes")
            return PPower(self.exponent + other.exponent, self.p)
        raise MixedPlaceKinds("cannot multiply p-adic and real magnitudes")

    def pow(self, n: int):
        return PPower(self.exponent * n, self.p)

    def root(self, n: int, bits: int = 64):
        return PPower(self.exponent / n, self.p)

    def inverse(self):
        return PPower(-self.exponent, self.p)

    def le_value(self, c) -> bool:
        """Exact test of ``p**-e <= c`` for a positive rational c."""
        c = as_fraction(c)
        e = self.exponent
        a, b = -e.numerator, e.denominator  # value = p**(a/b)
        if a >= 0:
            return Fraction(self.p ** a) <= c ** b
        return Fraction(1, self.p ** (-a)) <= c ** b

    def ge_value(self, c) -> bool:
        c = as_fraction(c)
        e = self.exponent
        a, b = -e.numerator, e.denominator
        if a >= 0:
            return Fraction(self.p ** a) >= c ** b
        return Fraction(1, self.p ** (-a)) >= c ** b

    def to_record(self):
        return {"kind": "ppower", "p": self.p, "exponent": str(self.exponent)}

    def __float__(self):
        return float(self.p) ** (-float(self.exponent))

    def __repr__(self):
        return f"PPower({self.exponent}, p={self.p})"


@dataclass(frozen=True)
class RealInterval:
    lo: Fraction
    hi: Fraction

    kind = "interval"

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if not (0 <= lo <= hi):
            raise ValueError(f"bad real magnitude [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def exact(cls, x) -> "RealInterval":
        x = abs(as_fraction(x))
        return cls(x, x)

    @classmethod
    def from_interval(cls, iv: Interval) -> "RealInterval":
        a = abs(iv)
        return cls(a.lo, a.hi)

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __mul__(self, other):
        if isinstance(other, Zero):
            return other
        if isinstance(other, RealInterval):
            return RealInterval(self.lo * other.lo, self.hi * other.hi)
        raise MixedPlaceKinds("cannot multiply real and p-adic magnitudes")

    def scale(self, c) -> "RealInterval":
        c = abs(as_fraction(c))
        return RealInterval(self.lo * c, self.hi * c)

    def pow(self, n: int):
        return RealInterval(self.lo ** n, self.hi ** n)

    def root(self, n: int, bits: int = 64):
        return RealInterval(root_bounds(self.lo, n, bits)[0], root_bounds(self.hi, n, bits)[1])

    def round_out(self, bits: int) -> "RealInterval":
        return RealInterval(_round_down(self.lo, bits), _round_up(self.hi, bits))

    def upper(self) -> Fraction:
        return self.hi

    def lower(self) -> Fraction:
        return self.lo

    def to_record(self):
        return {"kind": "interval", "lo": str(self.lo), "hi": str(self.hi)}

    def __float__(self):
        return float((self.lo + self.hi) / 2)

    def __repr__(self):
        if self.lo == self.hi:
            return f"RealInterval({self.lo})"
        return f"RealInterval({float(self.lo):.6g}, {float(self.hi):.6g})"


Magnitude = Union[Zero, PPower, RealInterval]


def magnitude_from_record(rec) -> Magnitude:
    kind = rec["kind"]
    if kind == "zero":
        return ZERO
    if kind == "ppower":
        return PPower(Fraction(rec["exponent"]), int(rec["p"]))
    if kind == "interval":
        return RealInterval(Fraction(rec["lo"]), Fraction(rec["hi"]))
    raise ValueError(f"unknown magnitude kind {kind!r}")


def mag_compare(m1: Magnitude, m2: Magnitude) -> Cmp:
    if isinstance(m1, Zero) and isinstance(m2, Zero):
        return Cmp.EQUAL
    if isinstance(m1, Zero):
        return _flip(mag_compare(m2, m1))
    if isinstance(m2, Zero):
        if isinstance(m1, PPower):
            return Cmp.GREATER
        if m1.hi == 0:
            return Cmp.EQUAL
        return Cmp.GREATER if m1.lo > 0 else Cmp.INCONCLUSIVE
    if isinstance(m1, PPower) and isinstance(m2, PPower):
        if m1.p != m2.p:
            raise MixedPlaceKinds("magnitudes at different primes")
        if m1.exponent == m2.exponent:
            return Cmp.EQUAL
        return Cmp.GREATER if m1.exponent < m2.exponent else Cmp.LESS
    if isinstance(m1, RealInterval) and isinstance(m2, RealInterval):
        if m1.lo == m1.hi == m2.lo == m2.hi:
            return Cmp.EQUAL
        if m1.hi < m2.lo:
            return Cmp.LESS
        if m1.lo > m2.hi:
            return Cmp.GREATER
        return Cmp.INCONCLUSIVE
    raise MixedPlaceKinds(f"cannot compare {m1!r} with {m2!r}")


def _flip(c: Cmp) -> Cmp:
    return {Cmp.LESS: Cmp.GREATER, Cmp.GREATER: Cmp.LESS}.get(c, c)


def certified_le(m1: Magnitude, m2: Magnitude) -> bool:
    """True only when m1 <= m2 holds for every value the enclosures allow."""
    if isinstance(m1, RealInterval) and isinstance(m2, RealInterval):
        return m1.hi <= m2.lo
    if isinstance(m1, Zero):
        return True
    return mag_compare(m1, m2) in (Cmp.LESS, Cmp.EQUAL)


def certified_lt(m1: Magnitude, m2: Magnitude) -> bool:
    return mag_compare(m1, m2) is Cmp.LESS


def mag_max(mags) -> Magnitude:
    """Certified enclosure of the maximum of a nonempty family."""
    mags = list(mags)
    if not mags:
        raise ValueError("max of an empty family")
    nz = [m for m in mags if not isinstance(m, Zero)]
    if not nz:
        return ZERO
    if isinstance(nz[0], PPower):
        return min(nz, key=lambda m: m.exponent)
    return RealInterval(max(m.lo for m in nz), max(m.hi for m in nz))


def mag_min(mags) -> Magnitude:
    mags = list(mags)
    if any(isinstance(m, Zero) for m in mags):
        return ZERO
    if isinstance(mags[0], PPower):
        return max(mags, key=lambda m: m.exponent)
    return RealInterval(min(m.lo for m in mags), min(m.hi for m in mags))


def _dyadic_abs(x, bits: int) -> RealInterval:
    iv = enclose(x, bits + 2)
    return RealInterval.from_interval(iv.round_out(bits))


def abs_at_place(x, place: Place, precision: int = 64) -> Magnitude:
    """|x| at the place: exact exponent at Finite(p), dyadic enclosure at Real."""
    if not isinstance(place, Place):
        raise InvalidPlace(f"not a place: {place!r}")
    if isinstance(x, int):
        x = Fraction(x)
    if place.is_real:
        if x == 0:
            return ZERO
        if not isinstance(x, Quad):
            return RealInterval.exact(x)
        # width <= 2**-precision * max(1, |x|)
        mag = abs(float(x))
        bits = precision + max(0, int(mag).bit_length())
        return _dyadic_abs(x, bits)
    if isinstance(x, Quad):
        raise QuadraticAtFinitePlace(f"{x} has an irrational part; unsupported at {place}")
    v = vp(x, place.p)
    if v is None:
        return ZERO
    return PPower(Fraction(v), place.p)


def mag_refine(x, place: Place, target_width) -> Magnitude:
    """Real enclosure of |x| of width <= target_width, nested under refinement."""
    if not place.is_real:
        raise NotRealPlace("refinement only applies at the real place")
    target_width = as_fraction(target_width)
    if isinstance(x, int):
        x = Fraction(x)
    if x == 0:
        return ZERO
    if not isinstance(x, Quad):
        return RealInterval.exact(x)
    bits = max(1, -(target_width.numerator.bit_length() - target_width.denominator.bit_length()) + 2)
    while True:
        r = _dyadic_abs(x, bits)
        if r.width <= target_width:
            return r
        bits += 1


def parse_scalar(value):
    """Parse "n/d" strings, ints, or {x, y, D} records."""
    if isinstance(value, dict):
        return quad(Fraction(value["x"]), Fraction(value["y"]), int(value["D"]))
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise ValueError(f"cannot parse scalar {value!r}")


def scalar_record(x):
    if isinstance(x, Quad):
        return {"x": _frac_str(x.x), "y": _frac_str(x.y), "D": x.D}
    return _frac_str(as_fraction(x))


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
