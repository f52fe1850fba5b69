"""Exact matrices, operator norms, characteristic polynomials and root moduli."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

from .errors import (
    BadDegree,
    DimensionMismatch,
    EigenvalueNotRepresentable,
    PrecisionExhausted,
    QuadraticAtFinitePlace,
    Singular,
)
from .scalars import (
    ZERO,
    Interval,
    Magnitude,
    Place,
    PPower,
    Quad,
    RealInterval,
    Zero,
    abs_at_place,
    as_fraction,
    enclose,
    is_rational,
    mag_max,
    parse_scalar,
    quad,
    scalar_record,
    sign,
    sqrt_bounds,
    vp,
)

__all__ = [
    "Mat", "SpectralData", "op_norm", "char_poly", "spectral_radii",
    "algebra_closure", "exterior_power", "newton_valuations", "norm_sq_upper",
]


def _coerce(x):
    if isinstance(x, Quad):
        return x
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return parse_scalar(x)


class Mat:
    """Immutable square matrix over Q or Q(sqrt D)."""

    __slots__ = ("d", "rows", "_hash", "_det")

    def __init__(self, rows: Sequence[Sequence], _trusted: bool = False):
        if _trusted:
            self.rows = rows
        else:
            rows = tuple(tuple(_coerce(x) for x in r) for r in rows)
            d = len(rows)
            if d < 1 or any(len(r) != d for r in rows):
                raise DimensionMismatch("matrix must be square")
            self.rows = rows
        self.d = len(self.rows)
        self._hash = None
        self._det = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def identity(cls, d: int) -> "Mat":
        one, zero = Fraction(1), Fraction(0)
        return cls(tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d)), True)

    @classmethod
    def zero(cls, d: int) -> "Mat":
        z = Fraction(0)
        return cls(tuple((z,) * d for _ in range(d)), True)

    @classmethod
    def diag(cls, entries) -> "Mat":
        entries = [_coerce(x) for x in entries]
        d = len(entries)
        z = Fraction(0)
        return cls(tuple(tuple(entries[i] if i == j else z for j in range(d)) for i in range(d)), True)

    @classmethod
    def from_record(cls, rec) -> "Mat":
        return cls([[parse_scalar(x) for x in row] for row in rec])

    def to_record(self):
        return [[scalar_record(x) for x in row] for row in self.rows]

    # -- basic access ------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entries(self):
        for r in self.rows:
            yield from r

    @property
    def is_rational(self) -> bool:
        return all(not isinstance(x, Quad) for x in self.entries())

    def column(self, j: int):
        return tuple(r[j] for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def sort_key(self):
        """Canonical total order used for deterministic tie-breaks."""
        out = []
        for x in self.entries():
            if isinstance(x, Quad):
                out.append((x.x, x.y, x.D))
            else:
                out.append((x, Fraction(0), 0))
        return tuple(out)

    def __repr__(self):
        return "Mat(" + repr([[str(x) for x in r] for r in self.rows]) + ")"

    # -- arithmetic --------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, Mat):
            if other.d != self.d:
                raise DimensionMismatch("dimension mismatch")
            cols = list(zip(*other.rows))
            return Mat(tuple(
                tuple(_dot(r, c) for c in cols) for r in self.rows
            ), True)
        c = _coerce(other)
        return Mat(tuple(tuple(x * c for x in r) for r in self.rows), True)

    def __rmul__(self, other):
        c = _coerce(other)
        return Mat(tuple(tuple(c * x for x in r) for r in self.rows), True)

    def __add__(self, other: "Mat") -> "Mat":
        return Mat(tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self.rows, other.rows)), True)

    def __sub__(self, other: "Mat") -> "Mat":
        return Mat(tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(self.rows, other.rows)), True)

    def __neg__(self):
        return Mat(tuple(tuple(-x for x in r) for r in self.rows), True)

    def apply(self, v):
        return tuple(_dot(r, v) for r in self.rows)

    def transpose(self) -> "Mat":
        return Mat(tuple(zip(*self.rows)), True)

    def trace(self):
        t = Fraction(0)
        for i in range(self.d):
            t = t + self.rows[i][i]
        return t

    def __pow__(self, n: int) -> "Mat":
        if n < 0:
            return self.inverse() ** (-n)
        result = Mat.identity(self.d)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def det(self):
        if self._det is None:
            self._det = _det(self.rows)
        return self._det

    def inverse(self) -> "Mat":
        d = self.d
        if d == 2:
            a, b = self.rows[0]
            c, e = self.rows[1]
            det = a * e - b * c
            if det == 0:
                raise Singular("matrix is singular")
            return Mat(((e / det, -b / det), (-c / det, a / det)), True)
        aug = [list(r) + [Fraction(int(i == j)) for j in range(d)] for i, r in enumerate(self.rows)]
        for col in range(d):
            piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
            if piv is None:
                raise Singular("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [x * inv for x in aug[col]]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
        return Mat(tuple(tuple(r[d:]) for r in aug), True)

    def conj(self, g: "Mat", g_inv: Optional["Mat"] = None) -> "Mat":
        """g * self * g^-1."""
        if g_inv is None:
            g_inv = g.inverse()
        return g * self * g_inv

    def is_scalar(self) -> bool:
        c = self.rows[0][0]
        return all(self.rows[i][j] == (c if i == j else 0) for i in range(self.d) for j in range(self.d))

    def is_upper_triangular(self) -> bool:
        return all(self.rows[i][j] == 0 for i in range(self.d) for j in range(i))

def _dot(r, c):
    s = r[0] * c[0]
    for x, y in zip(r[1:], c[1:]):
        if x and y:
            s = s + x * y
    return s


def _det(rows):
    d = len(rows)
    if d == 1:
        return rows[0][0]
    if d == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    m = [list(r) for r in rows]
    det = Fraction(1)
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, d):
            if m[r][col] != 0:
                f = m[r][col] * inv
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


# ---------------------------------------------------------------------------
# characteristic polynomial
# ---------------------------------------------------------------------------
def char_poly(a: Mat) -> list:
    """Coefficients [c_0, ..., c_d] (c_d = 1) of det(x I - a), lowest degree first."""
    d = a.d
    # Faddeev-LeVerrier
    coeffs = [Fraction(0)] * (d + 1)
    coeffs[d] = Fraction(1)
    ident = Mat.identity(d)
    M = Mat.zero(d)
    for k in range(1, d + 1):
        M = a * M + ident * coeffs[d - k + 1]
        coeffs[d - k] = -(a * M).trace() / k
    return coeffs


def format_poly(coeffs) -> str:
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
        if mon and c == 1:
            terms.append(mon)
        elif mon and c == -1:
            terms.append("-" + mon)
        else:
            terms.append(f"{c}{'*' + mon if mon else ''}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


# ---------------------------------------------------------------------------
# operator norms
# ---------------------------------------------------------------------------
def op_norm(a: Mat, place: Place, precision: int = 64) -> Magnitude:
    if not place.is_real:
        return mag_max(abs_at_place(x, place) for x in a.entries())
    if a.d == 1:
        return abs_at_place(a[0, 0], place, precision)
    lam = _top_gram_eigenvalue(a, precision + 4)
    if lam.hi == 0:
        return ZERO
    lo = sqrt_bounds(lam.lo, precision + 4)[0]
    hi = sqrt_bounds(lam.hi, precision + 4)[1]
    return RealInterval(lo, hi)


def norm_sq_upper(a: Mat) -> Fraction:
    """Cheap certified upper bound on the squared spectral norm (Frobenius)."""
    s = Fraction(0)
    for x in a.entries():
        s += enclose(x * x, 20).hi if isinstance(x, Quad) else x * x
    return s


def _top_gram_eigenvalue(a: Mat, bits: int) -> Interval:
    """Enclosure of the largest eigenvalue of a^T a."""
    S = a.transpose() * a
    d = a.d
    if d == 2:
        p, q, r = S[0, 0], S[0, 1], S[1, 1]
        disc = (p - r) * (p - r) + 4 * q * q
        tr = p + r
        if is_rational(disc) and is_rational(tr):
            root = tr / 2 + _rat_sqrt(disc) / 2
            return enclose(root, bits) if isinstance(root, Quad) else Interval.point(root)
        iv_disc = enclose(disc, bits + 8)
        iv = (enclose(tr, bits + 8) + iv_disc.sqrt(bits + 8)) * Fraction(1, 2)
        return Interval(max(iv.lo, Fraction(0)), iv.hi)
    return _psd_top_eigenvalue(S, bits)


def _rat_sqrt(q: Fraction):
    """sqrt of a nonnegative rational as an exact scalar: sqrt(n/m) = sqrt(n*m)/m."""
    if q == 0:
        return Fraction(0)
    return quad(0, Fraction(1, q.denominator), q.numerator * q.denominator)


def _float_top_eigen(S: Mat) -> float:
    d = S.d
    F = [[float(x) for x in r] for r in S.rows]
    v = [1.0 + 0.1 * i for i in range(d)]
    lam = 0.0
    for _ in range(200):
        w = [sum(F[i][j] * v[j] for j in range(d)) for i in range(d)]
        n = max(abs(x) for x in w)
        if n == 0:
            return 0.0
        v = [x / n for x in w]
        lam = n
    return lam


def _is_pos_def(S: Mat, mu: Fraction) -> bool:
    """Exact test that mu*I - S is positive definite (leading minors > 0)."""
    d = S.d
    m = [[(mu if i == j else 0) - S[i, j] for j in range(d)] for i in range(d)]
    for col in range(d):
        piv = m[col][col]
        if sign(piv) <= 0:
            return False
        inv = 1 / piv
        for r in range(col + 1, d):
            if m[r][col] != 0:
                f = m[r][col] * inv
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return True


def _psd_top_eigenvalue(S: Mat, bits: int) -> Interval:
    """Bisection on exact positive-definiteness of mu*I - S."""
    upper = Fraction(0)
    for i in range(S.d):
        upper += enclose(S[i, i], 30).hi
    if upper == 0:
        return Interval.point(0)
    lower = Fraction(0)
    est = _float_top_eigen(S)
    scale = Fraction(1, 1 << bits)
    if est > 0:
        guess = Fraction(est)
        for rel in (Fraction(1, 1 << 40), Fraction(1, 1 << 20), Fraction(1, 1 << 8)):
            hi = guess * (1 + rel)
            lo = guess * (1 - rel)
            if lo >= lower and hi <= upper and _is_pos_def(S, hi) and not _is_pos_def(S, lo):
                lower, upper = lo, hi
                break
    target = scale * max(upper, Fraction(1))
    while upper - lower > target:
        mid = (lower + upper) / 2
        mid = Fraction(round(mid * (1 << (bits + 8))), 1 << (bits + 8)) if mid.denominator > (1 << (bits + 8)) else mid
        if not lower < mid < upper:
            break
        if _is_pos_def(S, mid):
            upper = mid
        else:
            lower = mid
    return Interval(lower, upper)


# ---------------------------------------------------------------------------
# spectral data
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SpectralData:
    char_poly: tuple
    Lambda: Magnitude
    lambda2: Magnitude
    top_eigenvalue_in_field: Optional[object] = None
    ordered: bool = True
    moduli: tuple = field(default=(), compare=False)
    valuations: Optional[tuple] = None

    def gap_certified(self, factor=2) -> bool:
        """Certified Lambda >= factor * lambda2."""
        L, l2 = self.Lambda, self.lambda2
        if isinstance(L, Zero):
            return False
        if isinstance(l2, Zero):
            return True
        if isinstance(L, PPower):
            return PPower(L.exponent - l2.exponent, L.p).ge_value(factor)
        return L.lo >= l2.hi * factor

    def gap_refuted(self, factor=2) -> bool:
        L, l2 = self.Lambda, self.lambda2
        if isinstance(L, Zero):
            return True
        if isinstance(l2, Zero):
            return False
        if isinstance(L, PPower):
            return not PPower(L.exponent - l2.exponent, L.p).ge_value(factor)
        return L.hi < l2.lo * factor


def newton_valuations(coeffs, p: int) -> list:
    """Root valuations (ascending, None for the root 0) from the lower hull."""
    pts = [(i, vp(c, p)) for i, c in enumerate(coeffs) if c != 0]
    zero_roots = pts[0][0]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop middle point if it lies on or above the segment
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    vals = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = Fraction(y2 - y1, x2 - x1)
        vals.extend([-slope] * (x2 - x1))
    vals.sort()
    return vals + [None] * zero_roots


_spectral_cache: dict = {}


def spectral_radii(a: Mat, place: Place, precision: int = 64) -> SpectralData:
    key = (a, place, precision)
    hit = _spectral_cache.get(key)
    if hit is not None:
        return hit
    if place.is_real:
        res = _spectral_real(a, precision)
    else:
        res = _spectral_finite(a, place.p)
    if len(_spectral_cache) > 200000:
        _spectral_cache.clear()
    _spectral_cache[key] = res
    return res


def _spectral_finite(a: Mat, p: int) -> SpectralData:
    if not a.is_rational:
        raise QuadraticAtFinitePlace("irrational entries at a finite place")
    cp = char_poly(a)
    vals = newton_valuations(cp, p)

    def mag(v):
        return ZERO if v is None else PPower(v, p)

    moduli = tuple(mag(v) for v in vals)
    top = None
    if vals[0] is not None and (len(vals) == 1 or vals[1] is None or vals[1] > vals[0]):
        top = _rational_root_with_valuation(cp, vals[0], p)
    return SpectralData(tuple(cp), moduli[0], moduli[1] if len(moduli) > 1 else ZERO,
                        top, True, moduli, tuple(vals))


def _rational_roots(coeffs) -> list:
    """All rational roots of a rational polynomial (lowest degree first)."""
    from sympy import Poly, QQ, Symbol
    x = Symbol("x")
    P = Poly(list(reversed([as_fraction(c) for c in coeffs])), x, domain=QQ)
    out = []
    from sympy import factor_list
    _, facs = factor_list(P)
    for f, _m in facs:
        if f.degree() == 1:
            c1, c0 = f.all_coeffs()
            out.append(Fraction(int((-c0 / c1).p), int((-c0 / c1).q)))
    return out


def _rational_root_with_valuation(coeffs, v, p):
    for r in _rational_roots(coeffs):
        if r != 0 and vp(r, p) == v:
            return r
    return None


def _spectral_real(a: Mat, precision: int) -> SpectralData:
    cp = char_poly(a)
    d = a.d
    if d == 2:
        return _spectral_real_2(a, cp, precision)
    if any(isinstance(c, Quad) for c in cp):
        raise EigenvalueNotRepresentable("quadratic characteristic polynomial in dimension > 2")
    roots = _isolate_roots(cp, precision)
    moduli = sorted(roots, key=lambda r: (r[0].hi, r[0].lo), reverse=True)
    mods = [m for m, _ in moduli]
    L = _order_stat(mods, 0)
    l2 = _order_stat(mods, 1)
    ordered = len(mods) < 2 or _disjoint_top(mods)
    top = None
    exact_top = [] if isinstance(L, Zero) else [
        val for m, val in moduli if val is not None and m.lo == L.lo == L.hi]
    if exact_top and ordered:
        top = exact_top[0]
    return SpectralData(tuple(cp), L, l2, top, ordered, tuple(mods))


def _order_stat(mods, k) -> Magnitude:
    """Enclosure of the k-th largest value among a family of enclosures."""
    if k >= len(mods):
        return ZERO
    his = sorted((m.hi for m in mods), reverse=True)
    los = sorted((m.lo for m in mods), reverse=True)
    if his[k] == 0:
        return ZERO
    return RealInterval(los[k], his[k])


def _disjoint_top(mods) -> bool:
    top = max(mods, key=lambda m: m.lo)
    return all(m is top or m.hi < top.lo or (m.lo == m.hi == top.lo == top.hi) for m in mods)


def _spectral_real_2(a: Mat, cp, precision: int) -> SpectralData:
    det, tr = cp[0], -cp[1]
    disc = tr * tr - 4 * det
    s = sign(disc)
    bits = precision + 8
    if s < 0:
        # complex pair, both of modulus sqrt(det)
        iv = enclose(det, bits)
        lo, hi = sqrt_bounds(iv.lo, bits)[0], sqrt_bounds(iv.hi, bits)[1]
        m = RealInterval(lo, hi)
        return SpectralData(tuple(cp), m, m, None, False, (m, m))
    if is_rational(disc) and is_rational(tr):
        root_disc = _rat_sqrt(disc)
        r1 = (tr + root_disc) / 2
        r2 = (tr - root_disc) / 2
        if sign(tr) < 0:
            r1, r2 = r2, r1
        m1, m2 = abs_at_place(r1, Place(None), bits), abs_at_place(r2, Place(None), bits)
        ordered = disc != 0 and sign(tr) != 0
        return SpectralData(tuple(cp), m1, m2, r1, ordered, (m1, m2))
    # quadratic coefficients: enclosures only
    sd = enclose(disc, bits + 8).sqrt(bits + 8)
    t = enclose(tr, bits + 8)
    e1 = abs((t + sd) * Fraction(1, 2)).round_out(bits)
    e2 = abs((t - sd) * Fraction(1, 2)).round_out(bits)
    mods = sorted([RealInterval(e1.lo, e1.hi), RealInterval(e2.lo, e2.hi)], key=lambda m: m.hi, reverse=True)
    L = _order_stat(mods, 0)
    l2 = _order_stat(mods, 1)
    return SpectralData(tuple(cp), L, l2, None, _disjoint_top(mods), tuple(mods))


def _isolate_roots(cp, precision: int):
    """(modulus enclosure, exact root or None) for every root with multiplicity."""
    from sympy import Poly, QQ, Symbol, factor_list, Rational

    x = Symbol("x")
    P = Poly([Rational(c.numerator, c.denominator) for c in reversed(cp)], x, domain=QQ)
    _, facs = factor_list(P)
    eps = Rational(1, 2 ** min(precision, 200))
    out = []
    for f, mult in facs:
        deg = f.degree()
        if deg == 1:
            c1, c0 = f.all_coeffs()
            r = -c0 / c1
            r = Fraction(int(r.p), int(r.q))
            out.extend([(RealInterval.exact(r) if r else ZERO, r)] * mult)
            continue
        if deg == 2:
            c2, c1, c0 = [Fraction(int(c.p), int(c.q)) for c in f.all_coeffs()]
            disc = c1 * c1 - 4 * c0 * c2
            if disc > 0:
                rd = _rat_sqrt(disc)
                for r in ((-c1 + rd) / (2 * c2), (-c1 - rd) / (2 * c2)):
                    out.extend([(abs_at_place(r, Place(None), precision + 8), r)] * mult)
                continue
        reals, cplx = f.intervals(all=True, eps=eps)
        for (lo, hi), _m in reals:
            iv = abs(Interval(Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))))
            out.extend([(RealInterval(iv.lo, iv.hi), None)] * mult)
        for (z1, z2), _m in cplx:
            re1, im1 = (Fraction(int(t.p), int(t.q)) for t in z1.as_real_imag())
            re2, im2 = (Fraction(int(t.p), int(t.q)) for t in z2.as_real_imag())
            rsq = Interval(re1, re2).square() + Interval(im1, im2).square()
            lo = sqrt_bounds(rsq.lo, precision + 8)[0]
            hi = sqrt_bounds(rsq.hi, precision + 8)[1]
            out.extend([(RealInterval(lo, hi), None)] * mult)
    res = [(RealInterval(Fraction(0), Fraction(0)), v) if isinstance(m, Zero) else (m, v) for m, v in out]
    if len(res) != len(cp) - 1:
        raise PrecisionExhausted("root isolation lost roots")
    return res


# ---------------------------------------------------------------------------
# associative algebra closure
# ---------------------------------------------------------------------------
def _rref(vectors):
    """Reduced row echelon basis of the span (canonical)."""
    rows = [list(v) for v in vectors]
    basis = []
    pivots = []
    for v in rows:
        v = list(v)
        for b, pc in zip(basis, pivots):
            if v[pc] != 0:
                f = v[pc]
                v = [x - f * y for x, y in zip(v, b)]
        pc = next((i for i, x in enumerate(v) if x != 0), None)
        if pc is None:
            continue
        inv = Fraction(1) / v[pc]
        v = [x * inv for x in v]
        for k, (b, bpc) in enumerate(zip(basis, pivots)):
            if b[pc] != 0:
                f = b[pc]
                basis[k] = [x - f * y for x, y in zip(b, v)]
        basis.append(v)
        pivots.append(pc)
    order = sorted(range(len(basis)), key=lambda k: pivots[k])
    return [basis[k] for k in order]


def _vec(m: Mat):
    return list(m.entries())


def _unvec(v, d):
    return Mat(tuple(tuple(v[i * d:(i + 1) * d]) for i in range(d)), True)


def _span_products(A, B, d):
    return _rref([_vec(x * y) for x in A for y in B])


def algebra_closure(mats) -> tuple:
    """(basis, nilpotent, nilpotency_index) of the algebra generated by the matrices."""
    mats = list(mats)
    if not mats:
        raise ValueError("empty set")
    d = mats[0].d
    basis = _rref([_vec(m) for m in mats])
    while True:
        mats_b = [_unvec(v, d) for v in basis]
        new = _rref([*basis, *(_vec(x * y) for x in mats_b for y in mats_b)])
        if len(new) == len(basis):
            break
        basis = new
    A = [_unvec(v, d) for v in basis]
    power = A
    index = 1
    while power:
        nxt = [_unvec(v, d) for v in _span_products(power, A, d)]
        index += 1
        if not nxt:
            return A, True, index
        if len(nxt) == len(power):
            return A, False, None
        power = nxt
    return A, True, 1


# ---------------------------------------------------------------------------
# compound matrices
# ---------------------------------------------------------------------------
@lru_cache(maxsize=64)
def _index_sets(d: int, j: int):
    return tuple(combinations(range(d), j))


def exterior_power(a: Mat, j: int) -> Mat:
    d = a.d
    if not 1 <= j <= d - 1:
        raise BadDegree(f"degree {j} outside 1..{d - 1}")
    if j == 1:
        return a
    idx = _index_sets(d, j)
    rows = a.rows
    return Mat(tuple(
        tuple(_det(tuple(tuple(rows[r][c] for c in J) for r in I)) for J in idx)
        for I in idx
    ), True)
