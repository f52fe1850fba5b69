"""Projective space over Q_p or R: distances, Lipschitz constants, proximality.

Real-place distances are computed squared and exactly whenever the inputs
live in one field; the square root is only taken when a Magnitude is
requested.  Finite-place distances are exact valuations of minors.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import DimensionMismatch, IncompatibleFields, NotInNormalForm, Singular
from .linalg import Mat, op_norm
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
    scalar_record,
    sign,
    sqrt_bounds,
    vp,
)

__all__ = [
    "ProjPoint", "ProjHyperplane", "ProximalityReport", "proj_dist", "proj_dist_sq",
    "lipschitz_bound", "check_proximal", "e1_point", "coordinate_hyperplane",
    "dist_upper", "dist_lower",
]


@dataclass(frozen=True)
class ProjPoint:
    coords: tuple

    def __post_init__(self):
        c = tuple(x if isinstance(x, (Fraction, Quad)) else Fraction(x) for x in self.coords)
        if all(x == 0 for x in c):
            raise ValueError("zero vector has no projective class")
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def same_as(self, other: "ProjPoint") -> bool:
        u, v = self.coords, other.coords
        return all(u[i] * v[j] - u[j] * v[i] == 0 for i, j in combinations(range(len(u)), 2))

    def image(self, m: Mat) -> "ProjPoint":
        return ProjPoint(m.apply(self.coords))

    def to_record(self):
        return [scalar_record(x) for x in self.coords]


@dataclass(frozen=True)
class ProjHyperplane:
    covector: tuple

    def __post_init__(self):
        c = tuple(x if isinstance(x, (Fraction, Quad)) else Fraction(x) for x in self.covector)
        if all(x == 0 for x in c):
            raise ValueError("zero covector")
        object.__setattr__(self, "covector", c)

    @property
    def dim(self) -> int:
        return len(self.covector)

    def contains(self, pt: ProjPoint) -> bool:
        return _pair(self.covector, pt.coords) == 0

    def image(self, m: Mat) -> "ProjHyperplane":
        # m(H) has covector c m^-1
        mi = m.inverse()
        return ProjHyperplane(tuple(_pair(self.covector, mi.column(j)) for j in range(m.d)))

    def is_coordinate(self) -> bool:
        """True for the hyperplane spanned by e_2, ..., e_d."""
        return self.covector[0] != 0 and all(x == 0 for x in self.covector[1:])

    def to_record(self):
        return [scalar_record(x) for x in self.covector]


def e1_point(d: int) -> ProjPoint:
    return ProjPoint(tuple(Fraction(int(i == 0)) for i in range(d)))


def coordinate_hyperplane(d: int) -> ProjHyperplane:
    return ProjHyperplane(tuple(Fraction(int(i == 0)) for i in range(d)))


def _pair(c, v):
    s = Fraction(0)
    for x, y in zip(c, v):
        if x != 0 and y != 0:
            s = s + x * y
    return s


def _sq_norm(v):
    s = Fraction(0)
    for x in v:
        if x != 0:
            s = s + x * x
    return s


def _wedge(u, v):
    return [u[i] * v[j] - u[j] * v[i] for i, j in combinations(range(len(u)), 2)]


def proj_dist_sq(u: ProjPoint, v) -> object:
    """Exact squared real-place distance (point-point or point-hyperplane)."""
    if isinstance(v, ProjHyperplane):
        if v.dim != u.dim:
            raise DimensionMismatch("dimension mismatch")
        return _pair(v.covector, u.coords) ** 2 / (_sq_norm(u.coords) * _sq_norm(v.covector))
    if v.dim != u.dim:
        raise DimensionMismatch("dimension mismatch")
    return _sq_norm(_wedge(u.coords, v.coords)) / (_sq_norm(u.coords) * _sq_norm(v.coords))


def _interval_dist_sq(u: ProjPoint, v, bits: int) -> Interval:
    uu = [enclose(x, bits) for x in u.coords]

    def sqn(vec):
        s = Interval.point(0)
        for x in vec:
            s = s + x.square()
        return s

    if isinstance(v, ProjHyperplane):
        cc = [enclose(x, bits) for x in v.covector]
        num = Interval.point(0)
        for a, b in zip(cc, uu):
            num = num + a * b
        num = num.square()
        den = sqn(uu) * sqn(cc)
    else:
        vv = [enclose(x, bits) for x in v.coords]
        num = sqn([uu[i] * vv[j] - uu[j] * vv[i] for i, j in combinations(range(len(uu)), 2)])
        den = sqn(uu) * sqn(vv)
    q = num / den
    return Interval(max(q.lo, Fraction(0)), min(q.hi, Fraction(1)))


def dist_sq_enclosure(u: ProjPoint, v, bits: int = 64) -> Interval:
    try:
        val = proj_dist_sq(u, v)
    except IncompatibleFields:
        return _interval_dist_sq(u, v, bits)
    return enclose(val, bits).round_out(bits + 4) if isinstance(val, Quad) else Interval.point(val)


def _finite_exp(vec, p):
    vals = [vp(x, p) for x in vec if x != 0]
    return min(vals) if vals else None


def proj_dist(u: ProjPoint, v, place: Place, precision: int = 64) -> Magnitude:
    if v.dim != u.dim:
        raise DimensionMismatch("dimension mismatch")
    if place.is_real:
        sq = dist_sq_enclosure(u, v, precision + 4)
        if sq.hi == 0:
            return ZERO
        return RealInterval(sqrt_bounds(sq.lo, precision)[0], sqrt_bounds(sq.hi, precision)[1])
    for x in u.coords + (v.covector if isinstance(v, ProjHyperplane) else v.coords):
        abs_at_place(x, place)  # rejects irrational entries
    p = place.p
    if isinstance(v, ProjHyperplane):
        num = _pair(v.covector, u.coords)
        den = _finite_exp(u.coords, p) + _finite_exp(v.covector, p)
    else:
        w = _wedge(u.coords, v.coords)
        num_e = _finite_exp(w, p)
        if num_e is None:
            return ZERO
        return PPower(num_e - _finite_exp(u.coords, p) - _finite_exp(v.coords, p), p)
    if num == 0:
        return ZERO
    return PPower(vp(num, p) - den, p)


def dist_upper(m: Magnitude) -> Fraction:
    """Rational upper bound of a distance magnitude (p-adic values are exact powers)."""
    if isinstance(m, Zero):
        return Fraction(0)
    if isinstance(m, PPower):
        e = m.exponent
        if e.denominator != 1:
            raise ValueError("fractional exponent")
        return Fraction(m.p) ** (-int(e))
    return m.hi


def dist_lower(m: Magnitude) -> Fraction:
    if isinstance(m, Zero):
        return Fraction(0)
    if isinstance(m, PPower):
        return dist_upper(m)
    return m.lo


def lipschitz_bound(b: Mat, place: Place, precision: int = 64) -> Magnitude:
    """Certified (||b|| ||b^-1||)^2."""
    if b.det() == 0:
        raise Singular("matrix is singular")
    n1 = op_norm(b, place, precision)
    n2 = op_norm(b.inverse(), place, precision)
    if place.is_real:
        return RealInterval(n1.lo * n2.lo, n1.hi * n2.hi).pow(2)
    return (n1 * n2).pow(2)


@dataclass
class ProximalityReport:
    passed: bool
    eps: Fraction
    place: Place
    restricted_norm: Magnitude
    threshold: Magnitude
    mode: str = "exact"

    def to_record(self) -> dict:
        return {
            "passed": self.passed,
            "eps": str(self.eps),
            "place": self.place.to_record(),
            "restricted_norm": self.restricted_norm.to_record(),
            "threshold": self.threshold.to_record(),
            "mode": self.mode,
        }


def _sub(a: Mat) -> Mat:
    return Mat(tuple(tuple(r[1:]) for r in a.rows[1:]), True)


def _psd(rows) -> bool:
    """Exact positive semidefiniteness via all principal minors."""
    from .linalg import _det

    n = len(rows)
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            if sign(_det(tuple(tuple(rows[i][j] for j in idx) for i in idx))) < 0:
                return False
    return True


def check_proximal(a: Mat, alpha, H: ProjHyperplane, eps, place: Place,
                   precision: int = 64, allow_residual: bool = False) -> ProximalityReport:
    """Certify ||a restricted to H|| <= eps^2 |alpha| for a in proximal normal form."""
    eps = as_fraction(eps)
    d = a.d
    if H.dim != d or not H.is_coordinate():
        raise NotInNormalForm("hyperplane must be span(e_2, ..., e_d)")
    if eps <= 0 or eps > Fraction(1, 4):
        raise NotInNormalForm("eps must lie in (0, 1/4]")
    exact = a[0, 0] == alpha and all(a[i, 0] == 0 for i in range(1, d)) and \
        all(a[0, j] == 0 for j in range(1, d))
    if not exact and not (allow_residual and not place.is_real and a[0, 0] == alpha):
        raise NotInNormalForm("a does not fix e_1 and H")
    if place.is_real:
        sub = _sub(a)
        rn = op_norm(sub, place, precision)
        thr = abs_at_place(alpha, place, precision).scale(eps * eps)
        # ||sub||^2 <= eps^4 alpha^2 iff eps^4 alpha^2 I - sub^T sub is PSD
        S = sub.transpose() * sub
        mu = eps ** 4 * alpha * alpha
        rows = [[(mu if i == j else 0) - S[i, j] for j in range(d - 1)] for i in range(d - 1)]
        ok = _psd(rows)
        return ProximalityReport(ok, eps, place, rn, thr, "exact")
    p = place.p
    amag = abs_at_place(alpha, place)
    if exact:
        entries = [a[i, j] for i in range(1, d) for j in range(1, d)]
        mode = "exact"
    else:
        entries = [a[i, j] for i in range(d) for j in range(d) if (i, j) != (0, 0)]
        mode = "residual"
    rn = max((abs_at_place(x, place) for x in entries if x != 0),
             key=lambda m: -m.exponent, default=ZERO)
    if isinstance(amag, Zero):
        raise NotInNormalForm("alpha is zero")
    # threshold eps^2 |alpha| as a real number; exact test p^-(e_H - e_alpha) <= eps^2
    thr = RealInterval.exact(eps * eps * Fraction(p) ** (-int(amag.exponent))) \
        if amag.exponent.denominator == 1 else amag
    if isinstance(rn, Zero):
        ok = True
    else:
        ok = PPower(rn.exponent - amag.exponent, p).le_value(eps * eps)
    return ProximalityReport(ok, eps, place, rn, thr, mode)
