"""Explicit conjugations: norm-to-spectral reduction, proximal normal form and
the p-adic splitting of the top eigenvalue.

Every construction certifies its own bounds before returning; a failed bound
raises ``ConjugatorBoundViolated`` rather than returning a weaker object.
Bounds that are not invariant under scaling (the norm of h, the norm of a)
are evaluated on the determinant-normalized matrices, since the constructions
live in SL_d and our rational conjugators only agree with them up to scalars.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    ConjugatorBoundViolated,
    EigenvalueNotRepresentable,
    NoSpectralGap,
    NotTriangularizableInField,
    PrecisionExhausted,
    SlopeNotSeparated,
)
from .linalg import Mat, _rational_roots, _rref, char_poly, op_norm, spectral_radii
from .projective import ProjHyperplane, ProjPoint, check_proximal, coordinate_hyperplane, proj_dist_sq
from .scalars import (
    ZERO,
    Interval,
    Magnitude,
    Place,
    PPower,
    RealInterval,
    Zero,
    abs_at_place,
    enclose,
    magnitude_from_record,
    parse_scalar,
    root_bounds,
    scalar_record,
    vp,
)

__all__ = [
    "ProximalForm", "reduce_norm_to_spectral", "proximal_normal_form",
    "padic_eigen_split", "kernel_vector", "image_basis",
]

PRECISION_CAP = 512


# ---------------------------------------------------------------------------
# exact linear algebra helpers
# ---------------------------------------------------------------------------
def _shift(a: Mat, lam) -> Mat:
    return Mat(tuple(tuple(x - lam if i == j else x for j, x in enumerate(r))
                     for i, r in enumerate(a.rows)), True)


def kernel_vector(M: Mat):
    """A nonzero vector of the kernel (first free variable set to 1)."""
    d = M.d
    rows = [list(r) for r in M.rows]
    piv_cols = []
    r = 0
    for c in range(d):
        piv = next((i for i in range(r, d) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(d):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(d) if c not in piv_cols]
    if not free:
        return None
    fc = free[0]
    v = [Fraction(0)] * d
    v[fc] = Fraction(1)
    for i, pc in enumerate(piv_cols):
        v[pc] = -rows[i][fc]
    return tuple(v)


def image_basis(M: Mat) -> list:
    return _rref([list(M.column(j)) for j in range(M.d)])


def _from_columns(cols) -> Mat:
    d = len(cols)
    return Mat(tuple(tuple(cols[c][r] for c in range(d)) for r in range(d)), True)


def _primitive(v, p: int):
    """Scale a rational vector so that its sup norm at p equals 1."""
    e = min(vp(x, p) for x in v if x != 0)
    s = Fraction(p) ** (-e)
    return tuple(x * s for x in v)


def _block(a: Mat) -> Mat:
    return Mat(tuple(tuple(r[1:]) for r in a.rows[1:]), True)


def _embed(alpha, B: Mat) -> Mat:
    """1 x 1 block (alpha) direct sum with B."""
    z = Fraction(0)
    rows = [tuple([alpha] + [z] * B.d)]
    for r in B.rows:
        rows.append(tuple([z] + list(r)))
    return Mat(tuple(rows), True)


def _det_abs_mag(m: Mat, place: Place, precision: int) -> Magnitude:
    return abs_at_place(m.det(), place, precision)


# ---------------------------------------------------------------------------
# triangularization
# ---------------------------------------------------------------------------
def _triangularize_rational(a: Mat, first=None) -> Mat:
    """P with P^-1 a P upper triangular; needs every eigenvalue rational.

    The eigenvalue ``first``, when given, is placed in the top-left corner."""
    d = a.d
    if d == 1:
        return Mat.identity(1)
    if first is None:
        roots = _rational_roots(char_poly(a))
        if not roots:
            raise NotTriangularizableInField("no rational eigenvalue")
        first = max(roots, key=lambda r: (abs(r), r))
    v = kernel_vector(_shift(a, first))
    if v is None:
        raise NotTriangularizableInField("eigenvalue has no eigenvector")
    # complete v by standard basis vectors
    k = next(i for i, x in enumerate(v) if x != 0)
    cols = [v] + [tuple(Fraction(int(i == j)) for i in range(d)) for j in range(d) if j != k]
    P = _from_columns(cols)
    B = _block(P.inverse() * a * P)
    R = _triangularize_rational(B)
    return P * _embed(Fraction(1), R)


def _conformal_to_e1(v) -> Mat:
    """2 x 2 scaled rotation taking v to a multiple of e_1."""
    x, y = v
    return Mat(((x, y), (-y, x)), True)


def _triangularize(a: Mat, first=None) -> Mat:
    if a.d == 2:
        if first is None:
            sd = spectral_radii(a, Place(None), 64)
            first = sd.top_eigenvalue_in_field
            if first is None:
                raise NotTriangularizableInField("eigenvalues are not real")
        v = kernel_vector(_shift(a, first))
        # scaled rotation: keeps operator norms (up to the scalar which cancels)
        C = _conformal_to_e1(v)
        return C.inverse()
    if a.is_upper_triangular() and first is None:
        return Mat.identity(a.d)
    if not a.is_rational:
        raise NotTriangularizableInField("irrational entries in dimension > 2")
    return _triangularize_rational(a, first)


def _sublemma_t(norm: Magnitude, lam: Magnitude, place: Place) -> Fraction:
    """The scaling parameter t of the norm-to-spectral reduction."""
    if place.is_real:
        # 4 ||a|| / Lambda(a), rounded up to a power of two
        ratio = 4 * norm.hi / lam.lo
        k = 0
        while Fraction(2) ** k < ratio:
            k += 1
        return Fraction(2) ** max(k, 2)
    # |t| = p^n with n = e_Lambda - e_norm + 1, i.e. t = p^-n
    n = lam.exponent - norm.exponent + 1
    n = int(n.__ceil__())
    return Fraction(place.p) ** (-max(n, 0))


def _scaling(t: Fraction, d: int) -> Mat:
    """diag(t, t^2, ..., t^d): shrinks the strictly upper entries of a triangular matrix."""
    return Mat.diag([t ** (i + 1) for i in range(d)])


def _normalized_norm(m: Mat, place: Place, precision: int) -> Magnitude:
    """||m|| / |det m|^(1/d)."""
    n = op_norm(m, place, precision)
    dm = _det_abs_mag(m, place, precision)
    if place.is_real:
        root = dm.root(m.d, precision)
        return RealInterval(n.lo / root.hi, n.hi / root.lo)
    return n * dm.root(m.d).inverse()


def reduce_norm_to_spectral(a: Mat, place: Place, precision: int = 64):
    """(h, h a h^-1) with ||h a h^-1|| <= (3/2) Lambda(a) and ||h|| <= 2^(d-1) ||a||^(d-1)."""
    d = a.d
    if a.det() == 0:
        raise NoSpectralGap("singular input")
    sd = spectral_radii(a, place, precision)
    if _norm_le_spectral(a, sd.Lambda, place, precision):
        return Mat.identity(d), a
    if not place.is_real:
        if a.is_upper_triangular():
            P = Mat.identity(d)
        elif d == 2 and sd.top_eigenvalue_in_field is not None:
            v = _primitive(kernel_vector(_shift(a, sd.top_eigenvalue_in_field)), place.p)
            e = Fraction(1) if vp(v[0], place.p) == 0 else Fraction(0)
            P = _from_columns([v, (Fraction(0), Fraction(1)) if e else (Fraction(1), Fraction(0))])
        else:
            raise NotTriangularizableInField("finite place: needs triangular input or a rational eigenvalue")
    else:
        P = _triangularize(a)
    Pi = P.inverse()
    T = Pi * a * P
    lam = sd.Lambda
    normT = op_norm(T, place, precision)
    t = _sublemma_t(normT, lam, place)
    D = _scaling(t, d)
    h = D * Pi
    a_conj = D * T * D.inverse()
    # postconditions
    n_conj = op_norm(a_conj, place, precision)
    if place.is_real:
        ok = n_conj.hi * 2 <= 3 * lam.lo
    else:
        ok = n_conj.exponent >= lam.exponent
    if not ok:
        if _norm_le_spectral(a, lam, place, precision):
            return Mat.identity(d), a
        raise ConjugatorBoundViolated("||h a h^-1|| <= (3/2) Lambda not certified")
    if not _check_h_bound(h, a, place, precision, d - 1):
        if _norm_le_spectral(a, lam, place, precision):
            return Mat.identity(d), a
        raise ConjugatorBoundViolated("||h|| <= 2^(d-1) ||a||^(d-1) not certified")
    return h, a_conj


def _norm_le_spectral(a, lam, place, precision) -> bool:
    n = op_norm(a, place, precision)
    if place.is_real:
        return n.hi * 2 <= 3 * lam.lo
    return n.exponent >= lam.exponent


def _check_h_bound(h: Mat, a: Mat, place: Place, precision: int, power: int,
                   const: Optional[Fraction] = None) -> bool:
    """Certify ||h||_n <= C ||a||_n^power with _n the det-normalized norm.

    C defaults to 2^(d-1) (the sublemma); the proximal lemma passes 6^d."""
    d = a.d
    C = Fraction(2) ** (d - 1) if const is None else const
    if place.is_real:
        nh = op_norm(h, place, precision)
        na = op_norm(a, place, precision)
        det_h = _abs_interval(h.det(), precision)
        det_a = _abs_interval(a.det(), precision)
        # ||h||^d / |det h| <= C^d ||a||^(power d) / |det a|^power
        lhs = nh.hi ** d * det_a.hi ** power
        rhs = C ** d * na.lo ** (power * d) * det_h.lo
        return lhs <= rhs
    p = place.p
    nh = op_norm(h, place).exponent
    na = op_norm(a, place).exponent
    eh = Fraction(vp(h.det(), p))
    ea = Fraction(vp(a.det(), p))
    # exponents: value p^-e; normalized norm exponent = e_norm - e_det/d
    lhs = PPower(nh - eh / d, p)
    rhs_exp = (na - ea / d) * power
    # lhs <= C * p^-rhs_exp  <=>  p^-(lhs_e - rhs_exp) <= C
    return PPower(lhs.exponent - rhs_exp, p).le_value(C)


def _abs_interval(x, precision: int) -> Interval:
    iv = enclose(x, precision + 8)
    return abs(iv)


# ---------------------------------------------------------------------------
# proximal normal form
# ---------------------------------------------------------------------------
@dataclass
class ProximalForm:
    place: Place
    a: Mat
    h: Mat
    h_inv: Mat
    a_prime: Mat
    alpha1: object
    lambda2: Magnitude
    H: ProjHyperplane
    bound_h_norm: Magnitude
    bound_restricted_norm: Magnitude
    L: Optional[Magnitude] = None
    v_H_distance: Optional[Magnitude] = None
    exact: bool = True
    error_exponent: Optional[Fraction] = None   # v_p(alpha1_approx - alpha1)
    power: int = 1

    @property
    def d(self) -> int:
        return self.a.d

    def attracting_point(self) -> ProjPoint:
        """[h^-1 e_1] in the original coordinates."""
        return ProjPoint(self.h_inv.column(0))

    def repelling_hyperplane(self) -> ProjHyperplane:
        """h^-1 H, whose covector is the first row of h."""
        return ProjHyperplane(self.h.rows[0])

    def alpha_for_check(self):
        """The (1,1) entry of a', which equals alpha1 for exact forms."""
        return self.a_prime[0, 0]

    def check(self, eps, precision: int = 64):
        return check_proximal(self.a_prime, self.alpha_for_check(), self.H, eps, self.place,
                              precision, allow_residual=not self.exact)

    def pow(self, n: int) -> "ProximalForm":
        """Normal form of a^n with the same conjugator."""
        if n == 1:
            return self
        an = self.a ** n
        apn = self.a_prime ** n
        l2 = self.lambda2.pow(n) if not isinstance(self.lambda2, Zero) else ZERO
        sub = _block(apn)
        return ProximalForm(self.place, an, self.h, self.h_inv, apn, self.alpha1 ** n, l2, self.H,
                            self.bound_h_norm, op_norm(sub, self.place) if sub.d else ZERO,
                            None, self.v_H_distance, self.exact, self.error_exponent,
                            self.power * n)

    def to_record(self) -> dict:
        return {
            "place": self.place.to_record(),
            "a": self.a.to_record(),
            "h": self.h.to_record(),
            "a_prime": self.a_prime.to_record(),
            "alpha1": scalar_record(self.alpha1),
            "lambda2": self.lambda2.to_record(),
            "bound_h_norm": self.bound_h_norm.to_record(),
            "bound_restricted_norm": self.bound_restricted_norm.to_record(),
            "L": None if self.L is None else self.L.to_record(),
            "v_H_distance": None if self.v_H_distance is None else self.v_H_distance.to_record(),
            "exact": self.exact,
            "error_exponent": None if self.error_exponent is None else str(self.error_exponent),
        }

    @classmethod
    def from_record(cls, rec) -> "ProximalForm":
        h = Mat.from_record(rec["h"])
        a_prime = Mat.from_record(rec["a_prime"])
        return cls(
            Place.parse(rec["place"]), Mat.from_record(rec["a"]), h, h.inverse(), a_prime,
            parse_scalar(rec["alpha1"]), magnitude_from_record(rec["lambda2"]),
            coordinate_hyperplane(h.d), magnitude_from_record(rec["bound_h_norm"]),
            magnitude_from_record(rec["bound_restricted_norm"]),
            None if rec.get("L") is None else magnitude_from_record(rec["L"]),
            None if rec.get("v_H_distance") is None else magnitude_from_record(rec["v_H_distance"]),
            rec.get("exact", True),
            None if rec.get("error_exponent") is None else Fraction(rec["error_exponent"]),
        )


def _spectral_with_gap(a: Mat, place: Place, precision: int):
    prec = precision
    while True:
        sd = spectral_radii(a, place, prec)
        if sd.gap_refuted(2):
            raise NoSpectralGap("Lambda < 2 lambda_2")
        if sd.gap_certified(2):
            return sd, prec
        if prec >= PRECISION_CAP or not place.is_real:
            raise NoSpectralGap("spectral gap not certifiable")
        prec *= 2


def proximal_normal_form(a: Mat, place: Place, precision: int = 64) -> ProximalForm:
    d = a.d
    if a.is_scalar():
        raise NoSpectralGap("scalar matrix has no proximal dynamics")
    if a.det() == 0:
        raise NoSpectralGap("singular matrix")
    sd, prec = _spectral_with_gap(a, place, precision)
    if not place.is_real:
        if sd.top_eigenvalue_in_field is None:
            if d == 2:
                return padic_eigen_split(a, place.p, precision)
            raise EigenvalueNotRepresentable("top eigenvalue is not rational")
        return _finite_form(a, place, sd, prec)
    alpha1 = sd.top_eigenvalue_in_field
    if alpha1 is None:
        raise EigenvalueNotRepresentable("top eigenvalue outside the supported fields")
    return _real_form(a, place, sd, alpha1, prec)


def _real_form(a: Mat, place: Place, sd, alpha1, prec: int) -> ProximalForm:
    d = a.d
    v = kernel_vector(_shift(a, alpha1))
    u = kernel_vector(_shift(a.transpose(), alpha1))  # covector of H
    if d == 2:
        alpha2 = a.trace() - alpha1
        w = kernel_vector(_shift(a, alpha2))
        # scaled rotation moving w onto the e_2 axis, then the unipotent moving v to e_1
        C = Mat(((w[1], -w[0]), (w[0], w[1])), True)
        tri = C * a * C.inverse()          # lower triangular [[alpha1, 0], [c, alpha2]]
        x2 = tri[1, 0] / (alpha1 - alpha2)
        h1 = Mat(((Fraction(1), Fraction(0)), (-x2, Fraction(1))), True)
        h = h1 * C
    else:
        H_basis = image_basis(_shift(a, alpha1))
        Q = _from_columns([v] + [tuple(b) for b in H_basis])
        Qi = Q.inverse()
        blk = _block(Qi * a * Q)
        h_blk = Mat.identity(d - 1)
        if not _norm_le_spectral(blk, sd.lambda2, place, prec):
            h_blk, _ = reduce_norm_to_spectral(blk, place, prec)
        h = _embed(Fraction(1), h_blk) * Qi
    h_inv = h.inverse()
    a_prime = h * a * h_inv
    # exact structure
    if a_prime[0, 0] != alpha1 or any(a_prime[i, 0] != 0 for i in range(1, d)) \
            or any(a_prime[0, j] != 0 for j in range(1, d)):
        raise ConjugatorBoundViolated("normal form structure not exact")
    sub = _block(a_prime)
    rn = op_norm(sub, place, prec)
    lam2 = sd.lambda2
    # enclosures are absolute, so a tiny lambda_2 may need more bits
    bits = prec
    while not rn.hi * 2 <= 3 * lam2.lo:
        if bits >= PRECISION_CAP:
            raise ConjugatorBoundViolated("||a'|_H|| <= (3/2) lambda_2 not certified")
        bits *= 2
        rn = op_norm(sub, place, bits)
        lam2 = spectral_radii(a, place, bits).lambda2
    if not _check_h_bound(h, a, place, prec, 2 * d, Fraction(6) ** d):
        raise ConjugatorBoundViolated("||h|| <= 6^d ||a||^(2d) not certified")
    # d(v, H) >= 1 / (1 + L)^(d-1), L = 2 ||a|| / Lambda
    na = op_norm(a, place, prec)
    L = RealInterval(2 * na.lo / sd.Lambda.hi, 2 * na.hi / sd.Lambda.lo)
    dist_sq = proj_dist_sq(ProjPoint(v), ProjHyperplane(u))
    dsq = _abs_interval(dist_sq, prec)
    if not dsq.lo * (1 + L.lo) ** (2 * (d - 1)) >= 1:
        raise ConjugatorBoundViolated("d(v, H) >= 1/(1+L)^(d-1) not certified")
    dist = RealInterval(root_bounds(dsq.lo, 2, prec)[0], root_bounds(dsq.hi, 2, prec)[1])
    return ProximalForm(place, a, h, h_inv, a_prime, alpha1, lam2, coordinate_hyperplane(d),
                        _normalized_norm(h, place, prec), rn, L, dist, True, None)


def _finite_form(a: Mat, place: Place, sd, prec: int) -> ProximalForm:
    p = place.p
    alpha1 = sd.top_eigenvalue_in_field
    v = _primitive(kernel_vector(_shift(a, alpha1)), p)
    H_basis = [_primitive(tuple(b), p) for b in image_basis(_shift(a, alpha1))]
    P = _from_columns([v] + H_basis)
    h = P.inverse()
    a_prime = h * a * P
    return _finish_finite(a, place, h, P, a_prime, alpha1, sd, True, None)


def _finish_finite(a, place, h, h_inv, a_prime, alpha1, sd, exact, err) -> ProximalForm:
    d = a.d
    p = place.p
    sub = _block(a_prime)
    rn = op_norm(sub, place)
    # d([v],[H]) = |det P| for primitive columns; certify >= 1/beta^(d^2),
    # beta = ||a||_n^(1/d) with the det-normalized norm.
    cols = [h_inv.column(j) for j in range(d)]
    e_cols = sum(min(vp(x, p) for x in c if x != 0) for c in cols)
    e_dist = Fraction(vp(h_inv.det(), p) - e_cols)
    na = op_norm(a, place).exponent - Fraction(vp(a.det(), p)) / d
    e_beta = na / d
    if not -e_dist >= e_beta * d * d:
        raise ConjugatorBoundViolated("d([v],[H]) >= 1/beta^(d^2) not certified")
    dist = PPower(e_dist, p)
    return ProximalForm(place, a, h, h_inv, a_prime, alpha1, sd.lambda2, coordinate_hyperplane(d),
                        _normalized_norm(h, place, 0), rn, None, dist, exact, err)


# ---------------------------------------------------------------------------
# p-adic splitting with approximate eigenvalues
# ---------------------------------------------------------------------------
def _eval(coeffs, x):
    s = Fraction(0)
    for c in reversed(coeffs):
        s = s * x + c
    return s


def _truncate(x: Fraction, p: int, digits: int) -> Fraction:
    """Rational with small denominator congruent to x modulo p^digits."""
    v = vp(x, p)
    if v is None:
        return x
    # x = p^v * u with u a p-adic unit; keep u mod p^(digits - v)
    u = x / Fraction(p) ** v
    m = p ** max(digits - v, 1)
    num = u.numerator * pow(u.denominator, -1, m) % m
    if num > m // 2:
        num -= m
    return Fraction(num) * Fraction(p) ** v


def padic_eigen_split(a: Mat, p: int, precision: int = 64, digits: Optional[int] = None) -> ProximalForm:
    place = Place(p)
    d = a.d
    if not a.is_rational:
        raise EigenvalueNotRepresentable("irrational entries at a finite place")
    cp = char_poly(a)
    sd = spectral_radii(a, place)
    vals = list(sd.valuations)
    v1 = vals[0]
    if v1 is None or len(vals) < 2 or (vals[1] is not None and vals[1] <= v1):
        raise SlopeNotSeparated("top Newton slope is not separated")
    if sd.top_eigenvalue_in_field is not None:
        return _finite_form(a, place, sd, precision)
    if v1.denominator != 1:
        raise SlopeNotSeparated("top root valuation is not integral")
    v1 = int(v1)
    gap = (vals[1] - v1) if vals[1] is not None else Fraction(d)
    if digits is None:
        digits = max(int(2 * gap * d * d), 8)
    while True:
        approx, err = _lift_root(cp, p, v1, digits)
        try:
            return _split_from_approx(a, place, sd, approx, err, digits)
        except PrecisionExhausted:
            if digits >= PRECISION_CAP:
                raise
            digits *= 2


def _lift_root(cp, p: int, v1: int, digits: int):
    """Newton iteration for the root of least valuation, with its certified error exponent."""
    d = len(cp) - 1
    deriv = [i * cp[i] for i in range(1, d + 1)]
    # start from the dominant monomial ratio: alpha ~ -c_{d-1}/c_d when the slope is the last one
    x = -cp[d - 1] if cp[d - 1] != 0 else Fraction(p) ** v1
    if vp(x, p) != v1:
        x = Fraction(p) ** v1
    for _ in range(400):
        fx = _eval(cp, x)
        if fx == 0:
            return x, None
        err = vp(fx, p) - (d - 1) * v1
        if vp(x, p) == v1 and err >= digits + v1:
            return x, Fraction(err)
        dfx = _eval(deriv, x)
        if dfx != 0 and vp(x - fx / dfx, p) == v1:
            x = x - fx / dfx
        else:
            # contraction x <- x - f(x)/x^(d-1) keeps the valuation
            x = x - fx / x ** (d - 1)
        x = _truncate(x, p, digits + 4 * abs(v1) + 8)
    raise PrecisionExhausted("root lifting did not converge")


def _split_from_approx(a: Mat, place: Place, sd, alpha, err, digits: int) -> ProximalForm:
    d = a.d
    p = place.p
    if d != 2:
        raise EigenvalueNotRepresentable("approximate splitting implemented for d = 2")
    alpha2 = a.trace() - alpha
    cols = []
    for lam in (alpha, alpha2):
        M = _shift(a, lam)
        # columns of the adjugate span the approximate kernel
        cand = [(M[1, 1], -M[1, 0]), (-M[0, 1], M[0, 0])]
        cand = [c for c in cand if any(x != 0 for x in c)]
        best = min(cand, key=lambda c: min(vp(x, p) for x in c if x != 0))
        cols.append(_primitive(best, p))
    P = _from_columns(cols)
    if P.det() == 0:
        raise PrecisionExhausted("approximate eigenvectors are dependent")
    h = P.inverse()
    a_prime = h * a * P
    # residual entries must be far below |alpha|
    res = [a_prime[0, 1], a_prime[1, 0]]
    e_res = min((vp(x, p) for x in res if x != 0), default=None)
    if e_res is not None and e_res < sd.valuations[1] + 1:
        raise PrecisionExhausted("residual not yet below lambda_2")
    return _finish_finite(a, place, h, P, a_prime, alpha, sd, False, err)
