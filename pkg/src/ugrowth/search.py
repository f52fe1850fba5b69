"""Bounded searches: escape from subvarieties, good-position and non-fixing
elements, gap creation in exterior powers, upper bounds for d+ and growth tables.

Words are tuples of indices into the input set; every search walks the ball
level by level and, inside a level, in shortlex order, so witnesses are the
least ones for that order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import sympy
from mpmath import iv
from mpmath.libmp import to_rational

from .conjugators import ProximalForm, proximal_normal_form
from .errors import (
    AllPowersFix,
    BallExplosion,
    BudgetExhausted,
    BFixesE1,
    EigenvalueNotRepresentable,
    Exhausted,
    Inconclusive,
    LipschitzTooLarge,
    NoGapAnywhere,
    NoGrowthDetected,
    NoSpectralGap,
    NotTriangularizableInField,
    PreconditionViolated,
    SeparationTooSmall,
    SlopeNotSeparated,
    SpectralGapUnresolved,
    UnknownPredicate,
)
from .linalg import Mat, char_poly, exterior_power, spectral_radii
from .pingpong import PingCertificate, certify_ping, eps_grid, ping_screen
from .projective import ProjHyperplane, ProjPoint
from .scalars import (
    Cmp,
    Magnitude,
    Place,
    PPower,
    RealInterval,
    Zero,
    mag_compare,
)
from .setcalc import DEFAULT_BALL_CAP, Budget, MatSet, delta_bounds

__all__ = [
    "ball_levels", "word_product", "word_str", "parse_word", "predicate",
    "escape", "good_position_element", "nonfixing_power", "gap_lift",
    "dplus_upper", "growth_table", "GrowthRecord", "DPlusResult", "GapLift",
    "NonfixingPower", "EscapeResult", "PREDICATES",
]


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------
def word_str(word) -> str:
    return ".".join(str(i) for i in word)


def parse_word(s: str) -> tuple:
    return tuple(int(t) for t in s.split(".")) if s else ()


def word_product(Sigma, word) -> Mat:
    elems = Sigma.elements if isinstance(Sigma, MatSet) else tuple(Sigma)
    out = Mat.identity(elems[0].d)
    for i in word:
        out = out * elems[i]
    return out


def ball_levels(Sigma: MatSet, N: int, cap: int = DEFAULT_BALL_CAP):
    """Yield (n, sphere) for n = 0..N; the sphere lists (element, word) for the
    elements first reached by words of length n, each with its shortlex-least word."""
    ident = Mat.identity(Sigma.dim)
    seen = {ident: ()}
    frontier = [(ident, ())]
    yield 0, frontier
    total = 1
    for n in range(1, N + 1):
        new = []
        for m, w in frontier:
            for i, s in enumerate(Sigma.elements):
                x = m * s
                if x not in seen:
                    seen[x] = w + (i,)
                    new.append((x, w + (i,)))
                    total += 1
            if total > cap:
                raise BallExplosion(f"more than {cap} elements")
        frontier = new
        yield n, new
        if not new:
            return


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------
def _is_semisimple(g: Mat) -> bool:
    if g.d == 2:
        disc = g.trace() ** 2 - 4 * g.det()
        return disc != 0 or g.is_scalar()
    if not g.is_rational:
        raise PreconditionViolated("semisimplicity test needs rational entries for d > 2")
    x = sympy.Symbol("x")
    cp = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in char_poly(g)])), x)
    r = sympy.quo(cp, sympy.gcd(cp, cp.diff(x)))
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(r.all_coeffs())]
    acc = Mat.zero(g.d)
    power = Mat.identity(g.d)
    for c in coeffs:
        acc = acc + power * c
        power = power * g
    return all(e == 0 for e in acc.entries())


def _fixes_point(pt: ProjPoint):
    return lambda g: pt.image(g).same_as(pt)


def _preserves_hyperplane(H: ProjHyperplane):
    def test(g):
        c = H.image(g).covector
        return all(c[i] * H.covector[j] - c[j] * H.covector[i] == 0
                   for i in range(len(c)) for j in range(i + 1, len(c)))
    return test


def _not_semisimple(g: Mat) -> bool:
    # scalars count as satisfying, so a witness is a non-scalar semisimple element
    return g.is_scalar() or not _is_semisimple(g)


def _upper_triangular(g: Mat) -> bool:
    return g.is_upper_triangular()


def _sl2_law(ref: Mat):
    """g satisfies the law relative to ref iff g^2 and ref^2 share an eigenvector,
    i.e. tr[g^2, ref^2] = 2 (for determinant-one matrices)."""
    r2 = ref * ref

    def test(g):
        g2 = g * g
        comm = g2 * r2 * g2.inverse() * r2.inverse()
        return comm.trace() == 2
    return test


def _virtually_central(max_order: int = 12):
    def test(g):
        x = g
        for _ in range(max_order):
            if x.is_scalar():
                return True
            x = x * g
        return False
    return test


PREDICATES = {
    "FixesProjPoint": _fixes_point,
    "PreservesHyperplane": _preserves_hyperplane,
    "IsNotSemisimple": lambda: _not_semisimple,
    "UpperTriangular": lambda: _upper_triangular,
    "SatisfiesSL2Law": _sl2_law,
    "IsVirtuallyCentral": _virtually_central,
}


def predicate(name: str, *args) -> Callable[[Mat], bool]:
    try:
        factory = PREDICATES[name]
    except KeyError:
        raise UnknownPredicate(f"unknown predicate {name!r}") from None
    return factory(*args)


@dataclass
class EscapeResult:
    witness: Mat
    word: tuple
    length: int

    def to_record(self) -> dict:
        return {"witness": self.witness.to_record(), "word": word_str(self.word), "length": self.length}


def escape(Sigma: MatSet, pred, N: int, args: tuple = (), cap: int = DEFAULT_BALL_CAP) -> EscapeResult:
    """Least-length element of Sigma^N violating the predicate."""
    if not Sigma.contains_identity:
        raise PreconditionViolated("Sigma must contain the identity")
    test = predicate(pred, *args) if isinstance(pred, str) else pred
    for n, sphere in ball_levels(Sigma, N, cap):
        if n == 0:
            continue
        for m, w in sphere:
            if not test(m):
                return EscapeResult(m, w, n)
    raise Exhausted(f"every element of Sigma^{N} satisfies the predicate")


# ---------------------------------------------------------------------------
# good position and non-fixing powers
# ---------------------------------------------------------------------------
def _normal_coords(q: Mat, form: ProximalForm) -> Mat:
    return form.h * q * form.h_inv


def in_good_position(q: Mat, form: ProximalForm) -> bool:
    """q[e1] differs from [e1] and lies off [H], read in normal-form coordinates."""
    col = _normal_coords(q, form).column(0)
    return col[0] != 0 and any(col[i] != 0 for i in range(1, len(col)))


def good_position_element(Q: MatSet, form: ProximalForm, cap: int = DEFAULT_BALL_CAP) -> EscapeResult:
    d = Q.dim
    Qi = Q.with_identity()
    for n, sphere in ball_levels(Qi, d + 1, cap):
        if n == 0:
            continue
        for m, w in sphere:
            if in_good_position(m, form):
                # words refer to Q itself when it already contains the identity
                return EscapeResult(m, _reindex(w, Q, Qi), n)
    raise Exhausted("no element of Q^(d+1) moves [e1] off itself and off [H]")


def _reindex(word, Q: MatSet, Qi: MatSet) -> tuple:
    return tuple(Q.index(Qi[i]) if Qi[i] in Q else -1 for i in word)


@dataclass
class NonfixingPower:
    j: int
    first_coordinate: object
    projectively_fixed: bool
    lower_bound: Optional[Magnitude] = None

    def to_record(self) -> dict:
        from .scalars import scalar_record
        return {
            "j": self.j,
            "first_coordinate": scalar_record(self.first_coordinate),
            "projectively_fixed": self.projectively_fixed,
            "lower_bound": None if self.lower_bound is None else self.lower_bound.to_record(),
        }


def nonfixing_power(b: Mat, form: Optional[ProximalForm], D: int, with_bound: bool = False,
                    place: Optional[Place] = None, precision: int = 64) -> NonfixingPower:
    """Least j <= D with nonzero first coordinate of b^j e1 (normal-form coordinates)."""
    bp = b if form is None else _normal_coords(b, form)
    x = bp
    for j in range(1, D + 1):
        col = x.column(0)
        if col[0] != 0:
            fixed = all(c == 0 for c in col[1:])
            bound = None
            if with_bound:
                bound = _cayley_hamilton_bound(bp, D, place or (form.place if form else Place.real()),
                                               precision)
            return NonfixingPower(j, col[0], fixed, bound)
        x = x * bp
    raise AllPowersFix(f"b^j e1 has zero first coordinate for all j <= {D}")


def _cayley_hamilton_bound(b: Mat, D: int, place: Place, precision: int) -> Magnitude:
    """1 / (D 2^D Lambda(b)^D), the lower bound for the first coordinate."""
    lam = spectral_radii(b, place, precision).Lambda
    if isinstance(lam, PPower):
        return PPower(-lam.exponent * D, lam.p)  # |D 2^D| <= 1 at finite places
    if isinstance(lam, Zero):
        raise PreconditionViolated("nilpotent b")
    denom = D * 2 ** D
    return RealInterval(1 / (denom * lam.hi ** D), 1 / (denom * lam.lo ** D))


# ---------------------------------------------------------------------------
# gap creation
# ---------------------------------------------------------------------------
@dataclass
class GapLift:
    j: int
    power: int
    lifted: Mat

    def to_record(self) -> dict:
        return {"j": self.j, "power": self.power, "lifted": self.lifted.to_record()}


def _strict_gap(m1: Magnitude, m2: Magnitude) -> Optional[bool]:
    c = mag_compare(m1, m2)
    if c == Cmp.GREATER:
        return True
    if c == Cmp.INCONCLUSIVE:
        return None
    return False


def gap_lift(a: Mat, place: Place, precision: int = 64, max_power: int = 64) -> GapLift:
    """Least j whose j-th compound has Lambda >= 2 lambda2; when the consecutive
    moduli ratio is below 2 the least power a^k achieving it is used."""
    d = a.d
    sd = spectral_radii(a, place, precision)
    mods = list(sd.moduli)
    gaps = [_strict_gap(mods[i], mods[i + 1]) for i in range(d - 1)]
    if not any(gaps):
        if any(g is None for g in gaps):
            raise SpectralGapUnresolved("moduli not separated at this precision")
        raise NoGapAnywhere("all eigenvalue moduli are equal")
    for j in range(1, d):
        if not gaps[j - 1]:
            continue
        for k in _powers(max_power):
            ak = a ** k
            lifted = ak if j == 1 else exterior_power(ak, j)
            lsd = spectral_radii(lifted, place, precision)
            if lsd.gap_certified(2):
                return GapLift(j, k, lifted)
    raise SpectralGapUnresolved(f"no compound gap certified up to power {max_power}")


def _powers(cap: int):
    k = 1
    while k <= cap:
        yield k
        k += 1 if k < 8 else k // 2


# ---------------------------------------------------------------------------
# d+ upper bounds
# ---------------------------------------------------------------------------
@dataclass
class DPlusResult:
    n: int
    a_word: tuple
    a_power: int
    b_word: tuple
    lift: int
    pair: tuple                 # (a^m, b a^m) in the lifted representation
    certificate: PingCertificate
    ball_sizes: list
    place: Place = None
    conjugator: Optional[Mat] = None

    @property
    def pair_words(self):
        wa = self.a_word * self.a_power
        return wa, self.b_word + wa

    def to_record(self) -> dict:
        u, v = self.pair_words
        return {
            "kind": "dplus",
            "n": self.n,
            "place": self.place.to_record(),
            "lift": self.lift,
            "a_word": word_str(self.a_word),
            "a_power": self.a_power,
            "b_word": word_str(self.b_word),
            "pair_words": [word_str(u), word_str(v)],
            "pair": [self.pair[0].to_record(), self.pair[1].to_record()],
            "ball_sizes": self.ball_sizes,
            "conjugator": None if self.conjugator is None else self.conjugator.to_record(),
            "certificate": self.certificate.to_record(),
        }


def _lift(m: Mat, j: int) -> Mat:
    return m if j == 1 else exterior_power(m, j)


def _form_or_none(a: Mat, place: Place, precision: int):
    try:
        return proximal_normal_form(a, place, precision)
    except (NoSpectralGap, SlopeNotSeparated, EigenvalueNotRepresentable,
            NotTriangularizableInField, SpectralGapUnresolved):
        return None


class _ProximalPowers:
    """Lazily computed (m, form of a^m, passing eps) for m = 1, 2, ..."""

    def __init__(self, form: ProximalForm, grid, precision: int, max_power: int):
        self.form = form
        self.grid = grid
        self.precision = precision
        self.max_power = max_power
        self._items = []

    def __iter__(self):
        m = 0
        while m < self.max_power:
            if m == len(self._items):
                self._items.append(self._compute(m + 1))
            yield self._items[m]
            m += 1

    def _compute(self, m: int):
        fm = self.form.pow(m)
        good = []
        # passing is monotone in eps, and the grid is descending
        for e in self.grid:
            try:
                if not fm.check(e, self.precision).passed:
                    break
            except (PreconditionViolated, ValueError):
                break
            good.append(e)
        return m, fm, good


def dplus_upper(Sigma: MatSet, place: Place, budget: Budget = Budget(), max_radius: int = 8,
                max_power: int = 16, grid: Optional[list] = None) -> DPlusResult:
    """Search for the least radius n with a certified free pair (a^m, b a^m) in
    (Sigma u 1)^n, trying a in increasing word length, then powers, then b."""
    if not Sigma.contains_identity:
        raise PreconditionViolated("Sigma must contain the identity")
    prec = budget.precision
    db = delta_bounds(Sigma, place, budget)
    if not _grows(db.lower):
        raise NoGrowthDetected("no certified spectral growth (Lambda lower bound <= 1)")
    grid = grid or eps_grid(place, 6)
    # the ball, keeping shortlex-least words
    spheres = []
    sizes = []
    total = 0
    for n, sphere in ball_levels(Sigma, max_radius, budget.ball_cap):
        spheres.append(sphere)
        total += len(sphere)
        sizes.append(total)
    # candidate proximal elements, with their compound lift
    lifted_forms = {}
    for n in range(1, len(spheres)):
        for la in range(1, n + 1):
            for a, wa in (spheres[la] if la < len(spheres) else []):
                key = (a, wa)
                if key not in lifted_forms:
                    lifted_forms[key] = _candidate(a, place, prec, grid, max_power)
                cand = lifted_forms[key]
                if cand is None:
                    continue
                j, powers = cand
                for m, fm, good in powers:
                    lb = n - m * la
                    if lb < 0:
                        break
                    if not good:
                        continue
                    # b ranges over elements whose least word has length exactly lb
                    for b, wb in spheres[lb] if lb < len(spheres) else []:
                        cert = _try_ping(fm, _lift(b, j), good, place, prec)
                        if cert is not None:
                            return DPlusResult(n, wa, m, wb, j, (fm.a, _lift(b, j) * fm.a), cert,
                                               sizes[: n + 1], place, db.witness_conjugator)
    raise BudgetExhausted(f"no certified pair up to radius {max_radius}")


def _grows(lower: Magnitude) -> bool:
    if isinstance(lower, Zero):
        return False
    if isinstance(lower, PPower):
        return lower.exponent < 0
    return lower.lo > 1


def _candidate(a: Mat, place: Place, precision: int, grid, max_power: int):
    if a.is_scalar():
        return None
    try:
        gl = gap_lift(a, place, precision, max_power=1)
    except (NoGapAnywhere, SpectralGapUnresolved, EigenvalueNotRepresentable,
            NotTriangularizableInField, PreconditionViolated):
        return None
    form = _form_or_none(gl.lifted, place, precision)
    if form is None:
        return None
    return gl.j, _ProximalPowers(form, grid, precision, max_power)


def _try_ping(form: ProximalForm, b: Mat, good_eps, place: Place, precision: int):
    if b.is_scalar():
        return None
    col = (form.h * b * form.h_inv).column(0)
    if all(c == 0 for c in col[1:]):
        return None
    for e in good_eps:
        scales = ping_screen(form, b, e, place)
        if not scales:
            continue
        try:
            return certify_ping(form, b, e, place, precision, scales=scales)
        except (LipschitzTooLarge, SeparationTooSmall, BFixesE1, Inconclusive, PreconditionViolated):
            continue
    return None


# ---------------------------------------------------------------------------
# growth
# ---------------------------------------------------------------------------
@dataclass
class GrowthRecord:
    n: int
    ball_size: int
    entropy: RealInterval      # log(ball_size) / n

    def to_record(self) -> dict:
        return {"n": self.n, "ball_size": self.ball_size, "entropy": self.entropy.to_record()}


def _log_interval(k: int, n: int) -> RealInterval:
    old = iv.prec
    iv.prec = 80
    try:
        v = iv.log(iv.mpf(k)) / n
        lo, hi = (Fraction(*map(int, to_rational(x))) for x in v._mpi_)
    finally:
        iv.prec = old
    return RealInterval(max(lo, Fraction(0)), hi)


def growth_table(Sigma: MatSet, nmax: int, cap: int = DEFAULT_BALL_CAP) -> list:
    """Exact sizes of (Sigma u 1)^n for n = 1..nmax with entropy intervals."""
    S = Sigma.with_identity()
    out = []
    total = 0
    last = 0
    for n, sphere in ball_levels(S, nmax, cap):
        total += len(sphere)
        if n >= 1:
            out.append(GrowthRecord(n, total, _log_interval(total, n)))
        last = n
    # the ball stopped growing: sizes stay constant
    for n in range(last + 1, nmax + 1):
        out.append(GrowthRecord(n, total, _log_interval(total, n)))
    return out
