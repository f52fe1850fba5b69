"""SL_2 pipeline: Zariski density, choice of a place, and two independent
elements a^k, a' = a^n5 b a^n6 c a^n5 carrying a table-tennis certificate.

The constants of the existence proof are measured on each instance: f1, f2, f3
are the least integers making the certified inequalities true, n5, n6 and k
the least exponents (in that order) for which certification succeeds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .conjugators import proximal_normal_form
from .errors import (
    BallExplosion,
    DensityLost,
    EigenvalueNotRepresentable,
    ExponentBudgetExhausted,
    Inconclusive,
    NoLoxodromicFound,
    NoProximalStructure,
    NoSpectralGap,
    NotDenseError,
    PreconditionViolated,
    PrecisionExhausted,
    SeparationFailed,
    SlopeNotSeparated,
    SpectralGapUnresolved,
    UGrowthError,
)
from .linalg import Mat, _rref, _vec, spectral_radii
from .pingpong import TableTennisCertificate, certify_table_tennis, eps_grid
from .projective import ProjPoint, proj_dist
from .scalars import (
    Magnitude,
    Place,
    PPower,
    RealInterval,
    Zero,
    abs_at_place,
    mag_max,
    mag_min,
    sign,
    vp,
)
from .search import ball_levels, word_product, word_str
from .setcalc import DEFAULT_BALL_CAP, MatSet

__all__ = [
    "Density", "zariski_dense_sl2", "select_place", "candidate_places", "sl2_free_pair",
    "Sl2PipelineTrace", "Sl2Budget", "sl2_corpus", "run_corpus",
]


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------
@dataclass
class Density:
    dense: bool
    reason: str = ""
    witnesses: dict = field(default_factory=dict)

    def __bool__(self):
        return self.dense

    def to_record(self) -> dict:
        return {"dense": self.dense, "reason": self.reason,
                "witnesses": {k: word_str(v) for k, v in self.witnesses.items()}}


def _infinite_order(g: Mat) -> bool:
    """For g in SL_2 with trace t: infinite order iff |t| > 2, or t = +-2 and
    g != +-I, or t rational outside {0, +-1, +-2} (Niven)."""
    t = g.trace()
    if t == 2 or t == -2:
        return not g.is_scalar()
    if sign(t * t - 4) > 0:
        return True
    from .scalars import is_rational
    return is_rational(t) and t not in (0, 1, -1)


def _commutative(basis) -> bool:
    mats = [Mat(((v[0], v[1]), (v[2], v[3]))) for v in basis]
    return all(a * b == b * a for a in mats for b in mats)


def zariski_dense_sl2(Sigma: MatSet, radius: int = 6, cap: int = 20000) -> Density:
    if Sigma.dim != 2:
        raise PreconditionViolated("d must be 2")
    if any(m.det() != 1 for m in Sigma):
        raise PreconditionViolated("elements must have determinant 1")
    S = Sigma.with_identity()
    span, span_sq = [], []
    wit = {}
    try:
        for n, sphere in ball_levels(S, radius, cap):
            for g, w in sphere:
                if len(span) < 4:
                    new = _rref(span + [list(_vec(g))])
                    if len(new) > len(span):
                        span = new
                        if len(span) == 4:
                            wit["algebra"] = w
                if len(span_sq) < 4:
                    new = _rref(span_sq + [list(_vec(g * g))])
                    if len(new) > len(span_sq):
                        span_sq = new
                        if len(span_sq) == 4:
                            wit["squares"] = w
                if "infinite_order" not in wit and _infinite_order(g):
                    wit["infinite_order"] = w
            if len(wit) == 3:
                return Density(True, "", wit)
    except BallExplosion:
        return Density(False, "not certified within the ball budget", wit)
    if len(span) < 4:
        if len(span) <= 2 and _commutative(span):
            return Density(False, "commutative algebra of dimension <= 2", wit)
        return Density(False, "reducible", wit)
    if len(span_sq) < 4:
        return Density(False, "squares span a proper algebra (normalizer of a torus)", wit)
    return Density(False, "no element of infinite order (finite group)", wit)


# ---------------------------------------------------------------------------
# places
# ---------------------------------------------------------------------------
def _denominator_primes(Sigma: MatSet) -> list:
    from sympy import primefactors
    ps = set()
    for m in Sigma:
        if not m.is_rational:
            raise PreconditionViolated("entries must be rational")
        for x in m.entries():
            ps.update(primefactors(Fraction(x).denominator))
    return sorted(ps)


def candidate_places(Sigma: MatSet, radius: int = 4, cap: int = DEFAULT_BALL_CAP) -> list:
    """Finite places with an element of negative entry valuation in the radius
    ball (increasing p), then the real place."""
    out = []
    primes = _denominator_primes(Sigma)
    if primes:
        S = Sigma.with_identity()
        found = set()
        try:
            for n, sphere in ball_levels(S, radius, cap):
                for g, _ in sphere:
                    for p in primes:
                        if p not in found and any(x != 0 and vp(x, p) < 0 for x in g.entries()):
                            found.add(p)
                if len(found) == len(primes):
                    break
        except BallExplosion:
            pass
        out = [Place.finite(p) for p in primes if p in found]
    return out + [Place.real()]


def select_place(Sigma: MatSet, radius: int = 4) -> Place:
    return candidate_places(Sigma, radius)[0]


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Sl2Budget:
    density_radius: int = 6
    n0_max: int = 2
    loxodromic_radius: int = 6
    power_cap: int = 64
    exponent_cap: int = 6
    x_power_cap: int = 12
    ball_cap: int = 20000
    precision: int = 64


@dataclass
class Sl2PipelineTrace:
    place: Place
    n0: int
    a_word: tuple
    b_word: tuple
    c_word: tuple
    b_inverted: bool
    c_inverted: bool
    conjugator: Mat
    alpha: Magnitude
    f1: int
    f2: int
    f3: int
    d_value: Magnitude
    n5: int
    n6: int
    x_power: int
    a: Mat
    a_prime: Mat
    a_prime_word: tuple
    certificate: TableTennisCertificate
    margins: dict = field(default_factory=dict)
    sigma: Optional[MatSet] = None

    @property
    def x_word(self) -> tuple:
        return self.a_word * self.x_power

    @property
    def total_word_length(self) -> int:
        return max(len(self.x_word), len(self.a_prime_word))

    def to_record(self) -> dict:
        return {
            "kind": "sl2_trace",
            "place": self.place.to_record(),
            "n0": self.n0,
            "words": {"a": word_str(self.a_word), "b": word_str(self.b_word), "c": word_str(self.c_word),
                      "x": word_str(self.x_word), "a_prime": word_str(self.a_prime_word)},
            "b_inverted": self.b_inverted,
            "c_inverted": self.c_inverted,
            "conjugator": self.conjugator.to_record(),
            "alpha": self.alpha.to_record(),
            "f1": self.f1,
            "f2": self.f2,
            "f3": self.f3,
            "d_value": self.d_value.to_record(),
            "n5": self.n5,
            "n6": self.n6,
            "x_power": self.x_power,
            "total_word_length": self.total_word_length,
            "margins": {k: v.to_record() for k, v in self.margins.items()},
            "certificate": self.certificate.to_record(),
            **({"sigma": self.sigma.to_record()} if self.sigma is not None else {}),
        }


def _squares(S):
    return [g * g for g in S]


def _commutators(S):
    out = []
    for u in S:
        for v in S:
            out.append(u * v * u.inverse() * v.inverse())
    return out


def _alpha_pow_bounds(alpha: Magnitude, f: int):
    """Enclosure of |alpha|^f as (lo, hi) rationals, or exponent at finite places."""
    if isinstance(alpha, PPower):
        return alpha.pow(f) if f >= 0 else alpha.inverse().pow(-f)
    lo, hi = alpha.lo, alpha.hi
    if f >= 0:
        return RealInterval(lo ** f, hi ** f)
    return RealInterval(1 / hi ** (-f), 1 / lo ** (-f))


def _certified_le(m: Magnitude, bound: Magnitude) -> bool:
    if isinstance(m, Zero):
        return True
    if isinstance(m, PPower):
        return m.exponent >= bound.exponent
    return m.hi <= bound.lo


def _certified_ge(m: Magnitude, bound: Magnitude) -> bool:
    if isinstance(m, Zero):
        return False
    if isinstance(m, PPower):
        return m.exponent <= bound.exponent
    return m.lo >= bound.hi


def _least_exponent(test, lo: int = -64, hi: int = 4096) -> int:
    for f in range(lo, hi + 1):
        if test(f):
            return f
    raise ExponentBudgetExhausted("no exponent certifies the inequality")


def _find_loxodromic(S: MatSet, place: Place, budget: Sl2Budget):
    """First ball element (shortlex) with certified Lambda > 1, powered until
    Lambda >= 100."""
    try:
        for n, sphere in ball_levels(S, budget.loxodromic_radius, budget.ball_cap):
            for g, w in sphere:
                if g.is_scalar():
                    continue
                sd = spectral_radii(g, place, budget.precision)
                lam = sd.Lambda
                grows = (lam.exponent < 0) if isinstance(lam, PPower) else \
                    (not isinstance(lam, Zero) and lam.lo > 1)
                if not grows:
                    continue
                for k in range(1, budget.power_cap + 1):
                    gk = g ** k
                    L = spectral_radii(gk, place, budget.precision).Lambda
                    ok = L.ge_value(100) if isinstance(L, PPower) else L.lo >= 100
                    if ok:
                        return gk, w * k
    except BallExplosion:
        pass
    raise NoLoxodromicFound(f"no element with certified |alpha| > 1 at {place.to_record()}")


def _dist_to_pq(pt: ProjPoint, place: Place, precision: int) -> Magnitude:
    p = ProjPoint((1, 0))
    q = ProjPoint((0, 1))
    return mag_min([proj_dist(pt, p, place, precision), proj_dist(pt, q, place, precision)])


def sl2_free_pair(Sigma: MatSet, budget: Sl2Budget = Sl2Budget()) -> Sl2PipelineTrace:
    if Sigma.dim != 2:
        raise PreconditionViolated("d must be 2")
    if not Sigma.symmetric or not Sigma.contains_identity:
        raise PreconditionViolated("Sigma must be symmetric and contain the identity")
    dens = zariski_dense_sl2(Sigma, budget.density_radius, budget.ball_cap)
    if not dens:
        raise NotDenseError(dens.reason)
    # (1) commutators of squares must still generate a dense group
    n0 = None
    work = Sigma
    for k in range(1, budget.n0_max + 1):
        if k > 1:
            levels = list(ball_levels(Sigma, k, budget.ball_cap))
            work = MatSet([g for _, sph in levels for g, _ in sph])
        sq_comm = MatSet(_commutators(_squares(work))).with_identity()
        if zariski_dense_sl2(sq_comm, 2, budget.ball_cap):
            n0 = k
            break
    if n0 is None:
        raise DensityLost("commutators of squares are not certified dense")
    # (2) place, (3) loxodromic element; fall back along the candidate places
    last_exc = None
    for place in candidate_places(Sigma):
        try:
            return _pipeline_at(Sigma, place, n0, budget)
        except (NoLoxodromicFound, ExponentBudgetExhausted, EigenvalueNotRepresentable,
                SlopeNotSeparated, NoSpectralGap) as exc:
            last_exc = exc
    raise last_exc


def _pipeline_at(Sigma: MatSet, place: Place, n0: int, budget: Sl2Budget) -> Sl2PipelineTrace:
    prec = budget.precision
    a, a_word = _find_loxodromic(Sigma, place, budget)
    # (4) diagonalize a
    form = proximal_normal_form(a, place, prec)
    h, hi = form.h, form.h_inv
    alpha = spectral_radii(a, place, prec).Lambda
    conj = [h * s * hi for s in Sigma]
    norm = mag_max(_entry_abs(m, place, prec) for m in conj)
    f1 = _least_exponent(lambda f: _certified_le(norm, _alpha_pow_bounds(alpha, f)), lo=0)
    # (5) d_value over the conjugated squares
    sq = [m * m for m in conj]
    up = mag_max(abs_at_place(m[0, 1], place, prec) for m in sq)
    low = mag_max(abs_at_place(m[1, 0], place, prec) for m in sq)
    d_value = mag_min([up, low])
    if isinstance(d_value, Zero):
        raise NoProximalStructure("squares are all triangular in the eigenbasis of a")
    f2 = _least_exponent(lambda f: _certified_ge(d_value, _alpha_pow_bounds(alpha, -f)), lo=f1)
    # (6) b and c, possibly inverted
    idx_b = _argmax(sq, lambda m: abs_at_place(m[0, 1], place, prec))
    idx_c = _argmax(sq, lambda m: abs_at_place(m[1, 0], place, prec))
    b, b_word, b_inv = _choose(Sigma, idx_b, conj, (0, 0), (1, 0))
    c, c_word, c_inv = _choose(Sigma, idx_c, conj, (0, 0), (0, 1))
    bp = h * b * hi
    ci = h * c.inverse() * hi
    dbp = _dist_to_pq(ProjPoint(bp.column(0)), place, prec)
    dcq = _dist_to_pq(ProjPoint(ci.column(1)), place, prec)
    margin = mag_min([dbp, dcq])
    if isinstance(margin, Zero):
        raise NoProximalStructure("b p or c^-1 q is one of the fixed points of a")
    f3 = _least_exponent(lambda f: _certified_ge(margin, _alpha_pow_bounds(alpha, -f)))
    # (7) minimal n5, then n6.  The partner of a' is a^k with k minimal: for
    # n5 >= 1 the fixed points of a' sit within |alpha|^(-2 n5) of p and q, so
    # a itself is usually not contracting enough to play against a'.
    grid = eps_grid(place, depth=24)
    for n5 in range(1, budget.exponent_cap + 1):
        a5 = a ** n5
        for n6 in range(1, budget.exponent_cap + 1):
            ap = a5 * b * a ** n6 * c * a5
            ak = a
            for k in range(1, budget.x_power_cap + 1):
                if k > 1:
                    ak = ak * a
                try:
                    cert = certify_table_tennis(ak, ap, place, prec, grid)
                except (SeparationFailed, NoProximalStructure, Inconclusive, PrecisionExhausted,
                        SpectralGapUnresolved):
                    continue
                ap_word = a_word * n5 + b_word + a_word * n6 + c_word + a_word * n5
                assert word_product(Sigma, ap_word) == ap
                cert.words = {"x": word_str(a_word * k), "y": word_str(ap_word)}
                return Sl2PipelineTrace(place, n0, a_word, b_word, c_word, b_inv, c_inv, h, alpha,
                                        f1, f2, f3, d_value, n5, n6, k, a, ap, ap_word, cert,
                                        {"d_b_p": dbp, "d_cinv_q": dcq, "norm_sigma": norm}, Sigma)
    raise ExponentBudgetExhausted(f"no table-tennis pair with n5, n6 <= {budget.exponent_cap}, "
                                 f"k <= {budget.x_power_cap}")


def _entry_abs(m: Mat, place: Place, precision: int) -> Magnitude:
    from .linalg import op_norm
    return op_norm(m, place, precision)


def _argmax(mats, key) -> int:
    best, best_i = None, 0
    for i, m in enumerate(mats):
        v = key(m)
        if best is None or _gt(v, best):
            best, best_i = v, i
    return best_i


def _gt(u: Magnitude, v: Magnitude) -> bool:
    if isinstance(v, Zero):
        return not isinstance(u, Zero)
    if isinstance(u, Zero):
        return False
    if isinstance(u, PPower):
        return u.exponent < v.exponent
    return u.lo > v.hi


def _choose(Sigma: MatSet, i: int, conj, e1, e2):
    """Sigma[i] or its inverse, preferring one whose two given conjugated entries are nonzero."""
    g = Sigma[i]
    m = conj[i]
    if m[e1] != 0 and m[e2] != 0:
        return g, (i,), False
    gi = g.inverse()
    j = Sigma.index(gi)
    mi = conj[j]
    if mi[e1] != 0 and mi[e2] != 0:
        return gi, (j,), True
    return g, (i,), False


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------
def _sym(*mats) -> MatSet:
    return MatSet(list(mats)).symmetrized().with_identity()


def sl2_corpus() -> dict:
    F = Fraction
    U = lambda t: Mat([[1, t], [0, 1]])
    L = lambda t: Mat([[1, 0], [t, 1]])
    neg = Mat([[-1, 0], [0, -1]])
    corpus = {
        "sanov2": _sym(U(2), L(2)),
        "sanov3": _sym(U(3), L(3)),
    }
    for n in range(1, 6):
        corpus[f"elementary_{n}"] = _sym(U(n), L(n), neg * U(n), neg * L(n))
    corpus["five_adic"] = _sym(U(F(1, 5)), L(F(1, 5)))
    corpus["modular_ST"] = _sym(Mat([[0, -1], [1, 0]]), U(1))
    corpus["hyperbolic_pair"] = _sym(Mat([[2, 1], [1, 1]]), Mat([[1, 1], [1, 2]]) * L(1))
    return corpus


def run_corpus(budget: Sl2Budget = Sl2Budget(), names=None) -> list:
    """Summary rows (instance, place, n5, n6, total word length) or the error family."""
    rows = []
    for name, S in sl2_corpus().items():
        if names is not None and name not in names:
            continue
        try:
            t = sl2_free_pair(S, budget)
            rows.append({"instance": name, "place": t.place.to_record(), "n5": t.n5, "n6": t.n6,
                         "x_power": t.x_power, "total_word_length": t.total_word_length, "trace": t})
        except UGrowthError as exc:
            rows.append({"instance": name, "error": type(exc).__name__, "message": str(exc)})
    return rows
