"""Freeness certificates: ping (free semigroup on a, ba), table tennis (free
group on x, y) and an exhaustive collision search used as a refutation oracle.

All threshold comparisons involving square roots are squared first.  Besides
the three hypotheses of the ping lemma the certificate records an explicit
contraction check: with rho = ||a|_H|| / |alpha| and delta a lower bound for
the distance of U u V to [H], every point of U u V lands within rho / delta
of [e_1], and the certificate demands rho / delta < tau.
"""
from __future__ import annotations

import math

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .conjugators import ProximalForm, _block, _shift, kernel_vector, proximal_normal_form
from .errors import (
    BFixesE1,
    BudgetExceeded,
    ConjugatorBoundViolated,
    PrecisionExhausted,
    Inconclusive,
    LipschitzTooLarge,
    NoProximalStructure,
    NoSpectralGap,
    PreconditionViolated,
    SeparationFailed,
    SeparationTooSmall,
    EigenvalueNotRepresentable,
    IncompatibleFields,
    NotTriangularizableInField,
)
from .linalg import Mat, op_norm
from .projective import (
    ProjHyperplane,
    ProjPoint,
    coordinate_hyperplane,
    e1_point,
    lipschitz_bound,
    proj_dist,
)
from .scalars import (
    Magnitude,
    Place,
    PPower,
    Zero,
    abs_at_place,
    as_fraction,
    enclose,
    scalar_record,
    sign,
    vp,
)

__all__ = [
    "PingCertificate", "TableTennisCertificate", "certify_ping", "certify_table_tennis",
    "refute_freeness", "Collision", "NoCollisionUpTo", "eps_grid", "contraction_ratio",
    "ArcDomain", "arcs_disjoint", "domains_disjoint", "ping_screen",
]

PRECISION_CAP = 512


def eps_grid(place: Place, depth: int = 8) -> list:
    """Descending grid 1/4, 1/10, 1/100, ... merged with 1/p^k at finite places."""
    grid = {Fraction(1, 4)} | {Fraction(1, 10 ** k) for k in range(1, depth + 1)}
    if not place.is_real:
        q = place.p
        k = 1
        while Fraction(1, q ** k) >= Fraction(1, 10 ** depth):
            if Fraction(1, q ** k) <= Fraction(1, 4):
                grid.add(Fraction(1, q ** k))
            k += 1
    return sorted(grid, reverse=True)


# ---------------------------------------------------------------------------
# magnitude helpers: real numbers bounding a Magnitude
# ---------------------------------------------------------------------------
def _hi(m: Magnitude) -> Fraction:
    if isinstance(m, Zero):
        return Fraction(0)
    if isinstance(m, PPower):
        return _ppower_value(m)
    return m.hi


def _lo(m: Magnitude) -> Fraction:
    if isinstance(m, Zero):
        return Fraction(0)
    if isinstance(m, PPower):
        return _ppower_value(m)
    return m.lo


def _ppower_value(m: PPower) -> Fraction:
    e = m.exponent
    if e.denominator != 1:
        raise ValueError("fractional exponent has no rational value")
    return Fraction(m.p) ** (-int(e))


def contraction_ratio(a_prime: Mat, place: Place, precision: int = 64, exact: bool = True) -> Fraction:
    """Upper bound for rho = ||a'|_H|| / |a'_11| (all off-(1,1) entries when not exact)."""
    alpha = a_prime[0, 0]
    if place.is_real:
        if not exact:
            raise PreconditionViolated("real-place forms are exact")
        rn = op_norm(_block(a_prime), place, precision)
        am = abs_at_place(alpha, place, precision)
        return _hi(rn) / _lo(am)
    p = place.p
    d = a_prime.d
    if exact:
        entries = [a_prime[i, j] for i in range(1, d) for j in range(1, d)]
    else:
        entries = [a_prime[i, j] for i in range(d) for j in range(d) if (i, j) != (0, 0)]
    vals = [vp(x, p) for x in entries if x != 0]
    if not vals:
        return Fraction(0)
    return Fraction(p) ** (-(min(vals) - vp(alpha, p)))


# ---------------------------------------------------------------------------
# ping certificate
# ---------------------------------------------------------------------------
@dataclass
class PingCertificate:
    place: Place
    a: Mat                 # the proximal element, original coordinates
    h: Mat                 # conjugator putting a in normal form (scale included)
    b: Mat
    eps: Fraction
    exact_form: bool
    K: Magnitude           # (||b'|| ||b'^-1||)^2 with b' = h b h^-1
    lipschitz_lhs: Fraction      # upper bound of (K+1)^2 eps, must be <= 1
    separation_sq: Fraction      # lower bound of d(b'[e1], [H])^2, must be >= eps
    moved_index: int             # i >= 2 with (b' e1)_i != 0
    tau_lower: Fraction
    rho: Fraction
    delta: Fraction
    words: dict = field(default_factory=dict)

    @property
    def pair(self):
        return self.a, self.b * self.a

    def to_record(self) -> dict:
        return {
            "kind": "ping",
            "place": self.place.to_record(),
            "elements": {"a": self.a.to_record(), "b": self.b.to_record(), "h": self.h.to_record()},
            "eps": _fs(self.eps),
            "exact_form": self.exact_form,
            "margins": {
                "K": self.K.to_record(),
                "lipschitz_lhs": _fs(self.lipschitz_lhs),
                "separation_sq": _fs(self.separation_sq),
                "moved_index": self.moved_index,
                "tau_lower": _fs(self.tau_lower),
                "rho": _fs(self.rho),
                "delta": _fs(self.delta),
            },
            "words": self.words,
            "conclusion": {"free": "semigroup", "pair": [self.a.to_record(), (self.b * self.a).to_record()]},
        }


def _fs(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _scale_candidates(place: Place, depth: int = 12):
    base = Fraction(2) if place.is_real else Fraction(place.p)
    out = [Fraction(1)]
    for k in range(1, depth + 1):
        out.append(base ** k)
        out.append(base ** -k)
    return out


def _ping_checks(a_prime: Mat, exact: bool, b_prime: Mat, eps: Fraction, place: Place, precision: int):
    """Evaluate all ping conditions in normal-form coordinates.

    Returns (status, data) with status in {"ok", "fixes", "lipschitz", "separation",
    "contraction", "inconclusive"}."""
    d = b_prime.d
    col = b_prime.column(0)
    moved = next((i for i in range(1, d) if col[i] != 0), None)
    if moved is None:
        return "fixes", None
    K = lipschitz_bound(b_prime, place, precision)
    lhs_hi = (_hi(K) + 1) ** 2 * eps
    lhs_lo = (_lo(K) + 1) ** 2 * eps
    H = coordinate_hyperplane(d)
    be1 = ProjPoint(col)
    sep = proj_dist(be1, H, place, precision)
    sep_sq_lo = _lo(sep) ** 2
    sep_sq_hi = _hi(sep) ** 2
    data = {"K": K, "lhs": lhs_hi, "sep_sq": sep_sq_lo, "moved": moved}
    if lhs_hi > 1:
        return ("lipschitz" if lhs_lo > 1 else "inconclusive"), data
    if sep_sq_lo < eps:
        return ("separation" if sep_sq_hi < eps else "inconclusive"), data
    # tau >= min(eps, d(e1, b'e1) / (1 + K)); U = B_tau(e1), V = b'U
    moved_dist = proj_dist(e1_point(d), be1, place, precision)
    tau = min(eps, _lo(moved_dist) / (1 + _hi(K)))
    # points of U u V stay at distance >= delta from [H]
    delta = min(1 - tau, _lo(sep) - _hi(K) * tau)
    rho = contraction_ratio(a_prime, place, precision, exact)
    data.update(tau=tau, delta=delta, rho=rho)
    if tau <= 0 or delta <= 0 or not rho < tau * delta:
        return "contraction", data
    return "ok", data


def certify_ping(a_form: ProximalForm, b: Mat, eps, place: Place, precision: int = 64,
                 scales: Optional[list] = None) -> PingCertificate:
    eps = as_fraction(eps)
    if not Fraction(0) < eps <= Fraction(1, 4):
        raise PreconditionViolated("eps must lie in (0, 1/4]")
    if not a_form.check(eps, precision).passed:
        raise PreconditionViolated("a is not eps-proximal in its normal form")
    d = b.d
    first_status = None
    prec = precision
    while True:
        inconclusive = False
        for s in (scales if scales is not None else _scale_candidates(place)):
            S = Mat.diag([s] + [1] * (d - 1))
            h = S * a_form.h
            h_inv = a_form.h_inv * S.inverse()
            a_prime = S * a_form.a_prime * S.inverse()
            if not a_form.exact and not _residual_ok(a_prime, a_form, eps, place, prec):
                continue
            b_prime = h * b * h_inv
            status, data = _ping_checks(a_prime, a_form.exact, b_prime, eps, place, prec)
            if first_status is None:
                first_status = status
            if status == "ok":
                return PingCertificate(place, a_form.a, h, b, eps, a_form.exact, data["K"],
                                       data["lhs"], data["sep_sq"], data["moved"],
                                       data["tau"], data["rho"], data["delta"])
            if status == "fixes":
                raise BFixesE1("b fixes [e_1]")
            if status == "inconclusive":
                inconclusive = True
        if not inconclusive or prec >= PRECISION_CAP or not place.is_real:
            break
        prec *= 2
    if first_status == "lipschitz":
        raise LipschitzTooLarge("(||b|| ||b^-1||)^2 > eps^(-1/2) - 1")
    if first_status == "separation":
        raise SeparationTooSmall("d(b[e_1], [H]) < sqrt(eps)")
    if first_status == "inconclusive" or (inconclusive if place.is_real else False):
        raise Inconclusive("ping conditions not decided at the precision cap")
    raise SeparationTooSmall("no ball radius tau certified for the ping-pong sets")


def ping_screen(a_form: ProximalForm, b: Mat, eps, place: Place, slack: float = 1e-6) -> list:
    """Scales s for which the ping conditions look satisfiable in floating point.

    Only a search heuristic: an empty list lets callers skip the exact
    certification, a nonempty one proves nothing.  Finite places are cheap to
    certify exactly and are never screened."""
    if not place.is_real:
        return _scale_candidates(place)
    eps = float(eps)
    h = np.array([[float(x) for x in r] for r in a_form.h.rows])
    hi = np.array([[float(x) for x in r] for r in a_form.h_inv.rows])
    ap = np.array([[float(x) for x in r] for r in a_form.a_prime.rows])
    bp0 = h @ np.array([[float(x) for x in r] for r in b.rows]) @ hi
    d = b.d
    sub = ap[1:, 1:]
    rho = (np.linalg.norm(sub, 2) if d > 1 else 0.0) / abs(ap[0, 0])
    out = []
    for s in _scale_candidates(place):
        sf = float(s)
        bp = bp0.copy()
        bp[0, 1:] *= sf
        bp[1:, 0] /= sf
        sv = np.linalg.svd(bp, compute_uv=False)
        if sv[-1] == 0:
            continue
        K = (sv[0] / sv[-1]) ** 2
        col = bp[:, 0]
        nrm = np.linalg.norm(col)
        if nrm == 0 or np.linalg.norm(col[1:]) == 0:
            continue
        sep = abs(col[0]) / nrm
        moved = np.linalg.norm(col[1:]) / nrm
        tau = min(eps, moved / (1 + K))
        delta = min(1 - tau, sep - K * tau)
        if (K + 1) ** 2 * eps > 1 + slack or sep * sep < eps * (1 - slack):
            continue
        if delta <= 0 or rho >= tau * delta * (1 + slack):
            continue
        out.append(s)
    return out


def _residual_ok(a_prime, a_form, eps, place, prec) -> bool:
    from .projective import check_proximal
    return check_proximal(a_prime, a_prime[0, 0], a_form.H, eps, place, prec, allow_residual=True).passed


# ---------------------------------------------------------------------------
# table tennis
# ---------------------------------------------------------------------------
@dataclass
class PlayerData:
    name: str
    element: Mat
    h: Mat
    exact: bool
    attracting: ProjPoint
    repelling: ProjHyperplane
    K: Magnitude           # (||h|| ||h^-1||)^2
    rho: Fraction

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "element": self.element.to_record(),
            "h": self.h.to_record(),
            "exact": self.exact,
            "attracting": self.attracting.to_record(),
            "repelling": self.repelling.to_record(),
            "K": self.K.to_record(),
            "rho": _fs(self.rho),
        }


@dataclass
class ArcDomain:
    """Open arcs of P^1(R) containing the fixed points of z; z^k maps the
    complement of their union into it for every k != 0."""
    name: str
    element: Mat
    kind: str              # "parabolic" or "hyperbolic"
    h: Mat                 # normal-form coordinates: t = (h v)_1 / (h v)_2
    params: dict           # parabolic: {"R", "shift"}; hyperbolic: {"r", "s", "mu_lower"}
    arcs: list             # [(A, B)] counterclockwise open arcs, endpoints as vectors

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "element": self.element.to_record(),
            "kind": self.kind,
            "h": self.h.to_record(),
            "params": {k: scalar_record(v) for k, v in self.params.items()},
            "arcs": [[[scalar_record(x) for x in A], [scalar_record(x) for x in B]]
                     for A, B in self.arcs],
        }


@dataclass
class TableTennisCertificate:
    place: Place
    x: Mat
    y: Mat
    eps: Optional[Fraction]
    players: list
    separations: list        # (label, certified lower bound of the distance)
    contractions: list       # (name, upper bound of K^2 rho), each < eps^2
    criterion: str = "balls"
    domains: list = field(default_factory=list)
    words: dict = field(default_factory=dict)

    @property
    def pair(self) -> tuple:
        return (self.x, self.y)

    def to_record(self) -> dict:
        rec = {
            "kind": "table_tennis",
            "criterion": self.criterion,
            "place": self.place.to_record(),
            "elements": {"x": self.x.to_record(), "y": self.y.to_record()},
            "eps": None if self.eps is None else _fs(self.eps),
            "players": [p.to_record() for p in self.players],
            "margins": {
                "separations": [[lab, _fs(v)] for lab, v in self.separations],
                "contractions": [[lab, _fs(v)] for lab, v in self.contractions],
            },
            "words": self.words,
            "conclusion": {"free": "group", "pair": [self.x.to_record(), self.y.to_record()]},
        }
        if self.criterion == "arcs":
            rec["domains"] = [dm.to_record() for dm in self.domains]
        return rec


_NO_FORM = (NoSpectralGap, EigenvalueNotRepresentable, NotTriangularizableInField,
            ConjugatorBoundViolated, PrecisionExhausted)


def _player(name: str, z: Mat, place: Place, precision: int) -> PlayerData:
    try:
        form = proximal_normal_form(z, place, precision)
    except _NO_FORM as exc:
        raise NoProximalStructure(f"{name}: {exc}") from exc
    K = lipschitz_bound(form.h, place, precision)
    rho = contraction_ratio(form.a_prime, place, precision, form.exact)
    return PlayerData(name, z, form.h, form.exact, form.attracting_point(),
                      form.repelling_hyperplane(), K, rho)


def certify_table_tennis(x: Mat, y: Mat, place: Place, precision: int = 64,
                         grid: Optional[list] = None) -> TableTennisCertificate:
    """Ping-pong for <x, y>.

    First tries four eps-balls around the attracting points of x, x^-1, y, y^-1,
    each z mapping everything eps-away from its repelling hyperplane into its
    ball.  For 2x2 real matrices that fails on parabolic elements, so the
    fallback builds exact open arcs of P^1(R) and checks Klein's criterion."""
    if x == y or x == y.inverse():
        raise SeparationFailed("identical fixed data")
    try:
        return _balls(x, y, place, precision, grid)
    except (NoProximalStructure, SeparationFailed) as exc:
        if x.d != 2 or not place.is_real:
            raise
        cert = _arcs(x, y, precision)
        if cert is None:
            raise exc
        return cert


def _balls(x, y, place, precision, grid):
    names = ["x", "X", "y", "Y"]
    players = [_player(n, z, place, precision)
               for n, z in zip(names, [x, x.inverse(), y, y.inverse()])]
    inv = {"x": "X", "X": "x", "y": "Y", "Y": "y"}
    # distance lower bounds that do not depend on eps
    pp = []
    for i in range(4):
        for j in range(i + 1, 4):
            dm = proj_dist(players[i].attracting, players[j].attracting, place, precision)
            pp.append((f"P{names[i]}-P{names[j]}", _lo(dm)))
    ph = []
    for z in players:
        for w in players:
            if w.name == inv[z.name]:
                continue
            dm = proj_dist(w.attracting, z.repelling, place, precision)
            ph.append((f"P{w.name}-R{z.name}", _lo(dm)))
    contr = [(z.name, _hi(z.K) ** 2 * z.rho) for z in players]
    grid = grid or eps_grid(place)
    if min(v for _, v in pp + ph) == 0:
        raise SeparationFailed("attracting/repelling data coincide")
    for eps in grid:
        if not all(v > 2 * eps for _, v in pp + ph):
            continue
        if not all(c < eps * eps for _, c in contr):
            continue
        return TableTennisCertificate(place, x, y, eps, players, pp + ph, contr)
    raise SeparationFailed("no eps on the grid separates and contracts simultaneously")


# --- exact arcs on the real projective line --------------------------------
def _cmp(a, b, bits: int = 64):
    """Sign of a - b, exact when possible, else by enclosures; None if undecided."""
    try:
        return sign(a - b)
    except IncompatibleFields:
        pass
    while bits <= PRECISION_CAP:
        ia, ib = enclose(a, bits), enclose(b, bits)
        if ia.hi < ib.lo:
            return -1
        if ia.lo > ib.hi:
            return 1
        bits *= 2
    return None


def _theta_cmp(u, v):
    """Compare the angles in [0, pi) of the lines spanned by u and v."""
    cu, cv = u[1] == 0, v[1] == 0
    if cu or cv:
        return (0 if cu else 1) - (0 if cv else 1)
    # angle decreases with the cotangent u_1 / u_2
    return _cmp(v[0] / v[1], u[0] / u[1])


def _rank_cmp(u, v, base):
    """Compare counterclockwise positions of u and v measured from base."""
    ru, rv = _theta_cmp(u, base), _theta_cmp(v, base)
    if ru is None or rv is None:
        return None
    ku, kv = (0 if ru >= 0 else 1), (0 if rv >= 0 else 1)
    if ku != kv:
        return ku - kv
    return _theta_cmp(u, v)


def arcs_disjoint(arc1, arc2) -> bool:
    """Open counterclockwise arcs (A1, B1), (A2, B2) are disjoint iff, reading
    counterclockwise from B1, we meet A2 before B2 and B2 no later than A1."""
    (A1, B1), (A2, B2) = arc1, arc2
    c1 = _rank_cmp(A2, B2, B1)
    c2 = _rank_cmp(B2, A1, B1)
    return c1 is not None and c2 is not None and c1 < 0 and c2 <= 0


def _arc_from_chart(h_inv: Mat, t_from, t_to):
    """The image under h^-1 of the counterclockwise arc from (t_from:1) to (t_to:1)."""
    A = h_inv.apply((t_from, Fraction(1)))
    B = h_inv.apply((t_to, Fraction(1)))
    return (A, B) if sign(h_inv.det()) > 0 else (B, A)


def _parabolic_domain(name, z: Mat):
    lam = z.trace() / 2
    v = kernel_vector(_shift(z, lam))
    w = (Fraction(0), Fraction(1)) if v[0] != 0 else (Fraction(1), Fraction(0))
    h_inv = Mat(((v[0], w[0]), (v[1], w[1])))
    h = h_inv.inverse()
    shift = (h * z * h_inv)[0, 1] / lam      # z acts as t -> t + shift
    R = abs(shift) / 2
    # {|t| > R} u {infinity}, counterclockwise from -R to R
    return ArcDomain(name, z, "parabolic", h, {"R": R, "shift": shift},
                     [_arc_from_chart(h_inv, -R, R)])


def _hyperbolic_domains(name, z: Mat, precision: int):
    try:
        form = proximal_normal_form(z, Place.real(), precision)
    except _NO_FORM:
        return []
    ap = form.a_prime
    mu = ap[0, 0] / ap[1, 1]
    m = abs_at_place(mu, Place.real(), precision)
    m = _lo(m)
    if m <= 1:
        return []
    out = []
    grid = sorted({Fraction(2) ** k * Fraction(4 + j, 4) for k in range(-8, 9) for j in range(4)})
    for r in grid:
        s = r / m * Fraction(65, 64)
        if s >= r:
            s = r * 2 / (m + 1)
        arcs = [_arc_from_chart(form.h_inv, -r, r), _arc_from_chart(form.h_inv, s, -s)]
        out.append(ArcDomain(name, z, "hyperbolic", form.h, {"r": r, "s": s, "mu_lower": m}, arcs))
    return out


def _domains(name, z: Mat, precision: int):
    if z.is_scalar():
        return []
    disc = z.trace() ** 2 - 4 * z.det()
    s = sign(disc)
    if s == 0:
        return [_parabolic_domain(name, z)]
    if s > 0:
        return _hyperbolic_domains(name, z, precision)
    return []


def _angle(u) -> float:
    if u[1] == 0:
        return 0.0
    c = u[0] / u[1]
    try:
        f = float(c)
    except OverflowError:
        f = math.copysign(math.inf, sign(c))
    return math.atan2(1.0, f) % math.pi


def _float_arcs(D: ArcDomain):
    return [(_angle(A), _angle(B)) for A, B in D.arcs]


def _float_disjoint(fa1, fa2, slack: float = 1e-9) -> bool:
    # heuristic only; the exact test decides
    for (a1, b1) in fa1:
        for (a2, b2) in fa2:
            ra2, rb2, ra1 = ((a2 - b1) % math.pi, (b2 - b1) % math.pi, (a1 - b1) % math.pi)
            if not (ra2 < rb2 + slack and rb2 <= ra1 + slack):
                return False
    return True


def domains_disjoint(D1: ArcDomain, D2: ArcDomain) -> bool:
    return all(arcs_disjoint(a1, a2) for a1 in D1.arcs for a2 in D2.arcs)


def _arcs(x: Mat, y: Mat, precision: int):
    dx = [(D, _float_arcs(D)) for D in _domains("x", x, precision)]
    dy = [(D, _float_arcs(D)) for D in _domains("y", y, precision)]
    for Dx, fx in dx:
        for Dy, fy in dy:
            if _float_disjoint(fx, fy) and domains_disjoint(Dx, Dy):
                return TableTennisCertificate(Place.real(), x, y, None, [], [], [],
                                              criterion="arcs", domains=[Dx, Dy])
    return None


# ---------------------------------------------------------------------------
# refutation oracle
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Collision:
    u: str
    v: str


@dataclass(frozen=True)
class NoCollisionUpTo:
    L: int


_INV = {"x": "X", "X": "x", "y": "Y", "Y": "y"}


def free_reduce(w: str) -> str:
    out = []
    for c in w:
        if out and _INV[out[-1]] == c:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def _collision(earlier: str, later: str, group: bool = False) -> Collision:
    if group:
        # u = v in a group is the relation u v^-1 = e
        rel = free_reduce(earlier + "".join(_INV[c] for c in reversed(later)))
        return Collision(rel, "")
    return Collision(earlier, later)


def refute_freeness(x: Mat, y: Mat, mode: str = "semigroup", L: int = 12,
                    budget: int = 2_000_000):
    """Exhaustive search for two distinct words with equal products.

    Words are enumerated in shortlex order (letters x < y < X < Y), so the
    reported pair is the least collision in that order."""
    if mode not in ("semigroup", "group"):
        raise PreconditionViolated(f"unknown mode {mode!r}")
    if mode == "semigroup":
        letters = [("x", x), ("y", y)]
        inverse_of = {}
        seen = {}
        level = []
        for c, m in letters:
            if m in seen:
                return _collision(seen[m], c, bool(inverse_of))
            seen[m] = c
            level.append((c, m))
    else:
        letters = [("x", x), ("y", y), ("X", x.inverse()), ("Y", y.inverse())]
        inverse_of = {"x": "X", "X": "x", "y": "Y", "Y": "y"}
        ident = Mat.identity(x.d)
        seen = {ident: ""}
        level = [("", ident)]
        nxt = []
        for c, m in letters:
            if m in seen:
                return _collision(seen[m], c, bool(inverse_of))
            seen[m] = c
            nxt.append((c, m))
        level = nxt
    count = len(seen)
    for _ in range(1, L):
        nxt = []
        for w, m in level:
            for c, g in letters:
                if inverse_of and w and inverse_of[c] == w[-1]:
                    continue
                wc = w + c
                mc = m * g
                prev = seen.get(mc)
                if prev is not None:
                    return _collision(prev, wc, bool(inverse_of))
                seen[mc] = wc
                nxt.append((wc, mc))
                count += 1
                if count > budget:
                    raise BudgetExceeded(f"more than {budget} words")
        level = nxt
    return NoCollisionUpTo(L)
