"""Independent replay of serialized freeness certificates.

Nothing here reuses the magnitude machinery of the producers: real-place
quantities are recomputed with mpmath interval arithmetic at a higher working
precision and finite-place quantities from raw valuations.  Exact matrix
algebra (products, inverses, zero tests) is shared, since it has no rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from mpmath import iv
from mpmath.libmp import to_rational

from .linalg import Mat
from .scalars import Place, Quad, parse_scalar, sign, vp

__all__ = ["VerifyReport", "verify_certificate"]


@dataclass
class VerifyReport:
    ok: bool
    kind: str
    checks: list = field(default_factory=list)   # (name, passed, detail)

    def add(self, name: str, passed, detail: str = ""):
        self.checks.append((name, bool(passed), detail))
        if not passed:
            self.ok = False

    def to_record(self) -> dict:
        return {
            "ok": self.ok,
            "kind": self.kind,
            "checks": [{"name": n, "passed": p, "detail": d} for n, p, d in self.checks],
        }


# ---------------------------------------------------------------------------
# interval helpers
# ---------------------------------------------------------------------------
def _iv(x):
    if isinstance(x, Quad):
        return _iv(x.x) + _iv(x.y) * iv.sqrt(iv.mpf(x.D))
    x = Fraction(x)
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _endpoint(raw) -> Fraction:
    n, d = to_rational(raw)
    return Fraction(int(n), int(d))


def _lo(x) -> Fraction:
    return _endpoint(x._mpi_[0])


def _hi(x) -> Fraction:
    return _endpoint(x._mpi_[1])


def _sq_norm_iv(v):
    s = iv.mpf(0)
    for x in v:
        s += x * x
    return s


def _spectral_norm_sq(m: Mat):
    """Interval [lo, hi] containing ||m||^2 (Euclidean operator norm).

    lo is a Rayleigh quotient at a rationalized float eigenvector; hi is a
    value mu with mu I - m^T m certified positive definite by an interval
    Cholesky factorization."""
    d = m.d
    M = [[_iv(m[i, j]) for j in range(d)] for i in range(d)]
    G = [[sum((M[k][i] * M[k][j] for k in range(d)), iv.mpf(0)) for j in range(d)] for i in range(d)]
    Gf = np.array([[float(G[i][j].mid) for j in range(d)] for i in range(d)])
    w, V = np.linalg.eigh(Gf)
    top = float(w[-1])
    vec = [Fraction(float(x)).limit_denominator(10 ** 12) for x in V[:, -1]]
    if all(x == 0 for x in vec):
        vec = [Fraction(1)] + [Fraction(0)] * (d - 1)
    if m.is_rational:
        exact = _rational_top(m, top)
        if exact is not None:
            return exact, exact
    v = [_iv(x) for x in vec]
    Mv = [sum((M[i][j] * v[j] for j in range(d)), iv.mpf(0)) for i in range(d)]
    lo = _sq_norm_iv(Mv) / _sq_norm_iv(v)
    scale = max(abs(top), 1e-300)
    for k in range(40, 0, -4):
        mu = Fraction(top) + Fraction(scale) * Fraction(1, 2 ** k) + Fraction(1, 2 ** 200)
        if _pos_def_iv([[(_iv(mu) if i == j else iv.mpf(0)) - G[i][j] for j in range(d)]
                        for i in range(d)]):
            return _lo(lo), mu
    return _lo(lo), None


def _rational_top(m: Mat, approx: float):
    """The largest eigenvalue of m^T m when it is a rational with small height."""
    G = m.transpose() * m
    n = G.d
    mu = Fraction(approx).limit_denominator(10 ** 6)
    A = [[(mu if i == j else 0) - G[i, j] for j in range(n)] for i in range(n)]
    if _det_exact(A) != 0:
        return None
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            if _det_exact([[A[i][j] for j in idx] for i in idx]) < 0:
                return None
    return mu


def _pos_def_iv(A) -> bool:
    n = len(A)
    L = [[iv.mpf(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = A[i][j]
            for k in range(j):
                s -= L[i][k] * L[j][k]
            if i == j:
                if not (s > 0):
                    return False
                L[i][i] = iv.sqrt(s)
            else:
                L[i][j] = s / L[j][j]
    return True


def _norm_hi(m: Mat, place: Place) -> Fraction:
    if place.is_real:
        _, hi = _spectral_norm_sq(m)
        if hi is None:
            raise ArithmeticError("norm bound not certified")
        return _hi(iv.sqrt(_iv(hi)))
    return _pnorm(m, place.p)


def _pnorm(m: Mat, p: int) -> Fraction:
    vals = [vp(x, p) for x in m.entries() if x != 0]
    return Fraction(p) ** (-min(vals)) if vals else Fraction(0)


def _pabs(x, p) -> Fraction:
    return Fraction(0) if x == 0 else Fraction(p) ** (-vp(x, p))


def _dist_point_hyper(x, c, place: Place):
    """Interval (lo, hi) for d([x], ker c)."""
    if place.is_real:
        num = sum((_iv(a) * _iv(b) for a, b in zip(c, x)), iv.mpf(0))
        val = abs(num) / iv.sqrt(_sq_norm_iv([_iv(a) for a in x]) * _sq_norm_iv([_iv(a) for a in c]))
        return _lo(val), _hi(val)
    p = place.p
    num = sum((a * b for a, b in zip(c, x)), Fraction(0))
    val = _pabs(num, p) / (max(_pabs(a, p) for a in x) * max(_pabs(a, p) for a in c))
    return val, val


def _dist_points(x, y, place: Place):
    if place.is_real:
        # points may live in different quadratic fields, so go to intervals first
        xi, yi = [_iv(a) for a in x], [_iv(a) for a in y]
        w = [xi[i] * yi[j] - xi[j] * yi[i] for i, j in combinations(range(len(x)), 2)]
        num = iv.sqrt(_sq_norm_iv(w))
        den = iv.sqrt(_sq_norm_iv(xi) * _sq_norm_iv(yi))
        val = num / den
        return _lo(val), _hi(val)
    w = [x[i] * y[j] - x[j] * y[i] for i, j in combinations(range(len(x)), 2)]
    p = place.p
    val = max(_pabs(a, p) for a in w) / (max(_pabs(a, p) for a in x) * max(_pabs(a, p) for a in y))
    return val, val


def _lipschitz_hi(b: Mat, place: Place) -> Fraction:
    return (_norm_hi(b, place) * _norm_hi(b.inverse(), place)) ** 2


def _restricted(a_prime: Mat) -> Mat:
    return Mat(tuple(tuple(r[1:]) for r in a_prime.rows[1:]))


def _rho_hi(a_prime: Mat, place: Place, exact: bool) -> Fraction:
    alpha = a_prime[0, 0]
    d = a_prime.d
    if place.is_real:
        return _norm_hi(_restricted(a_prime), place) / _lo(abs(_iv(alpha)))
    p = place.p
    if exact:
        entries = [a_prime[i, j] for i in range(1, d) for j in range(1, d)]
    else:
        entries = [a_prime[i, j] for i in range(d) for j in range(d) if (i, j) != (0, 0)]
    return max((_pabs(x, p) for x in entries), default=Fraction(0)) / _pabs(alpha, p)


def _det_exact(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = Fraction(0)
    for j in range(n):
        if rows[0][j] != 0:
            minor = [r[:j] + r[j + 1:] for r in rows[1:]]
            term = rows[0][j] * _det_exact(minor)
            total = total + term if j % 2 == 0 else total - term
    return total


def _proximal_real_exact(a_prime: Mat, eps: Fraction):
    """Exact test of ||a'|_H|| <= eps^2 |alpha|, i.e. eps^4 alpha^2 I - S^T S is PSD.

    None when the entries do not share a common exact field."""
    S = _restricted(a_prime)
    n = S.d
    try:
        mu = eps ** 4 * a_prime[0, 0] * a_prime[0, 0]
        G = S.transpose() * S
        A = [[(mu if i == j else 0) - G[i, j] for j in range(n)] for i in range(n)]
        for k in range(1, n + 1):
            for idx in combinations(range(n), k):
                if sign(_det_exact([[A[i][j] for j in idx] for i in idx])) < 0:
                    return False
        return True
    except (ArithmeticError, ValueError):
        return None


def _normal_form_ok(a_prime: Mat, exact: bool) -> bool:
    d = a_prime.d
    if not exact:
        return a_prime[0, 0] != 0
    return all(a_prime[0, j] == 0 and a_prime[j, 0] == 0 for j in range(1, d))


# ---------------------------------------------------------------------------
# ping
# ---------------------------------------------------------------------------
def _verify_ping(rec: dict, precision: int) -> VerifyReport:
    rep = VerifyReport(True, "ping")
    place = Place.parse(rec["place"])
    a = Mat.from_record(rec["elements"]["a"])
    b = Mat.from_record(rec["elements"]["b"])
    h = Mat.from_record(rec["elements"]["h"])
    eps = Fraction(rec["eps"])
    exact = rec.get("exact_form", True)
    d = a.d
    rep.add("eps_range", Fraction(0) < eps <= Fraction(1, 4), str(eps))
    h_inv = h.inverse()
    ap = h * a * h_inv
    rep.add("normal_form", _normal_form_ok(ap, exact))
    if not place.is_real and not exact:
        rep.add("residual_mode_finite_only", True)
    elif not exact:
        rep.add("residual_mode_finite_only", False, "inexact forms exist only at finite places")
    rho = _rho_hi(ap, place, exact)
    ok = rho <= eps * eps
    if not ok and place.is_real and exact:
        ok = bool(_proximal_real_exact(ap, eps))
    rep.add("proximal", ok, f"rho<={float(rho):.3g}")
    bp = h * b * h_inv
    col = bp.column(0)
    rep.add("b_moves_e1", any(col[i] != 0 for i in range(1, d)))
    K = _lipschitz_hi(bp, place)
    rep.add("lipschitz", (K + 1) ** 2 * eps <= 1, f"K<={float(K):.6g}")
    e1 = tuple(Fraction(int(i == 0)) for i in range(d))
    sep_lo, _ = _dist_point_hyper(col, e1, place)
    rep.add("separation", sep_lo ** 2 >= eps, f"d^2>={float(sep_lo ** 2):.6g}")
    moved_lo, _ = _dist_points(e1, col, place)
    tau = min(eps, moved_lo / (1 + K))
    delta = min(1 - tau, sep_lo - K * tau)
    rep.add("contraction", tau > 0 and delta > 0 and rho < tau * delta,
            f"rho={float(rho):.3g} tau={float(tau):.3g} delta={float(delta):.3g}")
    _check_conclusion(rec, rep, "semigroup", (a, b * a))
    return rep


def _check_conclusion(rec: dict, rep: VerifyReport, free: str, pair):
    """The stated conclusion must be exactly what the checks prove."""
    concl = rec.get("conclusion")
    if concl is None:
        return
    rep.add("conclusion_kind", concl.get("free") == free, str(concl.get("free")))
    got = concl.get("pair")
    rep.add("pair", got is not None and len(got) == 2
            and all(Mat.from_record(m) == want for m, want in zip(got, pair)))


# ---------------------------------------------------------------------------
# table tennis
# ---------------------------------------------------------------------------
def _verify_balls(rec: dict, rep: VerifyReport):
    place = Place.parse(rec["place"])
    x = Mat.from_record(rec["elements"]["x"])
    y = Mat.from_record(rec["elements"]["y"])
    eps = Fraction(rec["eps"])
    expected = {"x": x, "X": x.inverse(), "y": y, "Y": y.inverse()}
    inv = {"x": "X", "X": "x", "y": "Y", "Y": "y"}
    pts, hyps = {}, {}
    for pl in rec["players"]:
        name = pl["name"]
        z = Mat.from_record(pl["element"])
        h = Mat.from_record(pl["h"])
        exact = pl.get("exact", True)
        rep.add(f"{name}:element", z == expected[name])
        ap = h * z * h.inverse()
        rep.add(f"{name}:normal_form", _normal_form_ok(ap, exact))
        rho = _rho_hi(ap, place, exact)
        K = _lipschitz_hi(h, place)
        rep.add(f"{name}:contraction", K * K * rho < eps * eps, f"K^2 rho<={float(K * K * rho):.3g}")
        pts[name] = h.inverse().column(0)
        hyps[name] = h.rows[0]
    rep.add("players", sorted(pts) == sorted(expected))
    names = sorted(pts)
    for u, v in combinations(names, 2):
        lo, _ = _dist_points(pts[u], pts[v], place)
        rep.add(f"P{u}-P{v}", lo > 2 * eps, f"{float(lo):.4g}")
    for z in names:
        for w in names:
            if w == inv[z]:
                continue
            lo, _ = _dist_point_hyper(pts[w], hyps[z], place)
            rep.add(f"P{w}-R{z}", lo > 2 * eps, f"{float(lo):.4g}")


def _ang_key(u):
    """Normalize to the upper half plane; returns (class, cotangent interval)."""
    if u[1] == 0:
        return (0, None)
    return (1, _iv(u[0]) / _iv(u[1]))


def _same_line(u, v) -> bool:
    return u[0] * v[1] - u[1] * v[0] == 0


def _theta_cmp(u, v):
    if _same_line(u, v):
        return 0
    ku, kv = _ang_key(u), _ang_key(v)
    if ku[0] != kv[0]:
        return ku[0] - kv[0]
    # larger cotangent means smaller angle
    if ku[1] > kv[1]:
        return -1
    if ku[1] < kv[1]:
        return 1
    return None


def _pos_cmp(u, v, base):
    ru, rv = _theta_cmp(u, base), _theta_cmp(v, base)
    if ru is None or rv is None:
        return None
    ku, kv = (0 if ru >= 0 else 1), (0 if rv >= 0 else 1)
    if ku != kv:
        return ku - kv
    return _theta_cmp(u, v)


def _disjoint(arc1, arc2) -> bool:
    (A1, B1), (A2, B2) = arc1, arc2
    c1, c2 = _pos_cmp(A2, B2, B1), _pos_cmp(B2, A1, B1)
    return c1 is not None and c2 is not None and c1 < 0 and c2 <= 0


def _chart_arc(h_inv: Mat, t0, t1):
    A = h_inv.apply((t0, Fraction(1)))
    B = h_inv.apply((t1, Fraction(1)))
    return (A, B) if h_inv.det() > 0 else (B, A)


def _verify_arcs(rec: dict, rep: VerifyReport):
    x = Mat.from_record(rec["elements"]["x"])
    y = Mat.from_record(rec["elements"]["y"])
    rep.add("real_plane", Place.parse(rec["place"]).is_real and x.d == 2)
    expected = {"x": x, "y": y}
    arcs = {}
    for dm in rec["domains"]:
        name = dm["name"]
        z = Mat.from_record(dm["element"])
        rep.add(f"{name}:element", z == expected.get(name))
        h = Mat.from_record(dm["h"])
        h_inv = h.inverse()
        n = h * z * h_inv
        prm = {k: parse_scalar(v) for k, v in dm["params"].items()}
        if dm["kind"] == "parabolic":
            lam = n[0, 0]
            ok = n[1, 0] == 0 and n[1, 1] == lam and n[0, 1] != 0
            shift = n[0, 1] / lam if ok else 0
            # t -> t + shift; {|t| > R} absorbs all nonzero powers iff 2R <= |shift|
            ok = ok and 0 < prm["R"] and 2 * prm["R"] <= abs(shift)
            rep.add(f"{name}:parabolic", ok)
            own = [_chart_arc(h_inv, -prm["R"], prm["R"])]
        elif dm["kind"] == "hyperbolic":
            ok = n[0, 1] == 0 and n[1, 0] == 0
            r, s = prm["r"], prm["s"]
            mu = abs(_iv(n[0, 0]) / _iv(n[1, 1])) if ok else iv.mpf(0)
            # t -> mu t: need r / mu < s < r
            ok = ok and 0 < s < r and bool(_iv(r) / mu < _iv(s))
            rep.add(f"{name}:hyperbolic", ok)
            own = [_chart_arc(h_inv, -r, r), _chart_arc(h_inv, s, -s)]
        else:
            rep.add(f"{name}:kind", False, dm["kind"])
            continue
        stored = [(tuple(parse_scalar(c) for c in A), tuple(parse_scalar(c) for c in B))
                  for A, B in dm["arcs"]]
        rep.add(f"{name}:arcs_match", len(stored) == len(own) and all(
            _same_line(A, A2) and _same_line(B, B2) for (A, B), (A2, B2) in zip(own, stored)))
        if dm["kind"] == "hyperbolic":
            rep.add(f"{name}:own_arcs_disjoint", _disjoint(own[0], own[1]))
        arcs[name] = own
    rep.add("domains", sorted(arcs) == ["x", "y"])
    if sorted(arcs) == ["x", "y"]:
        rep.add("x-y disjoint", all(_disjoint(a1, a2) for a1 in arcs["x"] for a2 in arcs["y"]))


def _verify_table_tennis(rec: dict, precision: int) -> VerifyReport:
    rep = VerifyReport(True, "table_tennis")
    x = Mat.from_record(rec["elements"]["x"])
    y = Mat.from_record(rec["elements"]["y"])
    rep.add("distinct", x != y and x != y.inverse())
    if rec.get("criterion", "balls") == "arcs":
        _verify_arcs(rec, rep)
    else:
        _verify_balls(rec, rep)
    _check_conclusion(rec, rep, "group", (x, y))
    return rep


def _check_words(rec: dict, rep: VerifyReport):
    """The certified pair must be the products of its recorded words."""
    sigma = [Mat.from_record(m) for m in rec["sigma"]["matrices"]]
    elements = rec["certificate"]["elements"]
    for key, word in (("x", rec["words"].get("x")), ("y", rec["words"].get("a_prime"))):
        if word is None:
            continue
        prod = Mat.identity(sigma[0].d)
        for i in (int(t) for t in word.split(".") if t != ""):
            prod = prod * sigma[i]
        rep.add(f"word:{key}", prod == Mat.from_record(elements[key]))


def verify_certificate(rec: dict, precision: int = 128) -> VerifyReport:
    """Re-check a certificate record from scratch; never raises on a bad
    certificate, it reports the failing checks instead."""
    old = iv.prec
    iv.prec = max(precision, 53)
    try:
        kind = rec.get("kind")
        if kind == "ping":
            return _verify_ping(rec, precision)
        if kind == "table_tennis":
            return _verify_table_tennis(rec, precision)
        if "certificate" in rec:
            rep = verify_certificate(rec["certificate"], precision)
            if "sigma" in rec and "words" in rec:
                _check_words(rec, rep)
            return rep
        rep = VerifyReport(False, str(kind))
        rep.add("known_kind", False, str(kind))
        return rep
    except (ArithmeticError, KeyError, ValueError, TypeError) as exc:
        rep = VerifyReport(False, str(rec.get("kind")))
        rep.add("replay", False, f"{type(exc).__name__}: {exc}")
        return rep
    finally:
        iv.prec = old
