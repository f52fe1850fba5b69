"""Finite matrix sets: powers, Lambda and norm over a set, and bounds on the
conjugation-minimized norm Delta(Q) = inf_g ||g Q g^-1||."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BallExplosion, CapReached, DimensionMismatch, PreconditionViolated
from .linalg import Mat, _rref, algebra_closure, char_poly, op_norm, spectral_radii
from .scalars import (
    ZERO,
    Magnitude,
    Place,
    PPower,
    Zero,
    mag_max,
    magnitude_from_record,
)

__all__ = [
    "MatSet", "DeltaBounds", "Budget", "set_power", "set_lambda", "set_norm",
    "delta_bounds", "grow_until_norm", "lambda_is_zero", "set_powers",
]

DEFAULT_BALL_CAP = 200_000


@dataclass(frozen=True)
class Budget:
    iterations: int = 200       # conjugator search steps
    nodes: int = 400            # tree-search nodes at finite places
    power_cap: int = 4096       # largest Q^j used for the spectral lower bound
    ball_cap: int = DEFAULT_BALL_CAP
    precision: int = 64
    nilpotent_target_bits: int = 20


class MatSet:
    """Deduplicated finite set of d x d matrices; order of first appearance kept."""

    def __init__(self, elements, symmetric: Optional[bool] = None,
                 contains_identity: Optional[bool] = None):
        seen = {}
        for m in elements:
            if not isinstance(m, Mat):
                m = Mat(m)
            seen.setdefault(m, None)
        self.elements: tuple = tuple(seen)
        if not self.elements:
            raise PreconditionViolated("empty matrix set")
        self.dim = self.elements[0].d
        if any(m.d != self.dim for m in self.elements):
            raise DimensionMismatch("matrices of different sizes")
        self._index = {m: i for i, m in enumerate(self.elements)}
        ident = Mat.identity(self.dim)
        has_id = ident in self._index
        if contains_identity is not None and contains_identity != has_id:
            raise PreconditionViolated(f"contains_identity={contains_identity} does not hold")
        self.contains_identity = has_id
        sym = self._check_symmetric()
        if symmetric is not None and symmetric != sym:
            raise PreconditionViolated(f"symmetric={symmetric} does not hold")
        self.symmetric = sym

    def _check_symmetric(self) -> bool:
        for m in self.elements:
            if m.det() == 0 or m.inverse() not in self._index:
                return False
        return True

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __contains__(self, m):
        return m in self._index

    def index(self, m) -> int:
        return self._index[m]

    def __eq__(self, other):
        return isinstance(other, MatSet) and self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        return f"MatSet(d={self.dim}, n={len(self)})"

    def with_identity(self) -> "MatSet":
        if self.contains_identity:
            return self
        return MatSet((Mat.identity(self.dim),) + self.elements)

    def symmetrized(self) -> "MatSet":
        out = []
        for m in self.elements:
            out.append(m)
            out.append(m.inverse())
        return MatSet(out)

    def conjugate(self, g: Mat) -> "MatSet":
        gi = g.inverse()
        return MatSet([g * m * gi for m in self.elements])

    @property
    def is_rational(self) -> bool:
        return all(m.is_rational for m in self.elements)

    # -- serialization -----------------------------------------------------
    def to_record(self) -> dict:
        return {
            "dim": self.dim,
            "matrices": [m.to_record() for m in self.elements],
            "symmetric": self.symmetric,
            "contains_identity": self.contains_identity,
        }

    @classmethod
    def from_record(cls, rec) -> "MatSet":
        mats = [Mat.from_record(m) for m in rec["matrices"]]
        if "dim" in rec and any(m.d != rec["dim"] for m in mats):
            raise DimensionMismatch("declared dim does not match matrices")
        return cls(mats, rec.get("symmetric"), rec.get("contains_identity"))


def set_powers(Q: MatSet, n: int, cap: int = DEFAULT_BALL_CAP):
    """Yield Q^1, Q^2, ..., Q^n as deduplicated element tuples."""
    if n < 1:
        raise PreconditionViolated("power must be >= 1")
    level = list(Q.elements)
    yield tuple(level)
    for _ in range(n - 1):
        nxt = {}
        for x in level:
            for q in Q.elements:
                nxt.setdefault(x * q, None)
            if len(nxt) > cap:
                raise BallExplosion(f"more than {cap} elements")
        level = list(nxt)
        yield tuple(level)


def set_power(Q: MatSet, n: int, cap: int = DEFAULT_BALL_CAP) -> MatSet:
    last = None
    for last in set_powers(Q, n, cap):
        pass
    return MatSet(last)


def lambda_is_zero(a: Mat) -> bool:
    """Lambda(a) = 0 at every place iff the characteristic polynomial is x^d."""
    return all(c == 0 for c in char_poly(a)[:-1])


def set_lambda(Q, place: Place, precision: int = 64) -> Magnitude:
    mags = []
    for a in Q:
        if lambda_is_zero(a):
            mags.append(ZERO)
        else:
            mags.append(spectral_radii(a, place, precision).Lambda)
    return mag_max(mags)


def set_norm(Q, place: Place, precision: int = 64) -> Magnitude:
    return mag_max(op_norm(a, place, precision) for a in Q)


# ---------------------------------------------------------------------------
# Delta bounds
# ---------------------------------------------------------------------------
@dataclass
class DeltaBounds:
    place: Place
    lower: Magnitude
    witnessed_upper: Magnitude
    witness_conjugator: Optional[Mat] = None
    analytic_upper: Optional[Magnitude] = None
    powers_used: int = 0
    search_steps: int = 0

    def to_record(self) -> dict:
        return {
            "place": self.place.to_record(),
            "lower": self.lower.to_record(),
            "witnessed_upper": self.witnessed_upper.to_record(),
            "witness_conjugator": None if self.witness_conjugator is None else self.witness_conjugator.to_record(),
            "analytic_upper": None if self.analytic_upper is None else self.analytic_upper.to_record(),
            "powers_used": self.powers_used,
        }

    @classmethod
    def from_record(cls, rec) -> "DeltaBounds":
        return cls(
            Place.parse(rec["place"]),
            magnitude_from_record(rec["lower"]),
            magnitude_from_record(rec["witnessed_upper"]),
            None if rec["witness_conjugator"] is None else Mat.from_record(rec["witness_conjugator"]),
            None if rec["analytic_upper"] is None else magnitude_from_record(rec["analytic_upper"]),
            rec.get("powers_used", 0),
        )


def _upper_key(m: Magnitude):
    """Sort key for an upper bound: smaller is better."""
    if isinstance(m, Zero):
        return (0, Fraction(0))
    if isinstance(m, PPower):
        return (1, -m.exponent)
    return (1, m.hi)


def _conj_norm(mats, g: Mat, gi: Mat, place: Place, precision: int) -> Magnitude:
    return set_norm([g * a * gi for a in mats], place, precision)


def delta_bounds(Q: MatSet, place: Place, budget: Budget = Budget()) -> DeltaBounds:
    d = Q.dim
    prec = budget.precision
    lowers = []
    analytic = []
    used = 0
    try:
        for j, level in enumerate(set_powers(Q, d * d, budget.power_cap), start=1):
            used = j
            lam = set_lambda(level, place, prec)
            lowers.append(lam.root(j, prec) if not isinstance(lam, Zero) else ZERO)
            if not place.is_real:
                if isinstance(lam, Zero):
                    analytic.append(ZERO)
                else:
                    analytic.append(PPower((lam.exponent - (2 * d - 1)) / j, place.p))
    except BallExplosion:
        pass
    lower = mag_max(lowers)
    analytic_upper = None
    if not place.is_real:
        analytic_upper = mag_max(analytic)
        if used < d * d:
            # the comparison bound needs every power up to d^2
            analytic_upper = None
    if place.is_real:
        g, upper, steps = _search_real(Q, budget)
    elif d == 2:
        g, upper, steps = _search_tree(Q, place.p, budget)
    else:
        g, upper, steps = _search_padic_diag(Q, place.p, budget)
    return DeltaBounds(place, lower, upper, g, analytic_upper, used, steps)


# -- real place --------------------------------------------------------------
_DIAG_FACTORS = (Fraction(2), Fraction(1, 2), Fraction(5, 4), Fraction(4, 5),
                 Fraction(17, 16), Fraction(16, 17))


def _search_real(Q: MatSet, budget: Budget):
    d = Q.dim
    mats = Q.elements
    steps = 0
    bases = [Mat.identity(d)]
    basis, nilpotent, _ = algebra_closure(mats)
    if nilpotent:
        fl = _flag_basis(basis, d)
        if fl is not None:
            return _flag_scaling(mats, fl, budget)
    bal = _balancing_conjugator(mats)
    if bal is not None:
        bases.append(bal)
    best = None
    per_base = max(1, budget.iterations // len(bases))
    for B in bases:
        g, val, used = _diag_descent(mats, B, per_base)
        steps += used
        if best is None or _upper_key(val) < _upper_key(best[1]):
            best = (g, val)
    g = best[0]
    upper = _conj_norm(mats, g, g.inverse(), Place(None), budget.precision)
    return g, upper, steps


def _diag_descent(mats, B: Mat, iterations: int):
    """Coordinate descent over diagonal conjugators composed with B."""
    d = B.d
    scales = [Fraction(1)] * d
    cur = _conj_norm(mats, B, B.inverse(), Place(None), 40)
    steps = 1
    improved = True
    while improved and steps < iterations:
        improved = False
        for i in range(1, d):
            for f in _DIAG_FACTORS:
                if steps >= iterations:
                    break
                trial = list(scales)
                trial[i] *= f
                g = Mat.diag(trial) * B
                val = _conj_norm(mats, g, g.inverse(), Place(None), 40)
                steps += 1
                if _upper_key(val) < _upper_key(cur):
                    scales, cur, improved = trial, val, True
                    break
            if improved:
                break
    return Mat.diag(scales) * B, cur, steps


def _flag_basis(basis, d):
    """Basis adapted to the chain V > A V > A^2 V > ... > 0 of a nilpotent algebra.

    Returns (B, levels) with B's columns the basis vectors."""
    if not basis:
        return None
    chain = [_rref([[Fraction(int(i == j)) for j in range(d)] for i in range(d)])]
    while chain[-1]:
        nxt = _rref([a.apply(w) for a in basis for w in chain[-1]])
        chain.append(nxt)
    vectors, levels = [], []
    span = []
    for level in range(len(chain) - 2, -1, -1):
        for w in chain[level]:
            trial = _rref(span + [list(w)])
            if len(trial) > len(span):
                span = trial
                vectors.append(list(w))
                levels.append(level)
    B = Mat(tuple(tuple(vectors[c][r] for c in range(d)) for r in range(d)))
    return B, levels


def _flag_scaling(mats, fl, budget: Budget):
    B, levels = fl
    Bi = B.inverse()
    base = [Bi * a * B for a in mats]
    target = Fraction(1, 1 << budget.nilpotent_target_bits)
    steps = 0
    best = None
    k = 0
    while steps < budget.iterations:
        t = Fraction(1 << k)
        D = Mat.diag([t ** (-lv) for lv in levels])
        Di = Mat.diag([t ** lv for lv in levels])
        val = set_norm([D * a * Di for a in base], Place(None), 40)
        steps += 1
        if best is None or _upper_key(val) < _upper_key(best[1]):
            best = (k, val)
        elif k > best[0] + 2:
            break
        if isinstance(val, Zero) or val.hi < target:
            break
        k += 1
    t = Fraction(1 << best[0])
    g = Mat.diag([t ** (-lv) for lv in levels]) * Bi
    upper = _conj_norm(mats, g, g.inverse(), Place(None), budget.precision)
    return g, upper, steps


def _balancing_conjugator(mats) -> Optional[Mat]:
    """Rational approximation of P^(1/2) with P = sum a^T a (floating point search only)."""
    import numpy as np

    d = mats[0].d
    P = np.zeros((d, d))
    for a in mats:
        A = np.array([[float(x) for x in r] for r in a.rows])
        P += A.T @ A
    try:
        w, V = np.linalg.eigh(P)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(w)) or w.min() <= 1e-12 * max(1.0, w.max()):
        return None
    R = V @ np.diag(w ** 0.25) @ V.T
    g = Mat([[Fraction(float(x)).limit_denominator(1 << 12) for x in r] for r in R])
    if g.det() == 0:
        return None
    return g


# -- finite places -------------------------------------------------------------
def _reduce_mod(b: Fraction, p: int, n: int) -> Fraction:
    m = Fraction(p) ** n
    return b - (b / m).__floor__() * m


def _tree_conjugator(n: int, b: Fraction, p: int):
    M = Mat([[Fraction(p) ** n, b], [0, 1]])
    return M.inverse(), M


def _search_tree(Q: MatSet, p: int, budget: Budget):
    """Best-first walk over vertices (n, b) of the Bruhat-Tits tree."""
    place = Place(p)
    mats = Q.elements

    def value(node):
        g, gi = _tree_conjugator(node[0], node[1], p)
        return _conj_norm(mats, g, gi, place, 0)

    start = (0, Fraction(0))
    v0 = value(start)
    best = (_upper_key(v0), _node_key(start), start, v0)
    heap = [(_upper_key(v0), _node_key(start), start)]
    seen = {start}
    vals = {start: v0}
    steps = 1
    while heap and steps < budget.nodes:
        _, _, (n, b) = heapq.heappop(heap)
        nbrs = [(n + 1, _reduce_mod(b + k * Fraction(p) ** n, p, n + 1)) for k in range(p)]
        nbrs.append((n - 1, _reduce_mod(b, p, n - 1)))
        for nb in nbrs:
            if nb in seen:
                continue
            seen.add(nb)
            val = value(nb)
            steps += 1
            vals[nb] = val
            cand = (_upper_key(val), _node_key(nb), nb, val)
            if cand[:2] < best[:2]:
                best = cand
            heapq.heappush(heap, (_upper_key(val), _node_key(nb), nb))
            if steps >= budget.nodes:
                break
    node = best[2]
    g, _ = _tree_conjugator(node[0], node[1], p)
    return g, best[3], steps


def _node_key(node):
    return (abs(node[0]), node[0], node[1])


def _search_padic_diag(Q: MatSet, p: int, budget: Budget):
    d = Q.dim
    place = Place(p)
    mats = Q.elements
    ks = [0] * d
    steps = 0

    def value(ks):
        g = Mat.diag([Fraction(p) ** k for k in ks])
        return _conj_norm(mats, g, g.inverse(), place, 0)

    cur = value(ks)
    improved = True
    while improved and steps < budget.iterations:
        improved = False
        for i in range(1, d):
            for step in (1, -1):
                trial = list(ks)
                trial[i] += step
                val = value(trial)
                steps += 1
                if _upper_key(val) < _upper_key(cur):
                    ks, cur, improved = trial, val, True
                    break
            if improved:
                break
    return Mat.diag([Fraction(p) ** k for k in ks]), cur, steps


# ---------------------------------------------------------------------------
def _exceeds(m: Magnitude, C: Fraction) -> bool:
    if isinstance(m, Zero):
        return False
    if isinstance(m, PPower):
        return not m.le_value(C)
    return m.lo > C


def grow_until_norm(Q: MatSet, C, place: Place, cap: int = 64, precision: int = 64,
                    ball_cap: int = DEFAULT_BALL_CAP) -> int:
    """Least N <= cap with ||Q^1 u ... u Q^N|| certified > C."""
    C = Fraction(C)
    if C <= 1:
        raise PreconditionViolated("C must exceed 1")
    for N, level in enumerate(set_powers(Q, cap, ball_cap), start=1):
        if _exceeds(set_norm(level, place, precision), C):
            return N
    raise CapReached(f"no norm above {C} up to power {cap}")
