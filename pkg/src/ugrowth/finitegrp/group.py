"""SL_2(F_q): enumeration, directed girth, collision depth and expansion.

Matrices are 4-tuples (a, b, c, d) of field codes for [[a, b], [c, d]].  The
whole group is enumerated once per context; generators become permutation
arrays on element indices and the kernels walk those.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..errors import BudgetExceeded, MemoryBudget, PreconditionViolated
from . import kernels
from .field import Field, prime_power

GROUP_CAP = 5_000_000
PAIR_CAP = 10_000


class FqContext:
    def __init__(self, q: int, modulus=None):
        self.field = Field(q, modulus)
        self.q, self.p, self.k = q, self.field.p, self.field.k
        self.modulus = self.field.modulus
        self.order = q * (q * q - 1)
        self._codes = None
        self._entries = None

    def __repr__(self):
        m = f", modulus={self.field.modulus_str()}" if self.modulus else ""
        return f"FqContext(q={self.q}{m})"

    # -- matrices ------------------------------------------------------------
    @property
    def identity(self) -> tuple:
        return (1, 0, 0, 1)

    def det(self, x) -> int:
        F = self.field
        a, b, c, d = x
        return F.sub(int(F.mul[a, d]), int(F.mul[b, c]))

    def mat_codes(self, x) -> tuple:
        x = tuple(int(v) for v in x)
        if len(x) != 4 or not all(0 <= v < self.q for v in x):
            raise PreconditionViolated(f"not a matrix over F_{self.q}: {x}")
        if self.det(x) != 1:
            raise PreconditionViolated(f"determinant of {x} is not 1")
        return x

    def mat(self, rows) -> tuple:
        """Matrix from integer or p-integral rational entries (prime subfield)."""
        if hasattr(rows, "rows"):
            rows = rows.rows
        (a, b), (c, d) = rows
        F = self.field
        return self.mat_codes(tuple(F.from_fraction(v) for v in (a, b, c, d)))

    def mul(self, x, y) -> tuple:
        M, A = self.field.mul, self.field.add
        a, b, c, d = x
        e, f, g, h = y
        return (int(A[M[a, e], M[b, g]]), int(A[M[a, f], M[b, h]]),
                int(A[M[c, e], M[d, g]]), int(A[M[c, f], M[d, h]]))

    def inv(self, x) -> tuple:
        n = self.field.neg
        a, b, c, d = x
        return (d, int(n[b]), int(n[c]), a)

    def power(self, x, n: int) -> tuple:
        if n < 0:
            x, n = self.inv(x), -n
        out = self.identity
        while n:
            if n & 1:
                out = self.mul(out, x)
            x = self.mul(x, x)
            n >>= 1
        return out

    def element_order(self, x) -> int:
        g, n = x, 1
        while g != self.identity:
            g = self.mul(g, x)
            n += 1
        return n

    def word(self, gens: Sequence[tuple], w: Sequence[int]) -> tuple:
        out = self.identity
        for i in w:
            out = self.mul(out, gens[i])
        return out

    # -- enumeration ---------------------------------------------------------
    def _enumerate(self):
        if self._codes is not None:
            return
        if self.order > GROUP_CAP:
            raise MemoryBudget(f"|SL_2(F_{self.q})| = {self.order} exceeds {GROUP_CAP}")
        q, F = self.q, self.field
        nz = np.arange(1, q, dtype=np.int64)
        allq = np.arange(q, dtype=np.int64)
        # a != 0: b, c free, d = (1 + b c) / a
        a1, b1, c1 = (m.ravel() for m in np.meshgrid(nz, allq, allq, indexing="ij"))
        d1 = F.mul[F.add[1, F.mul[b1, c1]], F.inv[a1]]
        # a = 0: c != 0, b = -1/c, d free
        c2, d2 = (m.ravel() for m in np.meshgrid(nz, allq, indexing="ij"))
        a2 = np.zeros_like(c2)
        b2 = F.neg[F.inv[c2]]
        ent = np.stack([np.concatenate([a1, a2]), np.concatenate([b1, b2]),
                        np.concatenate([c1, c2]), np.concatenate([d1, d2])]).astype(np.int64)
        codes = self._encode(ent)
        order = np.argsort(codes, kind="stable")
        self._codes = codes[order]
        self._entries = ent[:, order]
        if len(np.unique(self._codes)) != self.order:
            raise AssertionError("enumeration does not have order q(q^2-1)")

    def _encode(self, ent):
        q = self.q
        return ((ent[0] * q + ent[1]) * q + ent[2]) * q + ent[3]

    def __len__(self):
        self._enumerate()
        return len(self._codes)

    def element(self, i: int) -> tuple:
        self._enumerate()
        return tuple(int(v) for v in self._entries[:, i])

    def index(self, x) -> int:
        self._enumerate()
        code = self._encode(np.array(x, dtype=np.int64).reshape(4, 1))[0]
        i = int(np.searchsorted(self._codes, code))
        if i >= len(self._codes) or self._codes[i] != code:
            raise PreconditionViolated(f"{x} is not in SL_2(F_{self.q})")
        return i

    def perms(self, gens: Sequence[tuple], side: str = "right") -> np.ndarray:
        """perms[s][i] = index of g_i * gens[s] (right) or gens[s] * g_i (left)."""
        self._enumerate()
        M, A = self.field.mul, self.field.add
        a, b, c, d = self._entries
        out = np.empty((len(gens), len(self._codes)), dtype=np.int32)
        for s, (e, f, g, h) in enumerate(gens):
            if side == "right":
                prod = np.stack([A[M[a, e], M[b, g]], A[M[a, f], M[b, h]],
                                 A[M[c, e], M[d, g]], A[M[c, f], M[d, h]]]).astype(np.int64)
            else:
                prod = np.stack([A[M[e, a], M[f, c]], A[M[e, b], M[f, d]],
                                 A[M[g, a], M[h, c]], A[M[g, b], M[h, d]]]).astype(np.int64)
            out[s] = np.searchsorted(self._codes, self._encode(prod))
        return np.ascontiguousarray(out)


def sl2q_make(q: int, modulus=None) -> FqContext:
    ctx = FqContext(q, modulus)
    ctx._enumerate()
    return ctx


def generates(ctx: FqContext, gens: Sequence[tuple]) -> bool:
    """Orbit closure: in a finite group the positive semigroup is the group."""
    P = ctx.perms(gens)
    return kernels.orbit_size(P, ctx.index(ctx.identity)) == ctx.order


def directed_girth(ctx: FqContext, a, b) -> int:
    """Shortest nonempty positive word in a, b equal to the identity."""
    P = ctx.perms([a, b])
    return int(kernels.girth(P, ctx.index(ctx.identity)))


def collision_depth(ctx: FqContext, a, b) -> int:
    """Least L such that two distinct nonempty positive words of length <= L agree."""
    P = ctx.perms([a, b])
    return int(kernels.collision_depth(P, ctx.index(ctx.identity)))


def expansion_ratio(ctx: FqContext, A: Sequence[tuple], B) -> Fraction:
    """max over a in A of |aB \\ B| / |B|."""
    Bs = set(tuple(x) for x in B)
    if not Bs:
        raise PreconditionViolated("B must be nonempty")
    worst = 0
    for a in A:
        worst = max(worst, sum(1 for x in Bs if ctx.mul(a, x) not in Bs))
    return Fraction(worst, len(Bs))


def min_expansion(ctx: FqContext, A: Sequence[tuple], max_size: int):
    """Brute-force minimum of expansion_ratio over all B with 1 <= |B| <= max_size."""
    P = ctx.perms(A, side="left")
    num, den, B = kernels.min_expansion(P, max_size)
    return Fraction(num, den), [ctx.element(i) for i in B]


def ball(ctx: FqContext, gens: Sequence[tuple], radius: int) -> list:
    """Elements of word length <= radius in gens and their inverses, BFS order."""
    S = list(gens) + [ctx.inv(g) for g in gens]
    seen = {ctx.identity}
    out = [ctx.identity]
    frontier = [ctx.identity]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for s in S:
                h = ctx.mul(g, s)
                if h not in seen:
                    seen.add(h)
                    out.append(h)
                    nxt.append(h)
        frontier = nxt
    return out


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------
@dataclass
class GirthRecord:
    q: int
    order: int
    gen_spec: str
    a: tuple
    b: tuple
    directed_girth: int
    collision_depth: int
    generates: bool
    ratio: Fraction
    words: Optional[dict] = None
    modulus: str = ""
    pairs_checked: int = 0

    def to_record(self) -> dict:
        rec = {
            "q": self.q, "order": self.order, "gen_spec": self.gen_spec,
            "a": list(self.a), "b": list(self.b),
            "directed_girth": self.directed_girth, "collision_depth": self.collision_depth,
            "generates": self.generates, "ratio": _fs(self.ratio),
        }
        if self.modulus:
            rec["modulus"] = self.modulus
        if self.words is not None:
            rec["words"] = self.words
        if self.pairs_checked:
            rec["pairs_checked"] = self.pairs_checked
        return rec

    def csv_row(self) -> list:
        return [self.q, self.order, self.gen_spec, self.directed_girth, self.collision_depth, _fs(self.ratio)]


CSV_HEADER = ["q", "order", "gen_spec", "girth", "collision_depth", "ratio"]


def _fs(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _record(ctx, spec, a, b, words=None, pairs=0) -> GirthRecord:
    B = ball(ctx, [a, b], 2)
    return GirthRecord(ctx.q, ctx.order, spec, a, b, directed_girth(ctx, a, b),
                       collision_depth(ctx, a, b), generates(ctx, [a, b]),
                       expansion_ratio(ctx, [a, b], B), words, ctx.field.modulus_str(), pairs)


def _exhaustive(ctx: FqContext, pair_cap: int) -> GirthRecord:
    n = ctx.order
    if n * n > pair_cap:
        raise BudgetExceeded(f"{n * n} ordered pairs exceed the cap {pair_cap}")
    elems = [ctx.element(i) for i in range(n)]
    R = ctx.perms(elems)
    e = ctx.index(ctx.identity)
    best = None
    for i in range(n):
        for j in range(n):
            P = np.ascontiguousarray(R[[i, j]])
            if kernels.orbit_size(P, e) != n:
                continue
            g = int(kernels.girth(P, e))
            if best is None or g < best[0]:
                best = (g, i, j)
    _, i, j = best
    return _record(ctx, "exhaustive-small", elems[i], elems[j], pairs=n * n)


def girth_table(q_list, strategy: str = "standard", Sigma=None, modulus=None,
                pair_cap: int = PAIR_CAP, sl2_budget=None) -> list:
    """One GirthRecord per q.

    standard: a = [[1,1],[0,1]], b = [[1,0],[1,1]].
    from-rational-set: reduce Sigma mod p and evaluate the words of the free
    pair found by sl2_free_pair on Sigma.
    exhaustive-small: minimum girth over all generating ordered pairs."""
    rows = []
    words = None
    if strategy == "from-rational-set":
        if Sigma is None:
            raise PreconditionViolated("from-rational-set needs a matrix set")
        from ..search import word_str
        from ..sl2 import Sl2Budget, sl2_free_pair
        trace = sl2_free_pair(Sigma, sl2_budget or Sl2Budget())
        words = {"a": word_str(trace.x_word), "b": word_str(trace.a_prime_word)}
        xw, yw = trace.x_word, trace.a_prime_word
    elif strategy not in ("standard", "exhaustive-small"):
        raise PreconditionViolated(f"unknown generator strategy {strategy!r}")
    for q in q_list:
        prime_power(q)
        ctx = sl2q_make(q, modulus if prime_power(q)[1] > 1 else None)
        if strategy == "standard":
            rows.append(_record(ctx, "standard", ctx.mat([[1, 1], [0, 1]]), ctx.mat([[1, 0], [1, 1]])))
        elif strategy == "exhaustive-small":
            rows.append(_exhaustive(ctx, pair_cap))
        else:
            gens = [ctx.mat(m) for m in Sigma]
            rows.append(_record(ctx, "from-rational-set", ctx.word(gens, xw), ctx.word(gens, yw), words))
    return rows
