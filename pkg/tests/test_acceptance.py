"""Acceptance criteria, one test each.

Every test checks its runtime limit as well as its outcome.  The conftest
hook prints one PASS/FAIL line per criterion at the end of the run.
"""
import json
import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from functools import lru_cache
from itertools import product

import pytest

from checks import check_form
from oracles import collision_depth_mod_p, generated_size, girth_mod_p, sl2_elements
from ugrowth.conjugators import proximal_normal_form
from ugrowth.errors import CertifiedNegative, Inconclusive
from ugrowth.finitegrp import girth_table, min_expansion, sl2q_make
from ugrowth.linalg import Mat, algebra_closure
from ugrowth.pingpong import NoCollisionUpTo, certify_ping, certify_table_tennis, refute_freeness
from ugrowth.scalars import Cmp, Place, PPower, Zero, mag_compare
from ugrowth.search import dplus_upper, growth_table
from ugrowth.setcalc import MatSet, delta_bounds, set_lambda, set_powers
from ugrowth.sl2 import sl2_corpus, sl2_free_pair
from ugrowth.verify import verify_certificate

F = Fraction
R = Place.real()
A100 = Mat.diag([100, F(1, 100)])
ROT = Mat([[F(3, 5), F(-4, 5)], [F(4, 5), F(3, 5)]])
SANOV = [Mat([[1, 2], [0, 1]]), Mat([[1, 0], [2, 1]])]

pytestmark = pytest.mark.acceptance


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed <= self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


def upper_value(m) -> Fraction:
    """Exact upper bound of a magnitude as a rational."""
    if isinstance(m, Zero):
        return F(0)
    if isinstance(m, PPower):
        return F(m.p) ** (-m.exponent)
    return m.hi


def not_above(x, y) -> bool:
    return mag_compare(x, y) in (Cmp.LESS, Cmp.EQUAL)


def rand_entry(rng, num=6, dens=(1, 1, 2, 3, 4)):
    return F(rng.randint(-num, num), rng.choice(dens))


def rand_mat(rng, d):
    return Mat([[rand_entry(rng) for _ in range(d)] for _ in range(d)])


def rand_invertible(rng, d):
    while True:
        g = Mat([[F(rng.randint(-3, 3)) for _ in range(d)] for _ in range(d)])
        if g.det() != 0:
            return g


def nilpotent_spanning(rng, d):
    """Conjugate of a random set of strictly upper triangular matrices."""
    g = rand_invertible(rng, d)
    gi = g.inverse()
    out = []
    for _ in range(rng.randint(1, 3)):
        rows = [[rand_entry(rng) if j > i else F(0) for j in range(d)] for i in range(d)]
        out.append(g * Mat(rows) * gi)
    return out


def lambda_vanishes(Q: MatSet) -> bool:
    """Lambda(Q^i) = Zero for every i <= d^2 (stops at the first nonzero level)."""
    d = Q.dim
    for level in set_powers(Q, d * d):
        if not isinstance(set_lambda(level, R), Zero):
            return False
    return True


# --- 1 ----------------------------------------------------------------------
def test_criterion_01_nilpotency_equivalence():
    """nilpotent algebra iff Lambda(Q^i) = 0 for i <= d^2; Delta upper below 2^-10"""
    rng = random.Random(101)
    with Clock(120):
        cases = [(nilpotent_spanning(rng, d), True) for d in (2, 3) for _ in range(50)]
        cases += [([rand_mat(rng, d) for _ in range(rng.randint(1, 3))], False)
                  for d in (2, 3) for _ in range(50)]
        nilpotent_cases = 0
        for mats, built_nilpotent in cases:
            Q = MatSet(mats)
            nil = algebra_closure(Q.elements)[1]
            if built_nilpotent:
                assert nil
            assert nil == lambda_vanishes(Q)
            if nil:
                nilpotent_cases += 1
                b = delta_bounds(Q, R)
                assert isinstance(b.lower, Zero)
                assert upper_value(b.witnessed_upper) < F(1, 2 ** 10)
        assert len(cases) == 200 and nilpotent_cases >= 100


# --- 2 ----------------------------------------------------------------------
def test_criterion_02_nonarchimedean_comparison():
    """lower <= analytic upper always; witnessed <= analytic in >= 90% at p = 2, 3, 5"""
    rng = random.Random(202)
    dens = (1, 1, 2, 3, 4, 5, 9, 25, 27)
    with Clock(300):
        hits = {2: 0, 3: 0, 5: 0}
        for _ in range(100):
            k = rng.randint(1, 3)
            mats = [Mat([[rand_entry(rng, 9, dens) for _ in range(2)] for _ in range(2)]) for _ in range(k)]
            for p in hits:
                b = delta_bounds(MatSet(mats), Place(p))
                assert b.analytic_upper is not None
                assert not_above(b.lower, b.analytic_upper)
                hits[p] += not_above(b.witnessed_upper, b.analytic_upper)
        print("witnessed <= analytic:", hits)
        assert all(h >= 90 for h in hits.values())


# --- 3 ----------------------------------------------------------------------
def _grid_matrices():
    out = []
    for e in product(range(-2, 3), repeat=4):
        m = Mat([[e[0], e[1]], [e[2], e[3]]])
        if m.det() != 0:
            out.append(m)
    return out[::7]


@lru_cache(maxsize=None)
def corpus_traces():
    return {name: sl2_free_pair(S) for name, S in sl2_corpus().items()}


def certificate_corpus():
    """Every ping and table-tennis certificate the fixed test inputs produce."""
    pings, tennis = [], []
    grid = _grid_matrices()
    for a in (A100, Mat.diag([10 ** 4, F(1, 10 ** 4)])):
        form = proximal_normal_form(a, R)
        for b in [ROT] + grid:
            for eps in (F(1, 10), F(1, 100)):
                try:
                    pings.append(certify_ping(form, b, eps, R))
                except (CertifiedNegative, Inconclusive):
                    pass
    for p in (5, 7, 11):
        form = proximal_normal_form(Mat.diag([F(1, p ** 3), p ** 3]), Place(p))
        pings.append(certify_ping(form, Mat([[1, 1], [1, 2]]), F(1, p), Place(p)))
    tennis.append(certify_table_tennis(*SANOV, R))
    for lam in (9, 16, F(25, 2)):
        x = Mat.diag([lam, 1 / F(lam)])
        for g in [ROT] + grid:
            try:
                tennis.append(certify_table_tennis(x, g * x * g.inverse(), R))
            except (CertifiedNegative, Inconclusive):
                pass
    for t in corpus_traces().values():
        tennis.append(t.certificate)
    for S, place in ((MatSet(SANOV).with_identity(), R),
                     (MatSet([Mat.identity(2), Mat([[1, F(1, 5)], [0, 1]]), Mat([[1, 0], [F(1, 5), 1]])]),
                      Place(5))):
        cert = dplus_upper(S, place).certificate
        (pings if cert.to_record()["kind"] == "ping" else tennis).append(cert)
    return pings, tennis


def test_criterion_03_certificate_soundness():
    """every ping certificate survives L = 12, every table tennis certificate L = 8"""
    with Clock(600):
        pings, tennis = certificate_corpus()
        print(f"{len(pings)} ping, {len(tennis)} table tennis certificates")
        assert len(pings) >= 20 and len(tennis) >= 20
        for c in pings:
            assert isinstance(refute_freeness(*c.pair, "semigroup", 12), NoCollisionUpTo)
            assert verify_certificate(json.loads(json.dumps(c.to_record()))).ok
        for c in tennis:
            assert isinstance(refute_freeness(*c.pair, "group", 8), NoCollisionUpTo)
            assert verify_certificate(json.loads(json.dumps(c.to_record()))).ok


# --- 4 ----------------------------------------------------------------------
def test_criterion_04_conjugator_postconditions():
    """100 successful normal forms meet the three certified bounds"""
    rng = random.Random(404)
    tops = [3, -3, 4, F(9, 2), -5, 8]
    with Clock(120):
        done = tries = 0
        while done < 100:
            tries += 1
            assert tries < 1000
            d = rng.choice([2, 3])
            rest = [F(rng.choice([-4, -3, -2, -1, 1, 2, 3, 4, 5, 6]), 4) for _ in range(d - 1)]
            g = rand_invertible(rng, d)
            a = g * Mat.diag([rng.choice(tops)] + rest) * g.inverse()
            try:
                f = proximal_normal_form(a, R)
            except (CertifiedNegative, Inconclusive):
                continue
            check_form(a, f, R)
            done += 1


# --- 5 ----------------------------------------------------------------------
def test_criterion_05_worked_ping_example():
    """diag(100, 1/100) and the 3-4-5 rotation at eps = 1/10"""
    with Clock(1):
        form = proximal_normal_form(A100, R)
        cert = certify_ping(form, ROT, F(1, 10), R)
    # (K + 1)^2 eps with K = 1 is 4/10 <= 1; d(b e1, H)^2 = 9/25 >= 1/10
    assert cert.lipschitz_lhs == F(4, 10)
    assert cert.lipschitz_lhs.numerator * 10 <= 10 * cert.lipschitz_lhs.denominator
    assert cert.separation_sq == F(9, 25) >= F(1, 10)
    assert all(isinstance(v, Fraction) for v in (cert.lipschitz_lhs, cert.separation_sq))
    assert verify_certificate(cert.to_record()).ok


# --- 6 ----------------------------------------------------------------------
def test_criterion_06_sl2_pipeline():
    """verified traces for all 10 curated Zariski-dense sets"""
    with Clock(600):
        traces = corpus_traces()
        assert len(traces) == 10
        for name, t in traces.items():
            rep = verify_certificate(json.loads(json.dumps(t.to_record())), precision=192)
            assert rep.ok, (name, rep.to_record())
            assert any(n.startswith("word:") for n, _, _ in rep.checks)
        longest = max(t.total_word_length for t in traces.values())
        print("max total word length:", longest)


# --- 7 ----------------------------------------------------------------------
def test_criterion_07_growth():
    """free pairs give 2^(n+1) - 1 up to n = 10; one unipotent gives n + 1"""
    with Clock(60):
        x, y = SANOV
        certify_table_tennis(x, y, R)
        ping = certify_ping(proximal_normal_form(A100, R), ROT, F(1, 10), R)
        for pair in ((x, y), ping.pair):
            G = growth_table(MatSet(list(pair)).with_identity(), 10)
            assert [r.ball_size for r in G] == [2 ** (n + 1) - 1 for n in range(1, 11)]
            assert G[-1].entropy.lo >= F(69, 100)
            assert math.log(2 ** 11 - 1) / 10 >= 0.69
        U = MatSet([Mat([[1, 1], [0, 1]])]).with_identity()
        assert [r.ball_size for r in growth_table(U, 10)] == [n + 1 for n in range(1, 11)]


# --- 8 ----------------------------------------------------------------------
DPLUS_SANOV_N = 7


def test_criterion_08_dplus():
    """Sanov input: n <= 10 with a valid certificate (pinned n = 7)"""
    with Clock(300):
        S = MatSet(SANOV).with_identity()
        res = dplus_upper(S, R)
        assert res.n <= 10 and res.n == DPLUS_SANOV_N
        assert verify_certificate(json.loads(json.dumps(res.certificate.to_record()))).ok


# --- 9 ----------------------------------------------------------------------
def test_criterion_09_finite_corollaries():
    """girth tables against a naive BFS; exhaustive q = 3; expansion at q = 5"""
    with Clock(600):
        rows = girth_table([3, 5, 7, 11, 13])
        U, L = (1, 1, 0, 1), (1, 0, 1, 1)
        for r in rows:
            assert r.directed_girth == girth_mod_p(U, L, r.q)
            assert r.collision_depth == collision_depth_mod_p(U, L, r.q)
        print("girths:", [r.directed_girth for r in rows])
        (ex,) = girth_table([3], "exhaustive-small")
        els = sl2_elements(3)
        assert len(els) == 24 and ex.pairs_checked == 24 * 24
        gen_pairs = [(a, b) for a in els for b in els if generated_size([a, b], 3) == 24]
        assert ex.directed_girth == min(girth_mod_p(a, b, 3) for a, b in gen_pairs)
        ctx = sl2q_make(5)
        A = [U, L, ctx.inv(U), ctx.inv(L)]
        r, B = min_expansion(ctx, A, 4)
        assert isinstance(r, Fraction) and r > 0 and 1 <= len(B) <= 4
        print("min expansion at q = 5, |B| <= 4:", r)


# --- 10 ---------------------------------------------------------------------
INPUTS = {
    "sanov.json": {"dim": 2, "matrices": [[["1", "0"], ["0", "1"]], [["1", "2"], ["0", "1"]],
                                          [["1", "0"], ["2", "1"]]], "contains_identity": True},
    "ping.json": {"dim": 2, "matrices": [[["100", "0"], ["0", "1/100"]],
                                         [["3/5", "-4/5"], ["4/5", "3/5"]]]},
    "sym.json": {"dim": 2, "symmetric": True, "contains_identity": True,
                 "matrices": [[["1", "0"], ["0", "1"]], [["1", "2"], ["0", "1"]], [["1", "-2"], ["0", "1"]],
                              [["1", "0"], ["2", "1"]], [["1", "0"], ["-2", "1"]]]},
}
COMMANDS = [
    ["report", "sanov.json", "-o", "report.json"],
    ["delta", "sanov.json", "-o", "delta.json"],
    ["growth", "sanov.json", "--nmax", "8", "-o", "growth.json"],
    ["dplus", "sanov.json", "--place", "real", "-o", "dplus.json"],
    ["certify-ping", "ping.json", "--place", "real", "-o", "ping_cert.json"],
    ["verify", "ping_cert.json", "-o", "ping_verify.json"],
    ["sl2-free", "sym.json", "-o", "trace.json"],
    ["verify", "trace.json", "-o", "trace_verify.json"],
    ["girth", "--q", "3,4,5,7,9,11,13", "-o", "girth.json"],
    ["girth", "--q", "3,5,7,11,13", "--format", "csv", "-o", "girth.csv"],
    ["girth", "--q", "3", "--strategy", "exhaustive-small", "-o", "girth_exhaustive.json"],
    ["expansion", "--q", "5,7", "--max-size", "3", "-o", "expansion.json"],
]


def produce_artifacts(outdir, hashseed):
    for name, rec in INPUTS.items():
        with open(os.path.join(outdir, name), "w") as fh:
            json.dump(rec, fh)
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    for cmd in COMMANDS:
        p = subprocess.run([sys.executable, "-m", "ugrowth"] + cmd, cwd=outdir, env=env,
                           capture_output=True, text=True)
        assert p.returncode == 0, (cmd, p.stderr)
    return sorted(c[-1] for c in COMMANDS)


def test_criterion_10_determinism(tmp_path):
    """two runs in fresh interpreters give byte-identical artifacts"""
    runs = []
    for k, seed in enumerate((1, 12345)):
        d = tmp_path / f"run{k}"
        d.mkdir()
        runs.append((d, produce_artifacts(str(d), seed)))
    (d1, names), (d2, _) = runs
    for name in names:
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name
