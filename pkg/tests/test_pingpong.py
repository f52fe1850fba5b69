import json
from fractions import Fraction
from math import ceil

import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import mm, reduced_words
from strategies import invertible
from ugrowth.conjugators import proximal_normal_form
from ugrowth.errors import (
    BFixesE1,
    CertifiedNegative,
    Inconclusive,
    PreconditionViolated,
    SeparationFailed,
)
from ugrowth.linalg import Mat
from ugrowth.pingpong import (
    Collision,
    NoCollisionUpTo,
    certify_ping,
    certify_table_tennis,
    eps_grid,
    refute_freeness,
)
from ugrowth.projective import lipschitz_bound
from ugrowth.scalars import Place
from ugrowth.verify import verify_certificate

R = Place.real()
F = Fraction
ROT = Mat([[F(3, 5), F(-4, 5)], [F(4, 5), F(3, 5)]])
A100 = Mat.diag([100, F(1, 100)])
SANOV = (Mat([[1, 2], [0, 1]]), Mat([[1, 0], [2, 1]]))


def padic_case(p):
    return Mat.diag([F(1, p ** 3), p ** 3]), Mat([[1, 1], [1, 2]])


def replay(cert):
    """Serialize, parse back and verify independently at higher precision."""
    rec = json.loads(json.dumps(cert.to_record()))
    rep = verify_certificate(rec, precision=192)
    assert rep.ok, rep.to_record()


def test_eps_grid_descending():
    g = eps_grid(Place(5))
    assert g == sorted(g, reverse=True) and g[0] == F(1, 4)
    assert F(1, 5) in g and F(1, 25) in g and F(1, 10) in g
    assert F(1, 7) not in eps_grid(R)


def test_ping_example_real():
    form = proximal_normal_form(A100, R)
    cert = certify_ping(form, ROT, F(1, 10), R)
    a, ba = cert.pair
    assert a == A100 and ba == ROT * A100
    # squared thresholds, exact for an orthogonal b: K = 1
    assert cert.lipschitz_lhs == F(4, 10)
    assert cert.separation_sq >= F(1, 10)
    assert cert.tau_lower > 0 and cert.rho < cert.tau_lower * cert.delta
    assert isinstance(refute_freeness(a, ba, "semigroup", 12), NoCollisionUpTo)
    replay(cert)


def test_ping_b_fixes_e1():
    form = proximal_normal_form(A100, R)
    with pytest.raises(BFixesE1):
        certify_ping(form, Mat.identity(2), F(1, 10), R)
    with pytest.raises(PreconditionViolated):
        certify_ping(form, ROT, F(1, 2), R)


@pytest.mark.parametrize("p", [5, 7, 11])
def test_ping_example_padic(p):
    a, b = padic_case(p)
    P = Place(p)
    form = proximal_normal_form(a, P)
    cert = certify_ping(form, b, F(1, p), P)
    assert cert.separation_sq >= F(1, p)
    assert cert.lipschitz_lhs <= 1
    x, y = cert.pair
    assert isinstance(refute_freeness(x, y, "semigroup", 12), NoCollisionUpTo)
    replay(cert)


def test_ping_monotone_in_eps_on_corpus():
    cases = [(A100, ROT, R)] + [(*padic_case(p), Place(p)) for p in (5, 7)]
    for a, b, place in cases:
        form = proximal_normal_form(a, place)
        grid = [e for e in eps_grid(place) if form.check(e).passed]
        ok = []
        for e in grid:
            try:
                certify_ping(form, b, e, place)
                ok.append(e)
            except (CertifiedNegative, Inconclusive):
                pass
        assert ok
        smallest = min(ok)
        assert all(e in ok for e in grid if e >= smallest)


def test_table_tennis_examples():
    cert = certify_table_tennis(*SANOV, R)
    assert isinstance(refute_freeness(*SANOV, "group", 8), NoCollisionUpTo)
    replay(cert)

    with pytest.raises(SeparationFailed):
        certify_table_tennis(SANOV[0], SANOV[0], R)

    x = Mat.diag([9, F(1, 9)])
    y = ROT * x * ROT.inverse()
    cert = certify_table_tennis(x, y, R)
    assert cert.criterion == "balls"
    assert cert.eps is not None and all(v > 2 * cert.eps for _, v in cert.separations)
    assert isinstance(refute_freeness(x, y, "group", 8), NoCollisionUpTo)
    replay(cert)


def test_refuter_examples():
    assert refute_freeness(SANOV[0], SANOV[0], "semigroup", 1) == Collision("x", "y")
    J = Mat([[0, -1], [1, 0]])
    assert refute_freeness(J, SANOV[0], "group", 4) == Collision("xxxx", "")
    U, V = Mat([[1, 1], [0, 1]]), Mat([[1, 0], [1, 1]])
    assert refute_freeness(U, V, "semigroup", 12) == NoCollisionUpTo(12)


def test_refuter_matches_bruteforce():
    # [[1,1],[0,1]] and [[1,0],[1,1]] generate SL_2(Z), which has torsion
    U, V = Mat([[1, 1], [0, 1]]), Mat([[1, 0], [1, 1]])
    got = refute_freeness(U, V, "group", 8)
    assert isinstance(got, Collision)
    mats = {"x": U.rows, "y": V.rows, "X": U.inverse().rows, "Y": V.inverse().rows}

    def is_identity(w):
        prod = [[F(1), F(0)], [F(0), F(1)]]
        for c in w:
            prod = mm(prod, mats[c])
        return prod == [[1, 0], [0, 1]]

    assert is_identity(got.u)
    # a relation of length n shows up as a collision at level ceil(n/2)
    shortest = min(len(w) for w in reduced_words(8) if w and is_identity(w))
    assert shortest <= len(got.u) <= shortest + 1


# --- properties -----------------------------------------------------------------

@settings(max_examples=30)
@given(invertible(2), st.sampled_from([F(1, 10), F(1, 100)]))
def test_ping_soundness(b, eps):
    form = proximal_normal_form(A100, R)
    try:
        cert = certify_ping(form, b, eps, R)
    except (CertifiedNegative, Inconclusive):
        assume(False)
    x, y = cert.pair
    assert isinstance(refute_freeness(x, y, "semigroup", 12), NoCollisionUpTo)
    replay(cert)


@settings(max_examples=20)
@given(invertible(2), st.sampled_from([9, 16, F(25, 2)]))
def test_table_tennis_soundness(g, lam):
    x = Mat.diag([lam, 1 / F(lam)])
    y = g * x * g.inverse()
    try:
        cert = certify_table_tennis(x, y, R)
    except (CertifiedNegative, Inconclusive):
        assume(False)
    assert isinstance(refute_freeness(x, y, "group", 8), NoCollisionUpTo)
    replay(cert)


@settings(max_examples=20)
@given(invertible(2, st.integers(-2, 2)))
def test_ping_conjugation_covariance(g):
    a = Mat.diag([10 ** 4, F(1, 10 ** 4)])
    eps = F(1, 10)
    certify_ping(proximal_normal_form(a, R), ROT, eps, R)
    L = lipschitz_bound(g, R).hi
    eps2 = eps / ceil(L)
    gi = g.inverse()
    form = proximal_normal_form(g * a * gi, R)
    assume(form.check(eps2).passed)
    cert = certify_ping(form, g * ROT * gi, eps2, R)
    x, y = cert.pair
    assert x == g * a * gi and y == g * ROT * a * gi
