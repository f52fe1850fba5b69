from fractions import Fraction
from itertools import product

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from oracles import mp
from strategies import invertible
from ugrowth.errors import DimensionMismatch, NotInNormalForm, Singular
from ugrowth.linalg import Mat
from ugrowth.projective import (
    ProjHyperplane,
    ProjPoint,
    check_proximal,
    coordinate_hyperplane,
    dist_lower,
    dist_upper,
    e1_point,
    lipschitz_bound,
    proj_dist,
)
from ugrowth.scalars import Place, PPower, RealInterval, Zero

R = Place.real()
F = Fraction
PLACES = [R, Place(2), Place(3), Place(5)]

vec_entry = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def points(d=2):
    return st.lists(vec_entry, min_size=d, max_size=d).filter(any).map(lambda c: ProjPoint(tuple(c)))


def test_dist_examples():
    e1, e2 = ProjPoint((1, 0)), ProjPoint((0, 1))
    assert proj_dist(e1, e2, R) == RealInterval(1, 1)
    for p in (2, 3, 7):
        assert proj_dist(e1, e2, Place(p)) == PPower(0, p)
        assert proj_dist(ProjPoint((1, 0)), ProjPoint((1, p)), Place(p)) == PPower(1, p)
    m = proj_dist(ProjPoint((1, 0)), ProjPoint((1, 1)), R)
    assert mp(m.lo) <= 1 / mpmath.sqrt(2) <= mp(m.hi)
    assert isinstance(proj_dist(ProjPoint((1, 2)), ProjPoint((3, 6)), R), Zero)


def test_dist_to_hyperplane():
    H = coordinate_hyperplane(3)
    assert proj_dist(e1_point(3), H, R) == RealInterval(1, 1)
    assert isinstance(proj_dist(ProjPoint((0, 1, 1)), H, Place(3)), Zero)
    with pytest.raises(DimensionMismatch):
        proj_dist(e1_point(2), H, R)


def test_point_equality_up_to_scale():
    assert ProjPoint((1, 2)).same_as(ProjPoint((F(1, 2), 1)))
    assert not ProjPoint((1, 2)).same_as(ProjPoint((2, 1)))
    with pytest.raises(ValueError):
        ProjPoint((0, 0))
    with pytest.raises(ValueError):
        ProjHyperplane((0, 0))


def test_lipschitz_examples():
    assert lipschitz_bound(Mat.identity(2), R) == RealInterval(1, 1)
    assert lipschitz_bound(Mat.identity(3), Place(3)) == PPower(0, 3)
    assert lipschitz_bound(Mat.diag([2, F(1, 2)]), R) == RealInterval(16, 16)
    L = lipschitz_bound(Mat([[1, 1], [0, 1]]), R)
    true = ((1 + mpmath.sqrt(5)) / 2) ** 4
    assert mp(L.lo) <= true <= mp(L.hi)
    with pytest.raises(Singular):
        lipschitz_bound(Mat([[1, 1], [1, 1]]), R)


def test_proximal_examples():
    H = coordinate_hyperplane(2)
    r = check_proximal(Mat.diag([100, F(1, 100)]), 100, H, F(1, 4), R)
    assert r.passed
    r = check_proximal(Mat.diag([2, F(1, 2)]), 2, H, F(1, 4), R)
    assert not r.passed
    for p in (5, 7):
        r = check_proximal(Mat.diag([F(1, p * p), p * p]), F(1, p * p), H, F(1, p), Place(p))
        assert r.passed


def test_proximal_rejects_bad_input():
    H = coordinate_hyperplane(2)
    with pytest.raises(NotInNormalForm):
        check_proximal(Mat([[2, 1], [0, 1]]), 2, H, F(1, 4), R)
    with pytest.raises(NotInNormalForm):
        check_proximal(Mat.diag([2, 1]), 2, H, F(1, 2), R)
    with pytest.raises(NotInNormalForm):
        check_proximal(Mat.diag([2, 1]), 2, ProjHyperplane((0, 1)), F(1, 4), R)


@given(points(), points(), st.sampled_from(PLACES),
       st.fractions(min_value=F(1, 9), max_value=9).filter(bool),
       st.fractions(min_value=F(-9), max_value=F(-1, 9)))
def test_scale_invariance(u, v, place, s, t):
    su = ProjPoint(tuple(s * x for x in u.coords))
    tv = ProjPoint(tuple(t * x for x in v.coords))
    assert proj_dist(su, tv, place) == proj_dist(u, v, place)
    H = ProjHyperplane(v.coords)
    tH = ProjHyperplane(tv.coords)
    assert proj_dist(su, tH, place) == proj_dist(u, H, place)


@given(points(3), points(3), points(3), st.sampled_from(PLACES))
def test_symmetry_and_triangle(x, y, z, place):
    assert proj_dist(x, y, place) == proj_dist(y, x, place)
    dxy, dyz, dxz = (proj_dist(a, b, place) for a, b in ((x, y), (y, z), (x, z)))
    assert not dist_lower(dxz) > dist_upper(dxy) + dist_upper(dyz)


@settings(max_examples=30)
@given(invertible(2), points(), points(), st.sampled_from(PLACES))
def test_lipschitz_sound(b, x, y, place):
    L = lipschitz_bound(b, place)
    lhs = dist_lower(proj_dist(x.image(b), y.image(b), place))
    rhs = dist_upper(L) * dist_upper(proj_dist(x, y, place))
    assert lhs <= rhs


def _grid(d, n=5):
    """Deterministic low-discrepancy rational grid of directions."""
    vals = [F(2 * k - n, n) for k in range(n + 1)]
    for c in product(vals, repeat=d):
        if any(c):
            yield ProjPoint(c)


@settings(max_examples=30)
@given(st.integers(3, 40), st.fractions(min_value=F(-1), max_value=F(1), max_denominator=8),
       st.sampled_from([2, 3]))
def test_proximality_sound_real(alpha, s, d):
    eps = F(1, 4)
    rows = [[F(0)] * d for _ in range(d)]
    rows[0][0] = F(alpha)
    for i in range(1, d):
        rows[i][i] = s
        if i + 1 < d:
            rows[i][i + 1] = s / 2
    a = Mat(rows)
    H = coordinate_hyperplane(d)
    r = check_proximal(a, F(alpha), H, eps, R)
    if not r.passed:
        return
    e1 = e1_point(d)
    for x in _grid(d):
        if dist_lower(proj_dist(x, H, R)) >= eps:
            assert dist_upper(proj_dist(x.image(a), e1, R)) <= eps


@settings(max_examples=30)
@given(st.sampled_from([5, 7, 11]), st.integers(1, 3), st.integers(-2, 2))
def test_proximality_sound_padic(p, k, j):
    # alpha = p^-k has |alpha| = p^k; the H block has valuation j
    eps = F(1, p)
    alpha = F(1, p ** k)
    sub = F(p) ** j
    a = Mat([[alpha, 0], [0, sub]])
    H = coordinate_hyperplane(2)
    P = Place(p)
    r = check_proximal(a, alpha, H, eps, P)
    assert r.passed == (j >= 2 - k)
    if not r.passed:
        return
    for x in _grid(2, 2 * p):
        if dist_lower(proj_dist(x, H, P)) >= eps:
            assert dist_upper(proj_dist(x.image(a), e1_point(2), P)) <= eps
