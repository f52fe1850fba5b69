from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from oracles import mp, vp as vp_oracle
from ugrowth.errors import InvalidPlace, MixedPlaceKinds, NotRealPlace, QuadraticAtFinitePlace
from ugrowth.scalars import (
    ZERO,
    Cmp,
    Place,
    PPower,
    RealInterval,
    Zero,
    abs_at_place,
    mag_compare,
    mag_refine,
    quad,
    vp,
)

R = Place.real()
rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
nonzero = rationals.filter(lambda x: x != 0)
primes = st.sampled_from([2, 3, 5, 7])


def test_place_checks_prime():
    with pytest.raises(InvalidPlace):
        Place(4)
    assert Place.parse("real").is_real
    assert Place.parse({"p": 5}) == Place(5)


def test_abs_examples():
    assert abs_at_place(Fraction(3, 4), Place(2)) == PPower(-2, 2)
    assert abs_at_place(0, R, 16) == ZERO
    m = abs_at_place(quad(1, 1, 2), R, 20)
    exact = 1 + mpmath.sqrt(2)
    assert mp(m.lo) <= exact <= mp(m.hi)
    assert m.width <= Fraction(3, 2 ** 20)


def test_abs_quadratic_at_finite_place():
    with pytest.raises(QuadraticAtFinitePlace):
        abs_at_place(quad(1, 1, 2), Place(7))


def test_compare_examples():
    assert mag_compare(PPower(-1, 3), PPower(0, 3)) is Cmp.GREATER
    assert mag_compare(RealInterval(1, 1), RealInterval(1, 1)) is Cmp.EQUAL
    assert mag_compare(RealInterval(1, 3), RealInterval(2, 4)) is Cmp.INCONCLUSIVE
    with pytest.raises(MixedPlaceKinds):
        mag_compare(PPower(1, 3), RealInterval(1, 1))


def test_refine_examples():
    assert mag_refine(Fraction(7, 2), R, Fraction(1, 1024)) == RealInterval(Fraction(7, 2), Fraction(7, 2))
    m = mag_refine(quad(0, 1, 5), R, Fraction(1, 100))
    assert Fraction(223, 100) <= m.lo and m.hi <= Fraction(224, 100)
    assert mag_refine(-2, R, Fraction(1, 2)) == RealInterval(2, 2)
    with pytest.raises(NotRealPlace):
        mag_refine(1, Place(3), Fraction(1, 2))


def test_zero_absorbing():
    assert isinstance(ZERO * PPower(3, 5), Zero)
    assert isinstance(RealInterval(1, 2) * ZERO, Zero)


@given(nonzero, primes)
def test_vp_matches_oracle(x, p):
    assert vp(x, p) == vp_oracle(x, p)


@given(nonzero, nonzero, primes)
def test_multiplicative_at_finite_places(x, y, p):
    P = Place(p)
    assert abs_at_place(x * y, P) == abs_at_place(x, P) * abs_at_place(y, P)


@given(nonzero, nonzero)
def test_product_interval_contains_real_abs(x, y):
    ax, ay = abs_at_place(quad(x, 1, 3), R), abs_at_place(quad(y, 1, 2), R)
    prod = ax * ay
    true = abs((x + mpmath.sqrt(3)) * (y + mpmath.sqrt(2)))
    assert mp(prod.lo) <= true <= mp(prod.hi)


@given(nonzero, nonzero, primes)
def test_ultrametric(x, y, p):
    if x + y == 0:
        return
    ex, ey, es = vp(x, p), vp(y, p), vp(x + y, p)
    assert es >= min(ex, ey)
    if ex != ey:
        assert es == min(ex, ey)


@given(st.integers(2, 50).filter(lambda n: int(n ** 0.5) ** 2 != n), rationals, st.integers(2, 40))
def test_refinement_monotone(D, x, k):
    v = quad(x, 1, D)
    coarse = mag_refine(v, R, Fraction(1, 2 ** k))
    fine = mag_refine(v, R, Fraction(1, 2 ** (k + 7)))
    assert coarse.lo <= fine.lo <= fine.hi <= coarse.hi
    assert fine.width <= Fraction(1, 2 ** (k + 7))


@given(rationals, rationals, st.integers(2, 30))
def test_compare_sound(x, y, D):
    if int(D ** 0.5) ** 2 == D:
        return
    a, b = quad(x, 1, D), quad(y, 1, D + 1 if int((D + 1) ** 0.5) ** 2 != D + 1 else D + 2)
    ma, mb = abs_at_place(a, R, 30), abs_at_place(b, R, 30)
    c = mag_compare(ma, mb)
    ta, tb = abs(float(a)), abs(float(b))
    if c is Cmp.LESS:
        assert ta < tb
    elif c is Cmp.GREATER:
        assert ta > tb
