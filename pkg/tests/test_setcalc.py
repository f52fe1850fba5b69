from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from oracles import ball_sizes, mp
from strategies import invertible, matrices, upper_nilpotent_set
from ugrowth.errors import BallExplosion, CapReached, PreconditionViolated
from ugrowth.linalg import Mat, algebra_closure
from ugrowth.scalars import Cmp, Place, PPower, RealInterval, Zero, mag_compare
from ugrowth.setcalc import (
    Budget,
    MatSet,
    delta_bounds,
    grow_until_norm,
    set_lambda,
    set_norm,
    set_power,
)

R = Place.real()
F = Fraction
U = Mat([[1, 1], [0, 1]])
SANOV = [Mat([[1, 2], [0, 1]]), Mat([[1, 0], [2, 1]])]


def not_above(x, y):
    return mag_compare(x, y) is not Cmp.GREATER


def test_matset_flags_and_dedup():
    Q = MatSet([U, U, Mat.identity(2)])
    assert len(Q) == 2 and Q.contains_identity and not Q.symmetric
    assert MatSet([U, U.inverse()]).symmetric
    with pytest.raises(PreconditionViolated):
        MatSet([U], symmetric=True)
    with pytest.raises(PreconditionViolated):
        MatSet([])
    assert MatSet.from_record(Q.to_record()) == Q


def test_set_power_examples():
    P = set_power(MatSet([U]).with_identity(), 3)
    assert len(P) == 4
    assert set(P) == {Mat.identity(2), U, U * U, U * U * U}
    assert set(set_power(MatSet([Mat.identity(2)]), 5)) == {Mat.identity(2)}
    assert len(set_power(MatSet(SANOV).with_identity(), 2)) == 7


def test_set_power_cap():
    with pytest.raises(BallExplosion):
        set_power(MatSet(SANOV + [m.inverse() for m in SANOV]), 8, cap=100)


def test_set_lambda_and_norm_examples():
    Q = MatSet([Mat.diag([2, F(1, 2)]), Mat.identity(2)])
    assert set_lambda(Q, R) == RealInterval(2, 2)
    assert set_norm(Q, R) == RealInterval(2, 2)
    for place in (R, Place(2), Place(3)):
        assert isinstance(set_lambda(MatSet([Mat([[0, 1], [0, 0]])]), place), Zero)
    Q = MatSet([U])
    assert set_lambda(Q, R) == RealInterval(1, 1)
    n = set_norm(Q, R)
    golden = (1 + mpmath.sqrt(5)) / 2
    assert mp(n.lo) <= golden <= mp(n.hi)
    assert n.hi - n.lo < F(1, 2 ** 50)


def test_delta_examples():
    b = delta_bounds(MatSet([Mat([[0, 1], [0, 0]])]), R)
    assert isinstance(b.lower, Zero)
    assert b.witnessed_upper.hi < F(1, 2 ** 10)

    b = delta_bounds(MatSet([Mat.diag([2, F(1, 2)])]), R)
    assert b.lower == RealInterval(2, 2)
    assert b.witnessed_upper == RealInterval(2, 2)
    assert b.witness_conjugator == Mat.identity(2)

    b = delta_bounds(MatSet([U]), R)
    assert b.lower == RealInterval(1, 1)
    assert b.witnessed_upper.hi <= F(101, 100)


def test_delta_finite_place_has_analytic_bound():
    b = delta_bounds(MatSet([Mat([[0, -1], [1, F(3, 5)]])]), Place(5))
    assert b.lower == PPower(-1, 5)
    assert b.analytic_upper is not None
    assert not_above(b.lower, b.analytic_upper)
    assert not_above(b.lower, b.witnessed_upper)


def test_grow_until_norm_examples():
    assert grow_until_norm(MatSet([Mat.diag([2, F(1, 2)])]), 7, R) == 3
    assert grow_until_norm(MatSet([U]), 5, R) == 5
    with pytest.raises(CapReached):
        grow_until_norm(MatSet([Mat.identity(2)]), 2, R, cap=10)
    with pytest.raises(PreconditionViolated):
        grow_until_norm(MatSet([U]), 1, R)


def test_ball_sizes_match_bruteforce():
    Q = MatSet(SANOV).with_identity()
    mine = [len(set_power(Q, n)) for n in range(1, 5)]
    assert mine == ball_sizes([m.rows for m in SANOV], 4)


small_sets = st.lists(matrices(2, st.fractions(min_value=-3, max_value=3, max_denominator=3)),
                      min_size=1, max_size=2)
places = st.sampled_from([R, Place(2), Place(3)])
budget = Budget(iterations=40, nodes=60)


@settings(max_examples=25)
@given(small_sets, places)
def test_sandwich(mats, place):
    b = delta_bounds(MatSet(mats), place, budget)
    assert not_above(b.lower, b.witnessed_upper)
    if b.analytic_upper is not None:
        assert not_above(b.lower, b.analytic_upper)


@settings(max_examples=25)
@given(small_sets, invertible(2), places)
def test_lower_conjugation_invariant(mats, g, place):
    Q = MatSet(mats)
    assert delta_bounds(Q.conjugate(g), place, budget).lower == delta_bounds(Q, place, budget).lower


def _upper(m):
    if isinstance(m, Zero):
        return F(0)
    if isinstance(m, PPower):
        return F(m.p) ** (-m.exponent) if m.exponent <= 0 else F(1, m.p ** m.exponent)
    return m.hi


@settings(max_examples=25)
@given(small_sets, st.integers(1, 2), st.integers(1, 2), places)
def test_norm_submultiplicative(mats, m, n, place):
    Q = MatSet(mats)
    lhs = _upper(set_norm(set_power(Q, m + n), place))
    rhs = _upper(set_norm(set_power(Q, m), place)) * _upper(set_norm(set_power(Q, n), place))
    assert lhs <= rhs


@settings(max_examples=15)
@given(st.sampled_from([2, 3]).flatmap(lambda d: upper_nilpotent_set(d)))
def test_nilpotent_degeneracy(mats):
    Q = MatSet(mats)
    d = Q.dim
    assert algebra_closure(Q.elements)[1]
    for i in range(1, d * d + 1):
        for place in (R, Place(2)):
            assert isinstance(set_lambda(set_power(Q, i), place), Zero)
    b = delta_bounds(Q, R)
    assert isinstance(b.lower, Zero)
    assert _upper(b.witnessed_upper) < F(1, 2 ** 10)
