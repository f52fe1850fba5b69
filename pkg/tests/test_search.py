import json
from fractions import Fraction
from itertools import combinations, product

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from oracles import ball_sizes, mp
from strategies import invertible
from ugrowth.conjugators import proximal_normal_form
from ugrowth.errors import (
    AllPowersFix,
    Exhausted,
    NoGapAnywhere,
    NoGrowthDetected,
    PreconditionViolated,
    UnknownPredicate,
)
from ugrowth.linalg import Mat, char_poly, exterior_power, spectral_radii
from ugrowth.pingpong import NoCollisionUpTo, refute_freeness
from ugrowth.projective import ProjHyperplane, ProjPoint, e1_point
from ugrowth.scalars import Place, RealInterval
from ugrowth.search import (
    dplus_upper,
    escape,
    gap_lift,
    good_position_element,
    growth_table,
    nonfixing_power,
    parse_word,
    predicate,
    word_product,
    word_str,
)
from ugrowth.setcalc import MatSet
from ugrowth.verify import verify_certificate

R = Place.real()
F = Fraction
I2 = Mat.identity(2)
U = Mat([[1, 1], [0, 1]])
L = Mat([[1, 0], [1, 1]])
ROT = Mat([[F(3, 5), F(-4, 5)], [F(4, 5), F(3, 5)]])
SANOV = [Mat([[1, 2], [0, 1]]), Mat([[1, 0], [2, 1]])]


def test_words_roundtrip():
    assert parse_word(word_str((0, 2, 1))) == (0, 2, 1)
    assert parse_word("") == ()
    assert word_product(SANOV, (0, 1)) == SANOV[0] * SANOV[1]


def test_escape_examples():
    r = escape(MatSet([I2, U, L]), "UpperTriangular", 3)
    assert r.witness == L and r.length == 1
    r = escape(MatSet([I2, Mat.diag([2, F(1, 2)]), ROT]), "FixesProjPoint", 3, (e1_point(2),))
    assert r.witness == ROT and r.length == 1
    with pytest.raises(Exhausted):
        escape(MatSet([I2, U]), "IsNotSemisimple", 6)
    with pytest.raises(UnknownPredicate):
        predicate("IsAbelian")
    with pytest.raises(PreconditionViolated):
        escape(MatSet([U]), "UpperTriangular", 3)


def test_escape_hyperplane():
    H = ProjHyperplane((0, 1))  # the line x2 = 0, i.e. span(e1)
    with pytest.raises(Exhausted):
        escape(MatSet([I2, U, Mat.diag([1, 2])]), "PreservesHyperplane", 4, (H,))
    r = escape(MatSet([I2, U, L]), "PreservesHyperplane", 4, (H,))
    assert r.witness == L and r.length == 1


@settings(max_examples=25)
@given(st.lists(invertible(2), min_size=1, max_size=2), st.sampled_from(["UpperTriangular", "IsVirtuallyCentral"]))
def test_escape_is_least_length(mats, name):
    S = MatSet([I2] + mats)
    test = predicate(name)
    try:
        r = escape(S, name, 3)
    except Exhausted:
        r = None
    # brute force: every word shorter than the witness satisfies the predicate
    limit = r.length if r else 4
    for n in range(1, limit):
        for w in product(range(len(S)), repeat=n):
            assert test(word_product(S, w))
    if r:
        assert not test(r.witness) and word_product(S, r.word) == r.witness


def test_good_position_examples():
    form = proximal_normal_form(Mat.diag([4, F(1, 4)]), R)
    r = good_position_element(MatSet([I2, ROT]), form)
    assert r.witness == ROT and r.length == 1
    assert ProjPoint(ROT.column(0)).same_as(ProjPoint((3, 4)))
    with pytest.raises(Exhausted):
        good_position_element(MatSet([I2, Mat.diag([2, F(1, 2)])]), form)
    r = good_position_element(MatSet([I2] + SANOV), form)
    assert r.witness == SANOV[1] and r.length == 1


def test_nonfixing_examples():
    r = nonfixing_power(ROT, None, 4)
    assert (r.j, r.first_coordinate, r.projectively_fixed) == (1, F(3, 5), False)
    r = nonfixing_power(U, None, 4)
    assert r.j == 1 and r.projectively_fixed
    r = nonfixing_power(Mat([[0, -1], [1, 0]]), None, 4)
    assert r.j == 2 and r.first_coordinate == -1
    with pytest.raises(AllPowersFix):
        nonfixing_power(Mat([[0, 0], [1, 1]]), None, 5)


def test_nonfixing_bound():
    b = Mat([[0, -1], [1, 3]])
    r = nonfixing_power(b, None, 2, with_bound=True, place=R)
    assert r.lower_bound.hi <= abs(r.first_coordinate)


def test_gap_lift_examples():
    g = gap_lift(Mat.diag([4, 1, F(1, 4)]), R)
    assert g.j == 1 and g.power == 1
    g = gap_lift(Mat.diag([2, 2, F(1, 4)]), R)
    assert g.j == 2
    sd = spectral_radii(g.lifted, R)
    assert sd.Lambda == RealInterval(4, 4) and sd.lambda2 == RealInterval(F(1, 2), F(1, 2))
    with pytest.raises(NoGapAnywhere):
        gap_lift(ROT, R)


@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3).filter(bool),
                min_size=3, max_size=3), invertible(3))
def test_gap_lift_compound_moduli(diag, g):
    a = g * Mat.diag(diag) * g.inverse()
    for j in (1, 2):
        cp = char_poly(exterior_power(a, j))
        # roots of the compound are the j-fold products of eigenvalues
        prods = list(diag) if j == 1 else [x * y for x, y in combinations(diag, 2)]
        for r in prods:
            assert sum(c * r ** i for i, c in enumerate(cp)) == 0


def test_growth_examples():
    G = growth_table(MatSet(SANOV), 6)
    assert [r.ball_size for r in G] == [2 ** (n + 1) - 1 for n in range(1, 7)]
    assert [r.ball_size for r in growth_table(MatSet([U]), 8)] == [n + 1 for n in range(1, 9)]
    assert [r.ball_size for r in G] == ball_sizes([m.rows for m in SANOV], 6)
    rec = G[-1]
    true = mpmath.log(rec.ball_size) / rec.n
    assert mp(rec.entropy.lo) <= true <= mp(rec.entropy.hi)


def test_growth_bounded_group_plateaus():
    G = growth_table(MatSet([Mat([[0, -1], [1, 0]])]), 6)
    assert [r.ball_size for r in G] == [2, 3, 4, 4, 4, 4]


@settings(max_examples=15)
@given(st.lists(invertible(2, st.integers(-2, 2)), min_size=1, max_size=2))
def test_growth_subadditive(mats):
    G = growth_table(MatSet(mats), 6)
    sizes = [r.ball_size for r in G]
    assert sizes == sorted(sizes)
    for m in range(1, 4):
        for n in range(1, 7 - m):
            assert sizes[m + n - 1] <= sizes[m - 1] * sizes[n - 1]


def test_free_pair_entropy_lower_bound():
    # Sanov generates a free semigroup, so h >= log 2 * n / (n + 1)
    G = growth_table(MatSet(SANOV), 8)
    n = 8
    assert mp(G[-1].entropy.lo) >= mpmath.log(2) * n / (n + 1)


def _check_dplus(res, Sigma):
    u, v = res.pair_words
    assert len(u) <= res.n and len(v) <= res.n
    a, b = word_product(Sigma, u), word_product(Sigma, v)
    j = res.lift
    lift = (lambda m: m) if j == 1 else (lambda m: exterior_power(m, j))
    assert (lift(a), lift(b)) == tuple(res.pair)
    cert = res.certificate
    assert verify_certificate(json.loads(json.dumps(cert.to_record()))).ok
    assert isinstance(refute_freeness(*cert.pair, "semigroup", 12), NoCollisionUpTo)


def test_dplus_examples():
    S = MatSet(SANOV).with_identity()
    res = dplus_upper(S, R)
    assert res.n == 7
    _check_dplus(res, S)

    with pytest.raises(NoGrowthDetected):
        dplus_upper(MatSet([I2, ROT]), R)

    S5 = MatSet([I2, Mat([[1, F(1, 5)], [0, 1]]), Mat([[1, 0], [F(1, 5), 1]])])
    res = dplus_upper(S5, Place(5))
    assert res.n == 3
    _check_dplus(res, S5)
