"""Hypothesis strategies shared by the test modules."""
from fractions import Fraction
from itertools import product

from hypothesis import strategies as st

from ugrowth.linalg import Mat

small = st.fractions(min_value=-6, max_value=6, max_denominator=4)
tiny_int = st.integers(-3, 3)


@st.composite
def matrices(draw, d=2, entries=small):
    return Mat([[draw(entries) for _ in range(d)] for _ in range(d)])


@st.composite
def invertible(draw, d=2, entries=tiny_int):
    m = draw(matrices(d, entries))
    if m.det() == 0:
        m = m + Mat.identity(d) * Fraction(7)
    if m.det() == 0:
        m = Mat.identity(d)
    return m


@st.composite
def upper_nilpotent_set(draw, d=2, size=2):
    """A set spanning nilpotent matrices: conjugate of strictly upper triangular data."""
    g = draw(invertible(d))
    gi = g.inverse()
    out = []
    for _ in range(size):
        rows = [[draw(small) if j > i else Fraction(0) for j in range(d)] for i in range(d)]
        out.append(g * Mat(rows) * gi)
    return out


def products(mats, i):
    """All products of exactly i factors."""
    out = []
    for w in product(mats, repeat=i):
        p = w[0]
        for m in w[1:]:
            p = p * m
        out.append(p)
    return out


@st.composite
def gapped(draw, d=2):
    """Conjugates of a diagonal matrix with a top eigenvalue at least twice the rest."""
    top = draw(st.sampled_from([3, -3, 4, Fraction(9, 2), -5, 8]))
    rest = [draw(st.fractions(min_value=Fraction(-1), max_value=Fraction(3, 2), max_denominator=4).filter(bool))
            for _ in range(d - 1)]
    g = draw(invertible(d))
    return g * Mat.diag([top] + rest) * g.inverse()
