"""Hypothesis strategies shared by the test modules."""

from fractions import Fraction

from hypothesis import assume, strategies as st


@st.composite
def lengths(draw, max_den=60, acute=None, n=3):
    d = draw(st.integers(min_value=2 * n, max_value=max_den))
    cuts = sorted(draw(st.sets(st.integers(1, d - 1), min_size=n - 1, max_size=n - 1)))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [d])]
    if acute is not None:
        assume((2 * max(parts) < d) == acute)
    return tuple(Fraction(x, d) for x in parts)


def unit_fraction(den=10007):
    return st.integers(1, den - 1).map(lambda k: Fraction(k, den))


@st.composite
def acute_lengths(draw, max_den=120):
    """Three lengths with max l < 1/2 and a unique smallest one, built without filtering."""
    d = draw(st.integers(min_value=12, max_value=max_den))
    a = draw(st.integers((d + 2) // 3 + 1, (d - 1) // 2))
    rest = d - a
    b = draw(st.integers((rest + 2) // 2, min(a, rest - 1)))
    c = rest - b
    assume(c != b and c > 0)
    parts = [a, b, c]
    perm = draw(st.permutations(range(3)))
    return tuple(Fraction(parts[i], d) for i in perm)


@st.composite
def renormalizable(draw):
    """(l, tau) with max l < 1/2, a unique smallest length and max l <= tau <= 1/2."""
    ls = draw(acute_lengths())
    m = max(ls)
    k = draw(st.integers(0, 1000))
    return ls, m + (Fraction(1, 2) - m) * Fraction(k, 1000)
