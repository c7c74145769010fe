from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from tilebill.numerics import (
    CUBIC,
    RATIONAL,
    BackendError,
    Cubic,
    common_backend,
    float_backend,
    parse_backend,
    parse_expression,
    reduce_mod1,
    scalar_arith,
    tribonacci_root,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=1000)
cubics = st.builds(Cubic, fractions, fractions, fractions)


@given(fractions, fractions, fractions)
def test_rational_arithmetic_is_exact(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert p * (q + r) == p * q + p * r


@given(cubics, cubics, cubics)
def test_cubic_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x


@given(cubics)
def test_cubic_inverse(x):
    if not x:
        return
    assert x * x.inverse() == Cubic(1)
    assert x / x == 1


def test_generator_satisfies_minimal_polynomial():
    a = Cubic.generator()
    assert a**3 + a**2 + a == 1


def test_tribonacci_root_enclosure():
    lo, hi = tribonacci_root(128)
    assert hi - lo <= Fraction(2, 2**128)
    f = lambda t: t**3 + t**2 + t - 1
    assert f(lo) < 0 < f(hi)


def _float_at_a(x, ctx):
    lo, hi = tribonacci_root(300)
    a = ctx.mpf(lo.numerator) / lo.denominator
    return ctx.mpf(x.c0.numerator) / x.c0.denominator + (
        ctx.mpf(x.c1.numerator) / x.c1.denominator) * a + (ctx.mpf(x.c2.numerator) / x.c2.denominator) * a * a


@given(cubics, cubics)
def test_cubic_order_matches_256_bit_evaluation(x, y):
    ctx = mpmath.mp.clone() if hasattr(mpmath.mp, "clone") else mpmath.MPContext()
    ctx.prec = 256
    d = _float_at_a(x - y, ctx)
    if abs(d) > ctx.mpf(2) ** -200:
        assert (x < y) == (d < 0)
        assert (x > y) == (d > 0)


@given(cubics, cubics, cubics)
def test_cubic_comparison_is_a_total_order(x, y, z):
    assert scalar_arith(x, x, "cmp") == 0
    assert scalar_arith(x, y, "cmp") == -scalar_arith(y, x, "cmp")
    if x <= y and y <= z:
        assert x <= z


def test_cubic_sign_near_zero():
    # a tiny positive element close to zero: a - lo
    lo, _ = tribonacci_root(200)
    assert Cubic(-lo, 1, 0) > 0
    assert Cubic(lo, -1, 0) < 0


@given(st.one_of(fractions, cubics))
def test_reduce_mod1_is_idempotent(x):
    y = reduce_mod1(x)
    assert 0 <= y < 1
    assert reduce_mod1(y) == y
    assert float(x - y) == int(float(x - y))


def test_backends_do_not_mix_silently():
    fb = float_backend(80)
    with pytest.raises(BackendError):
        common_backend([fb.coerce(Fraction(1, 3)), Fraction(1, 2)])
    with pytest.raises(BackendError):
        RATIONAL.coerce(Cubic.generator())
    assert common_backend([Fraction(1, 2), Cubic.generator()]) is CUBIC


def test_parse_backend():
    assert parse_backend("rational") is RATIONAL
    assert parse_backend("cubic") is CUBIC
    assert parse_backend("float:90").bits == 90
    with pytest.raises(ValueError):
        parse_backend("double")


def test_parse_expression():
    assert parse_expression("(1 - a^3)/2") == (1 - Cubic.generator() ** 3) / 2
    assert parse_expression("1/3 + 1/6") == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_expression("a", allow_a=False)
    with pytest.raises(ValueError):
        parse_expression("__import__('os')")


def test_float_backend_tolerance():
    fb = float_backend(64)
    x = fb.coerce(Fraction(1, 3))
    assert abs(x - fb.coerce(Fraction(1, 3))) <= fb.eps
    assert float(fb.coerce(Cubic.generator())) == pytest.approx(0.5436890126920764)
