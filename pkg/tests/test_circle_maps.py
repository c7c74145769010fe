from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from strategies import lengths, unit_fraction
from tilebill.circle_maps import (
    REGIME_HIGH,
    REGIME_LOW,
    REGIME_MIDDLE,
    REGIME_ROTATION,
    SingularPoint,
    accelerated_code,
    cell_permutation_periods,
    detect_point_period,
    eval_f,
    interval_periods,
    make_cet,
    middle_regime_index,
    orbit,
    square_decomposition,
    symmetry_conjugate,
    tracked_periods,
)
from tilebill import tiling_geom as tg
from tilebill.numerics import Cubic, float_backend
from tilebill.verify import lattice_displacement

F = Fraction


def circle_dist(x, y):
    d = abs(x - y) % 1
    return min(d, 1 - d)


def test_equilateral_example():
    f = make_cet([F(1, 3)] * 3, F(1, 2))
    assert f(F(1, 12)) == F(3, 4)
    assert detect_point_period(f, F(1, 10)) == 6
    # 1/12 is the center of the flipped 6-periodic band
    assert detect_point_period(f, F(1, 12)) == 3


def test_validation():
    with pytest.raises(ValueError):
        make_cet([F(1, 2), F(1, 2)], F(1, 3))
    with pytest.raises(ValueError):
        make_cet([F(1, 2), F(1, 3), F(1, 3)], F(1, 3))
    with pytest.raises(ValueError):
        make_cet([F(1, 2), F(1, 2), F(0)], F(1, 3))
    f = make_cet([F(1, 3)] * 3, F(1, 2))
    with pytest.raises(SingularPoint):
        f(F(1, 3))


@given(lengths(), unit_fraction(997), unit_fraction(), unit_fraction())
def test_piecewise_isometry_reversing_orientation(ls, tau, p, q):
    f = make_cet(ls, tau)
    try:
        jp, jq = f.interval_index(p), f.interval_index(q)
    except SingularPoint:
        return
    assume(jp == jq and p != q)
    fp, fq = f(p), f(q)
    assert circle_dist(fp, fq) == circle_dist(p, q) or circle_dist(fp, fq) == abs(p - q)
    # images of the lifted interval: F(p) - F(q) = q - p modulo 1
    assert (fp - fq - (q - p)) % 1 == 0


@given(lengths(), unit_fraction(997), unit_fraction())
def test_fast_orbit_matches_direct_evaluation(ls, tau, p):
    f = make_cet(ls, tau)
    fast = orbit(f, p, 60)
    x = p
    for k, letter in enumerate(fast.letters):
        assert "abc"[f.interval_index(x)] == letter
        assert fast.points[k] == x
        x = eval_f(f, x)


@given(lengths(), unit_fraction(997), unit_fraction())
def test_symmetry_conjugate(ls, tau, p):
    f = make_cet(ls, tau)
    g = symmetry_conjugate(f)
    try:
        assert f(p) == (1 - g(1 - p)) % 1
    except SingularPoint:
        pass


@given(lengths(acute=True), st.integers(1, 999))
def test_square_decomposition(ls, k):
    m = max(ls)
    tau = m + (1 - 2 * m) * F(k, 1000)
    f = make_cet(ls, tau)
    sd = square_decomposition(f)
    # the pieces partition the circle
    assert sd.pieces[0].lo == 0 and sd.pieces[-1].hi == 1
    assert all(a.hi == b.lo for a, b in zip(sd.pieces, sd.pieces[1:]))
    assert sum(p.length for p in sd.pieces) == 1
    for piece in sd.pieces:
        for t in (F(1, 7), F(1, 2), F(5, 6)):
            p = piece.lo + t * piece.length
            try:
                assert sd.apply(p) == f(f(p))
            except SingularPoint:
                pass


def test_square_decomposition_precondition():
    with pytest.raises(ValueError):
        square_decomposition(make_cet([F(1, 2), F(1, 4), F(1, 4)], F(1, 4)))


def test_accelerated_code():
    assert accelerated_code("abcb") == ("ab", "bc", "cb")
    with pytest.raises(ValueError):
        accelerated_code("abb")


@given(lengths(max_den=40), st.integers(1, 79))
def test_interval_periods_against_two_oracles(ls, k):
    f = make_cet(ls, F(k, 80))
    rep = interval_periods(f)
    if rep.periods is None:
        return
    assert rep.periods == cell_permutation_periods(f)
    if rep.regime != REGIME_ROTATION:
        search = tracked_periods(f)
        assert rep.periods == search.periods
        for lo, hi, _, period in search.pieces:
            if period == 2 or period % 4 == 2:
                continue
            # any other period is a multiple of 4 and belongs to an open strip
            assert period % 4 == 0
            code = orbit(f, (lo + hi) / 2, period).letters
            assert lattice_displacement(code) != (0, 0)


def test_drift_periods_also_on_acute_shapes():
    # interval periods outside {2} + {4n+2} exist and are drift-periodic strips
    ls = (F(7, 15), F(2, 5), F(2, 15))
    f = make_cet(ls, F(43, 80))
    assert interval_periods(f).periods == {2, 8, 14}
    shape = tg.TriangleShape.from_lengths(ls)
    for lo, hi, _, period in tracked_periods(f).pieces:
        if period == 8:
            rec = tg.trace_folded(shape, (lo + hi) / 2, F(43, 80), 200)
            assert (rec.kind, rec.period) == (tg.DRIFT_PERIODIC, 8)


@given(lengths(max_den=40), st.integers(1, 79))
def test_closed_form_sets(ls, k):
    tau = F(k, 80)
    f = make_cet(ls, tau)
    rep = interval_periods(f)
    t = min(tau, 1 - tau)
    lmax, lmid, lmin = sorted(ls, reverse=True)
    two = {2} if t < lmax else set()
    if rep.regime == REGIME_LOW:
        assert rep.periods == {6} | two
    elif rep.regime == REGIME_MIDDLE:
        n = middle_regime_index(t, lmin)
        expected = {4 * n + 6} | two
        if t != (n + 1) * lmin:
            expected.add(4 * n + 2)
        assert rep.periods == expected
    elif rep.regime == REGIME_ROTATION:
        kappa = lmin / (lmid + lmin)
        assert rep.kappa == kappa
        assert rep.periods == {2, 2 * kappa.denominator}


def test_middle_index_boundary():
    # tau an exact multiple of min l: the (4n+2) island has length zero
    assert middle_regime_index(F(2, 10), F(1, 10)) == 1
    assert middle_regime_index(F(25, 100), F(1, 10)) == 2


def test_high_regime_uses_tracking():
    f = make_cet([F(2, 5), F(7, 20), F(1, 4)], F(3, 8))
    rep = interval_periods(f)
    assert rep.regime == REGIME_HIGH
    assert rep.periods == cell_permutation_periods(f)


def test_float_and_cubic_backends():
    fb = float_backend(80)
    f = make_cet([fb.coerce(F(1, 3))] * 3, fb.coerce(F(1, 2)))
    assert detect_point_period(f, fb.coerce(F(1, 10))) == 6
    a = Cubic.generator()
    g = make_cet([(1 - a) / 2, (1 - a * a) / 2, (1 - a**3) / 2], F(1, 2))
    assert len(orbit(g, F(1, 3), 200).letters) == 200
