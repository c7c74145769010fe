from fractions import Fraction
import random

import pytest
from hypothesis import assume, given, strategies as st

from strategies import lengths, renormalizable
from tilebill import fractal, renorm, words
from tilebill.circle_maps import SingularPoint, orbit
from tilebill.numerics import Cubic, float_backend
from tilebill.verify import random_renormalizable

F = Fraction
V_PERP = (1, 1, 1, -2)


def test_fully_subtractive_example():
    out, j = renorm.fully_subtractive_step((F(1, 2), F(3, 10), F(1, 5)))
    assert out == (F(1, 2), F(1, 6), F(1, 3)) and j == 3


@given(lengths(max_den=200))
def test_steps_commute_with_coordinate_change(ls):
    try:
        new_l, j = renorm.fully_subtractive_step(ls)
    except renorm.TieError:
        return
    x = tuple(1 - 2 * v for v in ls)
    try:
        new_x, k = renorm.rauzy_subtractive_step(x)
    except (renorm.NotApplicable, renorm.TieError):
        return
    assert j == k
    assert new_x == tuple(1 - 2 * v for v in new_l)


def test_transport_matrices():
    for j in (1, 2, 3):
        A, B = renorm.transport_matrices(j)
        prod = [[sum(A[i][k] * B[m][k] for k in range(4)) for m in range(4)] for i in range(4)]
        assert prod == [[int(i == m) for m in range(4)] for i in range(4)]
        assert renorm.apply_matrix(B, V_PERP) == V_PERP


def test_row_variant_of_b3_does_not_fix_v():
    variant = ((1, 0, 0, 0), (0, 1, -1, 0), (1, 1, 1, 1), (0, 0, 0, 1))
    _, B = renorm.transport_matrices(3)
    assert B[1] == (0, 1, 0, 0)
    assert renorm.apply_matrix(variant, V_PERP) != V_PERP


@given(renormalizable())
def test_transport_matches_step(case):
    ls, tau = case
    lam = renorm.ParamVector(*ls, tau)
    step = renorm.renorm_step(lam)
    raw = renorm.transport(lam, step.index)
    scale = 1 - 2 * ls[step.index - 1]
    assert tuple(v / scale for v in raw) == step.params.as_tuple()


def _window_points(step, rng, k):
    lo, hi = step.window
    for _ in range(k):
        p = lo + (hi - lo) * F(rng.randint(1, 10**6 - 1), 10**6)
        yield p - 1 if p >= 1 else p


@given(renormalizable(), st.integers(0, 2**32))
def test_step_is_first_return(case, seed):
    ls, tau = case
    lam = renorm.ParamVector(*ls, tau)
    step = renorm.renorm_step(lam)
    f, g = lam.cet(), step.params.cet()
    assert step.params.r == lam.r / step.window_length
    rng = random.Random(seed)
    for p in _window_points(step, rng, 20):
        try:
            y = renorm.first_return(f, step.window, p)
            gy = g(step.to_window(p))
        except SingularPoint:
            continue
        assert step.to_window(y) == gy
        assert step.from_window(step.to_window(p)) == p


@given(st.integers(0, 2**32))
def test_symbolic_lifting(seed):
    rng = random.Random(seed)
    lam = random_renormalizable(rng, lifting=True)
    step = renorm.renorm_step(lam)
    f, g = lam.cet(), step.params.cet()
    for p in _window_points(step, rng, 5):
        child = orbit(g, step.to_window(p), 301, keep_points=False)
        parent = orbit(f, p, 1300)
        if child.singular or parent.singular:
            continue
        returns = [k for k, x in enumerate(parent.points) if renorm.in_window(step.window, x)]
        img = words.sigma_apply(step.index, child.letters[1:], cyclic=False, prev=child.letters[0])[:300]
        assert len(img) == 300
        assert parent.letters[returns[1] : returns[1] + len(img)] == img
        return


def test_rejected_sigma3_variant_breaks_lifting():
    # "c -> bca if the previous symbol is not a" instead of abc
    rules = dict(words.SIGMA_RULES[3])
    rules["c"] = (("b", "bac"), ("a", "bca"))
    rng = random.Random(4)
    mismatches = 0
    for _ in range(40):
        while True:
            d = rng.randint(20, 120)
            a, b = rng.randint(1, d), rng.randint(1, d)
            c = d - a - b
            if c > 0 and 2 * max(a, b, c) < d and min(a, b, c) == c and len({a, b, c}) == 3:
                break
        ls = (F(a, d), F(b, d), F(c, d))
        m = max(ls)
        lam = renorm.ParamVector(*ls, m + (F(1, 2) - m) * F(rng.randint(1, 999), 1000))
        step = renorm.renorm_step(lam)
        if step.params.tau <= max(step.params.lengths) or step.index != 3:
            continue
        p = next(_window_points(step, rng, 1))
        child = orbit(step.params.cet(), step.to_window(p), 201, keep_points=False)
        parent = orbit(lam.cet(), p, 900)
        if child.singular or parent.singular:
            continue
        rets = [k for k, x in enumerate(parent.points) if renorm.in_window(step.window, x)]
        img = words._substitute(rules, child.letters[1:], False, child.letters[0])[:200]
        if parent.letters[rets[1] : rets[1] + len(img)] != img:
            mismatches += 1
    assert mismatches > 0


@given(renormalizable())
def test_has_two_periodic_after(case):
    ls, tau = case
    assume(tau > max(ls))
    lam = renorm.ParamVector(*ls, tau)
    step = renorm.renorm_step(lam)
    after = renorm.has_two_periodic_after(lam, step.index)
    assert after == (step.params.tau <= max(step.params.lengths))


@given(renormalizable())
def test_drive_keeps_r_over_window(case):
    ls, tau = case
    lam = renorm.ParamVector(*ls, tau)
    tr = renorm.renorm_drive(lam, cap=30)
    for _, params, total in tr.steps:
        assert params.r == lam.r / total


def test_half_is_invariant_and_tribonacci_windows():
    lam = renorm.ParamVector(*fractal.tribonacci_lengths(), Cubic(F(1, 2)))
    tr = renorm.renorm_drive(lam, cap=9)
    assert tr.stop_reason == renorm.STOP_CAP
    assert all(p.tau == F(1, 2) for _, p, _ in tr.steps)
    a = Cubic.generator()
    totals = [t for _, _, t in tr.steps]
    assert all(totals[k + 1] == a * totals[k] for k in range(len(totals) - 1))
    assert tr.indices[:6] == tr.indices[3:9]


def test_classification_examples():
    assert renorm.classify(renorm.lengths_from_angles((60, 60, 60))).kind == renorm.EXCEPTIONAL
    golden = renorm.classify(renorm.lengths_from_angles((36, 72, 72)))
    assert golden.kind == renorm.EXCEPTIONAL and golden.exceptional.steps == 1
    trib = renorm.classify(fractal.tribonacci_lengths())
    assert trib.kind == renorm.GASKET and trib.gasket.cycle == (0, 3)
    assert renorm.classify(renorm.lengths_from_angles((80, 50, 50))).kind == renorm.RATIONAL_DRIFT


@given(lengths(max_den=90))
def test_rational_shapes_are_never_gasket(ls):
    sc = renorm.classify(ls, words=False)
    assert sc.kind in (renorm.EXCEPTIONAL, renorm.RATIONAL_DRIFT)
    assert renorm.gasket_membership(tuple(1 - 2 * v for v in ls)).status == renorm.NOT_IN


def test_gasket_excludes_e():
    x = tuple(1 - 2 * v for v in fractal.tribonacci_lengths())
    assert renorm.gasket_membership(x).status == renorm.IN
    assert renorm.e_membership(fractal.tribonacci_lengths()).status == renorm.NOT_IN


def test_float_gasket_near_boundary_is_inconclusive():
    fb = float_backend(64)
    x = tuple(fb.coerce(v) for v in (F(1, 2), F(1, 3), F(1, 6)))
    assert renorm.gasket_membership(x).status in (renorm.INCONCLUSIVE, renorm.NOT_IN)


def _escaping_point(sc, rng):
    """A point whose orbit avoids the 2-periodic part of the last map of the chain."""
    lam = renorm.ParamVector(*sc.lengths, F(1, 2))
    steps = []
    for _ in sc.trace.indices:
        st_ = renorm.renorm_step(lam)
        steps.append(st_)
        lam = st_.params
    L = lam.lengths
    x = max(range(3), key=lambda k: L[k])
    y = rng.choice([k for k in range(3) if k != x])
    q = sum(L[:y]) + L[y] * F(rng.randint(1, 999), 1000)
    for st_ in reversed(steps):
        q = st_.from_window(q)
    return q


def test_escape_words_parse_orbits():
    rng = random.Random(2)
    checked = 0
    for angles in [(70, 62, 48), (75, 60, 45), (66, 64, 50), (89, 46, 45)]:
        ls = renorm.lengths_from_angles(angles)
        sc = renorm.classify(ls)
        if sc.trace is None or sc.trace.stop_reason != renorm.STOP_ROTATION:
            continue
        cet = renorm.ParamVector(*ls, F(1, 2)).cet()
        for _ in range(10):
            o = orbit(cet, _escaping_point(sc, rng), 2000, keep_points=False)
            if o.singular:
                continue
            assert sc.escape_words.parses(o.letters)
            checked += 1
    assert checked >= 20


def test_not_applicable():
    with pytest.raises(renorm.NotApplicable):
        renorm.renorm_step(renorm.ParamVector(F(6, 10), F(3, 10), F(1, 10), F(1, 2)))
    with pytest.raises(renorm.NotApplicable):
        renorm.renorm_step(renorm.ParamVector(F(4, 10), F(35, 100), F(25, 100), F(3, 10)))
