"""
Acceptance criteria 1-10 at full size.

Each test records one line ``criterion N: PASS|FAIL ...``; the lines are
printed in the terminal summary (see conftest.py).
Run alone with ``pytest -v tests/test_acceptance.py`` or as a script with
``python3 tests/test_acceptance.py``.
"""

import sys
import time

import pytest

from tilebill import fractal, tiling_geom as tg, verify

LINES = {}


def report(n, ok, detail=""):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip()
    LINES[n] = line
    return ok


def _suite_line(rep, budget):
    return (f"{rep.suite}: {rep.passed} passed, {rep.failed} failed, "
            f"{rep.inconclusive} inconclusive, {rep.seconds:.1f}s (budget {budget}s)")


def _check_suite(n, rep, budget):
    ok = rep.status == verify.PASS and rep.seconds < budget
    report(n, ok, _suite_line(rep, budget))
    assert rep.status == verify.PASS, rep.counterexamples
    assert rep.seconds < budget


def test_criterion_01_cross_engine_identity():
    _check_suite(1, verify.suite_crossengine(samples=100, letters=10000), 120)


def test_criterion_02_four_n_plus_two():
    _check_suite(2, verify.suite_four_n_plus_two(samples=500, cap=2000), 600)


def test_criterion_03_enclosed_trees():
    _check_suite(3, verify.suite_tree(samples=1000, cap=2000), 900)


def test_criterion_04_integrability_oracle():
    _check_suite(4, verify.suite_integrability(samples=200), 60)


def test_criterion_05_renormalization():
    _check_suite(5, verify.suite_renorm(samples=100, points=100, letters=500), 120)


def test_criterion_06_tribonacci_words():
    _check_suite(6, verify.suite_words(), 10)


def test_criterion_07_tribonacci_billiard():
    t0 = time.perf_counter()
    fol = fractal.exceptional_foliation()
    periods = [fractal.w_trajectory(j, fol).period for j in range(1, 6)]
    ex = fractal.exceptional_trajectory(100000)
    revisits = len(ex.tiles) - len(set(ex.tiles))
    seconds = time.perf_counter() - t0
    ok = (periods == [6, 10, 18, 34, 62] and ex.kind == tg.ESCAPING and len(ex.letters) == 100000
          and revisits == 0 and seconds < 300)
    report(7, ok, f"periods {periods}, {len(ex.letters)} crossings, {revisits} revisits, {seconds:.1f}s (budget 300s)")
    assert periods == [6, 10, 18, 34, 62]
    assert ex.kind == tg.ESCAPING and len(ex.letters) == 100000
    assert revisits == 0
    assert seconds < 300


def test_criterion_08_classification():
    _check_suite(8, verify.suite_classification(), 60)


def test_criterion_09_fractal_surrogate():
    rep = verify.suite_fractal(k_min=5, k_max=8)
    d = rep.details
    detail = (f"hausdorff {[round(x, 3) for x in d.get('hausdorff', [])]}, tile counts {d.get('tile_counts')}, "
              f"slope {d.get('slope', float('nan')):.3f}, {rep.seconds:.1f}s (budget 600s)")
    ok = rep.status == verify.PASS and rep.seconds < 600
    report(9, ok, detail)
    assert rep.status == verify.PASS, rep.counterexamples
    assert rep.seconds < 600


def test_criterion_10_flowers():
    _check_suite(10, verify.suite_flower(samples=500), 600)


if __name__ == "__main__":
    sys.exit(pytest.main(["-q", "-p", "no:cacheprovider", __file__]))
