import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tilebill import fractal, tiling_geom as tg
from tilebill.numerics import Cubic
from tilebill.words import w_R_prefix


@pytest.fixture(scope="module")
def foliation():
    return fractal.exceptional_foliation()


@pytest.mark.parametrize("j", [1, 2, 3, 4, 5])
def test_w_trajectories(foliation, j):
    rec = fractal.w_trajectory(j, foliation)
    assert rec.kind == tg.PERIODIC
    assert rec.period == fractal.period_of_word(j)
    assert fractal.code_matches_w(rec, j)


def test_w_trajectory_cap():
    with pytest.raises(ValueError):
        fractal.w_trajectory(11)
    with pytest.raises(ValueError):
        fractal.w_trajectory(0)


def test_rescale_matrix_inverse():
    A = fractal.RESCALE
    I = fractal.mat_mul(A, fractal.mat_inverse(A))
    assert I == ((Cubic(1), Cubic(0)), (Cubic(0), Cubic(1)))
    assert fractal.mat_mul(fractal.mat_inverse(A), A) == I


def test_tribonacci_shape_lengths_sum_to_one():
    a = Cubic.generator()
    ls = fractal.tribonacci_lengths()
    assert sum(ls, Cubic(0)) == 1
    assert ls[0] == (1 - a) / 2


def test_exceptional_trajectory_escapes_without_revisits():
    ex = fractal.exceptional_trajectory(5000)
    assert ex.kind == tg.ESCAPING
    assert len(set(ex.tiles)) == len(ex.tiles)


def test_two_sided_coverage_grows():
    radii = []
    for n in (1000, 10000):
        ex = fractal.exceptional_trajectory(n)
        fwd, back = fractal.two_sided(ex)
        assert set(fwd.tiles) & set(back.tiles) == {tg.BASE}
        radii.append(fractal.covered_radius(ex.shape, fwd.tiles + back.tiles))
    assert radii[0] > 1 and radii[1] > 2 * radii[0]


def test_piece_steps_match_arithmetic_orbit():
    shape = fractal.tribonacci_shape()
    ex = fractal.exceptional_trajectory(2000)
    orb = fractal.arithmetic_orbit(ex)
    pred = fractal.piece_steps(shape, fractal.DEFAULT_START, Cubic(1) / 2, len(orb.steps))
    assert pred == orb.steps


def test_ladder_is_bounded_and_frequencies_match_perron():
    v = fractal.perron_vector()
    assert np.allclose(fractal.abelianization() @ v, v * max(abs(np.linalg.eigvals(fractal.abelianization()))))
    freqs = fractal.letter_frequencies(w_R_prefix(50000))
    assert np.allclose(freqs, v, atol=1e-3)
    small = fractal.ladder_fractal(2000).points
    big = fractal.ladder_fractal(50000).points
    r_small = np.hypot(*small.T).max()
    r_big = np.hypot(*big.T).max()
    assert r_big < 2 * r_small + 2


def test_ladder_cells_are_nearly_disjoint():
    assert fractal.cell_overlap(fractal.ladder_fractal(50000)) < 0.2


@settings(max_examples=20)
@given(st.integers(0, 2**32))
def test_hausdorff_properties(seed):
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(200, 2))
    q = rng.normal(size=(150, 2))
    assert fractal.hausdorff(p, p) == 0
    assert fractal.hausdorff(p, q) == pytest.approx(fractal.hausdorff(q, p))
    th = rng.uniform(0, 2 * np.pi)
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    # rotation search recovers an arbitrary rotation up to the angular grid
    assert fractal.aligned_distance(p, p @ R.T) <= 2 * np.pi / 72 * np.hypot(*p.T).max() + 0.1


def test_whitened_cloud_has_identity_covariance():
    rng = np.random.default_rng(1)
    p = rng.normal(size=(500, 2)) @ np.array([[3.0, 1.0], [0.0, 0.5]]) + 7
    w = fractal.whiten_cloud(p)
    assert np.allclose(w.mean(axis=0), 0, atol=1e-12)
    assert np.allclose(w.T @ w / len(w), np.eye(2), atol=1e-9)


def test_flower_chain_of_w5_leaf(foliation):
    rec = fractal.w_trajectory(5, foliation)
    chain = fractal.flower_chain(rec, foliation.chord_sum)
    assert chain.flowers
    top = chain.flowers[0]
    assert sum(fractal.petal_size(p) for p in top.petals) == rec.period
