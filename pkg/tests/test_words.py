from hypothesis import given, strategies as st

import pytest

from tilebill import words
from tilebill.words import (
    AmbiguousContext,
    CyclicWord,
    factorization_commutes,
    factorization_of_sigma,
    flower_identity,
    generate_s_words,
    least_rotation,
    parse_blocks,
    sigma_apply,
    sign_code,
    square_odd_check,
    tribonacci,
    upsilon_fac,
    varsigma_R,
    w_R_prefix,
    w_word,
    winding,
)

abc = st.text(alphabet="abc", min_size=1, max_size=40)


def no_doubles(draw_word):
    return all(x != y for x, y in zip(draw_word, draw_word[1:] + draw_word[:1]))


@st.composite
def cyclic_codes(draw, min_size=3, max_size=40):
    """Cyclic words over a, b, c with no two equal neighbours (wrapping)."""
    n = draw(st.integers(min_size, max_size))
    w = [draw(st.sampled_from("abc"))]
    for _ in range(n - 1):
        w.append(draw(st.sampled_from([c for c in "abc" if c != w[-1]])))
    if w[-1] == w[0]:
        w.pop()
    return "".join(w)


@given(abc)
def test_least_rotation_is_minimal(s):
    k = least_rotation(s)
    assert s[k:] + s[:k] == min(s[i:] + s[:i] for i in range(len(s)))


@given(abc, st.integers(0, 100))
def test_cyclic_word_ignores_rotation(s, k):
    k %= len(s)
    assert CyclicWord(s) == CyclicWord(s[k:] + s[:k])
    assert hash(CyclicWord(s)) == hash(CyclicWord(s[k:] + s[:k]))


def test_known_s_words():
    s = generate_s_words(5)
    assert s[2] == "acbcb"
    assert s[3] == "bcbacbcac"
    assert s[4] == "cbcacbcbacbcabcba"
    assert s[5] == "acbcabcbacbcacbcbacbcabcbcacbcb"


def test_tribonacci_list():
    got = [tribonacci(n) for n in range(1, 17)]
    assert got == [1, 1, 1, 3, 5, 9, 17, 31, 57, 105, 193, 355, 653, 1201, 2209, 4063]
    with pytest.raises(ValueError):
        tribonacci(0)


def test_w_lengths_and_square_check():
    s = generate_s_words(10)
    for j in range(1, 11):
        w = w_word(j, s)
        assert len(w) == 2 * tribonacci(j + 3)
        chk = square_odd_check(s[j] * 2)
        assert chk and chk.half == s[j]


def test_square_odd_check_reasons():
    assert square_odd_check("abc").reason == "odd length"
    assert square_odd_check("abcb").reason == "not a square"
    assert square_odd_check("abab").reason == "half has even length"
    assert not square_odd_check("")


def test_w_codes_wind_six_times():
    s = generate_s_words(8)
    for j in range(1, 9):
        pairs = words.cyclic_pairs(s[j] * 2)
        assert abs(winding(pairs)) == 6
        code = sign_code(pairs)
        assert abs(code.count("+") - code.count("-")) == 6


def test_sign_code_rejects_doubles():
    with pytest.raises(ValueError):
        sign_code(("aa",))
    with pytest.raises(ValueError):
        winding(("ad",))


@given(cyclic_codes(), st.sampled_from([1, 2, 3]))
def test_sigma_keeps_codes_without_doubles(w, j):
    img = sigma_apply(j, w)
    assert no_doubles(img)
    # every letter image ends with the letter itself
    assert len(img) == len(w) + 2 * w.count("abc"[j - 1])


@given(cyclic_codes())
def test_sigma_on_cyclic_word_respects_rotation(w):
    for j in (1, 2, 3):
        assert sigma_apply(j, CyclicWord(w)) == CyclicWord(sigma_apply(j, w[1:] + w[:1]))


def test_ambiguous_context():
    with pytest.raises(AmbiguousContext):
        sigma_apply(1, "aa")
    with pytest.raises(AmbiguousContext):
        varsigma_R("cc")


def test_varsigma_is_relabel_after_sigma3():
    for w in ("cba", "acbcb", "bcbacbcac"):
        assert varsigma_R(CyclicWord(w)) == words.relabel(sigma_apply(3, CyclicWord(w)))


@pytest.mark.parametrize("j", [1, 2, 3, 4, 5, 6, 7, 8])
def test_factorization_commutes_on_w(j):
    s = generate_s_words(8)
    w = s[j] * 2
    assert factorization_commutes(varsigma_R, factorization_of_sigma("R"), w)
    for k in (1, 2, 3):
        phi = lambda x, k=k: sigma_apply(k, x)
        assert factorization_commutes(phi, factorization_of_sigma(k), w)


@given(cyclic_codes(min_size=4).filter(lambda w: len(w) % 2 == 0), st.sampled_from([1, 2, 3]))
def test_factorization_commutes_on_random_codes(w, j):
    assert factorization_commutes(lambda x: sigma_apply(j, x), factorization_of_sigma(j), w)


def test_composite_is_cube_of_sigma_R():
    r = factorization_of_sigma("R")
    cube = words.compose(r, r, r)
    assert factorization_of_sigma("composite") == cube


def test_w_R_prefix():
    assert w_R_prefix(10) == "1213121121"
    assert upsilon_fac("cbacba") == "123"
    with pytest.raises(ValueError):
        upsilon_fac("abc")


@pytest.mark.parametrize("k", range(4, 11))
def test_flower_identity(k):
    holds, lhs, rhs = flower_identity(k)
    assert holds, (lhs, rhs)


def test_parse_blocks():
    assert parse_blocks("babcba", ("ab", "cb"))  # suffix of a block first
    assert not parse_blocks("cabcab", ("ab", "cb"))
    assert parse_blocks("bcbab", ("ab", "cb"))
    assert not parse_blocks("aab", ("ab", "cb"))
    assert parse_blocks("", ("ab",))


@given(st.lists(st.sampled_from(["ab", "cb"]), min_size=1, max_size=20), st.integers(0, 5), st.integers(0, 5))
def test_parse_blocks_accepts_factors(blocks, i, j):
    w = "".join(blocks)
    i = min(i, len(w) - 1)
    sub = w[i : len(w) - j] or w
    assert parse_blocks(sub, ("ab", "cb"))
