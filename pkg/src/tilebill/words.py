"""
Symbolic codes of tiling billiard trajectories.

Letters a, b, c name the sides of the tile (equivalently the intervals of a
fully flipped 3-interval exchange). Periodic codes are cyclic words; the
renormalization step R_j acts on codes through the context-dependent
substitution sigma_j, where a letter's image depends on the symbol preceding
it in the source word:

    sigma_1:  a -> bca (previous symbol not b),  a -> cba (previous not c)
    sigma_2:  b -> acb (previous not a),         b -> cab (previous not c)
    sigma_3:  c -> bac (previous not b),         c -> abc (previous not a)

All other letters are fixed. In a code without doubled letters exactly one
clause applies; anything else is reported as :class:`AmbiguousContext`.
"""

from dataclasses import dataclass
from functools import lru_cache


class AmbiguousContext(ValueError):
    """No clause, or more than one clause, of a substitution applies."""


# ---------------------------------------------------------------------------
# cyclic words

def least_rotation(s):
    """Start index of the lexicographically least rotation (Booth)."""
    n = len(s)
    if n == 0:
        return 0
    ss = s + s
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        i = f[j - k - 1]
        while i != -1 and ss[j] != ss[k + i + 1]:
            if ss[j] < ss[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if i == -1 and ss[j] != ss[k]:
            if ss[j] < ss[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n


class CyclicWord:
    """
    A word up to rotation.

        >>> CyclicWord("bca") == CyclicWord("abc")
        True
        >>> str(CyclicWord("cab"))
        'abc'
    """

    __slots__ = ("letters", "canonical")

    def __init__(self, letters):
        letters = str(letters)
        self.letters = letters
        k = least_rotation(letters)
        self.canonical = letters[k:] + letters[:k]

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        if isinstance(other, CyclicWord):
            return self.canonical == other.canonical
        if isinstance(other, str):
            return self == CyclicWord(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.canonical)

    def __str__(self):
        return self.canonical

    def __repr__(self):
        return f"CyclicWord({self.canonical!r})"

    def rotate(self, k):
        k %= max(len(self.letters), 1)
        return self.letters[k:] + self.letters[:k]

    def pairs(self):
        return cyclic_pairs(self.letters)


def cyclic_pairs(word):
    """Pairs of consecutive letters of a cyclic word, wrapping around."""
    n = len(word)
    return tuple(word[k] + word[(k + 1) % n] for k in range(n))


# ---------------------------------------------------------------------------
# sign code and winding

_SIGN = {"ab": "+", "bc": "+", "ca": "+", "ba": "-", "cb": "-", "ac": "-"}


def sign_code(pairs):
    """
    Signs of pairs: ab, bc, ca are + and ba, cb, ac are -.

        >>> sign_code(("ab", "bc", "ca"))
        '+++'
    """
    try:
        return "".join(_SIGN[p] for p in pairs)
    except KeyError as exc:
        raise ValueError(f"not a pair of distinct letters: {exc.args[0]!r}") from None


def winding(pairs, n=3):
    """
    Sum of +1 for each pair (a_i, a_{i+1}) and -1 for each (a_{i+1}, a_i).

    Letters are a, b, c, ... with cyclic successor; other pairs count 0.
    """
    total = 0
    for p in pairs:
        i, j = ord(p[0]) - 97, ord(p[1]) - 97
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pair {p!r} is outside an alphabet of {n} letters")
        if j == (i + 1) % n:
            total += 1
        elif i == (j + 1) % n:
            total -= 1
    return total


@dataclass(frozen=True)
class SquareCheck:
    passed: bool
    half: str = ""
    reason: str = ""

    def __bool__(self):
        return self.passed


def square_odd_check(word):
    """
    Whether a cyclic word is the square of a word of odd length.

        >>> square_odd_check("abcabc").half
        'abc'
        >>> bool(square_odd_check("abab"))
        False
    """
    w = word.letters if isinstance(word, CyclicWord) else str(word)
    n = len(w)
    if n == 0:
        return SquareCheck(False, reason="empty word")
    if n % 2:
        return SquareCheck(False, reason="odd length")
    h = n // 2
    if w[:h] != w[h:]:
        return SquareCheck(False, reason="not a square")
    if h % 2 == 0:
        return SquareCheck(False, half=w[:h], reason="half has even length")
    return SquareCheck(True, half=w[:h])


# ---------------------------------------------------------------------------
# substitutions

# letter -> tuple of (forbidden previous symbol, image)
SIGMA_RULES = {
    1: {"a": (("b", "bca"), ("c", "cba")), "b": "b", "c": "c"},
    2: {"a": "a", "b": (("a", "acb"), ("c", "cab")), "c": "c"},
    3: {"a": "a", "b": "b", "c": (("b", "bac"), ("a", "abc"))},
}

VARSIGMA_RULES = {"a": "b", "b": "c", "c": {"a": "cba", "b": "bca"}}

RELABEL = {"a": "b", "b": "c", "c": "a"}


def _substitute(rules, word, cyclic, prev):
    if not word:
        return ""
    if cyclic:
        prev = word[-1]
    out = []
    for pos, ch in enumerate(word):
        rule = rules[ch]
        if isinstance(rule, str):
            out.append(rule)
        elif isinstance(rule, dict):
            if prev not in rule:
                raise AmbiguousContext(f"no clause for {ch!r} after {prev!r} at position {pos}")
            out.append(rule[prev])
        else:
            hits = [img for forbidden, img in rule if prev != forbidden]
            if len(hits) != 1:
                raise AmbiguousContext(
                    f"{len(hits)} clauses apply to {ch!r} after {prev!r} at position {pos}"
                )
            out.append(hits[0])
        prev = ch
    return "".join(out)


def sigma_apply(j, word, cyclic=True, prev=None):
    """
    Apply sigma_j. Cyclic words take the context of their first letter from
    the last one; for plain strings pass the preceding symbol as ``prev``.

        >>> sigma_apply(3, "cba")
        'bacba'
    """
    if j not in SIGMA_RULES:
        raise ValueError("sigma index must be 1, 2 or 3")
    if isinstance(word, CyclicWord):
        return CyclicWord(_substitute(SIGMA_RULES[j], word.letters, True, None))
    return _substitute(SIGMA_RULES[j], word, cyclic, prev)


def relabel(word):
    """The cyclic relabeling a -> b -> c -> a."""
    if isinstance(word, CyclicWord):
        return CyclicWord(relabel(word.letters))
    return "".join(RELABEL[ch] for ch in word)


def varsigma_R(word, cyclic=True, prev=None):
    """
    relabel after sigma_3: a -> b, b -> c, c -> cba after a, c -> bca after b.

        >>> str(varsigma_R(CyclicWord("cba"))) == str(CyclicWord("cbacb"))
        True
    """
    if isinstance(word, CyclicWord):
        return CyclicWord(_substitute(VARSIGMA_RULES, word.letters, True, None))
    return _substitute(VARSIGMA_RULES, word, cyclic, prev)


# ---------------------------------------------------------------------------
# factorization to digits

_FAC = {"ab": "3", "ba": "3", "ac": "2", "ca": "2", "bc": "1", "cb": "1"}

SIGMA_STAR = {
    1: {"1": "1", "2": "12", "3": "13"},
    2: {"1": "21", "2": "2", "3": "23"},
    3: {"1": "31", "2": "32", "3": "3"},
}
RELABEL_STAR = {"1": "2", "2": "3", "3": "1"}
SIGMA_R = {"1": "12", "2": "13", "3": "1"}


def upsilon_fac(word, offset=0):
    """
    Factor an even-length word into disjoint pairs: ab/ba -> 3, ac/ca -> 2,
    bc/cb -> 1. ``offset=1`` pairs a cyclic word starting from its second letter.

        >>> upsilon_fac("cbacba")
        '123'
    """
    w = word.letters if isinstance(word, CyclicWord) else str(word)
    if len(w) % 2:
        raise ValueError("factorization needs an even-length word")
    if offset:
        w = w[offset:] + w[:offset]
    out = []
    for k in range(0, len(w), 2):
        pr = w[k : k + 2]
        if pr not in _FAC:
            raise ValueError(f"pair {pr!r} has equal letters")
        out.append(_FAC[pr])
    return "".join(out)


def substitute(table, word):
    """Apply a context-free substitution given as a dict."""
    return "".join(table[ch] for ch in word)


def compose(*tables):
    """Table of the composition: compose(f, g)(w) = f(g(w))."""
    alphabet = tables[-1].keys()
    out = {}
    for ch in alphabet:
        w = ch
        for t in reversed(tables):
            w = substitute(t, w)
        out[ch] = w
    return out


def factorization_of_sigma(j):
    """
    The substitution on {1, 2, 3} induced by sigma_j (j = 1, 2, 3), by
    varsigma_R (j = "R", which gives sigma_R) or by sigma_1 sigma_2 sigma_3
    (j = "composite", which gives sigma_R^3).
    """
    if j in SIGMA_STAR:
        return dict(SIGMA_STAR[j])
    if j == "R":
        return compose(RELABEL_STAR, SIGMA_STAR[3])
    if j == "composite":
        return compose(SIGMA_STAR[1], SIGMA_STAR[2], SIGMA_STAR[3])
    raise ValueError(f"unknown substitution {j!r}")


def factorization_commutes(phi, phi_star, word):
    """
    Check upsilon_fac(phi(w)) = phi_star(upsilon_fac(w)) as cyclic words,
    for some choice of pairing of phi(w) for each pairing of w.
    """
    w = word.letters if isinstance(word, CyclicWord) else str(word)
    image = phi(CyclicWord(w)).letters
    targets = {CyclicWord(upsilon_fac(image, off)) for off in (0, 1)}
    return all(CyclicWord(substitute(phi_star, upsilon_fac(w, off))) in targets for off in (0, 1))


# ---------------------------------------------------------------------------
# Tribonacci

def sigma_R_apply(word):
    """
    The Tribonacci substitution 1 -> 12, 2 -> 13, 3 -> 1.

        >>> sigma_R_apply("123")
        '12131'
    """
    return substitute(SIGMA_R, word)


def w_R_prefix(n):
    """First ``n`` digits of the fixed point of sigma_R starting with 1."""
    if n < 1:
        raise ValueError("n must be positive")
    w = "1"
    while len(w) < n:
        w = sigma_R_apply(w)
    return w[:n]


@lru_cache(maxsize=None)
def _trib_table(n):
    t = [0, 1, 1, 1]
    while len(t) <= n:
        t.append(t[-1] + t[-2] + t[-3])
    return tuple(t)


def tribonacci(n):
    """
    T_1 = T_2 = T_3 = 1 and T_{n+3} = T_{n+2} + T_{n+1} + T_n.

        >>> [tribonacci(k) for k in range(1, 11)]
        [1, 1, 1, 3, 5, 9, 17, 31, 57, 105]
    """
    if n < 1:
        raise ValueError("Tribonacci numbers start at n = 1")
    return _trib_table(n)[n]


def generate_s_words(j_max):
    """
    The words s_{-2} = a, s_{-1} = b, s_0 = c, s_1 = cba and
    s_{j+1} = varsigma_R(s_j), read cyclically, where an image of a word
    starting with c has its first two letters moved to the end.

    Returns a dict j -> s_j. The periodic codes are w_j = s_j s_j.
    """
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    s = {-2: "a", -1: "b", 0: "c", 1: "cba"}
    for j in range(1, j_max):
        img = varsigma_R(s[j], cyclic=True)
        if s[j][0] == "c":
            img = img[2:] + img[:2]
        s[j + 1] = img
    return s


def w_word(j, s=None):
    """The cyclic code w_j = s_j^2."""
    s = s or generate_s_words(max(j, 1))
    return CyclicWord(s[j] * 2)


# junction letters (*, star, dagger) by k mod 3
_JUNCTION = {0: ("c", "a", "b"), 1: ("a", "b", "c"), 2: ("b", "c", "a")}


def _strip(word, tail):
    if not word.endswith(tail):
        raise ValueError(f"{word!r} does not end with {tail!r}")
    return word[: len(word) - len(tail)]


def flower_identity(k, s=None):
    """
    Check the concatenation of three shorter codes around a flower:

        (s_{k-3}^2 minus *) dagger (s_{k-2}^2 minus star) * (s_{k-1}^2 minus dagger) star
            == s_{k-3} (s_k^2 minus its suffix s_{k-3})

    symbol by symbol, with (*, star, dagger) = (c, a, b), (a, b, c), (b, c, a)
    for k = 0, 1, 2 mod 3. Returns (holds, lhs, rhs).
    """
    if k < 4:
        raise ValueError("the identity is stated for k >= 4")
    s = s or generate_s_words(k)
    st, sr, dg = _JUNCTION[k % 3]
    lhs = (
        _strip(s[k - 3] * 2, st) + dg
        + _strip(s[k - 2] * 2, sr) + st
        + _strip(s[k - 1] * 2, dg) + sr
    )
    rhs = s[k - 3] + _strip(s[k] * 2, s[k - 3])
    return lhs == rhs, lhs, rhs


# ---------------------------------------------------------------------------
# escape words

@dataclass(frozen=True)
class EscapeWords:
    omega1: str
    omega2: str
    bottom_blocks: tuple
    chain: tuple

    def parses(self, code):
        """Whether ``code`` is a factor of a concatenation of omega1 and omega2."""
        return parse_blocks(code, (self.omega1, self.omega2))


def escape_words(trace):
    """
    Words whose concatenations give the codes of linearly escaping
    trajectories.

    The process at tau = 1/2 stops on a map whose largest length l_X exceeds
    1/2; away from its 2-periodic interval every orbit alternates X with one
    of the other two letters, so codes are concatenations of YX and ZX.
    Both blocks end in X and every sigma_j keeps the last letter of each
    letter image, so the blocks lift through the chain as cyclic words.
    """
    final = trace.final
    lengths = final.lengths
    x = max(range(3), key=lambda k: lengths[k])
    letters = "abc"
    others = [letters[k] for k in range(3) if k != x]
    blocks = tuple(o + letters[x] for o in others)
    chain = trace.indices
    lifted = []
    for b in blocks:
        w = b
        for t in reversed(chain):
            w = sigma_apply(t, w, cyclic=True)
        lifted.append(w)
    return EscapeWords(lifted[0], lifted[1], blocks, chain)


def parse_blocks(code, blocks):
    """
    True if ``code`` is a factor of an infinite concatenation of ``blocks``.

    The first block may be entered part way (any suffix of a block) and the
    last may be cut short (any prefix).
    """
    n = len(code)
    if n == 0:
        return True
    # reachable[i]: code[:i] is a suffix-then-whole-blocks prefix ending at a block boundary
    reachable = [False] * (n + 1)
    for b in blocks:
        for cut in range(len(b)):
            tail = b[cut:]
            if code.startswith(tail) or tail.startswith(code):
                if len(tail) >= n:
                    return True
                reachable[len(tail)] = True
    for i in range(1, n + 1):
        if not reachable[i]:
            continue
        if i == n:
            return True
        rest = code[i:]
        for b in blocks:
            if rest.startswith(b):
                reachable[i + len(b)] = True
            elif b.startswith(rest):
                return True
    return reachable[n]
