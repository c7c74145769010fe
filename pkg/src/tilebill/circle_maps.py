"""
Fully flipped interval exchanges on the circle.

A map F in CET^n_tau cuts the circle [0, 1) into intervals I_1, ..., I_n of
lengths l_1, ..., l_n, flips each interval in place and then rotates by tau:

    F(p) = s_{j-1} + s_j - p + tau  (mod 1)   for p in I_j = (s_{j-1}, s_j).

Interval endpoints are singular; evaluating F there raises
:class:`SingularPoint`. For rational parameters orbits are computed with
integers over a common denominator, which keeps long orbits cheap and exact.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .numerics import RATIONAL, FloatBackend, common_backend, floor_scalar, reduce_mod1

LETTERS = "abcdefghijklmnopqrstuvwxyz"


class SingularPoint(ValueError):
    """An orbit reached an endpoint of an interval of continuity."""

    def __init__(self, point, step=0):
        super().__init__(f"point {point} is an interval endpoint (step {step})")
        self.point = point
        self.step = step


@dataclass(frozen=True)
class CETMap:
    lengths: tuple
    tau: object
    backend: object
    endpoints: tuple = field(repr=False)

    @property
    def n(self):
        return len(self.lengths)

    @property
    def letters(self):
        return LETTERS[: self.n]

    def interval_index(self, p):
        """0-based index j with p in I_{j+1}; raises SingularPoint on endpoints."""
        ends = self.endpoints
        j = bisect_right(ends, p) - 1
        if self.backend.exact:
            if ends[j] == p:
                raise SingularPoint(p)
        else:
            eps = self.backend.eps
            if abs(p - ends[j]) <= eps or abs(ends[j + 1] - p) <= eps or abs(p - 1) <= eps:
                raise SingularPoint(p)
        return j

    def __call__(self, p):
        return eval_f(self, p)

    def denominator(self):
        """Common denominator of all parameters (rational maps only)."""
        den = self.tau.denominator
        for x in self.lengths:
            den = math.lcm(den, x.denominator)
        return den


def make_cet(lengths, tau, backend=None):
    """
    Validate parameters and build a map.

    Lengths must be positive and (exactly, or within eps for floats) sum to 1.
    ``tau`` is reduced into [0, 1).

        >>> f = make_cet([Fraction(1, 3)] * 3, Fraction(1, 2))
        >>> f(Fraction(1, 12))
        Fraction(3, 4)
    """
    lengths = list(lengths)
    if len(lengths) < 3:
        raise ValueError("a fully flipped exchange needs at least 3 intervals")
    if backend is None:
        backend = common_backend(lengths + [tau])
    lengths = tuple(backend.coerce(x) for x in lengths)
    tau = backend.coerce(tau)
    if any(x <= 0 for x in lengths):
        raise ValueError("interval lengths must be positive")
    total = sum(lengths[1:], lengths[0])
    if backend.exact:
        if total != 1:
            raise ValueError(f"interval lengths sum to {total}, not 1")
    elif abs(total - 1) > backend.eps:
        raise ValueError(f"interval lengths sum to {total}, not 1")
    ends = [backend.coerce(0)]
    for x in lengths[:-1]:
        ends.append(ends[-1] + x)
    ends.append(backend.coerce(1))
    tau = reduce_mod1(tau)
    return CETMap(lengths, tau, backend, tuple(ends))


def eval_f(cet, p):
    """Image of a regular point."""
    j = cet.interval_index(p)
    ends = cet.endpoints
    y = ends[j] + ends[j + 1] - p + cet.tau
    if y >= 1:
        y -= 1
        if y >= 1:
            y -= 1
    return y


def symmetry_conjugate(cet):
    """
    The map i F i with i(p) = 1 - p, again a fully flipped exchange.

    It has reversed lengths and rotation 1 - tau, and satisfies
    F(p) = 1 - G(1 - p) for every regular p.
    """
    if cet.n != 3:
        raise ValueError("symmetry conjugation is defined here for n = 3")
    return make_cet(tuple(reversed(cet.lengths)), 1 - cet.tau, cet.backend)


# ---------------------------------------------------------------------------
# orbits

@dataclass(frozen=True)
class SymbolicOrbit:
    start: object
    letters: str
    points: tuple = ()
    singular: bool = False

    def __len__(self):
        return len(self.letters)


class _IntegerForm:
    """A rational map scaled by a common denominator D; points are ints mod D."""

    __slots__ = ("D", "ends", "shift", "tau")

    def __init__(self, cet, extra_den=1):
        D = math.lcm(cet.denominator(), extra_den)
        self.D = D
        self.ends = [int(e * D) for e in cet.endpoints]
        self.tau = int(cet.tau * D)
        # image of x in I_j is shift[j] - x (mod D)
        self.shift = [self.ends[j] + self.ends[j + 1] + self.tau for j in range(cet.n)]

    def run(self, x, steps, keep_points):
        ends, shift, D = self.ends, self.shift, self.D
        letters = []
        points = []
        for _ in range(steps):
            j = bisect_right(ends, x) - 1
            if ends[j] == x:
                return letters, points, True
            letters.append(j)
            if keep_points:
                points.append(x)
            x = (shift[j] - x) % D
        return letters, points, False


def _is_rational_map(cet):
    return cet.backend is RATIONAL or cet.backend.name == "rational"


def orbit(cet, p, steps, keep_points=True):
    """
    First ``steps`` letters of the orbit of ``p``.

    ``letters[k]`` labels the interval containing F^k(p). If an endpoint is
    reached the orbit stops early with ``singular=True``.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    p = cet.backend.coerce(p)
    if _is_rational_map(cet):
        form = _IntegerForm(cet, p.denominator)
        idx, pts, singular = form.run(int(p * form.D), steps, keep_points)
        letters = "".join(LETTERS[j] for j in idx)
        points = tuple(Fraction(x, form.D) for x in pts) if keep_points else ()
        return SymbolicOrbit(p, letters, points, singular)
    letters = []
    points = []
    x = p
    singular = False
    for _ in range(steps):
        try:
            j = cet.interval_index(x)
        except SingularPoint:
            singular = True
            break
        letters.append(LETTERS[j])
        if keep_points:
            points.append(x)
        ends = cet.endpoints
        x = ends[j] + ends[j + 1] - x + cet.tau
        if x >= 1:
            x -= 1
            if x >= 1:
                x -= 1
    return SymbolicOrbit(p, "".join(letters), tuple(points), singular)


def detect_point_period(cet, p, cap=None):
    """
    Smallest k <= cap with F^k(p) = p, or None when no return is found.

    Exact backends compare exactly; floats compare within eps. Raises
    SingularPoint if the orbit reaches an endpoint.
    """
    if cap is None:
        cap = 10**6 if cet.backend.exact else 10**4
    p = cet.backend.coerce(p)
    if _is_rational_map(cet):
        form = _IntegerForm(cet, p.denominator)
        x0 = int(p * form.D)
        ends, shift, D = form.ends, form.shift, form.D
        x = x0
        for k in range(1, cap + 1):
            j = bisect_right(ends, x) - 1
            if ends[j] == x:
                raise SingularPoint(Fraction(x, D), k - 1)
            x = (shift[j] - x) % D
            if x == x0:
                return k
        return None
    x = p
    for k in range(1, cap + 1):
        try:
            x = eval_f(cet, x)
        except SingularPoint as exc:
            raise SingularPoint(exc.point, k - 1) from None
        if cet.backend.exact:
            if x == p:
                return k
        else:
            d = abs(x - p)
            if d <= cet.backend.eps or abs(d - 1) <= cet.backend.eps:
                return k
    return None


def accelerated_code(letters, allow_repeats=False):
    """
    Consecutive letter pairs (w_k, w_{k+1}) of a letter sequence.

        >>> accelerated_code("abcabc")
        ('ab', 'bc', 'ca', 'ab', 'bc')
    """
    if len(letters) < 2:
        raise ValueError("need at least two letters to form pairs")
    pairs = tuple(letters[k] + letters[k + 1] for k in range(len(letters) - 1))
    if not allow_repeats:
        for k, pr in enumerate(pairs):
            if pr[0] == pr[1]:
                raise ValueError(f"repeated letter {pr[0]!r} at position {k}")
    return pairs


# ---------------------------------------------------------------------------
# the square F^2 for n = 3

@dataclass(frozen=True)
class SquarePiece:
    name: str
    lo: object
    hi: object
    displacement: object

    @property
    def length(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class SquareDecomposition:
    pieces: tuple
    x: tuple
    r: object

    def piece_of(self, p):
        for piece in self.pieces:
            if piece.lo < p < piece.hi:
                return piece
        raise SingularPoint(p)

    def apply(self, p):
        """T(p) = F^2(p) through the recorded displacement."""
        return reduce_mod1(p + self.piece_of(p).displacement)


def square_decomposition(cet):
    """
    Decompose T = F^2 into six translations.

    Requires n = 3 and max(l) < tau < 1 - max(l) so that all six pieces are
    non-degenerate. On I_j^+ the displacement is -l_j, on I_j^- it is +l_j,
    and |I_j^(+/-)| = x_j/2 +/- r with x_j = 1 - 2 l_j, r = 1/2 - tau.
    """
    if cet.n != 3:
        raise ValueError("square decomposition needs n = 3")
    l1, l2, l3 = cet.lengths
    tau = cet.tau
    m = max(cet.lengths)
    if not (m < tau < 1 - m):
        raise ValueError("square decomposition needs max(l) < tau < 1 - max(l)")
    one = cet.backend.coerce(1)
    zero = cet.backend.coerce(0)
    pieces = (
        SquarePiece("I2-", zero, tau - l2, l2),
        SquarePiece("I3+", tau - l2, l1, -l3),
        SquarePiece("I3-", l1, l1 + tau - l3, l3),
        SquarePiece("I1+", l1 + tau - l3, l1 + l2, -l1),
        SquarePiece("I1-", l1 + l2, l2 + tau, l1),
        SquarePiece("I2+", l2 + tau, one, -l2),
    )
    x = tuple(1 - 2 * lj for lj in cet.lengths)
    half = cet.backend.coerce(Fraction(1, 2))
    return SquareDecomposition(pieces, x, half - tau)


# ---------------------------------------------------------------------------
# interval periods

@dataclass(frozen=True)
class PeriodSearch:
    periods: frozenset
    complete: bool
    pieces: tuple  # (lo, hi, return_time, period)


def tracked_periods(cet, cap=2000, max_pieces=200000):
    """
    Periods of the periodic intervals, found by following intervals.

    Each continuity interval is pushed forward; whenever its image straddles
    an endpoint the starting interval is cut at the preimage of that
    endpoint. An interval whose k-th image is itself has generic period k
    (k even) or 2k (k odd, where F^k is a reflection). Intervals not back
    within ``cap`` steps make the search incomplete.
    """
    exact = cet.backend.exact
    eps = cet.backend.eps
    ends = list(cet.endpoints)
    work = [(ends[j], ends[j + 1]) for j in range(cet.n)]
    found = []
    complete = True

    def same(u, v):
        return u == v if exact else abs(u - v) <= eps

    processed = 0
    while work:
        processed += 1
        if processed > max_pieces:
            complete = False
            break
        lo, hi = work.pop()
        clo, chi = lo, hi
        flipped = False
        for k in range(1, cap + 1):
            j = bisect_right(ends, clo) - 1
            if not exact and j + 1 < len(ends) and abs(ends[j + 1] - clo) <= eps:
                j += 1
            cut = ends[j + 1]
            if chi > cut and not same(chi, cut):
                # preimage of the endpoint inside the original interval
                x = hi - (cut - clo) if flipped else lo + (cut - clo)
                work.append((lo, x))
                work.append((x, hi))
                break
            c = ends[j] + ends[j + 1] + cet.tau
            width = chi - clo
            nlo = c - chi
            nlo = nlo - floor_scalar(nlo)
            if not exact and abs(nlo - 1) <= eps:
                nlo = nlo - 1
            clo, chi = nlo, nlo + width
            flipped = not flipped
            if same(clo, lo) and same(chi, hi):
                period = k if k % 2 == 0 else 2 * k
                found.append((lo, hi, k, period))
                break
        else:
            complete = False
    return PeriodSearch(frozenset(p for *_, p in found), complete, tuple(found))


REGIME_LOW = "periodic-low"          # tau <= min l
REGIME_MIDDLE = "periodic-middle"    # min l < tau <= mid l
REGIME_HIGH = "periodic-high"        # mid l < tau <= max l
REGIME_ROTATION = "rotation"         # max l > 1/2 and tau > 1 - max l
REGIME_INVOLUTION = "involution"     # tau = 0
REGIME_RENORMALIZABLE = "renormalizable"


@dataclass(frozen=True)
class PeriodReport:
    regime: str
    periods: frozenset = None
    kappa: object = None
    complete: bool = True
    method: str = "formula"
    n_index: int = None


def middle_regime_index(tau, lmin):
    """
    The integer n in the period set {2, 4n+2, 4n+6} for min l < tau <= mid l.

    n = ceil(tau/min l) - 1, which equals floor(tau/min l) unless tau is a
    multiple of min l. In that case the (4n+2)-island has length zero.
    """
    q = tau / lmin
    n = floor_scalar(q)
    if q == n:
        n -= 1
    return n


def middle_regime_periods(tau, lmin):
    n = middle_regime_index(tau, lmin)
    periods = {2, 4 * n + 6}
    if tau != (n + 1) * lmin:
        periods.add(4 * n + 2)
    return frozenset(periods), n


def interval_periods(cet, cap=2000):
    """
    Interval periods of a CET^3 map according to its regime.

    The period set does not change under permutations of the lengths or
    under tau -> 1 - tau, so the regime is read off sorted lengths and
    min(tau, 1 - tau). Closed formulas are used for tau <= mid l; the regime
    mid l < tau <= max l is followed interval by interval; the rotation
    regime reports kappa = l_min / (l_min + l_mid) and, for rational kappa,
    the induced periods.
    """
    if cet.n != 3:
        raise ValueError("interval periods are classified for n = 3")
    backend = cet.backend
    half = backend.coerce(Fraction(1, 2))
    tau = cet.tau if cet.tau <= half else 1 - cet.tau
    l_max, l_mid, l_min = sorted(cet.lengths, reverse=True)
    if l_max > half and tau > 1 - l_max:
        kappa = l_min / (l_mid + l_min)
        if isinstance(kappa, Fraction) or (hasattr(kappa, "is_rational") and kappa.is_rational()):
            q = Fraction(kappa.c0 if hasattr(kappa, "c0") else kappa).denominator
            return PeriodReport(REGIME_ROTATION, frozenset({2, 2 * q}), kappa)
        return PeriodReport(REGIME_ROTATION, frozenset({2}), kappa, complete=False)
    if tau == 0:
        return PeriodReport(REGIME_INVOLUTION, frozenset({2}))
    # 2-periodic points exist only while some interval overlaps its image
    two = {2} if tau < l_max else set()
    if tau <= l_min:
        return PeriodReport(REGIME_LOW, frozenset({6} | two))
    if tau <= l_mid:
        periods, n = middle_regime_periods(tau, l_min)
        return PeriodReport(REGIME_MIDDLE, frozenset((periods - {2}) | two), n_index=n)
    if tau <= l_max:
        search = tracked_periods(cet, cap)
        return PeriodReport(REGIME_HIGH, search.periods, complete=search.complete, method="tracked")
    return PeriodReport(REGIME_RENORMALIZABLE, None, complete=False, method="none")


def cell_permutation_periods(cet):
    """
    Generic periods of a rational map from its action on cells of width 1/D.

    All singular points of a rational map lie in (1/D)Z, so F permutes the
    open cells (i/D, (i+1)/D). Used as an independent check of
    :func:`tracked_periods`.
    """
    form = _IntegerForm(cet)
    D = form.D
    seen = [False] * D
    periods = set()
    for start in range(D):
        if seen[start]:
            continue
        x = 2 * start + 1  # cell midpoint scaled by 2D
        k = 0
        while True:
            cell = x // 2
            seen[cell] = True
            j = bisect_right(form.ends, cell) - 1
            x = (2 * form.shift[j] - x) % (2 * D)
            k += 1
            if x // 2 == start:
                break
        periods.add(k if k % 2 == 0 else 2 * k)
    return frozenset(periods)
