"""
Renormalization of fully flipped 3-interval exchanges and the shape classifier.

Parameters of a map are ``lam = (l1, l2, l3, tau)`` with tau in [0, 1/2];
the tiling side uses ``x_j = 1 - 2 l_j`` and ``r = 1/2 - tau``. The
renormalization step R_j induces F on a window S_j of length 1 - 2 l_j
(l_j the unique smallest length) and rescales; the result is again a fully
flipped 3-interval exchange whose lengths come from one step of the fully
subtractive algorithm.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .circle_maps import make_cet
from .numerics import backend_of, common_backend, like, reduce_mod1

IN = "in"
NOT_IN = "not-in"
INCONCLUSIVE = "inconclusive"

STOP_INTEGRABLE = "integrable-complete-periodic"
STOP_ROTATION = "obtuse-rotation"
STOP_TIE = "tie-in-minimum"
STOP_TWO_PERIODIC = "two-periodic-appeared"
STOP_CAP = "cap-reached"


class TieError(ValueError):
    """Two or more coordinates tie where the algorithm needs a unique extremum."""


class NotApplicable(ValueError):
    """A renormalization or subtraction step does not apply to these parameters."""


def _is_exact(values):
    return common_backend(list(values)).exact


def _close(u, v):
    b = backend_of(u)
    if b.exact and backend_of(v).exact:
        return u == v
    return abs(u - v) <= max(b.eps, backend_of(v).eps)


def _unique_arg(values, pick):
    """Index of the unique min (pick=min) or max; TieError on ties."""
    target = pick(values)
    hits = [k for k, v in enumerate(values) if _close(v, target)]
    if len(hits) != 1:
        raise TieError(f"{'minimum' if pick is min else 'maximum'} is attained {len(hits)} times")
    return hits[0]


# ---------------------------------------------------------------------------
# subtractive algorithms

def fully_subtractive_step(l):
    """
    One rescaled step of the fully subtractive algorithm on lengths.

        >>> fully_subtractive_step((Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)))
        ((Fraction(1, 2), Fraction(1, 6), Fraction(1, 3)), 3)

    The returned index is 1-based.
    """
    l = tuple(l)
    j = _unique_arg(l, min)
    lj = l[j]
    scale = 1 - 2 * lj
    out = tuple(lj / scale if k == j else (l[k] - lj) / scale for k in range(3))
    return out, j + 1


def rauzy_subtractive_step(x):
    """
    One rescaled step of the Rauzy subtractive algorithm.

    The largest coordinate x_j must exceed 1/2 strictly; it becomes
    (2 x_j - 1)/x_j and the others are divided by x_j.
    """
    x = tuple(x)
    j = _unique_arg(x, max)
    xj = x[j]
    half = like(xj, Fraction(1, 2))
    if _close(xj, half):
        raise NotApplicable("largest coordinate equals 1/2 (gasket boundary)")
    if xj < half:
        raise NotApplicable("largest coordinate is below 1/2")
    out = tuple((2 * xj - 1) / xj if k == j else x[k] / xj for k in range(3))
    return out, j + 1


@dataclass(frozen=True)
class Membership:
    status: str
    steps: int
    path: tuple = ()
    cycle: tuple = None  # (first index of the cycle, period)
    reason: str = ""

    def __bool__(self):
        return self.status == IN


def _iterate(step, start, cap, on_tie, done=None):
    exact = _is_exact(start)
    seen = {tuple(start): 0} if exact else None
    path = [tuple(start)]
    cur = tuple(start)
    for k in range(cap):
        if done is not None and done(cur):
            return Membership(IN, k, tuple(path), reason="reached target")
        try:
            cur, _ = step(cur)
        except TieError as exc:
            return on_tie(k, path, exc)
        except NotApplicable as exc:
            return Membership(NOT_IN, k, tuple(path), reason=str(exc))
        if any(c <= 0 or c >= 1 for c in cur):
            return Membership(NOT_IN, k + 1, tuple(path), reason="left the open simplex")
        path.append(cur)
        if exact:
            if cur in seen:
                return Membership("cycle", k + 1, tuple(path), cycle=(seen[cur], k + 1 - seen[cur]))
            seen[cur] = k + 1
    if done is not None and done(cur):
        return Membership(IN, cap, tuple(path), reason="reached target")
    return Membership(INCONCLUSIVE, cap, tuple(path), reason="cap reached")


def gasket_membership(x, cap=200):
    """
    Whether the Rauzy subtractive algorithm runs forever from ``x``.

    An exact cycle certifies membership; an inapplicable step certifies
    non-membership; otherwise the answer is inconclusive at ``cap``.
    """
    def on_tie(k, path, exc):
        return Membership(NOT_IN, k, tuple(path), reason=str(exc))

    res = _iterate(rauzy_subtractive_step, x, cap, on_tie)
    if res.status == "cycle":
        return Membership(IN, res.steps, res.path, res.cycle, "eventually periodic orbit")
    if res.status == NOT_IN and not _is_exact(x):
        # a float decision is only trusted away from the boundary
        last = res.path[-1]
        if any(abs(2 * c - 1) <= 64 * backend_of(c).eps for c in last):
            return Membership(INCONCLUSIVE, res.steps, res.path, reason="too close to the boundary")
    return res


def e_membership(l, cap=200):
    """
    Whether the fully subtractive algorithm sends ``l`` to (1/3, 1/3, 1/3).

    A tie of exactly two minima stops the algorithm and certifies
    non-membership. For rational input the common-denominator sum strictly
    decreases, so the answer is always decided.
    """
    def all_equal(t):
        return _close(t[0], t[1]) and _close(t[1], t[2])

    def on_tie(k, path, exc):
        if not _is_exact(path[-1]):
            return Membership(INCONCLUSIVE, k, tuple(path), reason="near tie in floating point")
        return Membership(NOT_IN, k, tuple(path), reason=str(exc))

    res = _iterate(fully_subtractive_step, l, cap, on_tie, done=all_equal)
    if res.status == "cycle":
        return Membership(NOT_IN, res.steps, res.path, res.cycle, "periodic orbit never reaches [1:1:1]")
    return res


# ---------------------------------------------------------------------------
# parameter vectors and the renormalization step

@dataclass(frozen=True)
class ParamVector:
    l1: object
    l2: object
    l3: object
    tau: object

    def __post_init__(self):
        l = self.lengths
        if any(v <= 0 for v in l):
            raise ValueError("lengths must be positive")
        total = l[0] + l[1] + l[2]
        if not _close(total, like(total, 1)):
            raise ValueError("lengths must sum to 1")
        if self.tau < 0 or self.tau > like(self.tau, Fraction(1, 2)):
            raise ValueError("tau must lie in [0, 1/2]")

    @property
    def lengths(self):
        return (self.l1, self.l2, self.l3)

    @property
    def x(self):
        return tuple(1 - 2 * v for v in self.lengths)

    @property
    def r(self):
        return like(self.tau, Fraction(1, 2)) - self.tau

    def as_tuple(self):
        return (self.l1, self.l2, self.l3, self.tau)

    def cet(self):
        return make_cet(self.lengths, self.tau)


def param_vector(lengths, tau):
    """Build a ParamVector, conjugating by p -> 1 - p when tau > 1/2."""
    lengths = tuple(lengths)
    tau = reduce_mod1(tau)
    if tau > like(tau, Fraction(1, 2)):
        return ParamVector(lengths[2], lengths[1], lengths[0], 1 - tau)
    return ParamVector(*lengths, tau)


@dataclass(frozen=True)
class RenormStep:
    params: ParamVector
    index: int
    window: tuple
    subintervals: tuple  # ((name, lo, hi), ...) in circle order, original coordinates
    source: ParamVector = field(repr=False, default=None)

    @property
    def window_length(self):
        return self.window[1] - self.window[0]

    def _frame(self):
        # offset between the rotated circle and the circle read from I_1
        lp = self.params.lengths
        return (lp[0], lp[0] + lp[1], 0 * lp[0])[self.index - 1]

    def to_window(self, p):
        """Coordinate of a point of the window S on the renormalized circle."""
        lo, hi = self.window
        if p <= lo:
            p = p + 1
        if not (lo < p < hi):
            raise ValueError("point is not inside the window")
        d = p - self.subintervals[1][1]
        if d < 0:
            d += self.window_length
        return reduce_mod1(d / self.window_length + self._frame())

    def from_window(self, q):
        """Inverse of :meth:`to_window`, returned in [0, 1)."""
        d = reduce_mod1(q - self._frame()) * self.window_length
        p = self.subintervals[1][1] + d
        if p >= self.window[1]:
            p -= self.window_length
        return reduce_mod1(p)


def _rotated(lam, j):
    """Lengths read from the start of the interval after I_j, and the shift."""
    l1, l2, l3 = lam.lengths
    if j == 3:
        return (l1, l2, l3), 0 * l1
    if j == 1:
        return (l2, l3, l1), l1
    return (l3, l1, l2), l1 + l2


def renorm_step(lam):
    """
    Induce F on the window S_j and rescale.

    For j = 3 the window is S_3 = (tau - l2, l1 + tau - l3), cut into
    J_3^2 = (tau - l2, l3), J_1 = (l3, l1), J_2 = (l1, l1 + l2 - l3),
    J_3^1 = (l1 + l2 - l3, l1 + tau - l3). The other indices are handled by
    the rotation of the circle that makes I_j the last interval, which
    conjugates F to another map of the family with the same tau. Lengths
    keep their labels, so ``params.lengths`` is one fully subtractive step.

    Requires max(l) <= 1/2, tau >= max(l) and a unique smallest length.
    """
    l = lam.lengths
    tau = lam.tau
    m = max(l)
    if m > like(m, Fraction(1, 2)):
        raise NotApplicable("a length exceeds 1/2 (obtuse shape)")
    if tau < m:
        raise NotApplicable("tau is below the largest length (a 2-periodic interval exists)")
    new_l, j = fully_subtractive_step(l)
    (m1, m2, m3), shift = _rotated(lam, j)
    size = 1 - 2 * m3
    new_tau = (tau - m3) / size
    names = {3: ("J3^2", "J1", "J2", "J3^1"), 1: ("J1^2", "J2", "J3", "J1^1"), 2: ("J2^2", "J3", "J1", "J2^1")}[j]
    cuts = (tau - m2, m3, m1, m1 + m2 - m3, m1 + tau - m3)
    cuts = tuple(c + shift for c in cuts)
    if cuts[0] >= 1:
        cuts = tuple(c - 1 for c in cuts)
    subs = tuple((names[k], cuts[k], cuts[k + 1]) for k in range(4))
    window = (cuts[0], cuts[4])
    return RenormStep(ParamVector(*new_l, new_tau), j, window, subs, lam)


def has_two_periodic_after(lam, j):
    """True iff R_j F has a 2-periodic interval: l_j >= 1/4 - r/2 (equality included)."""
    lj = lam.lengths[j - 1]
    return lj >= like(lj, Fraction(1, 4)) - lam.r / 2


def in_window(window, x):
    """Whether x in [0, 1) lies in the open window (lo, hi); hi may exceed 1."""
    lo, hi = window
    return lo < x < hi or lo < x + 1 < hi


def first_return(cet, window, p, cap=10**5):
    """First return of p to the open window under F, by iteration."""
    x = cet(p)
    for _ in range(cap):
        if in_window(window, x):
            return x
        x = cet(x)
    raise RuntimeError("no return within cap")


# ---------------------------------------------------------------------------
# driving the process

@dataclass(frozen=True)
class RenormTrace:
    start: ParamVector
    steps: tuple  # (index, ParamVector, cumulative window length)
    stop_reason: str

    @property
    def indices(self):
        return tuple(s[0] for s in self.steps)

    @property
    def final(self):
        return self.steps[-1][1] if self.steps else self.start


def stop_reason(lam, first):
    """Why the process cannot continue from lam, or None if a step applies."""
    l = lam.lengths
    m = max(l)
    if m > like(m, Fraction(1, 2)) and lam.tau > 1 - m:
        return STOP_ROTATION
    if lam.tau <= m:
        return STOP_INTEGRABLE if first else STOP_TWO_PERIODIC
    try:
        _unique_arg(l, min)
    except TieError:
        return STOP_TIE
    return None


def renorm_drive(lam, cap=50):
    """
    Apply renormalization steps until a stop condition or ``cap`` steps.

    Recorded window lengths are cumulative: |S^(k)| is the product of the
    individual window lengths 1 - 2 l_{t_i}.
    """
    steps = []
    cur = lam
    total = lam.l1 * 0 + 1
    for k in range(cap + 1):
        reason = stop_reason(cur, k == 0)
        if reason is not None:
            return RenormTrace(lam, tuple(steps), reason)
        if k == cap:
            break
        st = renorm_step(cur)
        total = total * st.window_length
        steps.append((st.index, st.params, total))
        cur = st.params
    return RenormTrace(lam, tuple(steps), STOP_CAP)


# ---------------------------------------------------------------------------
# parameter transport

_A = {
    1: ((1, 0, 0, 0), (-1, 1, 0, 0), (-1, 0, 1, 0), (-1, 0, 0, 1)),
    2: ((1, -1, 0, 0), (0, 1, 0, 0), (0, -1, 1, 0), (0, -1, 0, 1)),
    3: ((1, 0, -1, 0), (0, 1, -1, 0), (0, 0, 1, 0), (0, 0, -1, 1)),
}


def _inverse_transpose(a):
    # A_j = I - e_j-column subtraction; invert exactly with fractions
    n = 4
    m = [[Fraction(a[i][k]) for k in range(n)] + [Fraction(int(i == k)) for k in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        pv = m[c][c]
        m[c] = [v / pv for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [vr - f * vc for vr, vc in zip(m[r], m[c])]
    inv = [[int(m[i][n + k]) for k in range(n)] for i in range(n)]
    return tuple(tuple(inv[k][i] for k in range(n)) for i in range(n))


def transport_matrices(j):
    """
    The integer matrices (A_j, B_j) with lam^(k) ~ A_{t_k} lam^(k-1).

    B_j is the inverse transpose of A_j and fixes v = (1, 1, 1, -2).
    """
    if j not in _A:
        raise ValueError("index must be 1, 2 or 3")
    a = _A[j]
    return a, _inverse_transpose(a)


def apply_matrix(m, vec):
    return tuple(sum((c * v for c, v in zip(row, vec)), vec[0] * 0) for row in m)


def transport(lam, j):
    """Un-normalized transport A_j lam; dividing by 1 - 2 l_j gives R_j's parameters."""
    a, _ = transport_matrices(j)
    return apply_matrix(a, lam.as_tuple())


# ---------------------------------------------------------------------------
# classification of shapes

GENERIC = "generic"
GASKET = "gasket"
EXCEPTIONAL = "exceptional"
RATIONAL_DRIFT = "rational-drift"
UNDECIDED = "inconclusive"


@dataclass(frozen=True)
class ShapeClass:
    kind: str
    lengths: tuple
    gasket: Membership = None
    exceptional: Membership = None
    trace: RenormTrace = None
    escape_words: tuple = None

    @property
    def x(self):
        return tuple(1 - 2 * v for v in self.lengths)

    @property
    def all_periodic(self):
        return self.kind == EXCEPTIONAL


def lengths_from_angles(angles_deg):
    """Angles in degrees (summing to 180) to lengths l_j = angle / 180."""
    angles = [Fraction(a) if not isinstance(a, Fraction) else a for a in angles_deg]
    if len(angles) != 3 or any(a <= 0 for a in angles) or sum(angles) != 180:
        raise ValueError("need three positive angles summing to 180 degrees")
    return tuple(a / 180 for a in angles)


def _is_rational(v):
    if isinstance(v, (Fraction, int)):
        return True
    return bool(getattr(v, "is_rational", lambda: False)())


def classify(lengths, cap=200, words=True):
    """
    Classify a tiling shape given its lengths l_j (angles divided by pi).

    Returns one of ``exceptional`` (preimage of [1:1:1]: every trajectory
    periodic), ``rational-drift`` (other rational shapes), ``gasket``
    (x in the Rauzy gasket: escaping trajectories pass through
    circumcenters), ``generic`` or ``inconclusive``. For shapes outside the
    gasket the process at tau = 1/2 is recorded and, when it stops in the
    rotation regime, the two escape words are attached.
    """
    lengths = tuple(lengths)
    x = tuple(1 - 2 * v for v in lengths)
    e = e_membership(lengths, cap)
    if e.status == IN:
        return ShapeClass(EXCEPTIONAL, lengths, exceptional=e)
    exact = _is_exact(lengths)
    if exact and all(_is_rational(v) for v in lengths):
        kind = RATIONAL_DRIFT
        g = Membership(NOT_IN, 0, reason="rational point")
    else:
        g = gasket_membership(x, cap)
        if g.status == IN:
            return ShapeClass(GASKET, lengths, g, e)
        if g.status == INCONCLUSIVE or e.status == INCONCLUSIVE:
            return ShapeClass(UNDECIDED, lengths, g, e)
        kind = GENERIC
    half = like(lengths[0], Fraction(1, 2))
    trace = renorm_drive(ParamVector(*lengths, half), cap)
    esc = None
    if words and trace.stop_reason == STOP_ROTATION:
        from .words import escape_words
        esc = escape_words(trace)
    return ShapeClass(kind, lengths, g, e, trace, esc)
