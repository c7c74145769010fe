"""
Periodic triangle tilings, folding and billiard trajectories.

The tiling by a triangle ABC (angles alpha, beta, gamma at A, B, C) is
indexed by a lattice: with u = B - A and v = C - A, the positive tile (m, n)
has vertices A = P, B = P + u, C = P + v where P = m u + n v, and the
negative tile (m, n) is its image under the central symmetry about the
midpoint of BC, with vertices A = P + u + v, B = P + v, C = P + u. Side a is
BC, b is CA and c is AB. Lattice vertices are pairs (i, j) meaning i u + j v.

Folding sends every tile onto the base tile's circumcircle. A point of the
circle is stored as a fraction of a turn measured counterclockwise from B,
so the base tile sits at B = 0, C = l1, A = l1 + l2 with l = angles / pi.
Crossing a side with endpoints at positions x, y reflects the folded tile by
p -> x + y - p, and the lattice vertex (i, j) folds to (i - 1) l3 - j l2.
A trajectory folds onto one chord PQ, traversed alternately towards Q and
towards P; the side crossed next is the one whose arc holds the current
target. Reading the target in the tile's own frame gives the orbit of the
circle exchange with rotation tau = Q - P.

Two tracers are provided: :func:`trace_folded` works on circle positions
(exact for rational and Q(a) angles), and :func:`trace` follows the ray in
the plane under Snell's law with k = -1 (exact for triangles with rational
vertices). They serve as oracles for each other.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .numerics import CUBIC, Cubic, FloatBackend, backend_of, common_backend, float_backend, reduce_mod1, tribonacci_root

POSITIVE = 1
NEGATIVE = -1

PERIODIC = "periodic"
DRIFT_PERIODIC = "drift-periodic"
ESCAPING = "escaping-at-cap"
SINGULAR = "singular-hit"

SIDES = "abc"
# side letter -> (first vertex label, second vertex label), opposite vertex = letter index
SIDE_ENDS = {"a": (1, 2), "b": (2, 0), "c": (0, 1)}  # vertex order (A, B, C)


# ---------------------------------------------------------------------------
# shapes

@dataclass(frozen=True)
class TriangleShape:
    """
    A triangle given either by its angles (as l_j = angle / pi) or by an
    exact apex C with A = (0, 0) and B = (1, 0).
    """

    lengths: tuple
    apex: tuple = None

    @classmethod
    def from_lengths(cls, lengths):
        lengths = tuple(lengths)
        b = common_backend(list(lengths))
        lengths = tuple(b.coerce(x) for x in lengths)
        if len(lengths) != 3 or any(x <= 0 for x in lengths):
            raise ValueError("need three positive lengths")
        total = lengths[0] + lengths[1] + lengths[2]
        if (b.exact and total != 1) or (not b.exact and abs(total - 1) > b.eps):
            raise ValueError("lengths must sum to 1")
        return cls(lengths)

    @classmethod
    def from_degrees(cls, a, b, c):
        angles = [Fraction(x) for x in (a, b, c)]
        if any(x <= 0 for x in angles) or sum(angles) != 180:
            raise ValueError("angles must be positive and sum to 180 degrees")
        return cls.from_lengths(tuple(x / 180 for x in angles))

    @classmethod
    def from_apex(cls, cx, cy, bits=200):
        """Triangle (0,0), (1,0), (cx, cy) with exact rational apex, cy > 0."""
        cx, cy = Fraction(cx), Fraction(cy)
        if cy <= 0:
            raise ValueError("apex must lie above AB")
        fb = float_backend(bits)
        ctx = fb.ctx
        X, Y = fb.coerce(cx), fb.coerce(cy)
        alpha = ctx.atan2(Y, X)
        beta = ctx.atan2(Y, 1 - X)
        lengths = (alpha / ctx.pi, beta / ctx.pi, 1 - alpha / ctx.pi - beta / ctx.pi)
        return cls(lengths, (cx, cy))

    @property
    def backend(self):
        return common_backend(list(self.lengths))

    @property
    def exact_planar(self):
        return self.apex is not None

    @property
    def is_obtuse(self):
        return max(self.lengths) > Fraction(1, 2) if self.backend.exact else max(self.lengths) > 0.5

    def planar(self, bits=None):
        """Planar frame; exact Fractions for apex shapes, mpmath floats otherwise."""
        return PlanarFrame(self, bits)


class PlanarFrame:
    """Physical coordinates of the tiling and the base circumcircle."""

    def __init__(self, shape, bits=None):
        self.shape = shape
        if shape.apex is not None and bits is None:
            self.exact = True
            self.ctx = None
            A = (Fraction(0), Fraction(0))
            B = (Fraction(1), Fraction(0))
            C = shape.apex
        else:
            self.exact = False
            fb = float_backend(bits or 106)
            self.ctx = ctx = fb.ctx
            if shape.apex is not None:
                C = (fb.coerce(shape.apex[0]), fb.coerce(shape.apex[1]))
            else:
                l1, l2, l3 = (fb.coerce(x) for x in shape.lengths)
                ac = ctx.sinpi(l2) / ctx.sinpi(l3)
                C = (ac * ctx.cospi(l1), ac * ctx.sinpi(l1))
            A = (fb.coerce(0), fb.coerce(0))
            B = (fb.coerce(1), fb.coerce(0))
        self.A, self.B, self.C = A, B, C
        self.u = (B[0] - A[0], B[1] - A[1])
        self.v = (C[0] - A[0], C[1] - A[1])
        self.O = circumcenter(A, B, C)
        self.R2 = (B[0] - self.O[0]) ** 2 + (B[1] - self.O[1]) ** 2

    def lattice_point(self, i, j):
        u, v = self.u, self.v
        return (self.A[0] + i * u[0] + j * v[0], self.A[1] + i * u[1] + j * v[1])

    def tile_points(self, tile):
        return tuple(self.lattice_point(*ij) for ij in tile_vertices(tile))

    def tile_circumcenter(self, tile):
        m, n, o = tile
        if o == POSITIVE:
            P = self.lattice_point(m, n)
            return (self.O[0] + P[0], self.O[1] + P[1])
        A, B, C = self.tile_points(tile)
        return circumcenter(A, B, C)

    def _need_ctx(self):
        if self.ctx is None:
            return float_backend(106).ctx
        return self.ctx

    def circle_point(self, x):
        """Planar point of circle position x on the base circumcircle (float)."""
        ctx = self._need_ctx()
        O = tuple(ctx.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else c for c in self.O)
        Bp = tuple(ctx.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else c for c in self.B)
        phi = ctx.atan2(Bp[1] - O[1], Bp[0] - O[0])
        R = ctx.sqrt((Bp[0] - O[0]) ** 2 + (Bp[1] - O[1]) ** 2)
        xf = _to_ctx(ctx, x)
        ang = phi + 2 * ctx.pi * xf
        return (O[0] + R * ctx.cos(ang), O[1] + R * ctx.sin(ang))


def _to_ctx(ctx, x):
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    if isinstance(x, int):
        return ctx.mpf(x)
    b = backend_of(x)
    if b.name == "cubic":
        return float_backend(ctx.prec).coerce(x)
    return ctx.mpf(x)


def circumcenter(A, B, C):
    ax, ay = A
    bx, by = B
    cx, cy = C
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return (ux, uy)


# ---------------------------------------------------------------------------
# lattice accessors

BASE = (0, 0, POSITIVE)


def tile_vertices(tile):
    """Lattice coordinates of the vertices (A, B, C) of a tile."""
    m, n, o = tile
    if o == POSITIVE:
        return ((m, n), (m + 1, n), (m, n + 1))
    return ((m + 1, n + 1), (m, n + 1), (m + 1, n))


_NEIGHBOR = {
    (POSITIVE, "a"): (0, 0),
    (POSITIVE, "b"): (-1, 0),
    (POSITIVE, "c"): (0, -1),
    (NEGATIVE, "a"): (0, 0),
    (NEGATIVE, "b"): (1, 0),
    (NEGATIVE, "c"): (0, 1),
}


def neighbor(tile, letter):
    """The tile sharing side ``letter`` with ``tile``; it has opposite orientation."""
    m, n, o = tile
    dm, dn = _NEIGHBOR[(o, letter)]
    return (m + dm, n + dn, -o)


def edge_key(tile, letter):
    """Canonical name of an edge: (positive tile index, side letter)."""
    m, n, o = tile
    if o == POSITIVE:
        return ((m, n), letter)
    dm, dn = _NEIGHBOR[(o, letter)]
    return ((m + dm, n + dn), letter)


def edge_endpoints(key):
    """Lattice endpoints of an edge given by its key."""
    (m, n), letter = key
    verts = tile_vertices((m, n, POSITIVE))
    i, j = SIDE_ENDS[letter]
    return verts[i], verts[j]


def tiles_around_vertex(vertex):
    """The six tiles containing a lattice vertex, counterclockwise from the one spanning u, v."""
    i, j = vertex
    return (
        (i, j, POSITIVE),
        (i - 1, j, NEGATIVE),
        (i - 1, j, POSITIVE),
        (i - 1, j - 1, NEGATIVE),
        (i, j - 1, POSITIVE),
        (i, j - 1, NEGATIVE),
    )


LATTICE_STEPS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def vertex_edges(vertex):
    """The six lattice neighbors of a vertex (along u, v, v - u and their negatives)."""
    i, j = vertex
    return tuple((i + di, j + dj) for di, dj in LATTICE_STEPS)


def opposite_tile(tile, vertex):
    """The tile centrally symmetric to ``tile`` about one of its vertices."""
    ring = tiles_around_vertex(vertex)
    k = ring.index(tile)
    return ring[(k + 3) % 6]


# ---------------------------------------------------------------------------
# folding

def vertex_position(shape, vertex):
    """Folded position of a lattice vertex on the base circumcircle (base tile (0,0,+))."""
    i, j = vertex
    l1, l2, l3 = shape.lengths
    return reduce_mod1((i - 1) * l3 - j * l2)


def tile_positions(shape, tile):
    """Folded positions of the vertices (A, B, C) of a tile."""
    return tuple(vertex_position(shape, ij) for ij in tile_vertices(tile))


def fold_position(shape, vertex, base=BASE):
    """
    Folded position of a vertex when the tile ``base`` is kept fixed.

    Positions are read in the frame of ``base``: from its vertex B,
    counterclockwise for positive tiles and clockwise for negative ones.
    """
    o = base[2]
    b = tile_positions(shape, base)[1]
    return reduce_mod1(o * (vertex_position(shape, vertex) - b))


def _reflect_line(point, X, Y):
    ex, ey = Y[0] - X[0], Y[1] - X[1]
    px, py = point[0] - X[0], point[1] - X[1]
    ee = ex * ex + ey * ey
    t = (px * ex + py * ey) / ee
    fx, fy = X[0] + t * ex, X[1] + t * ey
    return (2 * fx - point[0], 2 * fy - point[1])


def lattice_path(start, target, n_first=False):
    """
    A sequence of side letters leading from tile ``start`` to tile ``target``.

    Moves through positive tiles in the u direction then the v direction
    (or the reverse with ``n_first``).
    """
    letters = []
    m, n, o = start
    if o == NEGATIVE:
        letters.append("a")
        o = POSITIVE
    tm, tn, to = target
    moves_m = ["ab"] * (tm - m) if tm >= m else ["ba"] * (m - tm)
    moves_n = ["ac"] * (tn - n) if tn >= n else ["ca"] * (n - tn)
    for mv in (moves_n + moves_m if n_first else moves_m + moves_n):
        letters.extend(mv)
    if to == NEGATIVE:
        letters.append("a")
    return letters


def fold_planar(shape, vertex, base=BASE, n_first=False, frame=None):
    """
    Planar image of a vertex under folding onto ``base``.

    The fold is built as the composition of reflections in the shared sides
    along a path of tiles from ``base`` to a tile containing the vertex, so
    it is exact for apex shapes. ``n_first`` picks a different path.
    """
    frame = frame or shape.planar()
    target = tiles_around_vertex(vertex)[0]
    path = lattice_path(base, target, n_first)
    # the map from the current tile to the base: start with the identity
    tile = base
    reflections = []
    for letter in path:
        i, j = SIDE_ENDS[letter]
        verts = tile_vertices(tile)
        X = frame.lattice_point(*verts[i])
        Y = frame.lattice_point(*verts[j])
        reflections.append((X, Y))
        tile = neighbor(tile, letter)
    assert tile == target
    p = frame.lattice_point(*vertex)
    for X, Y in reversed(reflections):
        p = _reflect_line(p, X, Y)
    return p


# ---------------------------------------------------------------------------
# trajectory records

@dataclass
class TrajectoryRecord:
    shape: TriangleShape
    kind: str
    letters: str
    tiles: list
    edges: list
    period: int = None
    translation: tuple = None
    singular_vertex: tuple = None
    chord: tuple = None  # (P, Q) circle positions, folded engine
    points: list = None  # planar crossing points, planar engine
    directions: list = None
    start: tuple = None
    start_direction: tuple = None
    physical: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def closed(self):
        return self.kind == PERIODIC

    @property
    def code(self):
        """Letters of one period (periodic and drift-periodic records)."""
        if self.period is None:
            return self.letters
        off = self.extra.get("offset", 0)
        return self.letters[off : off + self.period]

    def letter_code(self, n):
        """The first n letters, continuing periodic and drift-periodic records by their period."""
        if self.period is None or n <= len(self.letters):
            return self.letters[:n]
        off = self.extra.get("offset", 0)
        cycle = self.letters[off : off + self.period]
        out = [self.letters[:off]]
        need = n - off
        out.append(cycle * (need // self.period) + cycle[: need % self.period])
        return "".join(out)


class _RationalCircle:
    """Positions as integers modulo a common denominator."""

    exact = True
    eps = 0

    def __init__(self, values):
        den = 1
        for x in values:
            den = math.lcm(den, Fraction(x).denominator)
        self.scale = den

    def enc(self, x):
        return int(Fraction(x) * self.scale) % self.scale

    def dec(self, x):
        return Fraction(x, self.scale)

    def sub(self, x, y):
        return (x - y) % self.scale

    def reflect(self, x, y, p):
        return (x + y - p) % self.scale

    def same(self, x, y):
        return x == y

    def in_arc(self, x, start, end):
        """x strictly inside the counterclockwise arc from start to end."""
        D = self.scale
        return 0 < (x - start) % D < (end - start) % D

    def key(self, x):
        return x


class _CubicCircle:
    """
    Positions in Q[a] as integer coefficient triples over a common
    denominator. Signs come from a float estimate, with an exact
    fallback near zero.
    """

    exact = True
    eps = 0

    def __init__(self, values):
        den = 1
        for x in values:
            for c in CUBIC.coerce(x).coefficients:
                den = math.lcm(den, c.denominator)
        self.scale = den
        self._a = float(tribonacci_root(64)[0])
        self._a2 = self._a * self._a

    def enc(self, x):
        x = CUBIC.coerce(x)
        D = self.scale
        t = tuple(int(c * D) for c in x.coefficients)
        return self._norm(t)

    def dec(self, t):
        D = self.scale
        return Cubic(Fraction(t[0], D), Fraction(t[1], D), Fraction(t[2], D))

    def _sign(self, t):
        v = t[0] + t[1] * self._a + t[2] * self._a2
        bound = (abs(t[0]) + abs(t[1]) + abs(t[2]) + 1) * 1e-12
        if v > bound:
            return 1
        if v < -bound:
            return -1
        return Cubic(t[0], t[1], t[2]).sign()

    def _norm(self, t):
        """Reduce to the representative in [0, 1)."""
        D = self.scale
        c0, c1, c2 = t
        v = (c0 + c1 * self._a + c2 * self._a2) / D
        if not (-1.0 < v < 2.0):
            c0 -= math.floor(v) * D
        while self._sign((c0, c1, c2)) < 0:
            c0 += D
        while self._sign((c0 - D, c1, c2)) >= 0:
            c0 -= D
        return (c0, c1, c2)

    def sub(self, x, y):
        return self._norm((x[0] - y[0], x[1] - y[1], x[2] - y[2]))

    def reflect(self, x, y, p):
        return self._norm((x[0] + y[0] - p[0], x[1] + y[1] - p[1], x[2] + y[2] - p[2]))

    def same(self, x, y):
        return x == y

    def in_arc(self, x, start, end):
        d = self.sub(x, start)
        if d == (0, 0, 0):
            return False
        span = self.sub(end, start)
        return self._sign((span[0] - d[0], span[1] - d[1], span[2] - d[2])) > 0

    def key(self, x):
        return x


class _FloatCircle:
    """mpmath positions; comparisons within the backend tolerance."""

    exact = False

    def __init__(self, values, backend):
        self.backend = backend
        self.eps = backend.eps

    def enc(self, x):
        return reduce_mod1(self.backend.coerce(x))

    def dec(self, x):
        return x

    def sub(self, x, y):
        return reduce_mod1(x - y)

    def reflect(self, x, y, p):
        return reduce_mod1(x + y - p)

    def same(self, x, y):
        d = reduce_mod1(x - y)
        return d <= self.eps or 1 - d <= self.eps

    def in_arc(self, x, start, end):
        d = reduce_mod1(x - start)
        span = reduce_mod1(end - start)
        return self.eps < d < span - self.eps

    def key(self, x):
        return int(mpmath.nint(x / (self.eps * 64)))


def _Circle(values):
    """Circle arithmetic suited to the backend of ``values``."""
    b = common_backend(list(values))
    if b.name == "rational":
        return _RationalCircle(values)
    if b.name == "cubic":
        return _CubicCircle(values)
    return _FloatCircle(values, b)


def _side_arc(circle, pos, letter):
    """The arc (start, end) of a side that does not contain the opposite vertex."""
    i, j = SIDE_ENDS[letter]
    k = SIDES.index(letter)
    x, y, w = pos[i], pos[j], pos[k]
    if circle.in_arc(w, x, y):
        return y, x
    return x, y


def exit_side(circle, pos, target):
    """Side whose arc contains the target; None when the target is a vertex."""
    for letter in SIDES:
        lo, hi = _side_arc(circle, pos, letter)
        if circle.in_arc(target, lo, hi):
            return letter
    return None


def _vertex_hit(circle, pos, x):
    for k in range(3):
        if circle.same(pos[k], x):
            return k
    return None


def _run_folded(shape, circle, tile, pos, ends, target_index, max_crossings, detect=True, stop_vertex=None):
    """
    Core loop of the folded tracer.

    ``ends`` holds the two chord endpoints (encoded); the target alternates.
    Returns a dict describing the run.
    """
    start_state = (tile, target_index)
    letters = []
    tiles = [tile]
    edges = []
    seen = {}
    if detect:
        seen[(tile[2], target_index) + tuple(circle.key(p) for p in pos)] = (0, tile)
    for k in range(max_crossings):
        target = ends[target_index]
        hit = _vertex_hit(circle, pos, target)
        if hit is not None:
            return dict(kind=SINGULAR, letters=letters, tiles=tiles, edges=edges,
                        vertex=tile_vertices(tile)[hit], tile=tile)
        letter = exit_side(circle, pos, target)
        if letter is None:
            raise RuntimeError("no exit side found")
        letters.append(letter)
        edges.append(edge_key(tile, letter))
        i, j = SIDE_ENDS[letter]
        x, y = pos[i], pos[j]
        pos = tuple(circle.reflect(x, y, p) for p in pos)
        tile = neighbor(tile, letter)
        target_index = 1 - target_index
        tiles.append(tile)
        if not detect:
            continue
        if (tile, target_index) == start_state:
            return dict(kind=PERIODIC, letters=letters, tiles=tiles, edges=edges, period=k + 1)
        skey = (tile[2], target_index) + tuple(circle.key(p) for p in pos)
        prev = seen.get(skey)
        if prev is not None:
            k0, t0 = prev
            if circle.exact or all(circle.same(a, b) for a, b in zip(pos, tile_positions_enc(shape, circle, t0))):
                return dict(kind=DRIFT_PERIODIC, letters=letters, tiles=tiles, edges=edges,
                            period=k + 1 - k0, translation=(tile[0] - t0[0], tile[1] - t0[1]), offset=k0)
        else:
            seen[skey] = (k + 1, tile)
    return dict(kind=ESCAPING, letters=letters, tiles=tiles, edges=edges)


def tile_positions_enc(shape, circle, tile):
    return tuple(circle.enc(x) for x in tile_positions(shape, tile))


def trace_folded(shape, p0, tau, max_crossings=10000, tile=BASE):
    """
    Trace the trajectory whose folded chord has endpoints P = Q - tau and
    Q = p0 (circle positions in the frame of ``tile``), leaving ``tile``
    towards Q.

    Letters are the sides crossed in order; they coincide with the orbit
    code of p0 under the circle exchange with lengths l and rotation tau.
    When P and Q lie over the same side the chord misses the tile: the
    orbit is still traced but ``physical`` is False and no trajectory in
    the tiling corresponds to it.
    """
    lengths = shape.lengths
    circle = _Circle(list(lengths) + [p0, tau])
    o = tile[2]
    b = tile_positions(shape, tile)[1]
    Q = reduce_mod1(b + o * p0)
    P = reduce_mod1(Q - o * tau)
    return trace_chord(shape, P, Q, max_crossings, tile, circle=circle)


def trace_chord(shape, P, Q, max_crossings=10000, tile=BASE, circle=None):
    """Trace along the chord PQ (base-circle positions), starting in ``tile`` towards Q."""
    circle = circle or _Circle(list(shape.lengths) + [P, Q])
    pos = tile_positions_enc(shape, circle, tile)
    ends = (circle.enc(P), circle.enc(Q))
    for x in ends:
        hit = _vertex_hit(circle, pos, x)
        if hit is not None:
            return TrajectoryRecord(shape, SINGULAR, "", [tile], [], singular_vertex=tile_vertices(tile)[hit],
                                    chord=(P, Q))
    res = _run_folded(shape, circle, tile, pos, ends, 1, max_crossings)
    rec = TrajectoryRecord(
        shape, res["kind"], "".join(res["letters"]), res["tiles"], res["edges"],
        period=res.get("period"), translation=res.get("translation"),
        singular_vertex=res.get("vertex"), chord=(P, Q),
        physical=exit_side(circle, pos, ends[0]) != exit_side(circle, pos, ends[1]),
    )
    if "offset" in res:
        rec.extra["offset"] = res["offset"]
    return rec


def is_physical(shape, p0, tau, tile=BASE):
    """Whether the chord with Q = p0, P = p0 - tau crosses ``tile``."""
    circle = _Circle(list(shape.lengths) + [p0, tau])
    o = tile[2]
    b = tile_positions(shape, tile)[1]
    Q = circle.enc(reduce_mod1(b + o * p0))
    P = circle.enc(reduce_mod1(b + o * p0 - o * tau))
    pos = tile_positions_enc(shape, circle, tile)
    return exit_side(circle, pos, P) != exit_side(circle, pos, Q)


# ---------------------------------------------------------------------------
# planar tracer (Snell's law with k = -1)

def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def trace(shape, start, direction, max_crossings=10000, tile=BASE, frame=None, bits=None):
    """
    Follow a ray in the plane: at every side the tangential component of the
    direction is negated and the ray continues into the neighboring tile.

    ``start`` must lie strictly inside ``tile``. Exact for apex shapes with
    rational start and direction; otherwise mpmath floats of ``bits`` bits.
    """
    frame = frame or shape.planar(bits)
    exact = frame.exact
    if exact:
        start = (Fraction(start[0]), Fraction(start[1]))
        d = (Fraction(direction[0]), Fraction(direction[1]))
    else:
        ctx = frame.ctx
        start = (_to_ctx(ctx, start[0]), _to_ctx(ctx, start[1]))
        d = (_to_ctx(ctx, direction[0]), _to_ctx(ctx, direction[1]))
        eps = ctx.mpf(2) ** (-(ctx.prec // 2))
    if d[0] == 0 and d[1] == 0:
        raise ValueError("direction must be nonzero")
    verts = frame.tile_points(tile)
    for letter in SIDES:
        i, j = SIDE_ENDS[letter]
        X, Y = verts[i], verts[j]
        side = _cross(_sub(Y, X), _sub(start, X))
        if side == 0 or (not exact and abs(side) <= eps):
            raise ValueError("start lies on a side")
        k = SIDES.index(letter)
        if (side > 0) != (_cross(_sub(Y, X), _sub(verts[k], X)) > 0):
            raise ValueError("start is outside the tile")

    p = start
    entry = None
    letters, tiles, edges, points, dirs = [], [tile], [], [], []
    seen_same = {}
    seen_drift = {}
    kind = ESCAPING
    period = translation = vertex = None

    def key(x):
        return x if exact else int(mpmath.nint(x / (eps * 64)))

    for k in range(max_crossings):
        verts = frame.tile_points(tile)
        best = None
        for letter in SIDES:
            if letter == entry:
                continue
            i, j = SIDE_ENDS[letter]
            X, Y = verts[i], verts[j]
            e = _sub(Y, X)
            den = _cross(d, e)
            if den == 0:
                continue
            w = _sub(X, p)
            t = _cross(w, e) / den
            s = _cross(w, d) / den
            if t <= 0:
                continue
            if exact:
                if s < 0 or s > 1:
                    continue
            elif s < -eps or s > 1 + eps:
                continue
            if best is None or t < best[0]:
                best = (t, s, letter)
        if best is None:
            raise RuntimeError("ray does not leave the tile")
        t, s, letter = best
        i, j = SIDE_ENDS[letter]
        vl = tile_vertices(tile)
        if s == 0 or (not exact and abs(s) <= eps):
            kind, vertex = SINGULAR, vl[i]
            break
        if s == 1 or (not exact and abs(s - 1) <= eps):
            kind, vertex = SINGULAR, vl[j]
            break
        X, Y = verts[i], verts[j]
        e = _sub(Y, X)
        p = (X[0] + s * e[0], X[1] + s * e[1])
        de = d[0] * e[0] + d[1] * e[1]
        ee = e[0] * e[0] + e[1] * e[1]
        d = (d[0] - 2 * de / ee * e[0], d[1] - 2 * de / ee * e[1])
        letters.append(letter)
        edges.append(edge_key(tile, letter))
        points.append(p)
        dirs.append(d)
        tile = neighbor(tile, letter)
        tiles.append(tile)
        entry = letter
        same = (tile, letter, key(s))
        if same in seen_same:
            k0 = seen_same[same]
            kind, period = PERIODIC, k + 1 - k0
            break
        seen_same[same] = k + 1
        dk = (tile[2], letter, key(s), key(d[0]), key(d[1]))
        if dk in seen_drift:
            k0, t0 = seen_drift[dk]
            if (t0[0], t0[1]) != (tile[0], tile[1]):
                kind, period = DRIFT_PERIODIC, k + 1 - k0
                translation = (tile[0] - t0[0], tile[1] - t0[1])
                break
        else:
            seen_drift[dk] = (k + 1, tile)
    rec = TrajectoryRecord(shape, kind, "".join(letters), tiles, edges, period=period,
                           translation=translation, singular_vertex=vertex, points=points,
                           directions=dirs, start=start, start_direction=direction)
    if kind == PERIODIC and period is not None:
        # the first crossing seen again is crossing number k0; rotate to start there
        k0 = len(letters) - period
        rec.extra["offset"] = k0
    return rec


def chord_start(shape, p0, tau, frame=None, bits=106):
    """
    A planar start point and direction in the base tile for the chord
    with Q = p0 and P = p0 - tau: the midpoint of the chord's segment
    inside the tile, heading towards Q.
    """
    frame = frame or shape.planar(bits)
    ctx = frame._need_ctx()
    Qp = frame.circle_point(p0)
    Pp = frame.circle_point(reduce_mod1(p0 - tau))
    d = (Qp[0] - Pp[0], Qp[1] - Pp[1])
    verts = [tuple(_to_ctx(ctx, c) for c in pt) for pt in frame.tile_points(BASE)]
    ts = []
    for letter in SIDES:
        i, j = SIDE_ENDS[letter]
        X, Y = verts[i], verts[j]
        e = _sub(Y, X)
        den = _cross(d, e)
        if den == 0:
            continue
        w = _sub(X, Pp)
        t = _cross(w, e) / den
        s = _cross(w, d) / den
        if 0 <= s <= 1:
            ts.append(t)
    ts.sort()
    tm = (ts[0] + ts[-1]) / 2
    return (Pp[0] + tm * d[0], Pp[1] + tm * d[1]), d


# ---------------------------------------------------------------------------
# tau, enclosed graphs and colorings

def tau_of(record, frame=None):
    """
    Rotation parameter of a trajectory and a check that it is constant.

    For planar records the signed distance d from each segment's line to its
    tile's circumcenter (positive when the center is on the left) is
    computed; it must be the same on every segment, and tau = arccos(d/R)/pi.
    For folded records tau = Q - P.
    """
    if record.chord is not None and record.points is None:
        P, Q = record.chord
        return reduce_mod1(Q - P)
    frame = frame or record.shape.planar(None if record.shape.exact_planar else 106)
    pts = [record.start] + list(record.points)
    dirs = [record.start_direction] + list(record.directions)
    exact = frame.exact
    values = []
    for k in range(len(pts) - 1):
        tile = record.tiles[k]
        O = frame.tile_circumcenter(tile)
        d = dirs[k]
        if not exact:
            d = tuple(_to_ctx(frame.ctx, c) for c in d)
        w = _sub(O, pts[k])
        values.append((_cross(d, w), d[0] * d[0] + d[1] * d[1]))
    if not values:
        raise ValueError("need at least one segment")
    c0, n0 = values[0]
    ctx = frame._need_ctx()
    for c, n in values[1:]:
        if exact:
            if c * c * n0 != c0 * c0 * n or (c > 0) != (c0 > 0) and c != 0:
                raise RuntimeError("distance to circumcenter is not constant")
        else:
            a = _to_ctx(ctx, c) / ctx.sqrt(_to_ctx(ctx, n))
            b = _to_ctx(ctx, c0) / ctx.sqrt(_to_ctx(ctx, n0))
            if abs(a - b) > ctx.mpf(2) ** (-(ctx.prec // 3)):
                raise RuntimeError("distance to circumcenter is not constant")
    dist = _to_ctx(ctx, c0) / ctx.sqrt(_to_ctx(ctx, n0))
    R = ctx.sqrt(_to_ctx(ctx, frame.R2))
    ratio = max(min(dist / R, ctx.mpf(1)), ctx.mpf(-1))
    return ctx.acos(ratio) / ctx.pi


def _crossing_rows(edges):
    rows = {}
    for key in edges:
        (m, n), letter = key
        if letter == "c":
            rows.setdefault(n, []).append(m)
    return rows


def _inside(vertex, rows, avoid=None):
    """Parity of crossings on the lattice ray of u-edges from the vertex (or -u to avoid a vertex)."""
    i, j = vertex
    row = rows.get(j, ())
    if avoid is not None and avoid[1] == j and avoid[0] > i:
        return sum(1 for m in row if m < i) % 2 == 1
    return sum(1 for m in row if m >= i) % 2 == 1


def _bbox(tiles):
    xs, ys = [], []
    for t in tiles:
        for i, j in tile_vertices(t):
            xs.append(i)
            ys.append(j)
    return min(xs), max(xs), min(ys), max(ys)


@dataclass
class LatticeGraph:
    vertices: set
    edges: set

    @property
    def components(self):
        adj = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = set()
        count = 0
        for v in self.vertices:
            if v in seen:
                continue
            count += 1
            stack = [v]
            seen.add(v)
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
        return count

    @property
    def cycle_rank(self):
        return len(self.edges) - len(self.vertices) + self.components

    @property
    def is_tree(self):
        return bool(self.vertices) and self.components == 1 and len(self.edges) == len(self.vertices) - 1

    @property
    def is_forest(self):
        return self.cycle_rank == 0

    def is_path(self):
        if not self.is_tree:
            return False
        deg = {v: 0 for v in self.vertices}
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return max(deg.values()) <= 2


def induced_graph(vertices):
    vertices = set(vertices)
    edges = set()
    for v in vertices:
        for w in vertex_edges(v):
            if w in vertices and v < w:
                edges.add((v, w))
    return LatticeGraph(vertices, edges)


def enclosed_graph(record):
    """
    Lattice vertices inside a periodic trajectory and the edges between them.

    A vertex is inside when the ray of u-edges leaving it is crossed an odd
    number of times during one period. The verdict ``is_tree`` is exact.
    """
    if record.kind != PERIODIC:
        raise ValueError("enclosed graphs are defined for periodic trajectories")
    if not record.physical:
        raise ValueError("chord misses the starting tile")
    edges, tiles = _one_period(record)
    if len(set(tiles)) != len(tiles):
        raise ValueError("trajectory revisits a tile: polygon is not simple")
    rows = _crossing_rows(edges)
    i0, i1, j0, j1 = _bbox(tiles)
    inside = [(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1) if _inside((i, j), rows)]
    return induced_graph(inside)


def _one_period(record):
    off = record.extra.get("offset", 0)
    p = record.period
    return record.edges[off : off + p], record.tiles[off : off + p]


def crossed_vertices(record):
    """V(delta): endpoints of all edges crossed by the trajectory."""
    out = set()
    for key in record.edges:
        out.update(edge_endpoints(key))
    return out


def vertex_color(shape, chord, vertex, circle=None):
    """0 or 1 by the side of the chord PQ on which the folded vertex lies; None if on the chord."""
    P, Q = chord
    circle = circle or _Circle(list(shape.lengths) + [P, Q])
    x = circle.enc(vertex_position(shape, vertex))
    p, q = circle.enc(P), circle.enc(Q)
    if circle.same(x, p) or circle.same(x, q):
        return None
    return 1 if circle.in_arc(x, p, q) else 0


@dataclass
class Coloring:
    colors: dict
    graphs: tuple  # (G_0, G_1)
    inside_color: int = None

    def tree_color(self):
        trees = [k for k in (0, 1) if self.graphs[k].is_tree]
        return trees


def vertex_coloring(record):
    """
    Two-color the vertices of crossed edges by the side of the folded chord
    and build the induced graphs G_0, G_1. For a periodic trajectory one
    graph is the enclosed tree and the other has exactly one cycle.
    """
    if record.chord is None:
        raise ValueError("coloring needs a folded record (chord known)")
    if not record.physical:
        raise ValueError("chord misses the starting tile")
    shape = record.shape
    circle = _Circle(list(shape.lengths) + list(record.chord))
    verts = crossed_vertices(record)
    colors = {}
    for v in verts:
        c = vertex_color(shape, record.chord, v, circle)
        if c is None:
            raise ValueError(f"vertex {v} folds onto the chord (singular configuration)")
        colors[v] = c
    graphs = tuple(induced_graph([v for v, c in colors.items() if c == k]) for k in (0, 1))
    inside = None
    if record.kind == PERIODIC:
        enc = enclosed_graph(record)
        for k in (0, 1):
            if graphs[k].vertices == enc.vertices:
                inside = k
    return Coloring(colors, graphs, inside)


def simple_case_violations(shape, chord, tiles):
    """
    Tiles whose three vertices share a color while the three apexes of their
    neighbors all have the other color; there must be none.
    """
    bad = []
    for tile in tiles:
        vs = tile_vertices(tile)
        cs = {vertex_color(shape, chord, v) for v in vs}
        if None in cs or len(cs) != 1:
            continue
        apex_colors = set()
        for letter in SIDES:
            i, j = SIDE_ENDS[letter]
            k = SIDES.index(letter)
            apex = (vs[i][0] + vs[j][0] - vs[k][0], vs[i][1] + vs[j][1] - vs[k][1])
            apex_colors.add(vertex_color(shape, chord, apex))
        if apex_colors == {1 - next(iter(cs))}:
            bad.append(tile)
    return bad


# ---------------------------------------------------------------------------
# flowers

@dataclass
class Separatrix:
    tile: tuple
    letters: str
    edges: list
    tiles: list
    end: str  # "petal", "vertex", "bound"
    end_vertex: tuple = None
    end_tile: tuple = None


@dataclass
class Petal:
    first_tile: tuple
    last_tile: tuple
    letters: str
    edges: list
    tiles: list
    contains_edge: bool
    neighbors: bool


@dataclass
class Flower:
    pistil: tuple
    chord_sum: object
    segments: list
    petals: list
    rays: list
    multi_singular: list

    @property
    def s(self):
        return len(self.segments)

    @property
    def bounded(self):
        return not self.rays and not self.multi_singular

    @property
    def bounded_property(self):
        """Every petal passes two tiles sharing an edge at the pistil and encloses that edge."""
        return all(p.neighbors and p.contains_edge for p in self.petals)


def flower(shape, vertex, chord_sum=None, tau=None, bound=4000):
    """
    The flower at ``vertex`` in the parallel foliation of chords P, Q with
    P + Q = ``chord_sum``; alternatively give ``tau`` for the separatrix
    chord from F(v) to F(v) + tau.

    In each of the six tiles around the vertex a separatrix segment exists
    when the chord from F(v) to chord_sum - F(v) crosses the tile; it is
    followed until it reaches a vertex or ``bound`` crossings.
    """
    f = vertex_position(shape, vertex)
    if chord_sum is None:
        if tau is None:
            raise ValueError("give chord_sum or tau")
        chord_sum = reduce_mod1(2 * f + tau)
    g = reduce_mod1(chord_sum - f)
    circle = _Circle(list(shape.lengths) + [chord_sum])
    fe, ge = circle.enc(f), circle.enc(g)
    segments, rays, multi = [], [], []
    if circle.same(fe, ge):
        return Flower(vertex, chord_sum, [], [], [], [])
    for tile in tiles_around_vertex(vertex):
        pos = tile_positions_enc(shape, circle, tile)
        k = tile_vertices(tile).index(vertex)
        letter = SIDES[k]
        lo, hi = _side_arc(circle, pos, letter)
        other = _vertex_hit(circle, pos, ge)
        if other is not None:
            multi.append((tile, tile_vertices(tile)[other]))
            continue
        if not circle.in_arc(ge, lo, hi):
            continue
        res = _run_folded(shape, circle, tile, pos, (fe, ge), 1, bound, detect=False)
        if res["kind"] == SINGULAR:
            end = "petal" if res["vertex"] == vertex else "vertex"
            seg = Separatrix(tile, "".join(res["letters"]), res["edges"], res["tiles"], end,
                             res["vertex"], res["tile"])
            if end == "vertex":
                multi.append((tile, res["vertex"]))
        else:
            seg = Separatrix(tile, "".join(res["letters"]), res["edges"], res["tiles"], "bound")
            rays.append(seg)
        segments.append(seg)
    petals = []
    ring = tiles_around_vertex(vertex)
    for seg in segments:
        if seg.end != "petal":
            continue
        # each loop is found from both of its ends; keep the one leaving v towards Q
        a, b = ring.index(seg.tile), ring.index(seg.end_tile)
        if (a, b) > (b, a) and any(s.tile == seg.end_tile and s.end == "petal" for s in segments):
            continue
        adjacent = (a - b) % 6 in (1, 5)
        contains = False
        if adjacent:
            shared = set(tile_vertices(seg.tile)) & set(tile_vertices(seg.end_tile))
            shared.discard(vertex)
            if len(shared) == 1:
                w = shared.pop()
                contains = _inside(w, _crossing_rows(seg.edges), avoid=vertex)
        petals.append(Petal(seg.tile, seg.end_tile, seg.letters, seg.edges, seg.tiles, contains, adjacent))
    return Flower(vertex, chord_sum, segments, petals, rays, multi)


def ray_symmetry_check(shape, fl, bits=106):
    """
    For each separatrix segment at the pistil, the straight continuation of
    its line through the pistil into the opposite tile folds onto the chord
    reflected in the diameter through F(v). Checked numerically.
    """
    frame = shape.planar(bits)
    ctx = frame.ctx
    v = fl.pistil
    f = vertex_position(shape, v)
    g = reduce_mod1(fl.chord_sum - f)
    tol = ctx.mpf(2) ** (-(ctx.prec // 3))
    for seg in fl.segments:
        # fold of seg.tile: physical direction of the segment from the pistil
        d_fold = _sub(frame.circle_point(g), frame.circle_point(f))
        iso = _tile_isometry(shape, frame, seg.tile)
        d_phys = iso.inverse_vector(d_fold)
        opp = opposite_tile(seg.tile, v)
        iso2 = _tile_isometry(shape, frame, opp)
        d2 = iso2.apply_vector((-d_phys[0], -d_phys[1]))
        # expected folded direction: from F(v) towards 2F(v) - g
        e = _sub(frame.circle_point(reduce_mod1(2 * f - g)), frame.circle_point(f))
        if abs(_cross(d2, e)) > tol * (1 + abs(e[0]) + abs(e[1])) ** 2:
            return False
        if d2[0] * e[0] + d2[1] * e[1] <= 0:
            return False
    return True


class _Isometry:
    def __init__(self, M, t):
        self.M, self.t = M, t

    def apply_vector(self, d):
        M = self.M
        return (M[0][0] * d[0] + M[0][1] * d[1], M[1][0] * d[0] + M[1][1] * d[1])

    def inverse_vector(self, d):
        M = self.M  # orthogonal
        return (M[0][0] * d[0] + M[1][0] * d[1], M[0][1] * d[0] + M[1][1] * d[1])


def _tile_isometry(shape, frame, tile):
    """The folding isometry of a tile (physical -> base circle picture), float."""
    ctx = frame.ctx
    phys = [tuple(_to_ctx(ctx, c) for c in p) for p in frame.tile_points(tile)]
    folded = [frame.circle_point(x) for x in tile_positions(shape, tile)]
    # linear part from two edge vectors
    p1, p2 = _sub(phys[1], phys[0]), _sub(phys[2], phys[0])
    q1, q2 = _sub(folded[1], folded[0]), _sub(folded[2], folded[0])
    det = p1[0] * p2[1] - p1[1] * p2[0]
    inv = ((p2[1] / det, -p2[0] / det), (-p1[1] / det, p1[0] / det))
    M = (
        (q1[0] * inv[0][0] + q2[0] * inv[1][0], q1[0] * inv[0][1] + q2[0] * inv[1][1]),
        (q1[1] * inv[0][0] + q2[1] * inv[1][0], q1[1] * inv[0][1] + q2[1] * inv[1][1]),
    )
    t = (folded[0][0] - (M[0][0] * phys[0][0] + M[0][1] * phys[0][1]),
         folded[0][1] - (M[1][0] * phys[0][0] + M[1][1] * phys[0][1]))
    return _Isometry(M, t)


# ---------------------------------------------------------------------------
# planar reconstruction of folded records

def crossing_points(record, bits=64):
    """Float planar crossing points of a folded record (for drawing and distances)."""
    shape = record.shape
    frame = shape.planar(bits)
    ctx = frame.ctx
    P, Q = record.chord
    Pp, Qp = frame.circle_point(P), frame.circle_point(Q)
    d = _sub(Qp, Pp)
    out = []
    cache = {}

    def folded(v):
        if v not in cache:
            cache[v] = frame.circle_point(vertex_position(shape, v))
        return cache[v]

    for tile, key in zip(record.tiles, record.edges):
        a, b = edge_endpoints(key)
        X, Y = folded(a), folded(b)
        e = _sub(Y, X)
        den = _cross(d, e)
        w = _sub(X, Pp)
        s = _cross(w, d) / den
        Xp = frame.lattice_point(*a)
        Yp = frame.lattice_point(*b)
        Xp = tuple(_to_ctx(ctx, c) for c in Xp)
        Yp = tuple(_to_ctx(ctx, c) for c in Yp)
        out.append((Xp[0] + s * (Yp[0] - Xp[0]), Xp[1] + s * (Yp[1] - Xp[1])))
    return out
