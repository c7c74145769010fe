"""
The Tribonacci billiard: exceptional trajectories, arithmetic orbits and
the Rauzy fractal.

The Tribonacci triangle has l = ((1 - a)/2, (1 - a^2)/2, (1 - a^3)/2) where
a is the real root of x^3 + x^2 + x - 1. A trajectory through a
circumcenter folds onto a diameter (tau = 1/2). Its parallel foliation is
the family of chords with the same endpoint sum; the leaf at offset t is
traced from p0 + t with rotation 1/2 + 2t. All leaves except t = 0 are
periodic with periods 2 T_{j+3}.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from . import tiling_geom as tg
from .circle_maps import make_cet, orbit, square_decomposition
from .numerics import Cubic, reduce_mod1
from .words import CyclicWord, tribonacci, w_R_prefix, w_word

A = Cubic.generator()

# matrix rescaling the flower regions, exact in Q[a]
RESCALE = ((-A, Cubic(1)), (-1 - A * A, Cubic(-1)))

DEFAULT_START = Fraction(1, 3)


def mat_mul(M, N):
    return tuple(
        tuple(sum((M[i][k] * N[k][j] for k in range(len(N))), Cubic(0)) for j in range(len(N[0])))
        for i in range(len(M))
    )


def mat_inverse(M):
    """Exact inverse of a 2x2 matrix over Q[a]."""
    (p, q), (r, s) = M
    det = p * s - q * r
    if not det:
        raise ZeroDivisionError("singular matrix")
    return ((s / det, -q / det), (-r / det, p / det))


def mat_float(M):
    return np.array([[float(x) for x in row] for row in M])


def tribonacci_lengths():
    return ((1 - A) / 2, (1 - A * A) / 2, (1 - A**3) / 2)


def tribonacci_shape():
    """
    The Tribonacci triangle, exact over Q[a].

    >>> [round(float(x) * 180) for x in tribonacci_shape().lengths]
    [41, 63, 76]
    """
    return tg.TriangleShape.from_lengths(tribonacci_lengths())


@dataclass(frozen=True)
class Foliation:
    """Parallel chords P + Q = const through the base tile."""

    shape: tg.TriangleShape
    p0: object
    tau0: object

    @property
    def chord_sum(self):
        return reduce_mod1(2 * self.p0 - self.tau0)

    def parameters(self, t):
        return reduce_mod1(self.p0 + t), self.tau0 + 2 * t

    def leaf(self, t, cap=10000):
        p, tau = self.parameters(t)
        rec = tg.trace_folded(self.shape, p, tau, max_crossings=cap)
        rec.extra["t"] = t
        return rec


def exceptional_foliation(p0=DEFAULT_START):
    """The foliation of the Tribonacci trajectory through a circumcenter."""
    return Foliation(tribonacci_shape(), Fraction(p0), Fraction(1, 2))


def exceptional_trajectory(crossings, p0=DEFAULT_START):
    return exceptional_foliation(p0).leaf(0, crossings)


def period_of_word(j):
    """Length 2 T_{j+3} of the code w_j."""
    return 2 * tribonacci(j + 3)


def _bisect_leaf(fol, target, side, cap):
    # offsets are kept off the countable set of singular leaves
    jitter = side * Fraction(1, 1000003)
    far, near = side * Fraction(1, 6), side * Fraction(1, 10**12)
    for _ in range(120):
        mid = (far + near) / 2
        rec = fol.leaf(mid + jitter, cap)
        if rec.kind != tg.PERIODIC:
            return None
        if rec.period == target:
            return rec
        if rec.period < target:
            far = mid
        else:
            near = mid
    return None


def anchor_leaf(fol, min_period, side=-1, cap=20000):
    """A periodic leaf through the base tile with period at least ``min_period``."""
    jitter = side * Fraction(1, 1000003)
    for m in range(1, 60):
        rec = fol.leaf(side * Fraction(1, 2**m) + jitter, cap)
        if rec.kind == tg.PERIODIC and rec.period >= min_period:
            return rec
    raise RuntimeError(f"no leaf of period >= {min_period} found")


def leaf_inside_petal(fol, petal, pistil, period=None):
    """
    A periodic leaf just inside a petal: the chord of the petal pushed
    slightly off the pistil, traced from the petal's first tile.
    """
    shape = fol.shape
    c = fol.chord_sum
    f = tg.vertex_position(shape, pistil)
    g = reduce_mod1(c - f)
    period = period or petal_size(petal)
    for m in range(8, 40, 4):
        for sign in (1, -1):
            Q = reduce_mod1(g + sign * Fraction(1, 10**m))
            P = reduce_mod1(c - Q)
            rec = tg.trace_chord(shape, P, Q, 4 * period + 16, tile=petal.first_tile)
            if rec.physical and rec.kind == tg.PERIODIC and rec.period == period:
                return rec
    raise RuntimeError("no leaf found inside the petal")


def w_trajectory(j, foliation=None, max_j=10):
    """
    A periodic leaf of the exceptional foliation with code w_j.

    Leaves through the base tile are searched by bisection on t from both
    sides. A given tile only meets some of the zones, so when that fails
    a longer leaf is contracted onto its flowers and the leaf just inside
    a petal of the right size is taken.
    """
    if j < 1:
        raise ValueError("j must be at least 1")
    if j > max_j:
        raise ValueError(f"j = {j} is beyond the cap {max_j}")
    fol = foliation or exceptional_foliation()
    target = period_of_word(j)
    cap = 4 * target + 16
    for side in (-1, 1):
        rec = _bisect_leaf(fol, target, side, cap)
        if rec is not None:
            rec.extra["method"] = "bisection"
            return rec
    big = anchor_leaf(fol, 2 * target)
    chain = flower_chain(big, fol.chord_sum)
    for fl in chain.flowers:
        for petal in fl.petals:
            if petal_size(petal) == target:
                rec = leaf_inside_petal(fol, petal, fl.pistil)
                rec.extra["method"] = "petal"
                return rec
    raise RuntimeError(f"no leaf with code w_{j} found")


def code_matches_w(rec, j):
    """Whether the cyclic code of a periodic record is w_j (either orientation)."""
    w = w_word(j)
    code = CyclicWord(rec.code)
    back = CyclicWord(rec.code[::-1])
    return code == w or back == w


# ---------------------------------------------------------------------------
# arithmetic orbits

# step of the positive tile reached after two crossings
PAIR_STEP = {
    "ab": (1, 0),
    "ac": (0, 1),
    "ba": (-1, 0),
    "bc": (-1, 1),
    "ca": (0, -1),
    "cb": (1, -1),
}

# pieces of F^2: I_j^+ moves by the side vector of side j, I_j^- by its negative
PIECE_STEP = {
    "I3+": (1, 0),
    "I3-": (-1, 0),
    "I1+": (-1, 1),
    "I1-": (1, -1),
    "I2+": (0, -1),
    "I2-": (0, 1),
}


@dataclass
class ArithmeticOrbit:
    """Lattice positions of the positive tiles visited at even steps."""

    positions: list
    steps: list

    def barycenters(self, frame):
        u, v = frame.u, frame.v
        out = []
        for m, n in self.positions:
            x = m + Fraction(1, 3)
            y = n + Fraction(1, 3)
            out.append((float(x * u[0] + y * v[0]), float(x * u[1] + y * v[1])))
        return out

    def distances(self, frame):
        """Euclidean distance of each position from the first one."""
        b = np.array(self.barycenters(frame))
        return np.hypot(b[:, 0] - b[0, 0], b[:, 1] - b[0, 1])


def arithmetic_orbit(rec):
    """
    Barycenter polyline of the positive tiles a trajectory visits at even
    steps; it must start in a positive tile.
    """
    if rec.tiles[0][2] != tg.POSITIVE:
        raise ValueError("trajectory must start in a positive tile")
    if len(rec.letters) < 2:
        raise ValueError("need at least two crossings")
    positions = [rec.tiles[k][:2] for k in range(0, len(rec.tiles), 2)]
    steps = [PAIR_STEP[rec.letters[k : k + 2]] for k in range(0, len(rec.letters) - 1, 2)]
    return ArithmeticOrbit(positions, steps)


def piece_steps(shape, p0, tau, n):
    """Steps predicted by the pieces of F^2 along the orbit of p0."""
    cet = make_cet(shape.lengths, tau)
    sd = square_decomposition(cet)
    orb = orbit(cet, p0, 2 * n)
    return [PIECE_STEP[sd.piece_of(orb.points[2 * k]).name] for k in range(n)]


def displacement_slope(rec, n_lo=1000, n_hi=None, samples=30):
    """
    Log-log slope of the running maximum of d(theta_n, theta_0) over
    n in [n_lo, n_hi], measured on even steps.
    """
    orb = arithmetic_orbit(rec)
    frame = rec.shape.planar(64)
    d = orb.distances(frame)
    run = np.maximum.accumulate(d)
    n_hi = n_hi or 2 * (len(d) - 1)
    ns = np.unique(np.geomspace(n_lo, n_hi, samples).astype(int) // 2)
    ns = ns[ns < len(run)]
    slope, _ = np.polyfit(np.log(2 * ns), np.log(run[ns]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# the Rauzy fractal

def two_sided(rec):
    """Forward record and the backward trajectory along the reversed chord."""
    P, Q = rec.chord
    back = tg.trace_chord(rec.shape, Q, P, max_crossings=len(rec.letters), tile=rec.tiles[0] if rec.tiles else tg.BASE)
    return rec, back


def covered_radius(shape, tiles, frame=None):
    """
    Largest r such that every tile whose barycenter lies within distance r
    of the base tile's barycenter belongs to ``tiles``.
    """
    frame = frame or shape.planar(64)
    u = tuple(float(c) for c in frame.u)
    v = tuple(float(c) for c in frame.v)
    visited = set(tiles) | {tg.BASE}

    def center(tile):
        pts = tg.tile_vertices(tile)
        x = sum(p[0] for p in pts) / 3
        y = sum(p[1] for p in pts) / 3
        return x * u[0] + y * v[0], x * u[1] + y * v[1]

    cx, cy = center(tg.BASE)
    ms = [t[0] for t in visited]
    ns = [t[1] for t in visited]
    best = math.inf
    for m in range(min(ms) - 1, max(ms) + 2):
        for n in range(min(ns) - 1, max(ns) + 2):
            for o in (tg.POSITIVE, tg.NEGATIVE):
                if (m, n, o) in visited:
                    continue
                x, y = center((m, n, o))
                best = min(best, math.hypot(x - cx, y - cy))
    return best


@dataclass
class FractalCloud:
    points: np.ndarray
    colors: np.ndarray
    parameter: int = None
    extra: dict = field(default_factory=dict)


def abelianization():
    """Incidence matrix of the Tribonacci substitution 1 -> 12, 2 -> 13, 3 -> 1."""
    return np.array([[1, 1, 1], [1, 0, 0], [0, 1, 0]], dtype=float)


def perron_vector():
    """Normalized Perron eigenvector: the letter frequencies of w_R."""
    vals, vecs = np.linalg.eig(abelianization())
    k = int(np.argmax(vals.real))
    v = np.abs(vecs[:, k].real)
    return v / v.sum()


def letter_frequencies(word):
    counts = np.array([word.count(c) for c in "123"], dtype=float)
    return counts / counts.sum()


def _plane_basis(direction):
    d = direction / np.linalg.norm(direction)
    e1 = np.cross(d, [0.0, 0.0, 1.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2


def ladder_fractal(N):
    """
    Endpoints of the ladder e_{w_1} + ... + e_{w_n}, n <= N, projected along
    the Perron direction, colored by the last letter.
    """
    if N < 100:
        raise ValueError("N must be at least 100")
    word = w_R_prefix(N)
    letters = np.frombuffer(word.encode(), dtype=np.uint8) - ord("1")
    steps = np.eye(3)[letters]
    path = np.cumsum(steps, axis=0)
    e1, e2 = _plane_basis(perron_vector())
    pts = np.stack([path @ e1, path @ e2], axis=1)
    return FractalCloud(pts, letters, N)


# ---------------------------------------------------------------------------
# point clouds

def normalize_cloud(points):
    """Center and scale to unit root-mean-square radius."""
    p = np.asarray(points, dtype=float)
    p = p - p.mean(axis=0)
    rms = math.sqrt(float((p**2).sum(axis=1).mean()))
    return p / rms


def whiten_cloud(points):
    """Affine normalization: zero mean and identity covariance."""
    p = np.asarray(points, dtype=float)
    p = p - p.mean(axis=0)
    cov = p.T @ p / len(p)
    vals, vecs = np.linalg.eigh(cov)
    w = vecs @ np.diag(vals**-0.5) @ vecs.T
    return p @ w.T


def _grid_reduce(p, res):
    keys = np.floor(p / res).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return p[np.sort(idx)]


def _directed(p, q):
    d, _ = cKDTree(q).query(p)
    return float(d.max())


def hausdorff(p, q, resolution=None):
    """
    Hausdorff distance of two planar point clouds after snapping both to a
    grid of cells of size diameter / 200.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if resolution is None:
        both = np.vstack([p, q])
        diam = float(np.linalg.norm(both.max(axis=0) - both.min(axis=0)))
        resolution = diam / 200 if diam > 0 else 1.0
    p = _grid_reduce(p, resolution)
    q = _grid_reduce(q, resolution)
    return max(_directed(p, q), _directed(q, p))


def _rotations(steps):
    for k in range(steps):
        th = 2 * math.pi * k / steps
        c, s = math.cos(th), math.sin(th)
        R = np.array([[c, -s], [s, c]])
        yield R
        yield R @ np.array([[1.0, 0.0], [0.0, -1.0]])


def aligned_distance(p, q, steps=72):
    """
    Hausdorff distance minimized over rotations and reflections of q about
    the origin. Both clouds are snapped to the grid once, before rotating.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    radius = max(float(np.hypot(*p.T).max()), float(np.hypot(*q.T).max()))
    res = 2 * radius / 200
    p = _grid_reduce(p, res)
    q = _grid_reduce(q, res)
    tree_p = cKDTree(p)
    best = math.inf
    for R in _rotations(steps):
        qr = q @ R.T
        d = max(float(tree_p.query(qr)[0].max()), float(cKDTree(qr).query(p)[0].max()))
        best = min(best, d)
    return best


def cell_overlap(cloud, resolution=1e-2):
    """
    Fraction of grid cells (after normalization) occupied by more than one
    color; small values mean the cells have disjoint interiors.
    """
    p = normalize_cloud(cloud.points)
    keys = np.floor(p / resolution).astype(np.int64)
    cells = {}
    for key, c in zip(map(tuple, keys), cloud.colors):
        cells.setdefault(key, set()).add(int(c))
    mixed = sum(1 for s in cells.values() if len(s) > 1)
    return mixed / len(cells)


# ---------------------------------------------------------------------------
# flowers of the exceptional foliation

def petal_size(petal):
    """Period of the trajectories just inside a petal: its crossings plus the enclosed edge."""
    return len(petal.letters) + 1


def _vertices_inside_petal(petal, pistil):
    rows = tg._crossing_rows(petal.edges)
    i0, i1, j0, j1 = tg._bbox(petal.tiles)
    return [
        (i, j)
        for i in range(i0, i1 + 1)
        for j in range(j0, j1 + 1)
        if (i, j) != pistil and tg._inside((i, j), rows, avoid=pistil)
    ]


@dataclass
class FlowerChain:
    """The nested flowers a periodic leaf contracts onto."""

    leaf: tg.TrajectoryRecord
    flowers: list  # outermost first
    center: tuple = None

    @property
    def petal_counts(self):
        return [len(f.petals) for f in self.flowers]


def flower_chain(rec, chord_sum):
    """
    Contract a periodic leaf onto its flower, then repeatedly onto the
    flower inside the biggest petal, down to a vertex.
    """
    shape = rec.shape
    region = tg.enclosed_graph(rec).vertices
    bound = rec.period + 4
    flowers = []
    center = None
    while region:
        best = None
        for v in sorted(region):
            fl = tg.flower(shape, v, chord_sum=chord_sum, bound=bound)
            if not fl.petals or not fl.bounded:
                continue
            size = sum(petal_size(p) for p in fl.petals)
            if best is None or size > best[0]:
                best = (size, fl)
        if best is None:
            if len(region) == 1:
                center = next(iter(region))
            break
        fl = best[1]
        flowers.append(fl)
        big = max(fl.petals, key=petal_size)
        region = _vertices_inside_petal(big, fl.pistil)
    return FlowerChain(rec, flowers, center)


def petal_regions(fl):
    """Tile sets of the petals of a flower, biggest first."""
    petals = sorted(fl.petals, key=petal_size, reverse=True)
    return [set(p.tiles) for p in petals]


def tile_barycenter(frame, tile):
    pts = frame.tile_points(tile)
    return (sum(float(p[0]) for p in pts) / 3, sum(float(p[1]) for p in pts) / 3)


@dataclass
class FlowerSequence:
    ks: list
    clouds: list
    tile_counts: list  # per k: sizes of the three petal regions, biggest first
    distances: list  # consecutive aligned Hausdorff distances
    reference: list  # distance of each cloud to the ladder fractal


def rescaled_flower_sequence(k_max=8, k_min=4, reference_n=20000, foliation=None):
    """
    Flowers gamma_k of the exceptional foliation, from the chain of a leaf
    with code w_{k_max + 1}. Each cloud holds the barycenters of the tiles
    of the three petals of gamma_k, mapped by A^{-k} and normalized; the
    distances compare consecutive clouds and the ladder fractal.
    """
    if k_max > 9:
        raise ValueError("k_max is capped at 9")
    fol = foliation or exceptional_foliation()
    leaf = w_trajectory(k_max + 1, fol)
    chain = flower_chain(leaf, fol.chord_sum)
    by_k = {}
    for fl in chain.flowers:
        total = sum(petal_size(p) for p in fl.petals)
        for k in range(1, k_max + 2):
            if total == period_of_word(k) and len(fl.petals) == 3:
                by_k[k] = fl
    frame = fol.shape.planar(64)
    Ainv = mat_float(mat_inverse(RESCALE))
    ref = whiten_cloud(ladder_fractal(reference_n).points)
    ks, clouds, counts, refd = [], [], [], []
    for k in range(k_min, k_max + 1):
        if k not in by_k:
            raise RuntimeError(f"flower gamma_{k} not found")
        regions = petal_regions(by_k[k])
        counts.append([len(r) for r in regions])
        pts = np.array([tile_barycenter(frame, t) for r in regions for t in sorted(r)])
        pts = pts @ np.linalg.matrix_power(Ainv, k).T
        cloud = whiten_cloud(pts)
        ks.append(k)
        clouds.append(cloud)
        refd.append(aligned_distance(ref, cloud))
    dists = [aligned_distance(clouds[i], clouds[i + 1]) for i in range(len(clouds) - 1)]
    return FlowerSequence(ks, clouds, counts, dists, refd)
