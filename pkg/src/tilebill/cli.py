"""
Command-line interface.

Every command prints (or writes with ``--json``) an object
``{"version", "config", "result"}``. Exact numbers are written as strings.
Exit codes: 0 pass, 1 failure with a counterexample, 2 inconclusive,
3 usage error.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import __version__, fractal, render, renorm, tiling_geom as tg, verify, words
from .numerics import CUBIC, RATIONAL, FloatBackend, parse_backend, parse_expression

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3

# 1/3 + 1/997: avoids vertex positions of shapes with small denominators
DEFAULT_P0 = "1000/2991"


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    backend: str
    cap: int
    seed: int
    json: str = None
    svg: str = None

    def __post_init__(self):
        if self.cap is not None and self.cap <= 0:
            raise UsageError("--cap must be positive")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must fit in 64 bits")


# ---------------------------------------------------------------------------
# parsing helpers

def parse_number(text, backend):
    """
    Read a number for ``backend``. Exact backends refuse decimal points, so
    that a float never slips into an exact computation.

        >>> parse_number("3/7", RATIONAL)
        Fraction(3, 7)
    """
    text = text.strip()
    if not isinstance(backend, FloatBackend) and any(ch in text for ch in ".eE"):
        raise UsageError(f"{text!r}: decimals need --backend float:BITS")
    try:
        value = parse_expression(text, allow_a=backend is CUBIC)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    return backend.coerce(value)


def parse_angles(text, backend):
    """
    Three angles in degrees, e.g. ``60/60/60`` or ``45/2,135/2,90``; a
    term containing ``pi`` is read in radians (``pi/3``).

        >>> parse_angles("36/72/72", RATIONAL)
        (Fraction(36, 1), Fraction(72, 1), Fraction(72, 1))
        >>> parse_angles("pi/2,pi/4,pi/4", RATIONAL)
        (Fraction(90, 1), Fraction(45, 1), Fraction(45, 1))
    """
    parts = text.split(",") if "," in text else text.split("/")
    if len(parts) != 3:
        raise UsageError("angles must be three values: A/B/C or A,B,C")
    out = []
    for part in parts:
        part = part.strip()
        if "pi" in part:
            part = part.replace("pi", "(180)")
        out.append(parse_number(part, backend))
    if any(a <= 0 for a in out) or abs(sum(out) - 180) > (0 if backend is RATIONAL else 1e-9):
        raise UsageError("angles must be positive and sum to 180 degrees")
    return tuple(out)


def parse_pair(text):
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError:
        raise UsageError(f"expected two integers I,J, got {text!r}") from None


def resolve_shape(args, backend):
    """Shape and backend from --angles / --tribonacci."""
    if getattr(args, "tribonacci", False):
        if backend is RATIONAL and args.backend_given:
            raise UsageError("the Tribonacci shape is irrational: use --backend cubic or float:BITS")
        if backend is RATIONAL:
            backend = CUBIC
        lengths = fractal.tribonacci_lengths()
        if isinstance(backend, FloatBackend):
            lengths = tuple(backend.coerce(float(x)) for x in lengths)
        return tg.TriangleShape.from_lengths(lengths), backend
    if not getattr(args, "angles", None):
        raise UsageError("give --angles A/B/C or --tribonacci")
    angles = parse_angles(args.angles, backend)
    lengths = tuple(a / 180 for a in angles)
    return tg.TriangleShape.from_lengths(lengths), backend


def exact_str(x):
    return str(x)


# ---------------------------------------------------------------------------
# serialization

def record_json(rec, points=None):
    crossings = []
    for k, (letter, tile, edge) in enumerate(zip(rec.letters, rec.tiles, rec.edges)):
        item = {"edge": letter, "tile": list(tile), "edge_key": [list(edge[0]), edge[1]]}
        if points is not None and k < len(points):
            item["point"] = [exact_str(c) for c in points[k]]
        crossings.append(item)
    out = {
        "kind": rec.kind,
        "physical": rec.physical,
        "crossings": len(rec.letters),
        "period": rec.period,
        "translation": list(rec.translation) if rec.translation else None,
        "singular_vertex": list(rec.singular_vertex) if rec.singular_vertex else None,
        "code": rec.code if rec.period else None,
        "chord": [exact_str(c) for c in rec.chord] if rec.chord else None,
        "trajectory": crossings,
    }
    return out


def graph_json(g):
    return {
        "vertices": sorted(list(v) for v in g.vertices),
        "edges": sorted(sorted([list(a), list(b)]) for a, b in g.edges),
        "is_tree": g.is_tree,
        "is_path": g.is_path() if g.vertices else False,
        "cycle_rank": g.cycle_rank,
    }


def membership_json(m):
    if m is None:
        return None
    return {"status": m.status, "steps": m.steps, "cycle": list(m.cycle) if m.cycle else None, "reason": m.reason}


def params_json(lam):
    return {"lengths": [exact_str(v) for v in lam.lengths], "tau": exact_str(lam.tau)}


def emit(cfg, result, canvas=None):
    doc = {"version": __version__, "config": asdict(cfg), "result": result}
    text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    if cfg.json:
        with open(cfg.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.svg:
        if canvas is None:
            raise UsageError("this command has no drawing")
        canvas.write(cfg.svg)


def _bits(backend):
    return backend.bits if isinstance(backend, FloatBackend) else 64


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args, cfg, backend):
    shape, backend = resolve_shape(args, backend)
    cfg.backend = backend.spec()
    cap = cfg.cap or 10000
    if args.start:
        if args.tau or args.through_circumcenter:
            raise UsageError("--start/--direction and --tau are exclusive")
        if not args.direction:
            raise UsageError("--start needs --direction")
        start = tuple(parse_number(t, backend) for t in args.start.split(","))
        direction = tuple(parse_number(t, backend) for t in args.direction.split(","))
        bits = None if shape.exact_planar else max(_bits(backend), 106)
        rec = tg.trace(shape, start, direction, max_crossings=cap, bits=bits)
        points = rec.points
    else:
        tau = parse_number(args.tau, backend) if args.tau else None
        if args.through_circumcenter:
            if tau is not None and tau != backend.coerce(Fraction(1, 2)):
                raise UsageError("a chord through the circumcenter has tau = 1/2")
            tau = backend.coerce(Fraction(1, 2))
        if tau is None:
            raise UsageError("give --tau, --through-circumcenter or --start/--direction")
        p0 = parse_number(args.p0 or DEFAULT_P0, backend)
        rec = tg.trace_folded(shape, p0, tau, max_crossings=cap)
        points = tg.crossing_points(rec, _bits(backend)) if rec.physical else None
    result = record_json(rec, points)
    result["shape"] = [exact_str(v) for v in shape.lengths]
    if rec.chord is not None:
        result["tiles_revisited"] = len(rec.tiles) - len(set(rec.tiles))
    graph = None
    if rec.kind == tg.PERIODIC and rec.physical:
        try:
            graph = tg.enclosed_graph(rec)
            result["enclosed_tree"] = graph_json(graph)
        except ValueError as exc:
            result["enclosed_tree"] = {"error": str(exc)}
    canvas = None
    if cfg.svg:
        canvas = render.Canvas()
        frame = shape.planar(None if shape.exact_planar else 64)
        render.draw_record(canvas, rec, frame, points, graph if args.tree else None)
    emit(cfg, result, canvas)
    return EXIT_PASS


def cmd_classify(args, cfg, backend):
    shape, backend = resolve_shape(args, backend)
    cfg.backend = backend.spec()
    sc = renorm.classify(shape.lengths, cap=cfg.cap or 200)
    result = {
        "kind": sc.kind,
        "lengths": [exact_str(v) for v in sc.lengths],
        "x": [exact_str(v) for v in sc.x],
        "exceptional": membership_json(sc.exceptional),
        "gasket": membership_json(sc.gasket),
    }
    if sc.trace is not None:
        result["renormalization"] = {"indices": list(sc.trace.indices), "stop_reason": sc.trace.stop_reason}
    if sc.escape_words is not None:
        result["escape_words"] = [sc.escape_words.omega1, sc.escape_words.omega2]
    emit(cfg, result)
    return EXIT_INCONCLUSIVE if sc.kind == renorm.UNDECIDED else EXIT_PASS


def cmd_renormalize(args, cfg, backend):
    shape, backend = resolve_shape(args, backend)
    cfg.backend = backend.spec()
    tau = parse_number(args.tau, backend)
    lam = renorm.param_vector(shape.lengths, tau)
    tr = renorm.renorm_drive(lam, cap=cfg.cap or 50)
    steps = [
        {"index": j, "params": params_json(p), "window_length": exact_str(w)}
        for j, p, w in tr.steps
    ]
    result = {"start": params_json(lam), "steps": steps, "stop_reason": tr.stop_reason}
    emit(cfg, result)
    return EXIT_INCONCLUSIVE if tr.stop_reason == renorm.STOP_CAP else EXIT_PASS


_SUBSTITUTIONS = {
    "sigma1": lambda w: words.sigma_apply(1, w),
    "sigma2": lambda w: words.sigma_apply(2, w),
    "sigma3": lambda w: words.sigma_apply(3, w),
    "varsigma": lambda w: words.varsigma_R(w),
    "sigmaR": words.sigma_R_apply,
    "fac": words.upsilon_fac,
}


def cmd_words(args, cfg, backend):
    if args.apply:
        if not args.word:
            raise UsageError("--apply needs --word")
        try:
            out = _SUBSTITUTIONS[args.apply](args.word)
        except (ValueError, KeyError) as exc:
            raise UsageError(str(exc)) from None
        out = out.letters if isinstance(out, words.CyclicWord) else out
        emit(cfg, {"substitution": args.apply, "word": args.word, "image": out})
        return EXIT_PASS
    s = words.generate_s_words(args.max_j)
    table = []
    for j in range(1, args.max_j + 1):
        w = words.w_word(j, s)
        table.append({
            "j": j,
            "s": s[j],
            "period": len(w),
            "T": words.tribonacci(j + 3),
            "winding": words.winding(w.pairs()),
            "factorized": words.upsilon_fac(w.letters),
        })
    emit(cfg, {"words": table})
    return EXIT_PASS


def cmd_tree(args, cfg, backend):
    shape, backend = resolve_shape(args, backend)
    cfg.backend = backend.spec()
    tau = parse_number(args.tau, backend)
    p0 = parse_number(args.p0 or DEFAULT_P0, backend)
    rec = tg.trace_folded(shape, p0, tau, max_crossings=cfg.cap or 2000)
    result = {"trajectory": record_json(rec)}
    if rec.kind != tg.PERIODIC or not rec.physical:
        result["reason"] = "not a closed trajectory" if rec.physical else "chord misses the start tile"
        emit(cfg, result)
        return EXIT_INCONCLUSIVE
    g = tg.enclosed_graph(rec)
    col = tg.vertex_coloring(rec)
    result["enclosed"] = graph_json(g)
    result["coloring"] = {
        "inside_color": col.inside_color,
        "G0": graph_json(col.graphs[0]),
        "G1": graph_json(col.graphs[1]),
    }
    ok = g.is_tree and (not shape.is_obtuse or g.is_path())
    result["tree_property"] = ok
    canvas = None
    if cfg.svg:
        canvas = render.Canvas()
        frame = shape.planar(None if shape.exact_planar else 64)
        render.draw_record(canvas, rec, frame, tg.crossing_points(rec), g)
    emit(cfg, result, canvas)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_flower(args, cfg, backend):
    shape, backend = resolve_shape(args, backend)
    cfg.backend = backend.spec()
    v = parse_pair(args.vertex)
    kw = {}
    if args.chord_sum:
        kw["chord_sum"] = parse_number(args.chord_sum, backend)
    elif args.tau:
        kw["tau"] = parse_number(args.tau, backend)
    else:
        raise UsageError("give --chord-sum or --tau")
    fl = tg.flower(shape, v, bound=cfg.cap or 4000, **kw)
    result = {
        "pistil": list(fl.pistil),
        "chord_sum": exact_str(fl.chord_sum),
        "s": fl.s,
        "bounded": fl.bounded,
        "bounded_property": fl.bounded_property,
        "petals": [
            {
                "letters": p.letters,
                "size": len(p.letters) + 1,
                "first_tile": list(p.first_tile),
                "last_tile": list(p.last_tile),
                "neighbors": p.neighbors,
                "contains_edge": p.contains_edge,
            }
            for p in fl.petals
        ],
        "rays": len(fl.rays),
        "multi_singular": [[list(t), list(w)] for t, w in fl.multi_singular],
    }
    canvas = None
    if cfg.svg:
        canvas = render.Canvas()
        frame = shape.planar(None if shape.exact_planar else 64)
        for seg in fl.segments:
            for tile in seg.tiles:
                canvas.polygon(frame.tile_points(tile), fill="#eef3fb")
        canvas.dot(frame.lattice_point(*v), r=4.0, fill="#d62728")
    emit(cfg, result, canvas)
    if not fl.bounded:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS if fl.bounded_property else EXIT_FAIL


def cmd_fractal(args, cfg, backend):
    canvas = render.Canvas() if cfg.svg else None
    if args.mode == "ladder":
        cloud = fractal.ladder_fractal(args.n)
        result = {"n": args.n, "points": [[round(float(x), 6) for x in p] for p in cloud.points]}
        if canvas:
            render.draw_cloud(canvas, cloud.points, cloud.colors)
    elif args.mode == "flowers":
        seq = fractal.rescaled_flower_sequence(args.k_max)
        result = {
            "ks": seq.ks,
            "tile_counts": seq.tile_counts,
            "hausdorff": seq.distances,
            "reference": seq.reference,
        }
        if canvas:
            render.draw_cloud(canvas, seq.clouds[-1].points, seq.clouds[-1].colors)
    elif args.mode == "word":
        rec = fractal.w_trajectory(args.j)
        result = record_json(rec)
        result["matches_w"] = fractal.code_matches_w(rec, args.j)
        result["expected_period"] = fractal.period_of_word(args.j)
        if canvas:
            frame = rec.shape.planar(64)
            render.draw_record(canvas, rec, frame, tg.crossing_points(rec))
    else:
        n = cfg.cap or 100000
        rec = fractal.exceptional_trajectory(n)
        slope = fractal.displacement_slope(rec, min(1000, n // 10), n)
        result = {
            "kind": rec.kind,
            "crossings": len(rec.letters),
            "tiles_revisited": len(rec.tiles) - len(set(rec.tiles)),
            "slope": slope,
        }
        if canvas:
            orb = fractal.arithmetic_orbit(rec)
            canvas.polyline(orb.barycenters(rec.shape.planar(64)), width=0.3)
    emit(cfg, result, canvas)
    return EXIT_PASS


def cmd_verify(args, cfg, backend):
    kwargs = {"seed": cfg.seed}
    if args.samples is not None:
        kwargs["samples"] = args.samples
    if args.suite == "winding":
        kwargs["n"] = args.n
    rep = verify.SUITES[args.suite](**kwargs)
    sys.stderr.write(f"{rep.suite}: {rep.status} ({rep.passed} passed, {rep.failed} failed, "
                     f"{rep.inconclusive} inconclusive) in {rep.seconds:.1f}s\n")
    emit(cfg, rep.as_dict())
    if rep.status == verify.FAIL:
        return EXIT_FAIL
    if rep.status == verify.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


COMMANDS = {
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "renormalize": cmd_renormalize,
    "words": cmd_words,
    "tree": cmd_tree,
    "flower": cmd_flower,
    "fractal": cmd_fractal,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", default=None, help="rational (default), cubic or float:BITS")
    common.add_argument("--cap", type=int, default=None, help="iteration / crossing / depth cap")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", metavar="PATH", help="write JSON here instead of stdout")
    common.add_argument("--svg", metavar="PATH", help="also write an SVG drawing")

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("--angles", help="angles in degrees, e.g. 60/60/60 or pi/2,pi/4,pi/4")
    shape.add_argument("--tribonacci", action="store_true", help="the Tribonacci shape")

    p = _Parser(prog="tilebill", description="Triangle tiling billiards and circle exchange maps.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common, shape], help="trace one trajectory")
    s.add_argument("--tau", help="rotation parameter in (0, 1)")
    s.add_argument("--p0", default=None, help="circle position of the chord end Q (default %s)" % DEFAULT_P0)
    s.add_argument("--through-circumcenter", action="store_true", help="chord through the circumcenter (tau = 1/2)")
    s.add_argument("--start", help="planar start X,Y inside the base tile")
    s.add_argument("--direction", help="planar direction DX,DY")
    s.add_argument("--tree", action="store_true", help="draw the enclosed tree in the SVG")

    sub.add_parser("classify", parents=[common, shape], help="classify a shape")

    r = sub.add_parser("renormalize", parents=[common, shape], help="run the renormalization process")
    r.add_argument("--tau", default="1/2")

    w = sub.add_parser("words", parents=[common], help="Tribonacci words and substitutions")
    w.add_argument("--max-j", type=int, default=6)
    w.add_argument("--apply", choices=sorted(_SUBSTITUTIONS))
    w.add_argument("--word")

    t = sub.add_parser("tree", parents=[common, shape], help="enclosed tree of a periodic trajectory")
    t.add_argument("--tau", required=True)
    t.add_argument("--p0", default=None)

    f = sub.add_parser("flower", parents=[common, shape], help="flower at a lattice vertex")
    f.add_argument("--vertex", default="0,0")
    f.add_argument("--chord-sum")
    f.add_argument("--tau")

    fr = sub.add_parser("fractal", parents=[common], help="Tribonacci billiard experiments")
    fr.add_argument("mode", choices=("ladder", "flowers", "word", "drift"))
    fr.add_argument("--n", type=int, default=20000, help="ladder length")
    fr.add_argument("--k-max", type=int, default=8)
    fr.add_argument("--j", type=int, default=5)

    v = sub.add_parser("verify", parents=[common], help="run a property suite")
    v.add_argument("suite", choices=sorted(verify.SUITES))
    v.add_argument("--samples", type=int)
    v.add_argument("--n", type=int, default=3, help="alphabet size for the winding suite")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.backend_given = args.backend is not None
        backend = parse_backend(args.backend or "rational")
    except ValueError as exc:
        sys.stderr.write(f"tilebill: error: {exc}\n")
        return EXIT_USAGE
    try:
        cfg = RunConfig(args.command, backend.spec(), args.cap, args.seed, args.json, args.svg)
        return COMMANDS[args.command](args, cfg, backend)
    except UsageError as exc:
        sys.stderr.write(f"tilebill: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
