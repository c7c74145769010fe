"""Minimal SVG 1.1 output for tilings, trajectories, trees and point clouds."""

from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class Canvas:
    """Collects shapes in world coordinates and writes them with y pointing up."""

    def __init__(self, size=800, margin=20):
        self.size = size
        self.margin = margin
        self.items = []
        self.xs = []
        self.ys = []

    def _track(self, pts):
        for x, y in pts:
            self.xs.append(x)
            self.ys.append(y)

    def polygon(self, pts, fill="none", stroke="#999", width=0.5):
        pts = [(float(x), float(y)) for x, y in pts]
        self._track(pts)
        self.items.append(("polygon", pts, dict(fill=fill, stroke=stroke, width=width)))

    def polyline(self, pts, stroke="#d62728", width=1.0):
        pts = [(float(x), float(y)) for x, y in pts]
        self._track(pts)
        self.items.append(("polyline", pts, dict(fill="none", stroke=stroke, width=width)))

    def dot(self, p, r=2.0, fill="#000"):
        p = (float(p[0]), float(p[1]))
        self._track([p])
        self.items.append(("dot", [p], dict(fill=fill, r=r)))

    def text(self, s):
        self.items.append(("text", [], dict(text=s)))

    def svg(self):
        if self.xs:
            x0, x1, y0, y1 = min(self.xs), max(self.xs), min(self.ys), max(self.ys)
        else:
            x0 = y0 = 0.0
            x1 = y1 = 1.0
        span = max(x1 - x0, y1 - y0) or 1.0
        scale = (self.size - 2 * self.margin) / span

        def tr(p):
            return (
                round(self.margin + (p[0] - x0) * scale, 2),
                round(self.size - self.margin - (p[1] - y0) * scale, 2),
            )

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.size}" '
            f'height="{self.size}" viewBox="0 0 {self.size} {self.size}">',
            f'<rect width="{self.size}" height="{self.size}" fill="white"/>',
        ]
        for kind, pts, st in self.items:
            if kind in ("polygon", "polyline"):
                coords = " ".join(f"{x},{y}" for x, y in map(tr, pts))
                out.append(
                    f'<{kind} points="{coords}" fill="{st["fill"]}" stroke="{st["stroke"]}" '
                    f'stroke-width="{st["width"]}"/>'
                )
            elif kind == "dot":
                x, y = tr(pts[0])
                out.append(f'<circle cx="{x}" cy="{y}" r="{st["r"]}" fill="{st["fill"]}"/>')
            else:
                out.append(f'<text x="{self.margin}" y="{self.margin}" font-size="12">{escape(st["text"])}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.svg())


def draw_record(canvas, record, frame, points, graph=None, tiles=None):
    """Tiles visited by ``record``, its crossing polyline and an optional lattice graph."""
    for tile in tiles if tiles is not None else dict.fromkeys(record.tiles):
        fill = "#eef3fb" if tile[2] > 0 else "#fbf3ee"
        canvas.polygon(frame.tile_points(tile), fill=fill)
    if points:
        pts = list(points)
        if record.kind == "periodic":
            pts.append(pts[0])
        canvas.polyline(pts)
    if graph is not None:
        for a, b in graph.edges:
            canvas.polyline([frame.lattice_point(*a), frame.lattice_point(*b)], stroke="#2ca02c", width=2.0)
        for v in graph.vertices:
            canvas.dot(frame.lattice_point(*v), r=3.0, fill="#2ca02c")


def draw_cloud(canvas, points, colors=None):
    for k, p in enumerate(points):
        c = PALETTE[int(colors[k]) % len(PALETTE)] if colors is not None else "#000"
        canvas.dot(p, r=0.8, fill=c)
