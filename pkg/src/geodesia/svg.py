"""SVG drawings of star unfoldings and ridge trees.

Coordinates are rounded to 1e-6 so that drawings are byte-stable.
"""
from __future__ import annotations

from .ridge import RidgeTree
from .star import StarUnfolding


def _num(x: float) -> str:
    v = round(float(x), 6)
    if v == 0.0:
        v = 0.0
    return f"{v:.6f}".rstrip("0").rstrip(".")


def _pts(poly) -> str:
    # the y axis is flipped so that counter-clockwise stays counter-clockwise on screen
    return " ".join(f"{_num(x)},{_num(-y)}" for x, y in poly)


def _frame(points, margin: float = 0.05) -> str:
    xs = [p[0] for p in points]
    ys = [-p[1] for p in points]
    w, h = max(xs) - min(xs), max(ys) - min(ys)
    pad = margin * max(w, h, 1e-9)
    return f"{_num(min(xs) - pad)} {_num(min(ys) - pad)} {_num(w + 2 * pad)} {_num(h + 2 * pad)}"


def star_svg(star: StarUnfolding, ridges: RidgeTree | None = None) -> str:
    """Plates, kernel, source triangles and optionally the ridge tree of a star unfolding."""
    pts = [p for pl in star.plates for p in pl.star]
    stroke = _num(0.002 * max(star.mesh.diameter, 1e-9))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_frame(pts)}">',
        f'<g fill="none" stroke-width="{stroke}">',
    ]
    for pid, pl in enumerate(star.plates):
        out.append(f'<polygon class="plate" data-face="{pl.face}" points="{_pts(pl.star)}" stroke="#bbbbbb"/>')
    for i in range(star.n):
        out.append(f'<polygon class="source-triangle" data-image="{i}" points="{_pts(star.source_triangle(i))}" '
                   f'fill="#f3d9a4" fill-opacity="0.5" stroke="#c08a2b"/>')
    out.append(f'<polygon class="kernel" points="{_pts(star.kernel)}" stroke="#2b6cc0"/>')
    if ridges is not None:
        for r in ridges.ridges:
            for _face, A, B in r.pieces:
                out.append(f'<line class="ridge" x1="{_num(A[0])}" y1="{_num(-A[1])}" '
                           f'x2="{_num(B[0])}" y2="{_num(-B[1])}" stroke="#c0302b"/>')
    out.append("</g>")
    r = _num(0.006 * max(star.mesh.diameter, 1e-9))
    for i, S in enumerate(star.source_images):
        out.append(f'<circle class="source-image" data-image="{i}" cx="{_num(S[0])}" cy="{_num(-S[1])}" r="{r}" fill="#000000"/>')
    for v in star.order:
        P = star.vertex_images[v]
        out.append(f'<circle class="vertex-image" data-vertex="{v}" cx="{_num(P[0])}" cy="{_num(-P[1])}" r="{r}" fill="#2b6cc0"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def ridge_svg(rt: RidgeTree) -> str:
    return star_svg(rt.star, rt)
