"""Planar Voronoi diagram of a few sites by half-plane clipping.

Every cell starts as a large box and is clipped by the bisector half-plane of
each other site. Each output side remembers which site (or box side) produced
it, which gives the Voronoi vertices as site triples and the Voronoi edges as
site pairs without any floating point matching.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import _geom as g


@dataclass
class VoronoiDiagram:
    sites: list
    cells: list  # per site: (polygon, labels) with labels[k] on side k -> k+1
    vertices: dict  # frozenset of 3 sites -> point
    edges: dict  # frozenset of 2 sites -> (key or None, key or None)

    def vertex(self, key):
        return self.vertices[key]

    def edge_segment(self, pair):
        a, b = self.edges[pair]
        return a, b


def _clip(poly, labels, si, sj, j):
    nx, ny = sj[0] - si[0], sj[1] - si[1]
    c = 0.5 * ((sj[0] ** 2 + sj[1] ** 2) - (si[0] ** 2 + si[1] ** 2))
    vals = [nx * p[0] + ny * p[1] - c for p in poly]
    if all(v <= 0 for v in vals):
        return poly, labels
    out, out_l = [], []
    m = len(poly)
    for k in range(m):
        a, b = poly[k], poly[(k + 1) % m]
        fa, fb = vals[k], vals[(k + 1) % m]
        if fa <= 0:
            out.append(a)
            out_l.append(labels[k])
            if fb > 0:
                t = fa / (fa - fb)
                out.append(g.lerp(a, b, t))
                out_l.append(("site", j))
        elif fb <= 0:
            t = fa / (fa - fb)
            out.append(g.lerp(a, b, t))
            out_l.append(labels[k])
    return out, out_l


def voronoi(sites, margin: float = 10.0) -> VoronoiDiagram:
    xs = [p[0] for p in sites]
    ys = [p[1] for p in sites]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
    x0, x1 = min(xs) - margin * span, max(xs) + margin * span
    y0, y1 = min(ys) - margin * span, max(ys) + margin * span
    box = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    cells = []
    for i, si in enumerate(sites):
        poly, labels = list(box), [("box", k) for k in range(4)]
        for j, sj in enumerate(sites):
            if j != i:
                poly, labels = _clip(poly, labels, si, sj, j)
        cells.append((poly, labels))
    acc: dict = {}
    edges: dict = {}
    for i, (poly, labels) in enumerate(cells):
        m = len(poly)
        keys = []
        for k in range(m):
            lin, lout = labels[k - 1], labels[k]
            if lin[0] == "site" and lout[0] == "site":
                key = frozenset((i, lin[1], lout[1]))
                acc.setdefault(key, []).append(poly[k])
                keys.append(key)
            else:
                keys.append(None)
        for k in range(m):
            lab = labels[k]
            if lab[0] != "site":
                continue
            pair = frozenset((i, lab[1]))
            edges.setdefault(pair, (keys[k], keys[(k + 1) % m]))
    vertices = {}
    for key, pts in acc.items():
        vertices[key] = (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
    return VoronoiDiagram(list(sites), cells, vertices, edges)
