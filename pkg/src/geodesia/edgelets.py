"""Edgelets and stable source images.

An edgelet is a maximal piece of an edge not crossed by the ridge tree of any
polyhedron vertex. The ridge tree of a vertex v is approximated by the ridge
tree of a point pushed a short distance off v along the bisector of one of its
face angles; crossings that land next to v itself are offset artifacts and are
dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _geom as g
from .chen_han import DegeneracyError
from .mesh import SurfaceMesh, locate, point_on_edge
from .ridge import build_ridge_tree
from .star import build_star_unfolding

OFFSET = 1e-6
NEAR_VERTEX = 1e-4


@dataclass
class EdgeletPartition:
    mesh: SurfaceMesh
    breakpoints: dict  # edge -> sorted parameters
    origins: dict = field(default_factory=dict)  # edge -> vertex whose ridge tree made each breakpoint

    def edgelets(self, e: int) -> list[tuple[float, float]]:
        b = [0.0] + list(self.breakpoints.get(e, ())) + [1.0]
        return list(zip(b, b[1:]))

    def count(self) -> int:
        return sum(len(self.edgelets(e)) for e in range(self.mesh.n_edges))

    def inside(self, e: int, lo: float, hi: float) -> int:
        """Number of breakpoints strictly inside (lo, hi)."""
        return sum(1 for t in self.breakpoints.get(e, ()) if lo < t < hi)


def offset_source(mesh: SurfaceMesh, v: int, k: int = 0, scale: float = OFFSET):
    """A point at distance scale * diameter from v along the bisector of its k-th face angle."""
    f = mesh.vertex_faces(v)[k % len(mesh.vertex_faces(v))]
    c = mesh.corner_index(f, v)
    cs = mesh.corners[f]
    P, A, B = cs[c], cs[(c + 1) % 3], cs[(c + 2) % 3]
    ua = g.scale(g.sub(A, P), 1.0 / g.dist(A, P))
    ub = g.scale(g.sub(B, P), 1.0 / g.dist(B, P))
    d = g.add(ua, ub)
    d = g.scale(d, scale * mesh.diameter / g.norm(d))
    return locate(mesh, f, g.add(P, d))


def vertex_ridge_crossings(mesh: SurfaceMesh, v: int) -> list[tuple[int, float]]:
    """(edge, parameter) where the ridge tree of vertex v crosses polyhedron edges."""
    last = None
    for k in range(len(mesh.vertex_faces(v))):
        try:
            rt = build_ridge_tree(mesh, offset_source(mesh, v, k))
            break
        except DegeneracyError as exc:
            last = exc
    else:
        raise last
    X = mesh.vertices[v]
    out = []
    for e, t, _ in rt.crossings():
        i, j = mesh.edges[e]
        P = mesh.vertices[i] + t * (mesh.vertices[j] - mesh.vertices[i])
        if np.linalg.norm(P - X) <= NEAR_VERTEX * mesh.diameter:
            continue
        out.append((e, t))
    return out


def compute_edgelets(mesh: SurfaceMesh, snap: float = 1e-9) -> EdgeletPartition:
    per_edge: dict[int, list] = {}
    for v in range(mesh.n_vertices):
        for e, t in vertex_ridge_crossings(mesh, v):
            per_edge.setdefault(e, []).append((t, v))
    breakpoints, origins = {}, {}
    for e, items in per_edge.items():
        items.sort()
        merged = []
        for t, v in items:
            if merged and t - merged[-1][0] <= snap:
                merged[-1][1].append(v)
                continue
            merged.append((t, [v]))
        breakpoints[e] = [t for t, _ in merged]
        origins[e] = [vs for _, vs in merged]
    return EdgeletPartition(mesh, breakpoints, origins)


class ProbeGrid:
    """Source-image names at a fixed grid of parameters along one edge.

    Segments are probed only at grid points, so a sub-segment is always probed
    at a subset of its parent's points and stability is monotone under nesting.
    """

    def __init__(self, mesh: SurfaceMesh, e: int, resolution: int = 256, jitter: float = 1e-9):
        self.mesh = mesh
        self.edge = e
        self.resolution = resolution
        self.jitter = jitter
        self._cache: dict[int, frozenset] = {}

    def param(self, k: int) -> float:
        return (k + 0.5) / self.resolution

    def indices(self, lo: float, hi: float) -> range:
        M = self.resolution
        a = max(0, math.ceil(lo * M - 0.5))
        b = min(M - 1, math.floor(hi * M - 0.5))
        return range(a, b + 1)

    def names(self, k: int) -> frozenset:
        if k not in self._cache:
            u = self.param(k)
            last = None
            for attempt in range(6):
                uu = u + self.jitter * attempt * (-1) ** attempt
                try:
                    star = build_star_unfolding(self.mesh, point_on_edge(self.mesh, self.edge, uu))
                    self._cache[k] = frozenset(star.source_image_ids())
                    break
                except DegeneracyError as exc:
                    last = exc
            else:
                raise last
        return self._cache[k]


def stable_source_images(mesh: SurfaceMesh, e: int, lo: float, hi: float, m: int = 8, grid: ProbeGrid | None = None) -> frozenset:
    """Names (p_prev, p_next) of source images whose boundary neighbours stay fixed over [lo, hi]."""
    if m < 2:
        raise ValueError("need at least two probes")
    if grid is None:
        res = 1 << max(1, math.ceil(math.log2(m / max(hi - lo, 1e-12))))
        grid = ProbeGrid(mesh, e, res)
    ks = grid.indices(lo, hi)
    if len(ks) < m:
        raise ValueError(f"segment holds {len(ks)} grid probes, fewer than {m}")
    out = None
    for k in ks:
        names = grid.names(k)
        out = names if out is None else out & names
    return out


@dataclass
class CuttingCell:
    lo: float
    hi: float
    level: int
    parent: "CuttingCell | None"
    stable: frozenset = frozenset()
    new: frozenset = frozenset()
    crossings_parent: int = 0


def cutting_hierarchy(mesh: SurfaceMesh, e: int, levels: int = 3, branching: int = 2, grid: ProbeGrid | None = None,
                      edgelets: EdgeletPartition | None = None) -> list[list[CuttingCell]]:
    """Nested 1-D cuttings of edge e with per-cell stable sets.

    Each cell records S (stable over the cell), S' = S minus the parent's S and
    the number of edgelet breakpoints inside the parent cell.
    """
    if grid is None:
        grid = ProbeGrid(mesh, e, 4 * branching ** levels * 8)
    root = CuttingCell(0.0, 1.0, 0, None)
    root.stable = stable_source_images(mesh, e, 0.0, 1.0, 2, grid)
    root.new = root.stable
    out = [[root]]
    for lev in range(1, levels + 1):
        row = []
        for parent in out[-1]:
            w = (parent.hi - parent.lo) / branching
            for b in range(branching):
                c = CuttingCell(parent.lo + b * w, parent.lo + (b + 1) * w, lev, parent)
                c.stable = stable_source_images(mesh, e, c.lo, c.hi, 2, grid)
                c.new = c.stable - parent.stable
                if edgelets is not None:
                    c.crossings_parent = edgelets.inside(e, parent.lo, parent.hi)
                row.append(c)
        out.append(row)
    return out


def ancestors_union(cell: CuttingCell) -> frozenset:
    out = frozenset()
    while cell is not None:
        out |= cell.new
        cell = cell.parent
    return out
