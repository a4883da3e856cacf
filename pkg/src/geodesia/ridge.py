"""Ridge trees: the source-image Voronoi diagram restricted to the kernel, pulled back to the surface."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import _geom as g
from .chen_han import DegeneracyError
from .mesh import SurfaceMesh, SurfacePoint, point_on_edge
from .star import StarUnfolding, build_star_unfolding
from .voronoi import voronoi


@dataclass
class RidgeVertex:
    kind: str  # "leaf", "deg2" or "deg3"
    face: int
    xy: tuple
    star: tuple
    ref: int = -1  # polyhedron vertex (leaf) or edge (deg2)
    param: float = math.nan  # position along the edge for deg2 vertices
    sites: tuple = ()
    generators: list = field(default_factory=list)  # deg3: (sequence, final face, site)

    @property
    def npaths(self) -> int:
        return len(self.sites)


@dataclass
class Ridge:
    sites: tuple  # the two source images equidistant along the ridge
    ends: tuple  # (vertex id, vertex id); leaf ridges start at the leaf
    chain: list  # vertex ids from ends[0] to ends[1], including degree-2 crossings
    pieces: list  # (face, star point a, star point b) per straight piece


@dataclass
class RidgeTree:
    source: SurfacePoint
    star: StarUnfolding
    vertices: list
    ridges: list
    source_edge: int | None

    @property
    def mesh(self) -> SurfaceMesh:
        return self.star.mesh

    def edges(self):
        """Straight ridge segments between consecutive tree vertices."""
        for r in self.ridges:
            for a, b in zip(r.chain, r.chain[1:]):
                yield a, b

    def degree(self):
        deg = [0] * len(self.vertices)
        for a, b in self.edges():
            deg[a] += 1
            deg[b] += 1
        return deg

    def deg3(self) -> list[int]:
        return [i for i, v in enumerate(self.vertices) if v.kind == "deg3"]

    def leaves(self) -> list[int]:
        return [i for i, v in enumerate(self.vertices) if v.kind == "leaf"]

    def is_tree(self) -> bool:
        n = len(self.vertices)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        m = 0
        for a, b in self.edges():
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
            m += 1
        return m == n - 1

    def crossings(self):
        """(edge, parameter, ridge index) for every ridge crossing of a polyhedron edge."""
        out = []
        for ri, r in enumerate(self.ridges):
            for vid in r.chain:
                v = self.vertices[vid]
                if v.kind == "deg2":
                    out.append((v.ref, v.param, ri))
        return out


def walk_segment(star: StarUnfolding, X0, X1, start: int | None = None):
    """Trace the star-plane segment X0X1 through the plates.

    Returns (pieces, crossings): pieces are (plate id, lam0, lam1); crossings are
    (edge id, lam, plate before, plate after).
    """
    mesh = star.mesh
    D = g.sub(X1, X0)
    L = g.norm(D)
    if start is None:
        delta = min(1e-7 * mesh.diameter / max(L, 1e-300), 0.25)
        start = star.locate_star_point(g.lerp(X0, X1, delta))
        if start is None:
            raise DegeneracyError("segment start is outside the star")
    pid = start
    lam = 0.0
    pieces, crossings = [], []
    for _ in range(100000):
        pl = star.plates[pid]
        poly = pl.star
        m = len(poly)
        best = None
        for k in range(m):
            A, B = poly[k], poly[(k + 1) % m]
            if g.cross(g.sub(B, A), D) >= 0:
                continue  # direction does not point out of this side
            hit = g.line_intersection(X0, X1, A, B)
            if hit is None:
                continue
            l, mu = hit
            if best is None or l < best[0] - 1e-12 or (l < best[0] + 1e-12 and pl.labels[k][0] == "edge"):
                best = (l, k)
        if best is None or best[0] >= 1.0 - 1e-12:
            pieces.append((pid, lam, 1.0))
            return pieces, crossings
        l, k = best
        pieces.append((pid, lam, l))
        lab = pl.labels[k]
        if lab[0] != "edge":
            raise DegeneracyError("segment leaves the star through a cut")
        nxt = pl.neighbors[k][0]
        crossings.append((lab[1], l, pid, nxt))
        pid, lam = nxt, max(lam, l)
    raise DegeneracyError("segment walk did not terminate")


def _edge_param_at(mesh: SurfaceMesh, face: int, e: int, xy) -> float:
    a, b = mesh.edge_endpoints_local(face, e)
    d = g.sub(b, a)
    return g.dot(g.sub(xy, a), d) / g.dot(d, d)


def generator_sequence(star: StarUnfolding, site: int, X, source_edge: int | None):
    """Edge sequence of the straight path from source image ``site`` to X, and its final face."""
    pieces, crossings = walk_segment(star, star.source_images[site], X)
    edges = tuple(c[0] for c in crossings)
    if source_edge is not None:
        edges = (source_edge,) + edges
    else:
        edges = (star.plates[pieces[0][0]].face,) + edges  # anchor face first
    return edges, star.plates[pieces[-1][0]].face


def build_ridge_tree(mesh: SurfaceMesh, s: SurfacePoint, star: StarUnfolding | None = None, trace: bool = True) -> RidgeTree:
    """Ridge tree of s. With ``trace=False`` only the degree-3 vertices are built."""
    if star is None:
        star = build_star_unfolding(mesh, s)
    n = star.n
    S = star.source_images
    vd = voronoi(S)
    kernel = star.kernel
    tol = mesh.tau("ridge")
    inside = {}
    for key, X in vd.vertices.items():
        d = _boundary_distance(X, kernel)
        if d <= tol:
            raise DegeneracyError("ridge vertex on the kernel boundary")
        if g.point_in_polygon(X, kernel):
            inside[key] = X
    keys = list(inside)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            if g.dist(inside[keys[a]], inside[keys[b]]) <= tol:
                raise DegeneracyError("four or more cocircular source images")
    source_edge = s.ref if s.kind == "edge" else None
    vertices: list[RidgeVertex] = []
    vid_of: dict = {}
    for key in sorted(keys, key=lambda k: tuple(sorted(k))):
        X = inside[key]
        pid = star.locate_star_point(X)
        if pid is None:
            raise DegeneracyError("ridge vertex outside the star")
        face, xy = star.to_surface(pid, X)
        sites = tuple(sorted(key))
        gens = [generator_sequence(star, i, X, source_edge) + (i,) for i in sites]
        vid_of[key] = len(vertices)
        vertices.append(RidgeVertex("deg3", face, xy, X, sites=sites, generators=gens))
    leaf_of = {}
    for i, v in enumerate(star.order):
        P = star.vertex_images[v]
        f = mesh.vertex_faces(v)[0]
        leaf_of[i] = len(vertices)
        vertices.append(RidgeVertex("leaf", f, mesh.vertex_local(f, v), P, ref=v, sites=(i, (i + 1) % n)))
    ridges_spec = []
    for pair, (ka, kb) in vd.edges.items():
        ia, ib = ka in inside, kb in inside
        i, j = sorted(pair)
        consecutive = (j - i) % n == 1 or (i - j) % n == 1
        if ia and ib:
            if consecutive:
                raise DegeneracyError("leaf ridge between two interior vertices")
            ridges_spec.append(((i, j), vid_of[ka], vid_of[kb]))
        elif consecutive:
            if not (ia or ib):
                raise DegeneracyError("leaf ridge without an interior vertex")
            # p_k lies between s_k and s_{k+1}
            k = i if (i + 1) % n == j else j
            ridges_spec.append(((i, j), leaf_of[k], vid_of[ka if ia else kb]))
    if not trace:
        return RidgeTree(s, star, vertices, [], source_edge)
    ridges = []
    for sites, a, b in ridges_spec:
        ridges.append(_trace_ridge(star, vertices, sites, a, b))
    rt = RidgeTree(s, star, vertices, ridges, source_edge)
    _check_degrees(rt)
    return rt


def _boundary_distance(X, poly) -> float:
    n = len(poly)
    return min(g.seg_point_dist(X, poly[i], poly[(i + 1) % n]) for i in range(n))


def _trace_ridge(star: StarUnfolding, vertices, sites, a: int, b: int) -> Ridge:
    mesh = star.mesh
    A, B = vertices[a].star, vertices[b].star
    pieces, crossings = walk_segment(star, A, B)
    chain = [a]
    for e, lam, p0, p1 in crossings:
        X = g.lerp(A, B, lam)
        face, xy = star.to_surface(p0, X)
        t = _edge_param_at(mesh, face, e, xy)
        chain.append(len(vertices))
        vertices.append(RidgeVertex("deg2", face, xy, X, ref=e, param=t, sites=tuple(sites)))
    chain.append(b)
    out_pieces = [(star.plates[pid].face, g.lerp(A, B, l0), g.lerp(A, B, l1)) for pid, l0, l1 in pieces]
    return Ridge(tuple(sites), (a, b), chain, out_pieces)


def _check_degrees(rt: RidgeTree) -> None:
    deg = rt.degree()
    for i, v in enumerate(rt.vertices):
        want = {"leaf": 1, "deg2": 2, "deg3": 3}[v.kind]
        if deg[i] != want:
            raise DegeneracyError(f"ridge tree vertex of kind {v.kind} has degree {deg[i]}")


# -- derived data --------------------------------------------------------------------


def sigma_s(rt: RidgeTree) -> set[tuple[int, ...]]:
    """Prefix closure of the edge sequences of the shortest paths to high-degree vertices."""
    out = set()
    for v in rt.vertices:
        for seq, _face, _site in v.generators:
            for k in range(1, len(seq) + 1):
                out.add(seq[:k])
    return out


def signature_items(rt: RidgeTree, crossings: bool = True) -> list:
    labels = {}
    for i, v in enumerate(rt.vertices):
        if v.kind == "deg3":
            labels[i] = ("d", v.face, tuple(sorted((seq, f) for seq, f, _ in v.generators)))
        elif v.kind == "leaf":
            labels[i] = ("l", v.ref)
    items = []
    for r in rt.ridges:
        a, b = r.ends
        crossed = tuple(rt.vertices[c].ref for c in r.chain[1:-1]) if crossings else ()
        items.append((labels[a], labels[b], crossed))
    return items


def signature_hash(items, crossings: bool = True) -> str:
    """Canonical digest of (label, label, crossed edges) ridge descriptors."""
    canon = []
    for la, lb, crossed in items:
        crossed = tuple(crossed) if crossings else ()
        if lb < la:
            la, lb, crossed = lb, la, crossed[::-1]
        canon.append((la, lb, crossed))
    canon.sort()
    return hashlib.sha1(repr(canon).encode()).hexdigest()


def ridge_signature(rt: RidgeTree) -> str:
    """Digest of tree shape, vertex classes, generators and face placements."""
    return signature_hash(signature_items(rt))


def ridge_core_signature(rt: RidgeTree) -> str:
    """Like ridge_signature but blind to where ridges cross polyhedron edges."""
    return signature_hash(signature_items(rt, crossings=False), crossings=False)


def fresh_ridge_tree(mesh: SurfaceMesh, e: int, u: float, rng=None, retries: int = 5, trace: bool = True):
    """Ridge tree for s at parameter u on edge e, jittering u on degeneracy."""
    last = None
    for attempt in range(max(retries, 1)):
        uu = u if attempt == 0 else u + 1e-9 * (rng.standard_normal() if rng is not None else attempt)
        try:
            return build_ridge_tree(mesh, point_on_edge(mesh, e, uu), trace=trace), uu
        except DegeneracyError as exc:
            last = exc
    raise last


def ridge_signature_at(mesh: SurfaceMesh, e: int, u: float, rng=None) -> str:
    rt, _ = fresh_ridge_tree(mesh, e, u, rng)
    return ridge_signature(rt)


def sample_ridge_points(rt: RidgeTree, count: int, rng) -> list:
    """Random points on ridge pieces: (star point, sites, face)."""
    segs = []
    for r in rt.ridges:
        for face, A, B in r.pieces:
            segs.append((g.dist(A, B), r.sites, face, A, B))
    w = np.array([s[0] for s in segs])
    idx = rng.choice(len(segs), size=count, p=w / w.sum())
    out = []
    for i in idx:
        _, sites, face, A, B = segs[i]
        out.append((g.lerp(A, B, float(rng.uniform())), sites, face))
    return out
