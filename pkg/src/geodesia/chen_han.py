"""Sequence-tree propagation from a source ("one angle one split" pruning)."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from . import _geom as g
from .mesh import MeshError, SurfaceMesh, SurfacePoint, point_at_vertex, unfold_across
from .unfolding import EdgeSequence, GeodesicPath, realize_geodesic


class DegeneracyError(RuntimeError):
    """The source is not in general position for the requested structure."""


class CHNode:
    __slots__ = (
        "edge", "face", "image", "interval", "parent", "depth", "children",
        "alive", "occupied", "shadow", "uid",
    )

    def __init__(self, edge, face, image, interval, parent, depth, shadow, uid):
        self.edge = edge
        self.face = face  # face the node arrives from; holds the image
        self.image = image
        self.interval = interval
        self.parent = parent
        self.depth = depth
        self.children: dict[int, CHNode] = {}
        self.alive = True
        self.occupied = -1
        self.shadow = shadow  # face across ``edge``
        self.uid = uid

    def edges(self) -> tuple[int, ...]:
        out = []
        v = self
        while v is not None:
            out.append(v.edge)
            v = v.parent
        return tuple(reversed(out))

    def anchor(self) -> int:
        v = self
        while v.parent is not None:
            v = v.parent
        return v.face

    def sequence(self) -> EdgeSequence:
        return EdgeSequence(self.anchor(), self.edges())

    def __repr__(self) -> str:
        return f"CHNode(edge={self.edge}, depth={self.depth}, I=({self.interval[0]:.4g}, {self.interval[1]:.4g}))"


@dataclass
class CHTree:
    mesh: SurfaceMesh
    source: SurfacePoint
    source_faces: dict  # face -> local coordinates of the source
    roots: list
    levels: list = field(default_factory=list)
    occupancy: dict = field(default_factory=dict)  # (edge, shadow face) -> (node, dist, image)
    vertex_candidates: dict = field(default_factory=dict)  # vertex -> list of (dist, node | None, face)
    forbidden_face: int | None = None
    degeneracies: list = field(default_factory=list)
    by_shadow: dict = field(default_factory=dict)

    def nodes(self):
        for level in self.levels:
            yield from level

    def alive_nodes(self):
        return (v for v in self.nodes() if v.alive)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def vertex_distance(self, a: int) -> float:
        c = self.vertex_candidates.get(a)
        return min(c, key=lambda x: x[0])[0] if c else math.inf


def _source_faces(mesh: SurfaceMesh, s: SurfacePoint) -> dict:
    return dict(mesh.faces_of_point(s))


def _check_source(s: SurfacePoint) -> None:
    if s.kind == "vertex":
        raise MeshError("vertex sources are not supported; perturb the source off the vertex")


def build_ch_tree(
    mesh: SurfaceMesh,
    s: SurfacePoint,
    forbidden_face: int | None = None,
    max_depth: int | None = None,
    prune_distance: bool | str = False,
    _allow_vertex: bool = False,
) -> CHTree:
    if not _allow_vertex:
        _check_source(s)
    if max_depth is None:
        max_depth = mesh.n_faces
    sf = _source_faces(mesh, s)
    tree = CHTree(mesh, s, sf, [], forbidden_face=forbidden_face)
    uid = 0
    level = []
    for f, S in sf.items():
        for a in mesh.faces[f]:
            tree.vertex_candidates.setdefault(a, []).append((g.dist(S, mesh.vertex_local(f, a)), None, f))
        if f == forbidden_face:
            continue
        for e in mesh.face_edges[f]:
            if s.kind == "edge" and e == s.ref:
                continue
            if s.kind == "vertex" and s.ref in mesh.edges[e]:
                continue
            node = CHNode(e, f, S, (0.0, 1.0), None, 1, mesh.other_face(e, f), uid)
            uid += 1
            level.append(node)
    tree.roots = list(level)
    if prune_distance:
        bound = _distance_bound(mesh, s, vertices_only=prune_distance == "vertices")
    else:
        bound = math.inf
    tie = mesh.tau("tie")
    while level and len(tree.levels) < max_depth:
        tree.levels.append(level)
        for v in level:
            tree.by_shadow.setdefault(v.shadow, []).append(v)
        if len(tree.levels) == max_depth:
            break
        for v in level:
            if v.alive:
                uid = _expand(tree, v, uid, tie, bound)
        level = [c for v in level if v.alive for c in v.children.values() if c.alive]
    return tree


def _distance_bound(mesh: SurfaceMesh, s: SurfacePoint, vertices_only: bool = False) -> float:
    """Upper bound on geodesic distances from s: edge-graph Dijkstra over the vertices.

    With ``vertices_only`` the bound only covers distances to polyhedron
    vertices; otherwise one edge length of slack covers every surface point.
    """
    dist = [math.inf] * mesh.n_vertices
    heap = []
    X = s.world(mesh)
    for f in _source_faces(mesh, s):
        for v in mesh.faces[f]:
            d = float(np.linalg.norm(mesh.vertices[v] - X))
            if d < dist[v]:
                dist[v] = d
                heapq.heappush(heap, (d, v))
    nbrs = mesh.vertex_neighbors()
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for w, l in nbrs[v]:
            if d + l < dist[w]:
                dist[w] = d + l
                heapq.heappush(heap, (d + l, w))
    slack = mesh.tau("pt")
    if not vertices_only:
        slack += max(mesh.edge_length(e) for e in range(mesh.n_edges))
    return max(dist) + slack


def _clip(Sp, P0, P1, X0, X1, sigma):
    """Sub-range of segment X0X1 lying in the cone from Sp through P0, P1."""
    lo, hi = 0.0, 1.0
    for P, sg in ((P0, sigma), (P1, -sigma)):
        f0 = sg * g.orient(Sp, P, X0)
        f1 = sg * g.orient(Sp, P, X1)
        if f0 >= 0 and f1 >= 0:
            continue
        if f0 < 0 and f1 < 0:
            return None
        r = f0 / (f0 - f1)
        if f0 < 0:
            lo = max(lo, r)
        else:
            hi = min(hi, r)
    if hi - lo <= 1e-13:
        return None
    return lo, hi


def _expand(tree: CHTree, v: CHNode, uid: int, tie: float, bound: float) -> int:
    mesh = tree.mesh
    F = v.shadow
    if F == tree.forbidden_face:
        return uid
    Sp = unfold_across(mesh, F, v.edge).apply(v.image)
    i, j = mesh.edges[v.edge]
    B, C = mesh.vertex_local(F, i), mesh.vertex_local(F, j)
    a0, a1 = v.interval
    P0, P1 = g.lerp(B, C, a0), g.lerp(B, C, a1)
    if bound < math.inf and g.seg_point_dist(Sp, P0, P1) > bound:
        v.alive = False
        return uid
    o = g.orient(Sp, P0, P1)
    if o == 0.0:
        tree.degeneracies.append(("flat-unfolding", v.uid))
        return uid
    sigma = 1.0 if o > 0 else -1.0
    a = mesh.opposite_vertex(F, v.edge)
    A = mesh.vertex_local(F, a)
    e_b = mesh.edge_index[(min(i, a), max(i, a))]
    e_c = mesh.edge_index[(min(j, a), max(j, a))]
    side_b = _clip(Sp, P0, P1, B, A, sigma)
    side_c = _clip(Sp, P0, P1, C, A, sigma)
    covers = sigma * g.orient(Sp, P0, A) > 0 and -sigma * g.orient(Sp, P1, A) > 0
    keep_b, keep_c = side_b is not None, side_c is not None
    if covers:
        dv = g.dist(Sp, A)
        tree.vertex_candidates.setdefault(a, []).append((dv, v, F))
        key = (v.edge, F)
        occ = tree.occupancy.get(key)
        if occ is not None and not occ[0].alive:
            occ = None
        if occ is None:
            _occupy(tree, key, v, dv, Sp, a)
        else:
            u, du, Su = occ
            d = g.sub(C, B)
            v_on_b = g.dot(g.sub(Sp, B), d) < g.dot(g.sub(Su, B), d)
            if abs(dv - du) <= tie:
                tree.degeneracies.append(("occupancy-tie", u.uid, v.uid))
                v_worse = Sp > Su
            else:
                v_worse = dv > du
            if v_worse:
                if v_on_b:
                    keep_c = False
                else:
                    keep_b = False
            else:
                victim = u.children.get(e_b if v_on_b else e_c)
                if victim is not None:
                    _kill(victim)
                    del u.children[victim.edge]
                u.occupied = -1
                _occupy(tree, key, v, dv, Sp, a)
    for keep, e, rng, X0 in ((keep_b, e_b, side_b, i), (keep_c, e_c, side_c, j)):
        if not keep:
            continue
        lo, hi = rng
        # segment parameter runs from the shared-edge endpoint to a
        if mesh.edges[e][0] == X0:
            iv = (lo, hi)
        else:
            iv = (1.0 - hi, 1.0 - lo)
        child = CHNode(e, F, Sp, iv, v, v.depth + 1, mesh.other_face(e, F), uid)
        uid += 1
        v.children[e] = child
    return uid


def _occupy(tree, key, v, dv, Sp, a) -> None:
    tree.occupancy[key] = (v, dv, Sp)
    v.occupied = a


def _kill(v: CHNode) -> None:
    stack = [v]
    while stack:
        x = stack.pop()
        x.alive = False
        stack.extend(x.children.values())


# -- queries ------------------------------------------------------------------


def _in_cone(mesh: SurfaceMesh, v: CHNode, Sp, T, slack: float) -> bool:
    F = v.shadow
    i, j = mesh.edges[v.edge]
    B, C = mesh.vertex_local(F, i), mesh.vertex_local(F, j)
    P0, P1 = g.lerp(B, C, v.interval[0]), g.lerp(B, C, v.interval[1])
    o = g.orient(Sp, P0, P1)
    if o == 0.0:
        return False
    sg = 1.0 if o > 0 else -1.0
    l0 = sg * g.orient(Sp, P0, T) / max(g.dist(Sp, P0), 1e-300)
    l1 = -sg * g.orient(Sp, P1, T) / max(g.dist(Sp, P1), 1e-300)
    return l0 >= -slack and l1 >= -slack


def node_image_in_shadow(mesh: SurfaceMesh, v: CHNode):
    return unfold_across(mesh, v.shadow, v.edge).apply(v.image)


def distance_candidates(tree: CHTree, t: SurfacePoint):
    """Sorted (length, node or None, face) candidates for straight paths to t."""
    mesh = tree.mesh
    slack = mesh.tau("pt")
    out = []
    for F, T in mesh.faces_of_point(t):
        if F in tree.source_faces:
            out.append((g.dist(tree.source_faces[F], T), None, F))
        for v in tree.by_shadow.get(F, ()):
            Sp = node_image_in_shadow(mesh, v)
            if _in_cone(mesh, v, Sp, T, slack):
                out.append((g.dist(Sp, T), v, F))
    out.sort(key=lambda x: (x[0], x[1].uid if x[1] is not None else -1))
    return out


def path_from_node(tree: CHTree, v: CHNode | None, face: int, t: SurfacePoint):
    mesh = tree.mesh
    if v is None:
        seq = EdgeSequence(face, ())
    else:
        seq = v.sequence()
    return realize_geodesic(mesh, tree.source, t, seq)


def tree_distance(tree: CHTree, t: SurfacePoint):
    for d, v, F in distance_candidates(tree, t):
        path = path_from_node(tree, v, F, t)
        if path is not None:
            return path.length, path
    raise DegeneracyError("no realizable path found to the target")


def _same_point(mesh: SurfaceMesh, s: SurfacePoint, t: SurfacePoint) -> bool:
    return float(np.linalg.norm(s.world(mesh) - t.world(mesh))) <= mesh.tau("pt")


def geodesic_distance(mesh: SurfaceMesh, s: SurfacePoint, t: SurfacePoint, tree: CHTree | None = None):
    """Exact geodesic distance and a shortest path between two surface points."""
    if _same_point(mesh, s, t):
        return 0.0, GeodesicPath(s, t, EdgeSequence(s.face, ()), [], 0.0)
    if tree is None:
        if s.kind == "vertex" and t.kind != "vertex":
            d, p = geodesic_distance(mesh, t, s)
            return d, _reverse(mesh, p)
        tree = build_ch_tree(mesh, s, _allow_vertex=True)
    return tree_distance(tree, t)


def _reverse(mesh: SurfaceMesh, p: GeodesicPath) -> GeodesicPath:
    return GeodesicPath(p.target, p.source, p.sequence.reverse(mesh), list(reversed(p.crossings)), p.length)


def shortest_vertex_paths(mesh: SurfaceMesh, s: SurfacePoint, tree: CHTree | None = None) -> list[GeodesicPath]:
    """One shortest path per polyhedron vertex; raises DegeneracyError on ties."""
    _check_source(s)
    if tree is None:
        tree = build_ch_tree(mesh, s)
    tie = mesh.tau("tie")
    out = []
    for a in range(mesh.n_vertices):
        cands = sorted(tree.vertex_candidates.get(a, []), key=lambda x: x[0])
        t = point_at_vertex(mesh, a)
        found = []
        for d, v, F in cands:
            if found and d > found[0][0] + tie:
                break
            p = path_from_node(tree, v, F, t)
            if p is None:
                continue
            if found and p.sequence.edges != found[0][1].sequence.edges:
                raise DegeneracyError(f"vertex {a} has two shortest paths from the source")
            if not found:
                found.append((p.length, p))
        if not found:
            raise DegeneracyError(f"no path to vertex {a}")
        out.append(found[0][1])
    return out


@dataclass
class IntervalSet:
    edge: int
    face: int
    intervals: list  # (lo, hi, EdgeSequence, image in ``face`` frame)

    def __len__(self) -> int:
        return len(self.intervals)

    def min_distance(self, mesh: SurfaceMesh, t_param: float, slack: float = 1e-12) -> float:
        T = mesh.edge_point_local(self.face, self.edge, t_param)
        best = math.inf
        for lo, hi, _, img in self.intervals:
            if lo - slack <= t_param <= hi + slack:
                best = min(best, g.dist(img, T))
        return best


def admissible_intervals(mesh: SurfaceMesh, s: SurfacePoint, target_edge: int, f1: int, tree: CHTree | None = None) -> IntervalSet:
    """Post-pruned f1-constrained interval set on ``target_edge``."""
    if s.kind != "edge":
        raise MeshError("the source must lie on an edge")
    if target_edge == s.ref:
        raise MeshError("target edge must differ from the source edge")
    f2 = mesh.other_face(target_edge, f1)
    if tree is None:
        tree = build_ch_tree(mesh, s, forbidden_face=f2)
    out = []
    for v in tree.alive_nodes():
        if v.edge != target_edge or v.face != f1:
            continue
        p = v.parent
        repeated = False
        while p is not None:
            if p.edge == target_edge:
                repeated = True
                break
            p = p.parent
        if repeated:
            continue
        out.append((v.interval[0], v.interval[1], v.sequence(), v.image))
    return IntervalSet(target_edge, f1, out)
