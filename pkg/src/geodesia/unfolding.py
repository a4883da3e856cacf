"""Edge sequences, unfolded strips and straight-line realization of geodesics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _geom as g
from .mesh import MeshError, RigidMotion2D, SurfaceMesh, SurfacePoint, unfold_across


class SequenceError(MeshError):
    pass


@dataclass(frozen=True)
class EdgeSequence:
    anchor: int
    edges: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.edges)

    def faces(self, mesh: SurfaceMesh) -> list[int]:
        return sequence_faces(mesh, self.anchor, self.edges)

    def last_face(self, mesh: SurfaceMesh) -> int:
        return self.faces(mesh)[-1]

    def reverse(self, mesh: SurfaceMesh) -> "EdgeSequence":
        return EdgeSequence(self.last_face(mesh), tuple(reversed(self.edges)))


@dataclass
class GeodesicPath:
    source: SurfacePoint
    target: SurfacePoint
    sequence: EdgeSequence
    crossings: list[SurfacePoint]
    length: float

    def polyline(self, mesh: SurfaceMesh) -> np.ndarray:
        pts = [self.source] + list(self.crossings) + [self.target]
        return np.array([p.world(mesh) for p in pts])

    def surface_length(self, mesh: SurfaceMesh) -> float:
        P = self.polyline(mesh)
        return float(np.linalg.norm(np.diff(P, axis=0), axis=1).sum())

    def to_json(self, mesh: SurfaceMesh) -> dict:
        return {
            "length": self.length,
            "anchor_face": self.sequence.anchor,
            "sequence": list(self.sequence.edges),
            "crossings": [[float(x) for x in p.world(mesh)] for p in self.crossings],
        }


@dataclass
class UnfoldedStrip:
    faces: list[int]
    motions: list[RigidMotion2D]
    polygon: list[tuple[float, float]] = field(default_factory=list)

    def face_image(self, mesh: SurfaceMesh, k: int):
        M = self.motions[k]
        return [M.apply(c) for c in mesh.corners[self.faces[k]]]


def sequence_faces(mesh: SurfaceMesh, anchor: int, edges) -> list[int]:
    faces = [anchor]
    f = anchor
    prev = None
    for e in edges:
        if e not in mesh.face_edges[f]:
            raise SequenceError(f"edge {e} is not on face {f}")
        if e == prev:
            raise SequenceError(f"edge {e} crossed twice in a row")
        f = mesh.other_face(e, f)
        faces.append(f)
        prev = e
    return faces


def strip_motions(mesh: SurfaceMesh, anchor: int, edges):
    """Faces of the strip and motions mapping each face frame into the anchor frame."""
    faces = sequence_faces(mesh, anchor, edges)
    motions = [RigidMotion2D.identity()]
    for k, e in enumerate(edges):
        motions.append(motions[-1].compose(unfold_across(mesh, faces[k], e)))
    return faces, motions


def compose_unfolding(mesh: SurfaceMesh, seq: EdgeSequence) -> UnfoldedStrip:
    faces, motions = strip_motions(mesh, seq.anchor, seq.edges)
    strip = UnfoldedStrip(faces, motions)
    strip.polygon = _strip_boundary(mesh, faces, motions, seq.edges)
    return strip


def _strip_boundary(mesh, faces, motions, edges):
    # identify vertex copies glued along the crossed edges
    parent: dict = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    for k, e in enumerate(edges):
        for v in mesh.edges[e]:
            a, b = find((k, v)), find((k + 1, v))
            if a != b:
                parent[a] = b
    succ = {}
    pos = {}
    for k, f in enumerate(faces):
        tri = mesh.faces[f]
        inner = set()
        if k > 0:
            inner.add(edges[k - 1])
        if k < len(edges):
            inner.add(edges[k])
        for c in range(3):
            u, w = tri[c], tri[(c + 1) % 3]
            cu, cw = find((k, u)), find((k, w))
            pos.setdefault(cu, motions[k].apply(mesh.corners[f][c]))
            pos.setdefault(cw, motions[k].apply(mesh.corners[f][(c + 1) % 3]))
            if mesh.face_edges[f][c] in inner:
                continue
            if cu in succ:
                raise SequenceError("strip boundary is not a simple cycle")
            succ[cu] = cw
    start = next(iter(succ))
    poly = [pos[start]]
    cur = succ[start]
    while cur != start:
        poly.append(pos[cur])
        cur = succ[cur]
        if len(poly) > len(succ):
            raise SequenceError("strip boundary is not a simple cycle")
    if len(poly) != len(succ):
        raise SequenceError("strip boundary has several components")
    return poly


def _in_face(mesh: SurfaceMesh, p: SurfacePoint, f: int, what: str):
    if p.face == f:
        return p.xy
    xy = mesh.to_local(f, p.world(mesh))
    X = mesh.to_world(f, xy)
    tol = 10 * mesh.tau("pt")
    if np.linalg.norm(X - p.world(mesh)) > tol or not g.point_in_convex(xy, mesh.corners[f], tol):
        raise SequenceError(f"{what} does not lie on face {f}")
    return xy


def realize_geodesic(mesh: SurfaceMesh, s: SurfacePoint, t: SurfacePoint, seq: EdgeSequence):
    """Straight-line path through the strip of ``seq``, or None when not realizable."""
    faces, motions = strip_motions(mesh, seq.anchor, seq.edges)
    S = _in_face(mesh, s, faces[0], "source")
    T = motions[-1].apply(_in_face(mesh, t, faces[-1], "target"))
    length = g.dist(S, T)
    if not seq.edges:
        return GeodesicPath(s, t, seq, [], length)
    tpt = mesh.tau("pt")
    if length <= tpt:
        return None
    lam_tol = mesh.tau("col") / length
    crossings = []
    last = -lam_tol
    for k, e in enumerate(seq.edges):
        a, b = mesh.edge_endpoints_local(faces[k], e)
        A, B = motions[k].apply(a), motions[k].apply(b)
        hit = g.line_intersection(S, T, A, B)
        if hit is None:
            return None
        lam, mu = hit
        mtol = tpt / g.dist(A, B)
        if not (mtol < mu < 1.0 - mtol):
            return None
        if lam < last - lam_tol or lam > 1.0 + lam_tol:
            return None
        last = max(last, lam)
        crossings.append(SurfacePoint(faces[k], mesh.edge_point_local(faces[k], e, mu), "edge", e))
    return GeodesicPath(s, t, seq, crossings, length)


def source_image(mesh: SurfaceMesh, s: SurfacePoint, seq: EdgeSequence):
    faces, motions = strip_motions(mesh, seq.anchor, seq.edges)
    S = _in_face(mesh, s, faces[0], "source")
    return motions[-1].inverse().apply(S)
