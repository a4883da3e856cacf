"""Triangulated convex surfaces: OFF I/O, validation, face frames and unfolding motions."""
from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _geom as g
from .tolerance import DEFAULT, Tolerances


class MeshError(ValueError):
    pass


class OFFParseError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class DegenerateFaceError(MeshError):
    pass


class RigidMotion2D:
    """Rotation by (c, s) followed by translation (tx, ty)."""

    __slots__ = ("c", "s", "tx", "ty")

    def __init__(self, c: float = 1.0, s: float = 0.0, tx: float = 0.0, ty: float = 0.0):
        self.c = c
        self.s = s
        self.tx = tx
        self.ty = ty

    @classmethod
    def identity(cls) -> "RigidMotion2D":
        return cls()

    def apply(self, p):
        x, y = p
        return (self.c * x - self.s * y + self.tx, self.s * x + self.c * y + self.ty)

    def apply_vec(self, v):
        x, y = v
        return (self.c * x - self.s * y, self.s * x + self.c * y)

    def compose(self, other: "RigidMotion2D") -> "RigidMotion2D":
        """self after other."""
        c = self.c * other.c - self.s * other.s
        s = self.s * other.c + self.c * other.s
        tx, ty = self.apply((other.tx, other.ty))
        return RigidMotion2D(c, s, tx, ty)

    def inverse(self) -> "RigidMotion2D":
        c, s = self.c, -self.s
        tx = -(c * self.tx - s * self.ty)
        ty = -(s * self.tx + c * self.ty)
        return RigidMotion2D(c, s, tx, ty)

    @property
    def angle(self) -> float:
        return math.atan2(self.s, self.c)

    @property
    def det(self) -> float:
        return self.c * self.c + self.s * self.s

    def matrix(self) -> np.ndarray:
        return np.array([[self.c, -self.s, self.tx], [self.s, self.c, self.ty], [0.0, 0.0, 1.0]])

    def __repr__(self) -> str:
        return f"RigidMotion2D(angle={self.angle:.6g}, t=({self.tx:.6g}, {self.ty:.6g}))"


@dataclass(frozen=True)
class SurfacePoint:
    face: int
    xy: tuple[float, float]
    kind: str  # "vertex" | "edge" | "face"
    ref: int = -1  # vertex or edge id when kind is not "face"

    def world(self, mesh: "SurfaceMesh") -> np.ndarray:
        return mesh.to_world(self.face, self.xy)


@dataclass
class ConvexityReport:
    ok: bool
    violations: list = field(default_factory=list)  # (vertex, face, signed distance)

    @property
    def offending_vertices(self) -> set[int]:
        return {v for v, _, _ in self.violations}

    @property
    def offending_faces(self) -> set[int]:
        return {f for _, f, _ in self.violations}


class SurfaceMesh:
    """Closed triangulated 2-manifold with outward-oriented faces.

    Face ``f`` has corners ``faces[f] = (a, b, c)`` counter-clockwise seen from
    outside. Its frame has the origin at ``a`` and the x-axis toward ``b``.
    ``face_edges[f][k]`` joins corner ``k`` and corner ``k + 1``.
    Edges are stored as ``(i, j)`` with ``i < j`` and are parametrized from
    ``i`` (t = 0) to ``j`` (t = 1).
    """

    def __init__(self, vertices, faces, tolerances: Tolerances = DEFAULT):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        self.vertices = V
        self.tolerances = tolerances
        lo, hi = V.min(axis=0), V.max(axis=0)
        self.diameter = float(_diameter(V)) if len(V) > 1 else 0.0
        if self.diameter <= 0.0:
            raise MeshError("mesh has zero extent")
        tris = [tuple(int(i) for i in f) for f in faces]
        for f in tris:
            if len(f) != 3 or len(set(f)) != 3:
                raise DegenerateFaceError(f"face {f} is not a proper triangle")
            for i in f:
                if not 0 <= i < len(V):
                    raise OFFParseError(f"face index {i} out of range")
        self._bbox = (lo, hi)
        tris = _orient_consistently(V, tris)
        self.faces: tuple[tuple[int, int, int], ...] = tuple(tris)
        self._build_edges()
        self._build_frames()
        self._build_motions()
        self._vertex_faces = None
        self._neighbors = None

    # -- construction helpers -------------------------------------------
    def _build_edges(self) -> None:
        edge_index: dict[tuple[int, int], int] = {}
        edges: list[tuple[int, int]] = []
        incident: list[list[int]] = []
        face_edges = []
        for fi, (a, b, c) in enumerate(self.faces):
            fe = []
            for u, v in ((a, b), (b, c), (c, a)):
                key = (u, v) if u < v else (v, u)
                eid = edge_index.get(key)
                if eid is None:
                    eid = len(edges)
                    edge_index[key] = eid
                    edges.append(key)
                    incident.append([])
                incident[eid].append(fi)
                fe.append(eid)
            face_edges.append(tuple(fe))
        for eid, fl in enumerate(incident):
            if len(fl) != 2:
                raise NonManifoldError(f"edge {edges[eid]} has {len(fl)} incident faces")
        self.edges = tuple(edges)
        self.edge_index = edge_index
        self.edge_faces = tuple((fl[0], fl[1]) for fl in incident)
        self.face_edges = tuple(face_edges)
        nV, nE, nF = len(self.vertices), len(edges), len(self.faces)
        used = {i for f in self.faces for i in f}
        if len(used) != nV:
            raise MeshError("mesh has isolated vertices")
        if nV - nE + nF != 2:
            raise NonManifoldError(f"Euler characteristic {nV - nE + nF} != 2")

    def _build_frames(self) -> None:
        V = self.vertices
        origins, ex, ey, normals, corners, areas = [], [], [], [], [], []
        min_area = self.tolerances.area * self.diameter**2
        for a, b, c in self.faces:
            pa, pb, pc = V[a], V[b], V[c]
            n = np.cross(pb - pa, pc - pa)
            area2 = float(np.linalg.norm(n))
            if area2 * 0.5 <= min_area:
                raise DegenerateFaceError(f"face {(a, b, c)} has area {area2 * 0.5:.3g}")
            n = n / area2
            x = pb - pa
            x = x / np.linalg.norm(x)
            y = np.cross(n, x)
            origins.append(pa)
            ex.append(x)
            ey.append(y)
            normals.append(n)
            corners.append(
                (
                    (0.0, 0.0),
                    (float(np.dot(pb - pa, x)), 0.0),
                    (float(np.dot(pc - pa, x)), float(np.dot(pc - pa, y))),
                )
            )
            areas.append(area2 * 0.5)
        self.origins = np.array(origins)
        self.ex = np.array(ex)
        self.ey = np.array(ey)
        self.normals = np.array(normals)
        self.corners = tuple(corners)
        self.face_areas = tuple(areas)
        self.area = float(sum(areas))

    def _build_motions(self) -> None:
        self._motions: dict[tuple[int, int], RigidMotion2D] = {}
        for eid, (f0, f1) in enumerate(self.edge_faces):
            self._motions[(f0, eid)] = self._compute_motion(f0, f1, eid)
            self._motions[(f1, eid)] = self._compute_motion(f1, f0, eid)

    def _compute_motion(self, f: int, h: int, eid: int) -> RigidMotion2D:
        i, j = self.edges[eid]
        pf, qf = self.vertex_local(f, i), self.vertex_local(f, j)
        ph, qh = self.vertex_local(h, i), self.vertex_local(h, j)
        af = math.atan2(qf[1] - pf[1], qf[0] - pf[0])
        ah = math.atan2(qh[1] - ph[1], qh[0] - ph[0])
        ang = af - ah
        c, s = math.cos(ang), math.sin(ang)
        rx, ry = c * ph[0] - s * ph[1], s * ph[0] + c * ph[1]
        return RigidMotion2D(c, s, pf[0] - rx, pf[1] - ry)

    # -- basic queries ---------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def tau(self, name: str) -> float:
        return getattr(self.tolerances, name) * self.diameter

    def corner_index(self, f: int, v: int) -> int:
        return self.faces[f].index(v)

    def vertex_local(self, f: int, v: int):
        return self.corners[f][self.faces[f].index(v)]

    def other_face(self, e: int, f: int) -> int:
        f0, f1 = self.edge_faces[e]
        if f == f0:
            return f1
        if f == f1:
            return f0
        raise MeshError(f"edge {e} is not incident to face {f}")

    def opposite_vertex(self, f: int, e: int) -> int:
        i, j = self.edges[e]
        for v in self.faces[f]:
            if v != i and v != j:
                return v
        raise MeshError("degenerate face")

    def edge_endpoints_local(self, f: int, e: int):
        i, j = self.edges[e]
        return self.vertex_local(f, i), self.vertex_local(f, j)

    def edge_point_local(self, f: int, e: int, t: float):
        a, b = self.edge_endpoints_local(f, e)
        return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)

    def edge_length(self, e: int) -> float:
        i, j = self.edges[e]
        return float(np.linalg.norm(self.vertices[i] - self.vertices[j]))

    def shared_edge(self, f: int, h: int):
        for e in self.face_edges[f]:
            if h in self.edge_faces[e]:
                return e
        return None

    def to_world(self, f: int, p) -> np.ndarray:
        return self.origins[f] + p[0] * self.ex[f] + p[1] * self.ey[f]

    def to_local(self, f: int, X) -> tuple[float, float]:
        d = np.asarray(X, dtype=float) - self.origins[f]
        return (float(d @ self.ex[f]), float(d @ self.ey[f]))

    def unfold_across(self, from_face: int, shared_edge: int) -> RigidMotion2D:
        return unfold_across(self, from_face, shared_edge)

    def vertex_faces(self, v: int) -> list[int]:
        """Faces around ``v`` in counter-clockwise order seen from outside."""
        if self._vertex_faces is None:
            self._vertex_faces = [self._ring(u) for u in range(self.n_vertices)]
        return self._vertex_faces[v]

    def _ring(self, v: int) -> list[int]:
        start = next(f for f, tri in enumerate(self.faces) if v in tri)
        ring = [start]
        f = start
        while True:
            tri = self.faces[f]
            k = tri.index(v)
            prev = tri[(k + 2) % 3]
            # ccw around v: cross the edge (v, prev) into the next face
            e = self.edge_index[(min(v, prev), max(v, prev))]
            f = self.other_face(e, f)
            if f == start:
                return ring
            ring.append(f)

    def vertex_neighbors(self) -> list[list[tuple[int, float]]]:
        """Per vertex: (neighbour, edge length) pairs."""
        if self._neighbors is None:
            nb = [[] for _ in range(self.n_vertices)]
            for e, (i, j) in enumerate(self.edges):
                l = self.edge_length(e)
                nb[i].append((j, l))
                nb[j].append((i, l))
            self._neighbors = nb
        return self._neighbors

    def vertex_edges(self, v: int) -> list[int]:
        return [e for e, (i, j) in enumerate(self.edges) if i == v or j == v]

    def face_angle(self, f: int, v: int) -> float:
        k = self.corner_index(f, v)
        p = self.corners[f][k]
        a = self.corners[f][(k + 1) % 3]
        b = self.corners[f][(k + 2) % 3]
        u, w = g.sub(a, p), g.sub(b, p)
        return math.atan2(abs(g.cross(u, w)), g.dot(u, w))

    def total_angle(self, v: int) -> float:
        return sum(self.face_angle(f, v) for f in self.vertex_faces(v))

    def faces_of_point(self, p: SurfacePoint) -> list[tuple[int, tuple[float, float]]]:
        """All (face, local coordinates) representations of ``p``."""
        if p.kind == "face":
            return [(p.face, p.xy)]
        X = self.to_world(p.face, p.xy)
        if p.kind == "edge":
            fs = self.edge_faces[p.ref]
        else:
            fs = self.vertex_faces(p.ref)
        out = []
        for f in fs:
            out.append((f, p.xy) if f == p.face else (f, self.to_local(f, X)))
        return out

    def sha256(self) -> str:
        return hashlib.sha256(dump_off(self).encode()).hexdigest()


def _diameter(V: np.ndarray) -> float:
    if len(V) <= 2000:
        d = V[:, None, :] - V[None, :, :]
        return float(np.sqrt((d * d).sum(-1)).max())
    from scipy.spatial import ConvexHull

    H = V[ConvexHull(V).vertices]
    return _diameter(H)


def _orient_consistently(V: np.ndarray, tris: list[tuple[int, int, int]]):
    """Propagate a common orientation across edges, then make it outward."""
    edge_use: dict[tuple[int, int], list[int]] = {}
    for fi, (a, b, c) in enumerate(tris):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_use.setdefault((min(u, v), max(u, v)), []).append(fi)
    for key, fl in edge_use.items():
        if len(fl) != 2:
            raise NonManifoldError(f"edge {key} has {len(fl)} incident faces")
    tris = [list(t) for t in tris]
    done = [False] * len(tris)
    for seed in range(len(tris)):
        if done[seed]:
            continue
        done[seed] = True
        queue = deque([seed])
        while queue:
            f = queue.popleft()
            a, b, c = tris[f]
            for u, v in ((a, b), (b, c), (c, a)):
                for h in edge_use[(min(u, v), max(u, v))]:
                    if h == f or done[h]:
                        continue
                    # consistent orientation traverses the shared edge the other way
                    x, y, z = tris[h]
                    if (u, v) in ((x, y), (y, z), (z, x)):
                        tris[h] = [x, z, y]
                    done[h] = True
                    queue.append(h)
    vol = 0.0
    for a, b, c in tris:
        vol += float(np.dot(V[a], np.cross(V[b], V[c])))
    if vol < 0:
        tris = [[a, c, b] for a, b, c in tris]
    return [tuple(t) for t in tris]


# -- OFF I/O ---------------------------------------------------------------


def load_off(text: str, tolerances: Tolerances = DEFAULT) -> SurfaceMesh:
    tokens: list[str] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or not tokens[0].endswith("OFF"):
        raise OFFParseError("missing OFF header")
    pos = 1
    try:
        nv, nf = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3
        verts = []
        for _ in range(nv):
            verts.append([float(tokens[pos]), float(tokens[pos + 1]), float(tokens[pos + 2])])
            pos += 3
        polys = []
        for _ in range(nf):
            k = int(tokens[pos])
            idx = [int(x) for x in tokens[pos + 1 : pos + 1 + k]]
            if k < 3 or len(idx) != k:
                raise OFFParseError("bad face record")
            pos += 1 + k
            polys.append(idx)
    except (IndexError, ValueError) as exc:
        raise OFFParseError(f"malformed OFF data: {exc}") from None
    if nv <= 0 or nf <= 0:
        raise OFFParseError("empty mesh")
    tris = []
    for p in polys:
        for i in range(1, len(p) - 1):
            tris.append((p[0], p[i], p[i + 1]))
    return SurfaceMesh(verts, tris, tolerances)


def dump_off(mesh: SurfaceMesh) -> str:
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    for x, y, z in mesh.vertices:
        lines.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in mesh.faces:
        lines.append(f"3 {a} {b} {c}")
    return "\n".join(lines) + "\n"


def read_off(path: str, tolerances: Tolerances = DEFAULT) -> SurfaceMesh:
    with open(path) as fh:
        return load_off(fh.read(), tolerances)


# -- operations --------------------------------------------------------------


def validate_convex(mesh: SurfaceMesh) -> ConvexityReport:
    tol = mesh.tau("plane")
    V = mesh.vertices
    viol = []
    for f, tri in enumerate(mesh.faces):
        d = (V - mesh.origins[f]) @ mesh.normals[f]
        for v in np.nonzero(d > tol)[0]:
            if int(v) not in tri:
                viol.append((int(v), f, float(d[v])))
    return ConvexityReport(ok=not viol, violations=viol)


def unfold_across(mesh: SurfaceMesh, from_face: int, shared_edge: int) -> RigidMotion2D:
    """Motion taking the other face's frame into ``from_face``'s frame."""
    try:
        return mesh._motions[(from_face, shared_edge)]
    except KeyError:
        raise MeshError(f"edge {shared_edge} is not incident to face {from_face}") from None


def locate(mesh: SurfaceMesh, face_id: int, local_coords) -> SurfacePoint:
    if not 0 <= face_id < mesh.n_faces:
        raise MeshError(f"no face {face_id}")
    p = (float(local_coords[0]), float(local_coords[1]))
    tol = mesh.tau("pt")
    cs = mesh.corners[face_id]
    tri = mesh.faces[face_id]
    for k in range(3):
        if g.dist(p, cs[k]) <= tol:
            return SurfacePoint(face_id, cs[k], "vertex", tri[k])
    for k in range(3):
        a, b = cs[k], cs[(k + 1) % 3]
        ll = g.dist(a, b)
        if g.orient(a, b, p) / ll < -tol:
            raise MeshError(f"point {p} lies outside face {face_id}")
    for k in range(3):
        a, b = cs[k], cs[(k + 1) % 3]
        if abs(g.orient(a, b, p)) / g.dist(a, b) <= tol:
            return SurfacePoint(face_id, p, "edge", mesh.face_edges[face_id][k])
    return SurfacePoint(face_id, p, "face")


def point_on_edge(mesh: SurfaceMesh, e: int, t: float, face: int | None = None) -> SurfacePoint:
    f = mesh.edge_faces[e][0] if face is None else face
    xy = mesh.edge_point_local(f, e, t)
    return locate(mesh, f, xy)


def point_at_vertex(mesh: SurfaceMesh, v: int) -> SurfacePoint:
    f = mesh.vertex_faces(v)[0]
    return SurfacePoint(f, mesh.vertex_local(f, v), "vertex", v)


def point_in_face(mesh: SurfaceMesh, f: int, bary=(1 / 3, 1 / 3, 1 / 3)) -> SurfacePoint:
    cs = mesh.corners[f]
    x = sum(w * c[0] for w, c in zip(bary, cs))
    y = sum(w * c[1] for w, c in zip(bary, cs))
    return locate(mesh, f, (x, y))


def point_from_world(mesh: SurfaceMesh, X) -> SurfacePoint:
    """Locate a 3-D point lying on the surface."""
    X = np.asarray(X, dtype=float)
    best = None
    for f in range(mesh.n_faces):
        d = abs(float((X - mesh.origins[f]) @ mesh.normals[f]))
        if d > 1e-7 * mesh.diameter:
            continue
        p = mesh.to_local(f, X)
        l = g.barycentric(p, *mesh.corners[f])
        score = min(l)
        if best is None or score > best[0]:
            best = (score, f, p)
    if best is None or best[0] < -1e-7:
        raise MeshError("point is not on the surface")
    return locate(mesh, best[1], best[2])


def edge_param(mesh: SurfaceMesh, p: SurfacePoint) -> float:
    """Parameter of an edge point along its edge."""
    if p.kind != "edge":
        raise MeshError("point is not on an edge interior")
    f = p.face
    a, b = mesh.edge_endpoints_local(f, p.ref)
    d = g.sub(b, a)
    return g.dot(g.sub(p.xy, a), d) / g.dot(d, d)
