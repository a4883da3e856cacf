"""Kinetic maintenance of the ridge tree while the source slides along an edge.

Each degree-3 ridge vertex is the circumcenter of three source images. Every
image is affine in the edge parameter u, so all certificates are polynomials
in u of degree at most four:

* crossing: the vertex leaves its face through an edge line (degree 3);
* merge: the two endpoints of an interior ridge coincide (incircle, degree 4);
* vertex passage: a vertex adjacent to a leaf reaches that polyhedron vertex
  (degree 2). At such a moment the source crosses the ridge tree of that
  vertex and the two wrapped images of the leaf ridge unwrap.

Shortest-path edge sequences live in a trie (the sequence tree). Generators
are (trie node, face) pairs; crossing an edge either pops the last edge of the
sequence or pushes a child, and nodes are never removed.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from . import _geom as g
from .chen_han import DegeneracyError
from .mesh import RigidMotion2D, SurfaceMesh, SurfacePoint, point_on_edge
from .ridge import RidgeTree, fresh_ridge_tree, signature_hash
from .roots import padd, pderiv, pmul, peval, psub, pscale, sign_changes
from .unfolding import EdgeSequence

MERGE, CROSSING, PASSAGE = "merge", "crossing", "vertex"
_ORDER = {CROSSING: 0, PASSAGE: 1, MERGE: 2}
_EXCLUDE = 1e-8


class SweepError(RuntimeError):
    pass


class SequenceTree:
    """Trie of edge sequences starting with ``edge``; node 0 is the root."""

    def __init__(self, mesh: SurfaceMesh, edge: int):
        self.mesh = mesh
        self.edge = edge
        self.edge_of = [edge]
        self.parent = [-1]
        self.children: list[dict] = [{}]
        self.depth = [0]
        self.anchor = [-1]
        self.final_face = [-1]
        self.motion: list = [None]
        self.coef: list = [None]
        self.root_coef = {}
        i, j = mesh.edges[edge]
        for f in mesh.edge_faces[edge]:
            a, b = mesh.vertex_local(f, i), mesh.vertex_local(f, j)
            self.root_coef[f] = (a[0], a[1], b[0] - a[0], b[1] - a[1])

    def __len__(self) -> int:
        return len(self.edge_of)

    def sequence(self, v: int) -> tuple:
        out = []
        while v >= 0:
            out.append(self.edge_of[v])
            v = self.parent[v]
        return tuple(reversed(out))

    def edge_sequence(self, v: int, face: int) -> EdgeSequence:
        """The unfolding sequence of node v (source edge dropped, anchor face first)."""
        if v == 0:
            return EdgeSequence(face, ())
        return EdgeSequence(self.anchor[v], self.sequence(v)[1:])

    def sequences(self) -> set:
        return {self.sequence(v) for v in range(len(self))}

    def child(self, v: int, E: int, face_from: int, create: bool = True):
        c = self.children[v].get(E)
        if c is not None or not create:
            return c
        mesh = self.mesh
        if E in self.sequence(v):
            raise SweepError(f"sequence would repeat edge {E}")
        nxt = mesh.other_face(E, face_from)
        step = mesh.unfold_across(nxt, E)
        if v == 0:
            anchor, T = face_from, step
        else:
            if self.final_face[v] != face_from:
                raise SweepError("child requested from the wrong face")
            anchor, T = self.anchor[v], step.compose(self.motion[v])
        c = len(self.edge_of)
        self.edge_of.append(E)
        self.parent.append(v)
        self.children.append({})
        self.children[v][E] = c
        self.depth.append(self.depth[v] + 1)
        self.anchor.append(anchor)
        self.final_face.append(nxt)
        self.motion.append(T)
        a0, a1, d0, d1 = self.root_coef[anchor]
        p = T.apply((a0, a1))
        d = T.apply_vec((d0, d1))
        self.coef.append((p[0], p[1], d[0], d[1]))
        return c

    def find(self, seq: tuple) -> int | None:
        """Node of a sequence, or None when it is not in the tree."""
        if not seq or seq[0] != self.edge:
            return None
        v = 0
        for E in seq[1:]:
            v = self.children[v].get(E)
            if v is None:
                return None
        return v

    def insert(self, seq: tuple, final_face: int | None = None) -> int:
        if seq[0] != self.edge:
            raise SweepError("sequence does not start with the swept edge")
        v = 0
        if len(seq) == 1:
            return 0
        faces = self.mesh.edge_faces[self.edge]
        anchor = [f for f in faces if seq[1] in self.mesh.face_edges[f]]
        if len(anchor) != 1:
            raise SweepError("first crossed edge does not border the swept edge")
        face = anchor[0]
        for E in seq[1:]:
            v = self.child(v, E, face)
            face = self.final_face[v]
        if final_face is not None and face != final_face:
            raise SweepError("inserted sequence ends in an unexpected face")
        return v

    def gen_coef(self, gen) -> tuple:
        v, face = gen
        return self.root_coef[face] if v == 0 else self.coef[v]

    def image(self, gen, u: float):
        a0, a1, d0, d1 = self.gen_coef(gen)
        return (a0 + u * d0, a1 + u * d1)

    def move(self, gen, E: int):
        """Carry generator ``gen`` across edge E; returns (generator, created)."""
        v, F = gen
        mesh = self.mesh
        F2 = mesh.other_face(E, F)
        if v == 0:
            if E == self.edge:
                return (0, F2), False
            n = len(self)
            c = self.child(0, E, F)
            return (c, F2), len(self) > n
        if self.edge_of[v] == E:
            p = self.parent[v]
            if p != 0 and self.final_face[p] != F2:
                raise SweepError("pop lands in an unexpected face")
            if p == 0 and F2 not in self.root_coef:
                raise SweepError("pop to the root lands off the swept edge")
            return (p, F2), False
        if E == self.edge:
            raise SweepError("a shortest path cannot cross its own source edge")
        n = len(self)
        c = self.child(v, E, F)
        return (c, F2), len(self) > n

    def seq_move(self, gen, E: int):
        """Pure counterpart of move() on (sequence, face) pairs."""
        seq, F = gen
        F2 = self.mesh.other_face(E, F)
        if len(seq) == 1 and E == self.edge:
            return seq, F2
        if len(seq) > 1 and seq[-1] == E:
            return seq[:-1], F2
        if E in seq:
            raise SweepError(f"sequence would repeat edge {E}")
        return seq + (E,), F2

    def seq_coef(self, gen) -> tuple:
        """Image coefficients of a (sequence, face) pair, nodes created or not."""
        seq, face = gen
        if len(seq) == 1:
            return self.root_coef[face]
        mesh = self.mesh
        anchor = next(f for f in mesh.edge_faces[self.edge] if seq[1] in mesh.face_edges[f])
        T = RigidMotion2D.identity()
        f = anchor
        for E in seq[1:]:
            f2 = mesh.other_face(E, f)
            T = mesh.unfold_across(f2, E).compose(T)
            f = f2
        a0, a1, d0, d1 = self.root_coef[anchor]
        p, d = T.apply((a0, a1)), T.apply_vec((d0, d1))
        return (p[0], p[1], d[0], d[1])

    def to_json(self) -> dict:
        return {"edge": self.edge, "parent": list(self.parent), "edge_ids": list(self.edge_of)}


class _Vertex:
    __slots__ = ("id", "face", "gens", "nbr", "version", "polys")

    def __init__(self, vid, face, gens, nbr):
        self.id = vid
        self.face = face
        self.gens = list(gens)
        self.nbr = list(nbr)
        self.version = 0
        self.polys = None


@dataclass
class EventRecord:
    u: float
    kind: str
    ids: tuple
    psi_nodes_added: int
    patch: dict = field(default_factory=dict)
    degenerate: bool = False

    def to_json(self) -> dict:
        return {"u": self.u, "type": self.kind, "ids": list(self.ids), "psi_nodes_added": self.psi_nodes_added}


def _lin(c0, c1):
    return [c0, c1]


def _circum_polys(P, Q, R):
    """Circumcenter of three affine images as (x numerator, y numerator, denominator)."""
    px, py = _lin(P[0], P[2]), _lin(P[1], P[3])
    bx, by = _lin(Q[0] - P[0], Q[2] - P[2]), _lin(Q[1] - P[1], Q[3] - P[3])
    cx, cy = _lin(R[0] - P[0], R[2] - P[2]), _lin(R[1] - P[1], R[3] - P[3])
    D = pscale(psub(pmul(bx, cy), pmul(by, cx)), 2.0)
    b2 = padd(pmul(bx, bx), pmul(by, by))
    c2 = padd(pmul(cx, cx), pmul(cy, cy))
    nx = psub(pmul(cy, b2), pmul(by, c2))
    ny = psub(pmul(bx, c2), pmul(cx, b2))
    return padd(pmul(px, D), nx), padd(pmul(py, D), ny), D


def _velocity(polys, u: float):
    X, Y, D = polys
    d, dd = peval(D, u), peval(pderiv(D), u)
    return ((peval(pderiv(X), u) * d - peval(X, u) * dd) / (d * d),
            (peval(pderiv(Y), u) * d - peval(Y, u) * dd) / (d * d))


class SweepState:
    def __init__(self, mesh: SurfaceMesh, edge: int, u: float, psi: SequenceTree):
        self.mesh = mesh
        self.edge = edge
        self.u = u
        self.psi = psi
        self.vertices: dict[int, _Vertex] = {}
        self.leaves: dict[int, int] = {}  # polyhedron vertex -> adjacent degree-3 id
        self.queue: list = []
        self.log: list[EventRecord] = []
        self.degeneracies: list[str] = []
        self.max_queue = 0
        self._counter = 0

    # -- geometry --------------------------------------------------------------------

    def source(self, u: float) -> SurfacePoint:
        return point_on_edge(self.mesh, self.edge, u)

    def _polys(self, w: _Vertex):
        if w.polys is None:
            w.polys = _circum_polys(*(self.psi.gen_coef(gn) for gn in w.gens))
        return w.polys

    def position(self, w: _Vertex, u: float):
        X, Y, D = self._polys(w)
        d = peval(D, u)
        return (peval(X, u) / d, peval(Y, u) / d)

    def images(self, w: _Vertex, u: float):
        return [self.psi.image(gn, u) for gn in w.gens]

    # -- candidates ------------------------------------------------------------------

    def _push(self, u, kind, ids, data, stamps):
        self._counter += 1
        heapq.heappush(self.queue, (u, _ORDER[kind], ids, self._counter, kind, data, stamps))
        self.max_queue = max(self.max_queue, self._live_queue())

    def _live_queue(self) -> int:
        if len(self.queue) > 8 * len(self.vertices) + 32:
            self.queue = [q for q in self.queue if self._fresh(q[6])]
            heapq.heapify(self.queue)
        return len(self.queue)

    def _fresh(self, stamps) -> bool:
        for vid, ver in stamps:
            w = self.vertices.get(vid)
            if w is None or w.version != ver:
                return False
        return True

    def _leaf_slot(self, w: _Vertex):
        """(slot, polyhedron vertex) of a leaf neighbour at a corner of w's face."""
        out = []
        for k, (kind, ref) in enumerate(w.nbr):
            if kind == "l" and ref in self.mesh.faces[w.face]:
                out.append((k, ref))
        return out

    def candidate_passage(self, w: _Vertex, u0: float, u1: float):
        """Parameters at which w reaches an adjacent leaf vertex lying on its face."""
        out = []
        for k, v in self._leaf_slot(w):
            C = self.psi.gen_coef(w.gens[k])
            A = self.psi.gen_coef(w.gens[(k + 1) % 3])
            vx, vy = self.mesh.vertex_local(w.face, v)
            cx, cy = _lin(C[0] - vx, C[2]), _lin(C[1] - vy, C[3])
            ax, ay = _lin(A[0] - vx, A[2]), _lin(A[1] - vy, A[3])
            h = psub(padd(pmul(cx, cx), pmul(cy, cy)), padd(pmul(ax, ax), pmul(ay, ay)))
            for r, d in sign_changes(h, u0, u1):
                if d > 0:
                    continue
                X = self.position(w, r)
                if g.dist(X, (vx, vy)) <= 1e3 * self.mesh.tau("pt"):
                    out.append((r, k, v))
                    break
        return out

    def candidate_crossing(self, w: _Vertex, u0: float, u1: float, skip=()):
        """First parameter at which w leaves its face, with the edge crossed."""
        mesh = self.mesh
        X, Y, D = self._polys(w)
        sD = 1.0 if peval(D, u0) > 0 else -1.0
        cs = mesh.corners[w.face]
        best = None
        for k in range(3):
            a, b = cs[k], cs[(k + 1) % 3]
            E = mesh.face_edges[w.face][k]
            G = psub(pscale(psub(Y, pscale(D, a[1])), b[0] - a[0]), pscale(psub(X, pscale(D, a[0])), b[1] - a[1]))
            for r, d in sign_changes(pscale(G, sD), u0, u1):
                if d > 0:
                    continue
                if any(abs(r - us) < _EXCLUDE and v in mesh.edges[E] for us, v in skip):
                    continue
                if best is None or r < best[0]:
                    best = (r, E)
                break
        return best

    def candidate_contraction(self, w: _Vertex, x: _Vertex, u0: float, u1: float):
        """First parameter at which the interior ridge between w and x shrinks to a point."""
        if w.face != x.face:
            return None
        shared = [gn for gn in w.gens if gn in x.gens]
        if len(shared) != 2:
            return None
        C = next(gn for gn in w.gens if gn not in shared)
        Dg = next(gn for gn in x.gens if gn not in shared)
        if C == Dg:
            return None
        pts = [self.psi.gen_coef(gn) for gn in (shared[0], shared[1], C)]
        d = self.psi.gen_coef(Dg)
        rows = []
        for p in pts:
            rx, ry = _lin(p[0] - d[0], p[2] - d[2]), _lin(p[1] - d[1], p[3] - d[3])
            rows.append((rx, ry, padd(pmul(rx, rx), pmul(ry, ry))))
        (ax, ay, al), (bx, by, bl), (cx, cy, cl) = rows
        inc = padd(
            psub(pmul(ax, psub(pmul(by, cl), pmul(cy, bl))), pmul(ay, psub(pmul(bx, cl), pmul(cx, bl)))),
            pmul(al, psub(pmul(bx, cy), pmul(cx, by))),
        )
        a, b, c = (self.psi.image(gn, u0) for gn in (shared[0], shared[1], C))
        sgn = 1.0 if g.orient(a, b, c) > 0 else -1.0
        q = pscale(inc, -sgn)  # positive while the fourth image is outside the circle
        for r, dirn in sign_changes(q, u0, u1):
            if dirn > 0:
                continue
            if g.dist(self.position(w, r), self.position(x, r)) <= 1e3 * self.mesh.tau("pt"):
                return r
        return None

    def refresh(self, w: _Vertex, u1: float) -> None:
        u0 = self.u
        stamp = ((w.id, w.version),)
        passages = self.candidate_passage(w, u0, u1)
        for r, k, v in passages:
            self._push(r, PASSAGE, (w.id, v), (k, v), stamp)
        cr = self.candidate_crossing(w, u0, u1, skip=[(r, v) for r, _, v in passages])
        if cr is not None:
            self._push(cr[0], CROSSING, (w.id, cr[1]), cr[1], stamp)
        for kind, ref in w.nbr:
            if kind != "d":
                continue
            x = self.vertices[ref]
            r = self.candidate_contraction(w, x, u0, u1)
            if r is not None:
                a, b = sorted((w.id, x.id))
                stamps = ((a, self.vertices[a].version), (b, self.vertices[b].version))
                self._push(r, MERGE, (a, b), None, stamps)

    # -- patches ---------------------------------------------------------------------

    def _touch(self, w: _Vertex) -> None:
        w.version += 1
        w.polys = None

    def apply_crossing(self, w: _Vertex, E: int) -> int:
        added = 0
        gens = []
        for gn in w.gens:
            ng, created = self.psi.move(gn, E)
            added += created
            gens.append(ng)
        w.gens = gens
        w.face = self.mesh.other_face(E, w.face)
        self._touch(w)
        return added

    def apply_merge(self, w: _Vertex, x: _Vertex):
        shared = [gn for gn in w.gens if gn in x.gens]
        A, B = shared
        C = next(gn for gn in w.gens if gn not in shared)
        D = next(gn for gn in x.gens if gn not in shared)
        slot = {gn: k for k, gn in enumerate(w.gens)}
        xslot = {gn: k for k, gn in enumerate(x.gens)}
        n_wa, n_wb = w.nbr[slot[A]], w.nbr[slot[B]]
        n_xa, n_xb = x.nbr[xslot[A]], x.nbr[xslot[B]]
        w.gens, w.nbr = [A, C, D], [("d", x.id), n_xb, n_wb]
        x.gens, x.nbr = [B, C, D], [("d", w.id), n_xa, n_wa]
        self._repoint(n_xb, x.id, w.id)
        self._repoint(n_wa, w.id, x.id)
        self._touch(w)
        self._touch(x)
        return {"pairs_before": [[list(A), list(B)]], "pairs_after": [[list(C), list(D)]]}

    def _repoint(self, ref, old: int, new: int) -> None:
        kind, rid = ref
        if kind == "l":
            if self.leaves[rid] != old:
                raise SweepError("leaf back-pointer mismatch")
            self.leaves[rid] = new
            return
        y = self.vertices[rid]
        hits = [k for k, nb in enumerate(y.nbr) if nb == ("d", old)]
        if len(hits) != 1:
            raise SweepError("ridge back-pointer mismatch")
        y.nbr[hits[0]] = ("d", new)

    def _unwrap(self, gen, v: int):
        """Pop trailing edges incident to v; returns (generator, popped edges in pop order)."""
        psi = self.psi
        popped = []
        while len(gen[0]) > 1 and v in self.mesh.edges[gen[0][-1]]:
            E = gen[0][-1]
            gen = psi.seq_move(gen, E)
            popped.append(E)
        return gen, popped

    def apply_passage(self, w: _Vertex, k: int, v: int) -> int:
        """w reaches leaf vertex v: the leaf ridge images unwrap and the opposite one wraps.

        The patch runs on plain sequences so that only the final generators
        (and their prefixes) enter the sequence tree.
        """
        psi = self.psi
        sym = [(psi.sequence(n), f) for n, f in w.gens]
        C = sym[k]
        A, B = sym[(k + 1) % 3], sym[(k + 2) % 3]
        y_bc, y_ac = w.nbr[(k + 1) % 3], w.nbr[(k + 2) % 3]
        NA, popA = self._unwrap(A, v)
        NB, popB = self._unwrap(B, v)
        if NA != NB or not popA or not popB:
            raise DegeneracyError("leaf ridge images do not unwrap to one path")
        CA, CB = C, C
        for E in popA:
            CA = psi.seq_move(CA, E)
        for E in popB:
            CB = psi.seq_move(CB, E)
        if not (CA[1] == CB[1] == NA[1]):
            raise SweepError("unwrapped images end in different faces")
        gens = self._settle([NA, CA, CB], v)
        n0 = len(psi)
        w.gens = [(psi.insert(seq, f), f) for seq, f in gens]
        w.nbr = [("l", v), y_bc, y_ac]
        w.face = gens[0][1]
        self._touch(w)
        return len(psi) - n0

    def velocity(self, w: _Vertex, u: float):
        return _velocity(self._polys(w), u)

    def _settle(self, gens, v: int):
        """Rotate symbolic generators around polyhedron vertex v into the face the vertex enters."""
        mesh, psi = self.mesh, self.psi
        d = _velocity(_circum_polys(*(psi.seq_coef(gn) for gn in gens)), self.u)
        if g.norm(d) == 0.0:
            raise DegeneracyError("vertex passage with a stalled ridge vertex")
        # The planar angle to each side is ambiguous on a cone with an angle
        # deficit, so try both rotation senses, nearer side first, and keep the
        # first one whose sequences stay free of repeated edges.
        f = gens[0][1]
        k = mesh.corner_index(f, v)
        cs = mesh.corners[f]
        va, vb = g.sub(cs[(k + 1) % 3], cs[k]), g.sub(cs[(k + 2) % 3], cs[k])
        ca, cb = g.cross(va, d), g.cross(d, vb)
        if ca >= 0 and cb >= 0:
            return gens
        first = 0 if ca < 0 and (cb >= 0 or ca / g.norm(va) < cb / g.norm(vb)) else 1
        for side in (first, 1 - first):
            try:
                out = self._rotate(gens, v, d, side)
            except SweepError:
                continue
            if out is not None:
                return out
        raise DegeneracyError("could not place a ridge vertex around a polyhedron vertex")

    def _rotate(self, gens, v: int, d, side: int):
        """Cross the edges at v in one fixed sense until the face holds direction d."""
        mesh, psi = self.mesh, self.psi
        for _ in range(len(mesh.vertex_faces(v))):
            f = gens[0][1]
            k = mesh.corner_index(f, v)
            E = mesh.face_edges[f][k] if side == 0 else mesh.face_edges[f][(k + 2) % 3]
            d = mesh.unfold_across(mesh.other_face(E, f), E).apply_vec(d)
            gens = [psi.seq_move(gn, E) for gn in gens]
            f = gens[0][1]
            k = mesh.corner_index(f, v)
            cs = mesh.corners[f]
            P, A, B = cs[k], cs[(k + 1) % 3], cs[(k + 2) % 3]
            if g.cross(g.sub(A, P), d) >= 0 and g.cross(d, g.sub(B, P)) >= 0:
                return gens
        return None

    # -- snapshots -------------------------------------------------------------------

    def trace(self, w: _Vertex, k: int, u: float) -> list:
        """Edges crossed by the ridge leaving w opposite generator k."""
        mesh = self.mesh
        tol = 1e-7 * mesh.diameter
        imgs = self.images(w, u)
        R, P, Q = imgs[k], imgs[(k + 1) % 3], imgs[(k + 2) % 3]
        X = self.position(w, u)
        d = g.sub(Q, P)
        d = (-d[1], d[0])
        if g.dot(d, g.sub(R, P)) > 0:
            d = (-d[0], -d[1])
        L = g.norm(d)
        d = (d[0] / L, d[1] / L)
        kind, ref = w.nbr[k]
        face = w.face
        crossed = []
        last_edge = None
        for _ in range(4 * mesh.n_faces + 8):
            if kind == "d":
                x = self.vertices[ref]
                T = self.position(x, u) if x.face == face else None
            else:
                T = mesh.vertex_local(face, ref) if ref in mesh.faces[face] else None
            cs = mesh.corners[face]
            best = None
            for j in range(3):
                E = mesh.face_edges[face][j]
                if E == last_edge:
                    continue
                a, b = cs[j], cs[(j + 1) % 3]
                if g.cross(g.sub(b, a), d) >= 0:
                    continue
                hit = g.line_intersection(X, g.add(X, d), a, b)
                if hit is None:
                    continue
                t = hit[0]
                if best is None or t < best[0]:
                    best = (t, E)
            if T is not None:
                rel = g.sub(T, X)
                along = g.dot(rel, d)
                if abs(g.cross(d, rel)) <= tol and along >= -tol and (best is None or along <= best[0] + tol):
                    return crossed
            if best is None:
                raise SweepError("ridge trace left the face without an exit")
            t, E = best
            Y = g.add(X, g.scale(d, t))
            M = mesh.unfold_across(mesh.other_face(E, face), E)
            X, d = M.apply(Y), M.apply_vec(d)
            face = mesh.other_face(E, face)
            crossed.append(E)
            last_edge = E
        raise SweepError("ridge trace did not reach its neighbour")

    def labels(self):
        psi = self.psi
        out = {}
        for vid, w in self.vertices.items():
            out[("d", vid)] = ("d", w.face, tuple(sorted((psi.sequence(n), f) for n, f in w.gens)))
        for v in self.leaves:
            out[("l", v)] = ("l", v)
        return out

    def signature_items(self, u: float, crossings: bool = True):
        labels = self.labels()
        items = []
        for vid, w in self.vertices.items():
            for k, nb in enumerate(w.nbr):
                if nb[0] == "d" and nb[1] < vid:
                    continue
                crossed = tuple(self.trace(w, k, u)) if crossings else ()
                items.append((labels[("d", vid)], labels[nb], crossed))
        return items

    def signature(self, u: float | None = None) -> str:
        return signature_hash(self.signature_items(self.u if u is None else u))

    def core_signature(self) -> str:
        return signature_hash(self.signature_items(self.u, crossings=False), crossings=False)

    def associations(self, w: _Vertex):
        return [self.psi.edge_sequence(n, f) for n, f in w.gens]


def _state_from_tree(mesh: SurfaceMesh, e: int, u: float, rt: RidgeTree) -> SweepState:
    psi = SequenceTree(mesh, e)
    st = SweepState(mesh, e, u, psi)
    gens_of = {}
    for i in rt.deg3():
        v = rt.vertices[i]
        gens = []
        for seq, face, site in v.generators:
            if face != v.face:
                raise SweepError("generator final face differs from the vertex face")
            gens.append((psi.insert(seq, face), face))
        gens_of[i] = gens
    nbr = {i: [None, None, None] for i in gens_of}
    for r in rt.ridges:
        a, b = r.ends
        for x, y in ((a, b), (b, a)):
            vx = rt.vertices[x]
            if vx.kind != "deg3":
                continue
            k = next(k for k, s in enumerate(vx.sites) if s not in r.sites)
            vy = rt.vertices[y]
            nbr[x][k] = ("d", y) if vy.kind == "deg3" else ("l", vy.ref)
            if vy.kind == "leaf":
                st.leaves[vy.ref] = x
    for i, gens in gens_of.items():
        if any(n is None for n in nbr[i]):
            raise SweepError("ridge vertex with a missing neighbour")
        st.vertices[i] = _Vertex(i, rt.vertices[i].face, gens, nbr[i])
    return st


def init_sweep(mesh: SurfaceMesh, e: int, u0: float = 1e-6, u_end: float | None = None, retries: int = 6) -> SweepState:
    # very close to an endpoint the source grazes that vertex, so each retry moves further in
    last = None
    u_end = 1.0 - u0 if u_end is None else u_end
    for attempt in range(retries + 1):
        uu = u0 * 2.7 ** attempt
        try:
            rt, _ = fresh_ridge_tree(mesh, e, uu, retries=1)
            st = _state_from_tree(mesh, e, uu, rt)
        except (DegeneracyError, SweepError) as exc:
            last = exc
            continue
        st.u_end = u_end
        for w in list(st.vertices.values()):
            st.refresh(w, u_end)
        return st
    raise DegeneracyError(f"sweep start stays degenerate: {last}")


def process_event(st: SweepState) -> EventRecord | None:
    """Apply the next valid event, or return None once the queue is exhausted."""
    u_end = st.u_end
    while st.queue:
        u, _, ids, _, kind, data, stamps = heapq.heappop(st.queue)
        if u > u_end:
            st.queue = []
            return None
        if not st._fresh(stamps):
            continue
        degenerate = False
        if st.log and u - st.log[-1].u <= st.mesh.tolerances.event:
            degenerate = True
            st.degeneracies.append(f"simultaneous events at u={u:.12g}")
        st.u = max(st.u, u)
        if kind == CROSSING:
            w = st.vertices[ids[0]]
            before = w.face
            added = st.apply_crossing(w, data)
            touched = [w]
            patch = {"vertex": w.id, "edge": data, "from_face": before, "to_face": w.face}
        elif kind == MERGE:
            w, x = st.vertices[ids[0]], st.vertices[ids[1]]
            patch = st.apply_merge(w, x)
            added = 0
            touched = [w, x]
        else:
            w = st.vertices[ids[0]]
            k, v = data
            before = w.face
            added = st.apply_passage(w, k, v)
            touched = [w]
            patch = {"vertex": w.id, "leaf": v, "from_face": before, "to_face": w.face}
        for t in touched:
            st.refresh(t, u_end)
        rec = EventRecord(u, kind, tuple(ids), added, patch, degenerate)
        st.log.append(rec)
        return rec
    return None


@dataclass
class SweepResult:
    edge: int
    log: list
    psi: SequenceTree
    breakpoints: list
    state: SweepState

    def sigma(self) -> set:
        return self.psi.sequences()

    def log_lines(self) -> str:
        return "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in self.log)

    def sigma_listing(self) -> list:
        return sorted(self.sigma(), key=lambda s: (len(s), s))


def sweep_edge(mesh: SurfaceMesh, e: int, u0: float = 1e-6, u_end: float | None = None, on_event=None) -> SweepResult:
    st = init_sweep(mesh, e, u0, u_end)
    while True:
        rec = process_event(st)
        if rec is None:
            break
        if on_event is not None:
            on_event(st, rec)
    return SweepResult(e, st.log, st.psi, [r.u for r in st.log], st)
