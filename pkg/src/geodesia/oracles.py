"""Independent ground truth: graph Dijkstra, exhaustive sequence search, parametric sampling."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from . import _geom as g
from .mesh import RigidMotion2D, SurfaceMesh, SurfacePoint, unfold_across
from .unfolding import EdgeSequence, realize_geodesic


class OracleExplosion(RuntimeError):
    pass


@dataclass
class OracleResult:
    distance: float
    witness: Any
    method: str
    guarantee: str  # "exact" or "upper-bound"


def _point_faces(mesh: SurfaceMesh, p: SurfacePoint) -> list[int]:
    return [f for f, _ in mesh.faces_of_point(p)]


def dijkstra_oracle(mesh: SurfaceMesh, s: SurfacePoint, t: SurfacePoint, steiner_per_edge: int = 4) -> OracleResult:
    """Shortest path in the graph of vertices, k Steiner points per edge, s and t."""
    k = int(steiner_per_edge)
    nV, nE = mesh.n_vertices, mesh.n_edges
    V = mesh.vertices
    coords = [V]
    if k:
        ts = np.arange(1, k + 1) / (k + 1)
        E = np.array(mesh.edges)
        A, B = V[E[:, 0]], V[E[:, 1]]
        coords.append((A[:, None, :] + ts[None, :, None] * (B - A)[:, None, :]).reshape(-1, 3))
    s_id, t_id = nV + nE * k, nV + nE * k + 1
    coords.append(np.array([s.world(mesh), t.world(mesh)]))
    X = np.vstack(coords)
    members: list[list[int]] = []
    sf, tf = set(_point_faces(mesh, s)), set(_point_faces(mesh, t))
    for f, tri in enumerate(mesh.faces):
        ids = list(tri)
        for e in mesh.face_edges[f]:
            ids.extend(range(nV + e * k, nV + e * k + k))
        if f in sf:
            ids.append(s_id)
        if f in tf:
            ids.append(t_id)
        members.append(ids)
    rows, cols = [], []
    for ids in members:
        a = np.array(ids)
        r, c = np.meshgrid(a, a, indexing="ij")
        m = r != c
        rows.append(r[m])
        cols.append(c[m])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    w = np.linalg.norm(X[r] - X[c], axis=1)
    # zero weights would be dropped by the sparse graph; they only occur for s == t
    w = np.maximum(w, 1e-300)
    G = coo_matrix((w, (r, c)), shape=(len(X), len(X))).tocsr()
    dist, pred = dijkstra(G, indices=s_id, return_predecessors=True)
    d = float(dist[t_id])
    if np.linalg.norm(X[s_id] - X[t_id]) == 0.0:
        d = 0.0
    path = [t_id]
    while path[-1] != s_id and pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    return OracleResult(d, path[::-1], f"dijkstra(k={k})", "upper-bound")


def _point_seg_dist3(p, a, b) -> float:
    u = b - a
    t = np.clip(((p - a) @ u) / (u @ u), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * u)))


def bruteforce_distance(
    mesh: SurfaceMesh,
    s: SurfacePoint,
    t: SurfacePoint,
    max_len: int = 8,
    guard: int = 10**7,
) -> OracleResult:
    """Exhaustive search over non-repeating adjacent edge sequences of length <= max_len.

    Sequences are explored breadth-first by length. A branch is cut when no
    straight line from the source image can pass through all its edge images,
    or when the unfolded distance to the current edge plus the 3-D distance
    from that edge to t cannot beat the best path found so far.
    """
    t3 = t.world(mesh)
    tfaces = dict(mesh.faces_of_point(t))
    skip_edges = set()
    if s.kind == "edge":
        skip_edges.add(s.ref)
    elif s.kind == "vertex":
        skip_edges.update(mesh.vertex_edges(s.ref))
    if t.kind == "edge":
        skip_edges.add(t.ref)
    elif t.kind == "vertex":
        skip_edges.update(mesh.vertex_edges(t.ref))
    V = mesh.vertices
    edge_lb = [_point_seg_dist3(t3, V[i], V[j]) for i, j in mesh.edges]

    best = np.inf
    witness = None
    count = 0
    level = []
    for f0, S in mesh.faces_of_point(s):
        if f0 in tfaces:
            d = g.dist(S, tfaces[f0])
            if d < best:
                best, witness = d, EdgeSequence(f0, ())
        level.append((f0, S, (), RigidMotion2D.identity(), None, ()))
    for _depth in range(max_len):
        nxt = []
        for f, S, edges, M, window, images in level:
            for e in mesh.face_edges[f]:
                if e in edges or e in skip_edges:
                    continue
                a, b = mesh.edge_endpoints_local(f, e)
                A, B = M.apply(a), M.apply(b)
                # wedge from S through AB, counter-clockwise from r to l
                da, db = g.sub(A, S), g.sub(B, S)
                o = g.cross(da, db)
                if abs(o) <= 1e-15 * (g.norm(da) * g.norm(db) + 1e-300):
                    continue
                r, l = (da, db) if o > 0 else (db, da)
                if window is not None:
                    wr, wl = window
                    if g.cross(wr, r) < 0:
                        r = wr
                    if g.cross(l, wl) < 0:
                        l = wl
                    if g.cross(r, l) <= 0:
                        continue
                lb = g.seg_point_dist(S, A, B) + edge_lb[e]
                if lb >= best - 1e-12:
                    continue
                count += 1
                if count > guard:
                    raise OracleExplosion(f"more than {guard} sequences")
                h = mesh.other_face(e, f)
                M2 = M.compose(unfold_across(mesh, f, e))
                ne = edges + (e,)
                nimg = images + ((A, B),)
                if h in tfaces:
                    T = M2.apply(tfaces[h])
                    d = g.dist(S, T)
                    if d < best and _crosses_all(S, T, nimg, mesh.tau("pt")):
                        best, witness = d, EdgeSequence(_anchor_of(mesh, h, ne), ne)
                nxt.append((h, S, ne, M2, (r, l), nimg))
        level = nxt
        if not level:
            break
    return OracleResult(float(best), witness, f"bruteforce(L={max_len})", "exact")


def _anchor_of(mesh: SurfaceMesh, last: int, edges) -> int:
    f = last
    for e in reversed(edges):
        f = mesh.other_face(e, f)
    return f


def _crosses_all(S, T, images, tpt) -> bool:
    last = -1e-12
    for A, B in images:
        hit = g.line_intersection(S, T, A, B)
        if hit is None:
            return False
        lam, mu = hit
        mt = tpt / g.dist(A, B)
        if not (mt < mu < 1 - mt) or lam < last - 1e-12 or lam > 1 + 1e-12:
            return False
        last = lam
    return True


def verify_witness(mesh: SurfaceMesh, s: SurfacePoint, t: SurfacePoint, result: OracleResult):
    """Realize the brute-force witness through the unfolding module."""
    if result.witness is None:
        return None
    return realize_geodesic(mesh, s, t, result.witness)


def sample_ridge_signature(mesh: SurfaceMesh, e: int, U, seed: int = 0) -> list[str]:
    """Canonical topology code of the ridge tree for each parameter in ``U``."""
    from .ridge import ridge_signature_at

    rng = np.random.default_rng(seed)
    out = []
    for u in U:
        out.append(ridge_signature_at(mesh, e, float(u), rng))
    return out


def uniform_parameters(count: int, refine: int = 1) -> list[float]:
    """count * refine + refine - 1 evenly spaced interior parameters; refinements nest."""
    m = (count + 1) * refine
    return [k / m for k in range(1, m)]


def sampled_sigma(mesh: SurfaceMesh, e: int, U, seed: int = 0) -> set:
    """Union over u in U of the prefix-closed degree-3 path sequences of fresh ridge trees."""
    from .ridge import fresh_ridge_tree, sigma_s

    rng = np.random.default_rng(seed)
    out: set = set()
    for u in U:
        rt, _ = fresh_ridge_tree(mesh, e, float(u), rng, trace=False)
        out |= sigma_s(rt)
    return out
