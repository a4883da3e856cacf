"""Star unfolding: cut the surface along the shortest vertex paths and lay it flat."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from . import _geom as g
from .chen_han import DegeneracyError, build_ch_tree, shortest_vertex_paths
from .mesh import RigidMotion2D, SurfaceMesh, SurfacePoint, edge_param, unfold_across


@dataclass
class Plate:
    face: int
    keys: list  # node keys, counter-clockwise
    local: list  # coordinates in the face frame
    labels: list  # label of the side from keys[i] to keys[i+1]
    motion: RigidMotion2D | None = None
    star: list = field(default_factory=list)  # coordinates in the star plane
    neighbors: dict = field(default_factory=dict)  # side index -> (plate id, side index)

    def bbox(self):
        xs = [p[0] for p in self.star]
        ys = [p[1] for p in self.star]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass
class StarUnfolding:
    mesh: SurfaceMesh
    source: SurfacePoint
    paths: list  # GeodesicPath per polyhedron vertex
    plates: list
    order: list  # polyhedron vertex ids p_1..p_n in counter-clockwise order
    vertex_images: dict  # vertex id -> star point
    source_images: list  # s_i lies between p_{i-1} and p_i
    boundary: list  # full boundary polygon (includes path crossing images)
    pasting_edges: list
    plates_by_face: dict
    source_plates: list  # per source image, plate ids containing it

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def kernel(self) -> list:
        return [self.vertex_images[v] for v in self.order]

    @property
    def cyclic_boundary(self) -> list:
        """The list s_1, p_1, s_2, p_2, ..., s_n, p_n."""
        out = []
        for i, v in enumerate(self.order):
            out.append(self.source_images[i])
            out.append(self.vertex_images[v])
        return out

    def source_triangle(self, i: int):
        prev = self.order[i - 1]
        return (self.vertex_images[prev], self.source_images[i], self.vertex_images[self.order[i]])

    def source_image_id(self, i: int) -> tuple[int, int]:
        """Combinatorial name of image i: its two boundary-adjacent vertices."""
        return (self.order[i - 1], self.order[i])

    def source_image_ids(self) -> list[tuple[int, int]]:
        return [self.source_image_id(i) for i in range(self.n)]

    def locate(self, t: SurfacePoint):
        """(plate id, star image) of a surface point; the first image found."""
        for F, T in self.mesh.faces_of_point(t):
            for pid in self.plates_by_face.get(F, ()):
                pl = self.plates[pid]
                if g.point_in_convex(T, pl.local, 1e-9 * self.mesh.diameter):
                    return pid, pl.motion.apply(T)
        raise DegeneracyError("point not found in any plate")

    def locate_star_point(self, X, eps: float | None = None):
        """Plate containing a star-plane point (boundary inclusive)."""
        if eps is None:
            eps = 1e-9 * self.mesh.diameter
        best = None
        for pid, pl in enumerate(self.plates):
            x0, y0, x1, y1 = pl._bbox
            if X[0] < x0 - eps or X[0] > x1 + eps or X[1] < y0 - eps or X[1] > y1 + eps:
                continue
            m = _convex_margin(X, pl.star)
            if best is None or m > best[0]:
                best = (m, pid)
        if best is None or best[0] < -eps:
            return None
        return best[1]

    def to_surface(self, pid: int, X):
        pl = self.plates[pid]
        return pl.face, pl.motion.inverse().apply(X)

    def in_kernel(self, X) -> bool:
        return g.point_in_polygon(X, self.kernel)


def _convex_margin(X, poly) -> float:
    m = math.inf
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        ll = g.dist(a, b)
        if ll > 0:
            m = min(m, g.orient(a, b, X) / ll)
    return m


# -- construction ---------------------------------------------------------------


def build_star_unfolding(mesh: SurfaceMesh, s: SurfacePoint, paths=None, tree=None) -> StarUnfolding:
    if paths is None:
        if tree is None:
            tree = build_ch_tree(mesh, s, prune_distance="vertices")
        paths = shortest_vertex_paths(mesh, s, tree)
    pieces = _path_pieces(mesh, s, paths)
    plates = []
    for F in range(mesh.n_faces):
        plates.extend(_face_plates(mesh, s, F, pieces))
    plates_by_face: dict[int, list[int]] = {}
    for pid, pl in enumerate(plates):
        plates_by_face.setdefault(pl.face, []).append(pid)
    pasting = _glue(mesh, plates)
    star = _assemble(mesh, s, paths, plates, plates_by_face, pasting)
    return star


def _point_keys(k: int, path) -> list:
    m = len(path.crossings)
    return [("s",)] + [("x", k, j) for j in range(1, m + 1)] + [("v", _vertex_of(path))]


def _vertex_of(path) -> int:
    return path.target.ref


def _path_pieces(mesh: SurfaceMesh, s: SurfacePoint, paths):
    """Per face: chords, boundary points on edges and cuts lying along edges."""
    chords: dict[int, list] = {}
    edge_points: dict[int, list] = {}
    along: dict[tuple[int, str], tuple] = {}
    s_edge = s.ref if s.kind == "edge" else None
    u_s = edge_param(mesh, s) if s_edge is not None else None
    for k, p in enumerate(paths):
        keys = _point_keys(k, p)
        faces = p.sequence.faces(mesh)
        v = _vertex_of(p)
        if s_edge is not None and not p.sequence.edges and v in mesh.edges[s_edge]:
            along[(s_edge, v)] = ("cut", k, 0)
            continue
        for j, cp in enumerate(p.crossings):
            e = cp.ref
            mu = edge_param(mesh, cp)
            edge_points.setdefault(e, []).append((mu, keys[j + 1]))
        for j, F in enumerate(faces):
            chords.setdefault(F, []).append((keys[j], keys[j + 1], ("cut", k, j)))
    if s_edge is not None:
        edge_points.setdefault(s_edge, []).append((u_s, ("s",)))
    return chords, edge_points, along, s


def _node_xy(mesh: SurfaceMesh, F: int, key, s: SurfacePoint, cache):
    if key in cache:
        return cache[key]
    if key[0] == "v":
        return mesh.vertex_local(F, key[1])
    if key[0] == "s":
        for f, xy in mesh.faces_of_point(s):
            if f == F:
                return xy
    raise KeyError(key)


def _face_plates(mesh: SurfaceMesh, s: SurfacePoint, F: int, pieces) -> list[Plate]:
    chords, edge_points, along, _ = pieces
    tri = mesh.faces[F]
    xy: dict = {}
    adj: dict = {}

    def add(a, b, label):
        adj.setdefault(a, []).append((b, label))
        adj.setdefault(b, []).append((a, label))

    for c in range(3):
        e = mesh.face_edges[F][c]
        i, j = mesh.edges[e]
        pts = [(0.0, ("v", i)), (1.0, ("v", j))] + sorted(edge_points.get(e, []))
        pts.sort()
        for t, key in pts:
            if key not in xy:
                xy[key] = mesh.edge_point_local(F, e, t)
        for (t0, k0), (t1, k1) in zip(pts, pts[1:]):
            label = None
            if k0 == ("s",) and k1[0] == "v":
                label = along.get((e, k1[1]))
            elif k1 == ("s",) and k0[0] == "v":
                label = along.get((e, k0[1]))
            if label is None:
                a, b = sorted((k0, k1))
                label = ("edge", e, a, b)
            add(k0, k1, label)
    if s.kind == "face" and s.face == F:
        xy[("s",)] = s.xy
    for a, b, label in chords.get(F, []):
        if a not in xy:
            xy[a] = _node_xy(mesh, F, a, s, xy)
        if b not in xy:
            xy[b] = _node_xy(mesh, F, b, s, xy)
        add(a, b, label)
    # angular order of outgoing sides
    order = {}
    for u, lst in adj.items():
        pu = xy[u]
        order[u] = sorted(lst, key=lambda bl: math.atan2(xy[bl[0]][1] - pu[1], xy[bl[0]][0] - pu[0]))
    seen = set()
    plates = []
    for u, lst in order.items():
        for w, label in lst:
            if (u, w, label) in seen:
                continue
            keys, labels = [], []
            a, b, lab = u, w, label
            guard = 0
            while (a, b, lab) not in seen:
                seen.add((a, b, lab))
                keys.append(a)
                labels.append(lab)
                # next side: first clockwise from the reverse side at b
                outs = order[b]
                idx = next(i for i, (x, l2) in enumerate(outs) if x == a and l2 == lab)
                nb, nl = outs[idx - 1]
                a, b, lab = b, nb, nl
                guard += 1
                if guard > 10000:
                    raise DegeneracyError("plate extraction did not terminate")
            poly = [xy[k] for k in keys]
            if g.polygon_area(poly) > 0:
                plates.append(Plate(F, keys, poly, labels))
    return plates


def _glue(mesh: SurfaceMesh, plates: list[Plate]):
    sides: dict = {}
    for pid, pl in enumerate(plates):
        for i, lab in enumerate(pl.labels):
            if lab[0] == "edge":
                sides.setdefault(lab, []).append((pid, i))
    pasting = []
    for lab, lst in sides.items():
        if len(lst) != 2:
            raise DegeneracyError(f"edge piece {lab[:2]} is shared by {len(lst)} plates")
        (p, i), (q, j) = lst
        plates[p].neighbors[i] = (q, j)
        plates[q].neighbors[j] = (p, i)
        pasting.append((p, q, lab[1]))
    root = 0
    plates[root].motion = RigidMotion2D.identity()
    queue = deque([root])
    count = 1
    while queue:
        p = queue.popleft()
        pl = plates[p]
        for i, (q, j) in pl.neighbors.items():
            if plates[q].motion is not None:
                continue
            e = pl.labels[i][1]
            plates[q].motion = pl.motion.compose(unfold_across(mesh, pl.face, e))
            count += 1
            queue.append(q)
    if count != len(plates):
        raise DegeneracyError("plates are not connected")
    for pl in plates:
        pl.star = [pl.motion.apply(p) for p in pl.local]
        pl._bbox = pl.bbox()
    return pasting


def _cluster(points, tol):
    reps: list = []
    ids = []
    for p in points:
        for i, r in enumerate(reps):
            if g.dist(p, r) <= tol:
                ids.append(i)
                break
        else:
            ids.append(len(reps))
            reps.append(p)
    return reps, ids


def _assemble(mesh, s, paths, plates, plates_by_face, pasting) -> StarUnfolding:
    tol = 1e-7 * mesh.diameter
    n = len(paths)
    # images of s, grouped into source images, with the bounding paths
    at_s = []
    for pid, pl in enumerate(plates):
        m = len(pl.keys)
        for i, key in enumerate(pl.keys):
            if key == ("s",):
                img = pl.star[i]
                incident = [pl.labels[i], pl.labels[i - 1]]
                at_s.append((img, pid, [lab[1] for lab in incident if lab[0] == "cut"]))
    reps, ids = _cluster([a[0] for a in at_s], tol)
    if len(reps) != n:
        raise DegeneracyError(f"found {len(reps)} source images for {n} vertices")
    bounding: list[set] = [set() for _ in reps]
    splates: list[list] = [[] for _ in reps]
    for (img, pid, cuts), c in zip(at_s, ids):
        bounding[c].update(cuts)
        splates[c].append(pid)
    for b in bounding:
        if len(b) != 2:
            raise DegeneracyError("source image is not bounded by exactly two cuts")
    # vertex images
    vimg: dict[int, list] = {}
    for pl in plates:
        for i, key in enumerate(pl.keys):
            if key[0] == "v":
                vimg.setdefault(key[1], []).append(pl.star[i])
    vertex_images = {}
    for v, pts in vimg.items():
        r, _ = _cluster(pts, tol)
        if len(r) != 1:
            raise DegeneracyError(f"vertex {v} has {len(r)} images")
        vertex_images[v] = r[0]
    # cyclic order: source images link consecutive paths
    path_vertex = [_vertex_of(p) for p in paths]
    link: dict[int, list] = {}
    for c, b in enumerate(bounding):
        x, y = sorted(b)
        link.setdefault(x, []).append((y, c))
        link.setdefault(y, []).append((x, c))
    start = 0
    seq_paths = [start]
    seq_src = []
    prev_c = None
    cur = start
    while True:
        nxt = [(y, c) for y, c in link[cur] if c != prev_c]
        y, c = nxt[0]
        seq_src.append(c)
        if y == start:
            break
        seq_paths.append(y)
        prev_c, cur = c, y
        if len(seq_paths) > n:
            raise DegeneracyError("source images do not form a single cycle")
    if len(seq_paths) != n:
        raise DegeneracyError("source images do not form a single cycle")
    # seq: path[0], src[0], path[1], src[1], ... ; source image src[i] lies between path[i] and path[i+1]
    order = [path_vertex[k] for k in seq_paths]
    src = [reps[c] for c in seq_src]
    # s_i between p_{i-1} and p_i: rotate so that src[i-1] precedes order[i]
    src = [src[i - 1] for i in range(n)]
    splates_o = [splates[seq_src[i - 1]] for i in range(n)]
    kernel = [vertex_images[v] for v in order]
    ring = []
    for i in range(n):
        ring += [src[i], kernel[i]]
    if g.polygon_area(ring) < 0:
        order = order[::-1]
        src = src[::-1]
        splates_o = splates_o[::-1]
        # keep s_i between p_{i-1} and p_i after reversal
        src = src[-1:] + src[:-1]
        splates_o = splates_o[-1:] + splates_o[:-1]
    boundary = _boundary(mesh, paths, plates, order, src, vertex_images, path_vertex, tol)
    return StarUnfolding(
        mesh, s, paths, plates, order, vertex_images, src, boundary, pasting, plates_by_face, splates_o
    )


def _boundary(mesh, paths, plates, order, src, vertex_images, path_vertex, tol):
    """Full boundary polygon, including the images of cut crossing points."""
    sides: dict[tuple[int, int], dict] = {}
    for pl in plates:
        m = len(pl.keys)
        for i, lab in enumerate(pl.labels):
            if lab[0] != "cut":
                continue
            k, j = lab[1], lab[2]
            keys = _point_keys(k, paths[k])
            a, b = pl.keys[i], pl.keys[(i + 1) % m]
            side = 1 if (a, b) == (keys[j], keys[j + 1]) else -1
            pts = sides.setdefault((k, side), {})
            pts[a] = pl.star[i]
            pts[b] = pl.star[(i + 1) % m]
    index = {v: k for k, v in enumerate(path_vertex)}
    out = []
    n = len(order)
    for i in range(n):
        k = index[order[i]]
        keys = _point_keys(k, paths[k])
        chains = []
        for side in (1, -1):
            pts = sides.get((k, side), {})
            chains.append([pts[key] for key in keys if key in pts])
        # the side starting at s_i runs toward p_i
        a, b = chains
        if g.dist(a[0], src[i]) > g.dist(b[0], src[i]):
            a, b = b, a
        out.extend(a[:-1])
        out.append(vertex_images[order[i]])
        # the other side comes back toward s_{i+1}; its s image is added next round
        out.extend(reversed(b[1:-1]))
    return out


# -- queries ----------------------------------------------------------------------


def one_point_distance(star: StarUnfolding, t: SurfacePoint):
    """(length, source image index, inside-kernel flag) of the shortest path to t."""
    mesh = star.mesh
    if float(((star.source.world(mesh) - t.world(mesh)) ** 2).sum()) ** 0.5 <= mesh.tau("pt"):
        return 0.0, -1, False
    _, X = star.locate(t)
    if star.in_kernel(X):
        ds = [g.dist(si, X) for si in star.source_images]
        i = min(range(len(ds)), key=ds.__getitem__)
        return ds[i], i, True
    best = None
    for i in range(star.n):
        tri = list(star.source_triangle(i))
        if g.polygon_area(tri) < 0:
            tri.reverse()
        m = _convex_margin(X, tri)
        if best is None or m > best[0]:
            best = (m, i)
    i = best[1]
    return g.dist(star.source_images[i], X), i, False
