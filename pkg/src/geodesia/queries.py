"""Distance queries between edge points.

The one-point structure fixes a source s on an edge and splits every edge e'
into intervals over which the shortest paths from s share one edge sequence.
The edge structure covers every source on an edge e at once: the sweep cuts e
into segments of constant ridge-tree topology and each segment owns one version
of a persistent interval map per edge e'. Interval images are stored as affine
functions of the source parameter u and evaluated at query time.
"""
from __future__ import annotations

import bisect
import difflib
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import _geom as g
from . import persistent
from .chen_han import DegeneracyError
from .mesh import SurfaceMesh, SurfacePoint, edge_param, point_on_edge
from .ridge import RidgeTree, build_ridge_tree, generator_sequence
from .star import one_point_distance
from .sweep import SequenceTree, SweepResult, sweep_edge
from .unfolding import EdgeSequence, GeodesicPath, realize_geodesic

TIE = 1e-12


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    node: int
    sequence: tuple
    coef: tuple  # image of s as p0 + u * p1 in the frame of the first face of the edge
    linked: bool = True

    def image(self, u: float):
        a0, a1, d0, d1 = self.coef
        return (a0 + u * d0, a1 + u * d1)


@dataclass
class OnePointStructure:
    mesh: SurfaceMesh
    source: SurfacePoint
    edge: int
    u: float
    psi: SequenceTree
    intervals: dict  # edge -> list[Interval]
    breakpoints: dict = field(default_factory=dict)  # edge -> interior breakpoints
    unlinked: list = field(default_factory=list)

    def interval_count(self) -> int:
        return sum(len(v) for v in self.intervals.values())

    def node_lists(self) -> dict:
        return {E: tuple(iv.node for iv in ivs) for E, ivs in self.intervals.items()}

    def sequence_lists(self) -> dict:
        return {E: tuple(iv.sequence for iv in ivs) for E, ivs in self.intervals.items()}


def _source_param(mesh: SurfaceMesh, s: SurfacePoint) -> tuple[int, float]:
    if s.kind != "edge":
        raise QueryError("source must lie in the interior of an edge")
    return s.ref, edge_param(mesh, s)


def _edge_coef(mesh: SurfaceMesh, psi: SequenceTree, node: int, E: int) -> tuple:
    """Image coefficients of node in the frame of the first face of E."""
    f0 = mesh.edge_faces[E][0]
    if node == 0:
        if f0 not in psi.root_coef:
            raise QueryError("root image requested off the swept edge")
        return psi.root_coef[f0]
    a0, a1, d0, d1 = psi.coef[node]
    if psi.final_face[node] == f0:
        return (a0, a1, d0, d1)
    M = mesh.unfold_across(f0, E)
    p, d = M.apply((a0, a1)), M.apply_vec((d0, d1))
    return (p[0], p[1], d[0], d[1])


def _edge_target(mesh: SurfaceMesh, E: int, lam: float):
    return mesh.edge_point_local(mesh.edge_faces[E][0], E, lam)


def _target_param(mesh: SurfaceMesh, t: SurfacePoint) -> tuple[int, float]:
    if t.kind != "edge":
        raise QueryError("target must lie in the interior of an edge")
    return t.ref, edge_param(mesh, t)


def _node_for(psi: SequenceTree, seq: tuple, create: bool):
    v = psi.find(seq)
    if v is not None:
        return v, True
    if not create:
        return None, False
    return psi.insert(seq), False


def _interval_sequence(rt: RidgeTree, t: SurfacePoint, E: int) -> tuple:
    star = rt.star
    _, site, _ = one_point_distance(star, t)
    _, X = star.locate(t)
    edges, _ = generator_sequence(star, site, X, rt.source_edge)
    if edges[-1] != E:
        edges = edges + (E,)
    return edges


def build_one_point(mesh: SurfaceMesh, s: SurfacePoint, rt: RidgeTree | None = None,
                    psi: SequenceTree | None = None, create: bool = True) -> OnePointStructure:
    """Interval sets on every edge for the source s.

    Each interval is linked to the node of its sequence in ``psi``. When no psi
    is given the tree of the degree-3 generator sequences of s is used; an
    interval whose sequence is missing there is recorded in ``unlinked`` and,
    if ``create`` is set, gets a fresh node so that it stays answerable.
    """
    e, u = _source_param(mesh, s)
    if rt is None:
        rt = build_ridge_tree(mesh, s)
    if psi is None:
        psi = SequenceTree(mesh, e)
        for v in rt.vertices:
            for seq, face, _ in v.generators:
                psi.insert(seq, face)
    cuts: dict = {}
    for E, lam, _ in rt.crossings():
        cuts.setdefault(E, []).append(lam)
    intervals, breakpoints, unlinked = {}, {}, []
    for E in range(mesh.n_edges):
        if E == e:
            iv = Interval(0.0, 1.0, 0, (e,), _edge_coef(mesh, psi, 0, E))
            intervals[E], breakpoints[E] = [iv], []
            continue
        b = [0.0] + sorted(cuts.get(E, ())) + [1.0]
        out: list[Interval] = []
        for lo, hi in zip(b, b[1:]):
            if hi - lo <= TIE:
                continue
            t = point_on_edge(mesh, E, 0.5 * (lo + hi))
            seq = _interval_sequence(rt, t, E)
            node, linked = _node_for(psi, seq, create)
            if not linked:
                unlinked.append((E, lo, hi, seq))
                if node is None:
                    raise QueryError(f"interval on edge {E} has no sequence-tree node")
            if out and out[-1].node == node:
                last = out[-1]
                out[-1] = Interval(last.lo, hi, node, seq, last.coef, last.linked and linked)
                continue
            out.append(Interval(lo, hi, node, seq, _edge_coef(mesh, psi, node, E), linked))
        intervals[E] = out
        breakpoints[E] = [iv.lo for iv in out[1:]]
    return OnePointStructure(mesh, s, e, u, psi, intervals, breakpoints, unlinked)


def _path(mesh: SurfaceMesh, psi: SequenceTree, node: int, s: SurfacePoint, t: SurfacePoint, length: float):
    seq = psi.sequence(node)
    if node == 0:
        es = EdgeSequence(s.face, ())
    else:
        es = EdgeSequence(psi.anchor[node], seq[1:-1])
    path = realize_geodesic(mesh, s, t, es)
    if path is None:
        # a target within tolerance of a strip corner; keep the sequence and the length
        path = GeodesicPath(s, t, es, [], length)
    return path, len(seq)


def _evaluate(mesh: SurfaceMesh, E: int, lam: float, u: float, coef) -> float:
    a0, a1, d0, d1 = coef
    return g.dist((a0 + u * d0, a1 + u * d1), _edge_target(mesh, E, lam))


def one_point_query(structure: OnePointStructure, t: SurfacePoint, stats: dict | None = None):
    """(length, path) from the structure's source to t on an edge.

    ``stats``, when given, receives the probe count, the reconstruction step
    count and the interval node.
    """
    mesh = structure.mesh
    E, lam = _target_param(mesh, t)
    ivs = structure.intervals[E]
    b = structure.breakpoints[E]
    lo, hi, probes = 0, len(b), 0
    while lo < hi:
        probes += 1
        mid = (lo + hi) // 2
        if b[mid] <= lam:
            lo = mid + 1
        else:
            hi = mid
    cands = [lo]
    if lo > 0 and lam - b[lo - 1] <= TIE:
        cands.append(lo - 1)
    if lo < len(b) and b[lo] - lam <= TIE:
        cands.append(lo + 1)
    u = structure.u
    best = min((_evaluate(mesh, E, lam, u, ivs[k].coef), k) for k in cands)
    length, k = best
    path, steps = _path(mesh, structure.psi, ivs[k].node, structure.source, t, length)
    if stats is not None:
        stats.update(probes=probes, steps=steps, node=ivs[k].node, intervals=len(ivs))
    return length, path


# -- edge structure ------------------------------------------------------------------


@dataclass(frozen=True)
class MapEntry:
    node: int
    coef: tuple


@dataclass
class EdgeQueryStructure:
    mesh: SurfaceMesh
    edge: int
    psi: SequenceTree
    breakpoints: list  # sweep event parameters
    segment_version: list  # segment index -> version id
    versions: list  # version id -> {edge: persistent root}
    event_kinds: list
    changes: list = field(default_factory=list)  # per event: {edge: (deleted, inserted)}
    snapshots: list = field(default_factory=list)  # version id -> {edge: ((key, node, coef), ...)}
    created_nodes: list = field(default_factory=list)  # sequence-tree nodes added by the build
    cache_transforms: bool = True

    def segment_of(self, u: float) -> int:
        return bisect.bisect_right(self.breakpoints, u)

    def segments(self) -> list[tuple[float, float]]:
        b = [0.0] + list(self.breakpoints) + [1.0]
        return list(zip(b, b[1:]))

    def version_at(self, u: float) -> int:
        return self.segment_version[self.segment_of(u)]

    def entries(self, version: int, E: int) -> list[MapEntry]:
        return [v for _, v in persistent.items(self.versions[version][E])]

    def snapshot(self, version: int) -> dict:
        return {E: tuple((k, v.node, v.coef) for k, v in persistent.items(root))
                for E, root in sorted(self.versions[version].items())}


def _one_point_with_jitter(mesh: SurfaceMesh, e: int, u: float, lo: float, hi: float, psi: SequenceTree):
    last = None
    w = hi - lo
    for k in range(6):
        uu = u + (0.0 if k == 0 else w * 0.05 * k * (-1) ** k)
        try:
            return build_one_point(mesh, point_on_edge(mesh, e, uu), psi=psi, create=True)
        except DegeneracyError as exc:
            last = exc
    raise last


def _keys_between(lo, hi, count: int) -> list:
    if lo is None and hi is None:
        return [Fraction(k + 1) for k in range(count)]
    if lo is None:
        return [hi - count + k for k in range(count)]
    if hi is None:
        return [lo + 1 + k for k in range(count)]
    step = (hi - lo) / (count + 1)
    return [lo + step * (k + 1) for k in range(count)]


def build_edge_structure(mesh: SurfaceMesh, e: int, sweep: SweepResult | None = None) -> EdgeQueryStructure:
    """Versioned interval maps for every source on edge e.

    Each segment between consecutive sweep events is represented by a one-point
    build at its midpoint, mapped onto the sweep's sequence tree. Consecutive
    interval lists are diffed and the difference is applied to the persistent
    maps, so unchanged edges share their trees with the previous version.
    """
    if sweep is None:
        sweep = sweep_edge(mesh, e)
    psi = sweep.psi
    n0 = len(psi)
    bps = list(sweep.breakpoints)
    bounds = [0.0] + bps + [1.0]
    versions, segment_version, changes, snapshots = [], [], [], []
    current: dict = {}
    keys: dict = {}
    nodes_prev: dict = {}
    for k, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        op = _one_point_with_jitter(mesh, e, 0.5 * (lo + hi), lo, hi, psi)
        lists = op.node_lists()
        delta = {}
        for E in range(mesh.n_edges):
            new = lists[E]
            old = nodes_prev.get(E)
            if old == new:
                continue
            root = current.get(E)
            ks = list(keys.get(E, ()))
            if old is None:
                ks = _keys_between(None, None, len(new))
                for key, node in zip(ks, new):
                    root = persistent.insert(root, key, MapEntry(node, _edge_coef(mesh, psi, node, E)))
                current[E], keys[E], nodes_prev[E] = root, ks, new
                continue
            sm = difflib.SequenceMatcher(a=old, b=new, autojunk=False)
            new_keys: list = []
            deleted = inserted = 0
            for tag, i1, i2, j1, j2 in sm.get_opcodes():
                if tag == "equal":
                    new_keys.extend(ks[i1:i2])
                    continue
                for key in ks[i1:i2]:
                    root = persistent.delete(root, key)
                    deleted += 1
                if j2 > j1:
                    left = new_keys[-1] if new_keys else None
                    right = ks[i2] if i2 < len(ks) else None
                    fresh = _keys_between(left, right, j2 - j1)
                    for key, node in zip(fresh, new[j1:j2]):
                        root = persistent.insert(root, key, MapEntry(node, _edge_coef(mesh, psi, node, E)))
                        inserted += 1
                    new_keys.extend(fresh)
            current[E], keys[E], nodes_prev[E] = root, new_keys, new
            delta[E] = (deleted, inserted)
        if k > 0:
            changes.append(delta)
        if k == 0 or delta:
            versions.append(dict(current))
            snapshots.append(None)
        segment_version.append(len(versions) - 1)
    st = EdgeQueryStructure(mesh, e, psi, bps, segment_version, versions,
                            [r.kind for r in sweep.log], changes, snapshots, list(range(n0, len(psi))))
    st.snapshots = [st.snapshot(v) for v in range(len(versions))]
    return st


def _breakpoint(mesh: SurfaceMesh, E: int, u: float, ca, cb) -> float:
    """Parameter on E equidistant from the images of two neighbouring entries."""
    A, B = _image(ca, u), _image(cb, u)
    P0 = _edge_target(mesh, E, 0.0)
    D = g.sub(_edge_target(mesh, E, 1.0), P0)
    AB = g.sub(A, B)
    den = g.dot(D, AB)
    num = 0.5 * (g.dot(A, A) - g.dot(B, B)) - g.dot(P0, AB)
    if den == 0.0:
        return -math.inf if num <= 0 else math.inf
    return num / den


def _image(c, u: float):
    return (c[0] + u * c[2], c[1] + u * c[3])


def two_point_query(structure: EdgeQueryStructure, s: SurfacePoint, t: SurfacePoint, stats: dict | None = None):
    """(length, path) between s on the structure's edge and t on any edge."""
    mesh = structure.mesh
    e, u = _source_param(mesh, s)
    if e != structure.edge:
        raise QueryError(f"source lies on edge {e}, structure covers edge {structure.edge}")
    E, lam = _target_param(mesh, t)
    seg = structure.segment_of(u)
    segs = [seg]
    b = structure.breakpoints
    if seg > 0 and u - b[seg - 1] <= TIE:
        segs.append(seg - 1)
    if seg < len(b) and b[seg] - u <= TIE:
        segs.append(seg + 1)
    best = None
    total = 0
    for sg in segs:
        version = structure.segment_version[sg]
        entries = _tie_candidates(structure, version, E, u, lam)
        total += entries[1]
        for entry in entries[0]:
            d = _evaluate(mesh, E, lam, u, entry.coef)
            if best is None or d < best[0]:
                best = (d, entry)
    length, entry = best
    path, steps = _path(mesh, structure.psi, entry.node, s, t, length)
    if stats is not None:
        stats.update(probes=total, steps=steps, node=entry.node, segment=seg)
    return length, path


def _tie_candidates(st: EdgeQueryStructure, version: int, E: int, u: float, lam: float):
    """Entry holding lam, plus a neighbour when lam sits on a breakpoint."""
    mesh = st.mesh
    root = st.versions[version][E]
    found = {}

    def starts_before(pred, val):
        if pred is None:
            return True
        x = _breakpoint(mesh, E, u, pred.coef, val.coef)
        if abs(x - lam) <= TIE:
            found[id(val)] = (pred, val)
        return x <= lam

    entry, probes = persistent.search_last(root, starts_before)
    out = [entry]
    for pred, val in found.values():
        out.extend(x for x in (pred, val) if all(x is not y for y in out))
    return out, probes
