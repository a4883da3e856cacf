"""Binary container for edge query structures.

Layout, all integers and floats little-endian:

    magic        5 bytes  b"GEOQ1"
    format       u16      1
    mesh digest  32 bytes sha256 of the mesh OFF text
    edge         u32      swept edge
    node count   u32      N, sequence-tree nodes including the root
    nodes        (N - 1) x (i32 parent, u32 crossed edge, u32 face left)
    event count  u32      K
    events       K x (f64 parameter, u8 kind)       kind: 0 crossing, 1 merge, 2 vertex
    segments     (K + 1) x u32 version id
    version count u32     V
    per version  u32 changed-edge count C, then C x
                     (u32 edge, u32 entry count M, M x (u16 key length, key ascii "p/q", u32 node))
    created      u32 count, then u32 node ids

Sequence-tree nodes are stored in creation order, so parents precede children
and replaying child() rebuilds identical transforms. A version lists only the
edges whose map differs from the previous version; unchanged edges share trees.
"""
from __future__ import annotations

import struct
from fractions import Fraction

from . import persistent
from .mesh import SurfaceMesh
from .queries import EdgeQueryStructure, MapEntry, _edge_coef
from .sweep import CROSSING, MERGE, PASSAGE, SequenceTree

MAGIC = b"GEOQ1"
FORMAT = 1
_KINDS = (CROSSING, MERGE, PASSAGE)


class ContainerError(ValueError):
    pass


def dumps(st: EdgeQueryStructure) -> bytes:
    mesh, psi = st.mesh, st.psi
    out = [MAGIC, struct.pack("<H", FORMAT), bytes.fromhex(mesh.sha256()), struct.pack("<II", st.edge, len(psi))]
    for v in range(1, len(psi)):
        p = psi.parent[v]
        left = psi.anchor[v] if p == 0 else psi.final_face[p]
        out.append(struct.pack("<iII", p, psi.edge_of[v], left))
    out.append(struct.pack("<I", len(st.breakpoints)))
    for u, kind in zip(st.breakpoints, st.event_kinds):
        out.append(struct.pack("<dB", u, _KINDS.index(kind)))
    out.append(struct.pack(f"<{len(st.segment_version)}I", *st.segment_version))
    out.append(struct.pack("<I", len(st.versions)))
    prev: dict = {}
    for ver in st.versions:
        changed = [E for E in sorted(ver) if prev.get(E) is not ver[E]]
        out.append(struct.pack("<I", len(changed)))
        for E in changed:
            entries = list(persistent.items(ver[E]))
            out.append(struct.pack("<II", E, len(entries)))
            for key, val in entries:
                k = f"{key.numerator}/{key.denominator}".encode("ascii")
                out.append(struct.pack("<H", len(k)) + k + struct.pack("<I", val.node))
        prev = ver
    out.append(struct.pack("<I", len(st.created_nodes)))
    out.append(struct.pack(f"<{len(st.created_nodes)}I", *st.created_nodes))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise ContainerError("truncated container")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ContainerError("truncated container")
        b = self.data[self.pos:self.pos + n]
        self.pos += n
        return b


def loads(data: bytes, mesh: SurfaceMesh) -> EdgeQueryStructure:
    r = _Reader(data)
    if r.raw(5) != MAGIC:
        raise ContainerError("not a GEOQ1 container")
    (fmt,) = r.take("<H")
    if fmt != FORMAT:
        raise ContainerError(f"unsupported container format {fmt}")
    if r.raw(32).hex() != mesh.sha256():
        raise ContainerError("container was built for a different mesh")
    edge, n = r.take("<II")
    psi = SequenceTree(mesh, edge)
    for v in range(1, n):
        p, E, left = r.take("<iII")
        if psi.child(p, E, left) != v:
            raise ContainerError("sequence-tree nodes out of creation order")
    (K,) = r.take("<I")
    bps, kinds = [], []
    for _ in range(K):
        u, k = r.take("<dB")
        bps.append(u)
        kinds.append(_KINDS[k])
    segment_version = list(r.take(f"<{K + 1}I"))
    (V,) = r.take("<I")
    versions = []
    prev: dict = {}
    for _ in range(V):
        ver = dict(prev)
        (C,) = r.take("<I")
        for _ in range(C):
            E, M = r.take("<II")
            root = None
            for _ in range(M):
                (klen,) = r.take("<H")
                key = Fraction(r.raw(klen).decode("ascii"))
                (node,) = r.take("<I")
                root = persistent.insert(root, key, MapEntry(node, _edge_coef(mesh, psi, node, E)))
            ver[E] = root
        versions.append(ver)
        prev = ver
    (nc,) = r.take("<I")
    created = list(r.take(f"<{nc}I"))
    if r.pos != len(data):
        raise ContainerError("trailing bytes after container")
    st = EdgeQueryStructure(mesh, edge, psi, bps, segment_version, versions, kinds, [], [], created)
    st.snapshots = [st.snapshot(v) for v in range(len(versions))]
    return st


def save(st: EdgeQueryStructure, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(st))


def load(path: str, mesh: SurfaceMesh) -> EdgeQueryStructure:
    with open(path, "rb") as fh:
        return loads(fh.read(), mesh)
