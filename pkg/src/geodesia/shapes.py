"""Standard test surfaces."""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial import ConvexHull

from . import _geom as g
from .mesh import SurfaceMesh, SurfacePoint, load_off, point_in_face, point_on_edge
from .tolerance import DEFAULT, Tolerances

TETRA_OFF = """OFF
4 4 6
{a} {a} {a}
{a} -{a} -{a}
-{a} {a} -{a}
-{a} -{a} {a}
3 0 1 2
3 0 3 1
3 0 2 3
3 1 3 2
""".format(a=repr(1.0 / (2.0 * math.sqrt(2.0))))

CUBE_OFF = """OFF
8 6 12
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
"""

OCTA_OFF = """OFF
6 8 12
1 0 0
-1 0 0
0 1 0
0 -1 0
0 0 1
0 0 -1
3 0 2 4
3 2 1 4
3 1 3 4
3 3 0 4
3 2 0 5
3 1 2 5
3 3 1 5
3 0 3 5
"""


def tetrahedron(tolerances: Tolerances = DEFAULT) -> SurfaceMesh:
    """Regular tetrahedron with unit edge length."""
    return load_off(TETRA_OFF, tolerances)


def cube(tolerances: Tolerances = DEFAULT) -> SurfaceMesh:
    return load_off(CUBE_OFF, tolerances)


def octahedron(tolerances: Tolerances = DEFAULT) -> SurfaceMesh:
    return load_off(OCTA_OFF, tolerances)


def hull_mesh(points, tolerances: Tolerances = DEFAULT) -> SurfaceMesh:
    """Surface of the convex hull of ``points`` (all points must be extreme)."""
    P = np.asarray(points, dtype=float)
    hull = ConvexHull(P)
    used = sorted(set(hull.simplices.ravel().tolist()))
    remap = {v: i for i, v in enumerate(used)}
    tris = [tuple(remap[int(v)] for v in s) for s in hull.simplices]
    return SurfaceMesh(P[used], tris, tolerances)


def random_hull(n: int, seed: int, tolerances: Tolerances = DEFAULT, stretch=(1.0, 0.8, 0.65)) -> SurfaceMesh:
    """Hull of ``n`` random points on an ellipsoid (every point is a hull vertex)."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    X *= np.asarray(stretch)
    return hull_mesh(X, tolerances)


def perturbed(mesh: SurfaceMesh, seed: int, amount: float = 0.05) -> SurfaceMesh:
    """Generic version of a symmetric solid: jitter vertices, keep convex hull."""
    rng = np.random.default_rng(seed)
    X = mesh.vertices + amount * mesh.diameter * rng.uniform(-1, 1, size=mesh.vertices.shape)
    return hull_mesh(X, mesh.tolerances)


def generic_tetrahedron(seed: int = 1) -> SurfaceMesh:
    return perturbed(tetrahedron(), seed)


def generic_octahedron(seed: int = 1) -> SurfaceMesh:
    return perturbed(octahedron(), seed)


def random_face_point(mesh: SurfaceMesh, rng) -> SurfacePoint:
    """Area-weighted uniform point in a face interior."""
    areas = np.array([g.polygon_area(c) for c in mesh.corners])
    f = int(rng.choice(mesh.n_faces, p=areas / areas.sum()))
    while True:
        a, b = rng.uniform(0.0, 1.0, size=2)
        if a + b > 1.0:
            a, b = 1.0 - a, 1.0 - b
        if min(a, b, 1.0 - a - b) >= 0.01:
            return point_in_face(mesh, f, (1.0 - a - b, a, b))


def random_edge_point(mesh: SurfaceMesh, rng, margin: float = 0.01) -> SurfacePoint:
    e = int(rng.integers(mesh.n_edges))
    return point_on_edge(mesh, e, float(rng.uniform(margin, 1.0 - margin)))
