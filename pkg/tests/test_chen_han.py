import math
from collections import Counter

import numpy as np
import pytest

from geodesia import shapes
from geodesia.chen_han import (DegeneracyError, admissible_intervals, build_ch_tree, geodesic_distance,
                               shortest_vertex_paths)
from geodesia.mesh import MeshError, point_at_vertex, point_from_world, point_in_face, point_on_edge
from geodesia.oracles import bruteforce_distance


def test_tetra_centroid_depth_one(tetra):
    tree = build_ch_tree(tetra, point_in_face(tetra, 0), max_depth=1)
    assert tree.depth == 1
    assert len(tree.roots) == 3
    assert all(v.interval == (0.0, 1.0) for v in tree.roots)
    assert sorted(v.edge for v in tree.roots) == sorted(tetra.face_edges[0])


def test_vertex_source_rejected(cube):
    with pytest.raises(MeshError):
        build_ch_tree(cube, point_at_vertex(cube, 0))


@pytest.mark.parametrize("name", ["cube", "hull8"])
def test_one_angle_one_split(name, request):
    mesh = request.getfixturevalue(name)
    s = point_in_face(mesh, 1, (0.5, 0.3, 0.2))
    tree = build_ch_tree(mesh, s)
    split = Counter()
    for v in tree.alive_nodes():
        if sum(c.alive for c in v.children.values()) == 2:
            split[(v.edge, v.shadow)] += 1
        assert len(v.children) <= 2
    assert all(k <= 1 for k in split.values())
    assert tree.depth <= mesh.n_faces
    for level in tree.levels:
        assert sum(v.alive for v in level) <= 4 * mesh.n_edges


def test_intervals_are_nonempty(hull8):
    tree = build_ch_tree(hull8, point_in_face(hull8, 5, (0.2, 0.3, 0.5)))
    for v in tree.nodes():
        lo, hi = v.interval
        assert 0.0 <= lo < hi <= 1.0


def test_forbidden_face_is_never_entered(hull8):
    f2 = 6
    s = point_in_face(hull8, 0, (0.2, 0.3, 0.5))
    tree = build_ch_tree(hull8, s, forbidden_face=f2)
    assert all(v.face != f2 for v in tree.nodes())


def test_cube_centre_occupancy_matches_bruteforce(cube):
    s = point_from_world(cube, [0.5, 0.5, 0.0])
    tree = build_ch_tree(cube, s)
    for a in range(cube.n_vertices):
        ref = bruteforce_distance(cube, s, point_at_vertex(cube, a), max_len=6).distance
        assert tree.vertex_distance(a) == pytest.approx(ref, abs=1e-9)
    own = [a for a in range(cube.n_vertices) if cube.vertices[a][2] == 0.0]
    d = [tree.vertex_distance(a) for a in own]
    assert max(d) - min(d) <= 1e-12
    assert d[0] == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_cube_centre_is_not_generic(cube):
    # opposite corners are reached around two sides by symmetry
    with pytest.raises(DegeneracyError):
        shortest_vertex_paths(cube, point_from_world(cube, [0.5, 0.5, 0.0]))


def test_occupancy_optimal_on_hull(hull8, rng):
    s = shapes.random_face_point(hull8, rng)
    tree = build_ch_tree(hull8, s)
    for a in range(hull8.n_vertices):
        ref = bruteforce_distance(hull8, s, point_at_vertex(hull8, a), max_len=hull8.n_faces).distance
        assert abs(tree.vertex_distance(a) - ref) <= 1e-7


def test_distance_dominance(hull8, rng):
    s = shapes.random_face_point(hull8, rng)
    tree = build_ch_tree(hull8, s)
    for v in list(tree.alive_nodes())[::7]:
        lam = 0.5 * (v.interval[0] + v.interval[1])
        X = hull8.edge_point_local(v.face, v.edge, lam)
        d, _ = geodesic_distance(hull8, s, point_on_edge(hull8, v.edge, lam))
        assert math.dist(v.image, X) >= d - 1e-9


def test_same_point_is_zero(hull8):
    s = point_in_face(hull8, 3)
    d, p = geodesic_distance(hull8, s, s)
    assert d == 0.0 and p.sequence.edges == ()


def test_cube_near_opposite_corners():
    cube = shapes.cube()
    s = point_from_world(cube, [1e-6, 2e-6, 0.0])
    t = point_from_world(cube, [1 - 2e-6, 1 - 1e-6, 1.0])
    d, p = geodesic_distance(cube, s, t)
    assert d == pytest.approx(math.sqrt(5.0), abs=1e-4)
    assert p.length == d


def test_tetra_opposite_edge_midpoints(tetra):
    e = 0
    i, j = tetra.edges[e]
    opp = next(k for k, (a, b) in enumerate(tetra.edges) if {a, b}.isdisjoint({i, j}))
    s, t = point_on_edge(tetra, e, 0.5), point_on_edge(tetra, opp, 0.5)
    d, _ = geodesic_distance(tetra, s, t)
    assert d == pytest.approx(1.0, abs=1e-9)
    assert bruteforce_distance(tetra, s, t, max_len=3).distance == pytest.approx(1.0, abs=1e-9)


def test_symmetric_and_matches_bruteforce(hull8, rng):
    for _ in range(12):
        s, t = shapes.random_face_point(hull8, rng), shapes.random_face_point(hull8, rng)
        d1, p = geodesic_distance(hull8, s, t)
        d2, _ = geodesic_distance(hull8, t, s)
        assert abs(d1 - d2) <= 1e-9 * hull8.diameter
        ref = bruteforce_distance(hull8, s, t, max_len=hull8.n_faces).distance
        assert abs(d1 - ref) <= 1e-9 * hull8.diameter
        assert abs(p.surface_length(hull8) - d1) <= 1e-9 * hull8.diameter


def test_generic_tetra_centroid_vertex_paths(gtetra):
    s = point_in_face(gtetra, 0)
    paths = shortest_vertex_paths(gtetra, s)
    for a in gtetra.faces[0]:
        assert paths[a].sequence.edges == ()
    far = next(a for a in range(4) if a not in gtetra.faces[0])
    assert len(paths[far].sequence.edges) == 1


def test_hull20_vertex_paths_beat_chords():
    mesh = shapes.random_hull(20, seed=3)
    s = point_in_face(mesh, 4, (0.31, 0.27, 0.42))
    paths = shortest_vertex_paths(mesh, s)
    X = s.world(mesh)
    for a, p in enumerate(paths):
        assert p.length >= float(np.linalg.norm(mesh.vertices[a] - X)) - 1e-12


def _pairs(mesh):
    return [(e, f) for e in range(mesh.n_edges) for f in range(mesh.n_edges) if e != f]


def test_admissible_intervals_shared_face(gtetra):
    f1 = 0
    e, e2 = gtetra.face_edges[f1][0], gtetra.face_edges[f1][1]
    s = point_on_edge(gtetra, e, 0.4)
    I = admissible_intervals(gtetra, s, e2, f1)
    direct = [iv for iv in I.intervals if iv[2].edges == (e2,)]
    assert direct and direct[0][0] == 0.0 and direct[0][1] == 1.0
    for _, _, seq, _ in I.intervals:
        assert seq.edges.count(e2) == 1 and seq.edges[-1] == e2


@pytest.mark.parametrize("mesh_name", ["gtetra", "tetra"])
def test_admissible_union_gives_geodesic(mesh_name, request, rng):
    mesh = request.getfixturevalue(mesh_name)
    for e, e2 in _pairs(mesh):
        s = point_on_edge(mesh, e, float(rng.uniform(0.05, 0.95)))
        f1, f2 = mesh.edge_faces[e2]
        I1 = admissible_intervals(mesh, s, e2, f1)
        I2 = admissible_intervals(mesh, s, e2, f2)
        for lam in np.linspace(0.01, 0.99, 25):
            best = min(I1.min_distance(mesh, lam), I2.min_distance(mesh, lam))
            d, _ = geodesic_distance(mesh, s, point_on_edge(mesh, e2, float(lam)))
            assert abs(best - d) <= 1e-7
