import numpy as np
import pytest

from geodesia import _geom as g
from geodesia import shapes
from geodesia.mesh import point_from_world, point_in_face
from geodesia.oracles import bruteforce_distance
from geodesia.unfolding import (EdgeSequence, SequenceError, compose_unfolding, realize_geodesic, source_image,
                                strip_motions)


def test_empty_sequence_strip_is_the_anchor_face(hull8):
    strip = compose_unfolding(hull8, EdgeSequence(3, ()))
    assert strip.faces == [3]
    assert strip.motions[0].apply((0.2, 0.1)) == pytest.approx((0.2, 0.1))
    assert abs(abs(g.polygon_area(strip.polygon)) - hull8.face_areas[3]) < 1e-12


def test_cube_two_squares_flatten_to_a_rectangle(cube):
    # bottom square (z = 0) and side square (y = 0) meet along the edge from (0,0,0) to (1,0,0)
    a = cube.edge_index[(0, 1)]
    f_bottom, f_side = cube.edge_faces[a]
    diag_b = next(e for e in cube.face_edges[f_bottom] if e != a and cube.edge_length(e) > 1.1)
    diag_s = next(e for e in cube.face_edges[f_side] if e != a and cube.edge_length(e) > 1.1)
    anchor = cube.other_face(diag_b, f_bottom)
    strip = compose_unfolding(cube, EdgeSequence(anchor, (diag_b, a, diag_s)))
    poly = strip.polygon
    assert abs(abs(g.polygon_area(poly)) - 2.0) < 1e-12
    xs = sorted({round(p[0], 9) for p in poly})
    ys = sorted({round(p[1], 9) for p in poly})
    pts = np.array(poly)
    span = sorted([np.ptp(pts[:, 0]), np.ptp(pts[:, 1])])
    # a 2 x 1 rectangle, up to the in-plane rotation of the anchor frame
    hull_area = abs(g.polygon_area(poly))
    assert hull_area == pytest.approx(2.0)
    assert max(g.dist(p, q) for p in poly for q in poly) == pytest.approx(np.sqrt(5.0))
    assert len(xs) >= 2 and len(ys) >= 2 and span[1] > 0


def test_strip_around_tetra_vertex_is_simple(tetra):
    v = 0
    ring = tetra.vertex_faces(v)
    edges = tuple(tetra.shared_edge(a, b) for a, b in zip(ring, ring[1:] + ring[:1]))
    strip = compose_unfolding(tetra, EdgeSequence(ring[0], edges))
    assert len(strip.faces) == 4
    assert g.polygon_is_simple(strip.polygon)


def test_non_adjacent_sequence_rejected(hull8):
    f = 0
    far = next(e for e in range(hull8.n_edges) if e not in hull8.face_edges[f])
    with pytest.raises(SequenceError):
        compose_unfolding(hull8, EdgeSequence(f, (far,)))


def test_same_face_realization_is_euclidean(hull8):
    s = point_in_face(hull8, 2, (0.6, 0.2, 0.2))
    t = point_in_face(hull8, 2, (0.1, 0.3, 0.6))
    p = realize_geodesic(hull8, s, t, EdgeSequence(2, ()))
    assert p.length == pytest.approx(float(np.linalg.norm(s.world(hull8) - t.world(hull8))), abs=1e-12)


def test_cube_face_centres_realize_length_two(cube):
    s = point_from_world(cube, [0.5, 0.5, 0.0])
    t = point_from_world(cube, [0.5, 0.5, 1.0])
    r = bruteforce_distance(cube, s, t, max_len=6)
    assert r.distance == pytest.approx(2.0, abs=1e-12)
    p = realize_geodesic(cube, s, t, r.witness)
    assert p is not None and p.length == pytest.approx(2.0, abs=1e-12)


def _crossing_param(mesh, s, t, f, e):
    h = mesh.other_face(e, f)
    S = s.xy
    T = mesh.unfold_across(f, e).apply(t.xy)
    a, b = mesh.edge_endpoints_local(f, e)
    return g.line_intersection(S, T, a, b)


def test_realizability_matches_edge_crossing(hull8, rng):
    seen = {True: 0, False: 0}
    for _ in range(200):
        e = int(rng.integers(hull8.n_edges))
        f, h = hull8.edge_faces[e]
        s = shapes.random_face_point(hull8, rng)
        if s.face != f:
            s = point_in_face(hull8, f, tuple(rng.dirichlet((2, 2, 2))))
        t = point_in_face(hull8, h, tuple(rng.dirichlet((2, 2, 2))))
        lam, mu = _crossing_param(hull8, s, t, f, e)
        expect = 1e-6 < mu < 1 - 1e-6
        p = realize_geodesic(hull8, s, t, EdgeSequence(f, (e,)))
        if abs(mu) < 1e-6 or abs(mu - 1) < 1e-6:
            continue
        assert (p is not None) == expect
        seen[expect] += 1
    assert seen[True] and seen[False]


def _random_realized(mesh, rng, count):
    out = []
    while len(out) < count:
        s, t = shapes.random_face_point(mesh, rng), shapes.random_face_point(mesh, rng)
        r = bruteforce_distance(mesh, s, t, max_len=mesh.n_faces)
        p = realize_geodesic(mesh, s, t, r.witness)
        if p is not None:
            out.append(p)
    return out


def test_isometry_reversal_and_vertex_clearance(hull8, rng):
    for p in _random_realized(hull8, rng, 20):
        assert abs(p.surface_length(hull8) - p.length) <= 1e-9 * hull8.diameter
        back = realize_geodesic(hull8, p.target, p.source, p.sequence.reverse(hull8))
        assert back is not None and abs(back.length - p.length) <= hull8.tau("rigid")
        faces, motions = strip_motions(hull8, p.sequence.anchor, p.sequence.edges)
        S = p.source.xy if p.source.face == faces[0] else hull8.to_local(faces[0], p.source.world(hull8))
        T = motions[-1].apply(hull8.to_local(faces[-1], p.target.world(hull8)))
        for f, M in zip(faces, motions):
            for c in hull8.corners[f]:
                assert g.seg_point_dist(M.apply(c), S, T) > hull8.tau("pt")


def test_source_image_empty_sequence_is_identity(hull8):
    s = point_in_face(hull8, 4, (0.2, 0.5, 0.3))
    assert source_image(hull8, s, EdgeSequence(4, ())) == pytest.approx(s.xy)


def test_source_image_across_one_edge_is_isometric(hull8):
    e = 7
    f, h = hull8.edge_faces[e]
    s = point_in_face(hull8, f, (0.2, 0.5, 0.3))
    S = source_image(hull8, s, EdgeSequence(f, (e,)))
    for lam in (0.1, 0.5, 0.9):
        P = hull8.edge_point_local(h, e, lam)
        X = hull8.to_world(h, P)
        assert g.dist(S, P) == pytest.approx(float(np.linalg.norm(X - s.world(hull8))), abs=1e-12)


def test_source_image_is_affine(hull8):
    seq = EdgeSequence(0, (hull8.face_edges[0][1],))
    a = point_in_face(hull8, 0, (0.6, 0.2, 0.2))
    b = point_in_face(hull8, 0, (0.2, 0.2, 0.6))
    m = point_in_face(hull8, 0, (0.4, 0.2, 0.4))
    A, B, M = (source_image(hull8, p, seq) for p in (a, b, m))
    assert g.dist(g.lerp(A, B, 0.5), M) < 1e-12
