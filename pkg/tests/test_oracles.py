import math

import numpy as np
import pytest

from geodesia import shapes
from geodesia.chen_han import geodesic_distance
from geodesia.mesh import point_from_world, point_in_face, point_on_edge
from geodesia.oracles import (OracleExplosion, bruteforce_distance, dijkstra_oracle, sample_ridge_signature,
                              sampled_sigma, uniform_parameters, verify_witness)
from geodesia.sweep import sweep_edge


def test_dijkstra_same_face_is_exact(hull8):
    s = point_in_face(hull8, 2, (0.6, 0.3, 0.1))
    t = point_in_face(hull8, 2, (0.1, 0.2, 0.7))
    chord = float(np.linalg.norm(s.world(hull8) - t.world(hull8)))
    for k in (0, 1, 5):
        r = dijkstra_oracle(hull8, s, t, k)
        assert r.distance == pytest.approx(chord, abs=1e-12)
        assert r.guarantee == "upper-bound"


def test_dijkstra_refinement_is_monotone(hull8, rng):
    s, t = shapes.random_face_point(hull8, rng), shapes.random_face_point(hull8, rng)
    exact = bruteforce_distance(hull8, s, t, max_len=hull8.n_faces).distance
    prev = math.inf
    gaps = []
    for k in (1, 3, 7, 15, 31):
        d = dijkstra_oracle(hull8, s, t, k).distance
        assert d >= exact - 1e-9
        assert d <= prev + 1e-12
        prev = d
        gaps.append(d - exact)
    assert gaps == sorted(gaps, reverse=True)


def test_dijkstra_cube_face_centres(cube):
    s = point_from_world(cube, [0.5, 0.5, 0.0])
    t = point_from_world(cube, [0.5, 0.5, 1.0])
    d = dijkstra_oracle(cube, s, t, 32).distance
    assert abs(d - 2.0) <= 0.02
    assert d == pytest.approx(2.000459031467829, abs=1e-9)


def test_bruteforce_cofacial(hull8):
    s = point_in_face(hull8, 5, (0.5, 0.3, 0.2))
    t = point_in_face(hull8, 5, (0.2, 0.3, 0.5))
    r = bruteforce_distance(hull8, s, t)
    assert r.witness.edges == () and r.guarantee == "exact"
    assert r.distance == pytest.approx(float(np.linalg.norm(s.world(hull8) - t.world(hull8))), abs=1e-12)


def test_bruteforce_tetra_golden(tetra):
    e = 0
    i, j = tetra.edges[e]
    opp = next(k for k, (a, b) in enumerate(tetra.edges) if {a, b}.isdisjoint({i, j}))
    r = bruteforce_distance(tetra, point_on_edge(tetra, e, 0.5), point_on_edge(tetra, opp, 0.5), max_len=3)
    assert r.distance == pytest.approx(1.0, abs=1e-12)


def test_bruteforce_witness_realizes(hull8, rng):
    s, t = shapes.random_face_point(hull8, rng), shapes.random_face_point(hull8, rng)
    r = bruteforce_distance(hull8, s, t, max_len=hull8.n_faces)
    p = verify_witness(hull8, s, t, r)
    assert p is not None and p.length == pytest.approx(r.distance, abs=1e-12)


def test_bruteforce_explosion_guard(hull8):
    s = point_in_face(hull8, 0)
    t = point_in_face(hull8, hull8.n_faces - 1)
    with pytest.raises(OracleExplosion):
        bruteforce_distance(hull8, s, t, max_len=8, guard=5)


@pytest.mark.parametrize("name", ["gtetra", "gocta", "hull8"])
def test_sandwich_and_agreement(name, request, rng):
    mesh = request.getfixturevalue(name)
    pairs = 500 if name == "hull8" else 100
    for k in range(pairs):
        s, t = shapes.random_face_point(mesh, rng), shapes.random_face_point(mesh, rng)
        exact = bruteforce_distance(mesh, s, t, max_len=mesh.n_faces).distance
        d, _ = geodesic_distance(mesh, s, t)
        assert abs(d - exact) <= 1e-9
        if k % 10 == 0:
            assert exact <= dijkstra_oracle(mesh, s, t, 4).distance + 1e-9


def test_uniform_parameters_nest():
    U1 = uniform_parameters(10)
    U2 = uniform_parameters(10, 2)
    assert len(U1) == 10 and len(U2) == 21
    assert set(U1) <= set(U2)
    assert all(0 < u < 1 for u in U2)


def test_signatures_track_sweep_events(hull8):
    e = 7
    res = sweep_edge(hull8, e)
    bps = [0.0] + res.breakpoints + [1.0]
    checked = 0
    for k in range(1, len(bps) - 1):
        if bps[k] - bps[k - 1] < 3e-5 or bps[k + 1] - bps[k] < 3e-5:
            continue
        a, b = sample_ridge_signature(hull8, e, [bps[k] - 1e-5, bps[k] + 1e-5])
        assert a != b
        checked += 1
    assert checked
    lo, hi = max(zip(bps, bps[1:]), key=lambda p: p[1] - p[0])
    inside = sample_ridge_signature(hull8, e, np.linspace(lo, hi, 7)[1:-1])
    assert len(set(inside)) == 1


def test_signature_refinement(gocta):
    U1 = uniform_parameters(40)
    U2 = uniform_parameters(40, 2)
    s1 = dict(zip(U1, sample_ridge_signature(gocta, 3, U1)))
    s2 = dict(zip(U2, sample_ridge_signature(gocta, 3, U2)))
    assert all(s1[u] == s2[u] for u in U1)
    changes1 = sum(s1[a] != s1[b] for a, b in zip(U1, U1[1:]))
    changes2 = sum(s2[a] != s2[b] for a, b in zip(U2, U2[1:]))
    assert changes2 >= changes1
    assert sampled_sigma(gocta, 3, U1) <= sampled_sigma(gocta, 3, U2)
