import numpy as np
import pytest

from geodesia import shapes
from geodesia.mesh import locate
from geodesia.oracles import sampled_sigma, uniform_parameters
from geodesia.ridge import fresh_ridge_tree, ridge_core_signature, ridge_signature_at, sigma_s
from geodesia.sweep import (CROSSING, MERGE, SequenceTree, SweepError, init_sweep, process_event, sweep_edge)
from geodesia.unfolding import realize_geodesic


@pytest.fixture(scope="module")
def mirror():
    # mirror-symmetric hull; edge 12 joins a point to its mirror image
    rng = np.random.default_rng(4)
    P = rng.normal(size=(4, 3))
    P[:, 0] = np.abs(P[:, 0]) + 0.2
    Q = P.copy()
    Q[:, 0] *= -1
    pts = np.vstack([P, Q])
    pts[:, 1] *= 0.8
    pts[:, 2] *= 0.65
    return shapes.hull_mesh(pts)


def test_init_queue_discipline(gtetra):
    for e in range(gtetra.n_edges):
        st = init_sweep(gtetra, e)
        assert st.queue
        assert all(st.u < q[0] <= 1.0 for q in st.queue)
        assert len(st.vertices) == gtetra.n_vertices - 2
        for w in st.vertices.values():
            assert len(w.gens) == 3


def test_trie_reconstruction(hull8):
    rt, _ = fresh_ridge_tree(hull8, 3, 0.37)
    seqs = {seq for v in rt.vertices for seq, _, _ in v.generators}
    psi = SequenceTree(hull8, 3)
    for s in seqs:
        psi.insert(s)
    closure = {s[:k] for s in seqs for k in range(1, len(s) + 1)}
    assert psi.sequences() == closure == sigma_s(rt)
    assert all(len(c) <= 4 for c in psi.children)
    for v in range(len(psi)):
        seq = psi.sequence(v)
        assert len(set(seq)) == len(seq)


def test_init_sigma_matches_fresh_tree(hull8):
    st = init_sweep(hull8, 5)
    rt, _ = fresh_ridge_tree(hull8, 5, st.u)
    assert st.psi.sequences() == sigma_s(rt)


def test_first_step_bad_sequence_rejected(hull8):
    psi = SequenceTree(hull8, 0)
    far = next(E for E in range(hull8.n_edges)
               if all(E not in hull8.face_edges[f] for f in hull8.edge_faces[0]))
    with pytest.raises(SweepError):
        psi.insert((0, far))


def test_midpoint_merge_on_mirror_hull(mirror):
    assert mirror.edges[12] == (1, 5)
    res = sweep_edge(mirror, 12)
    mids = [r for r in res.log if r.kind == MERGE and abs(r.u - 0.5) < 1e-3]
    assert len(mids) == 1 and abs(mids[0].u - 0.5) <= 1e-6
    before = ridge_core_signature(fresh_ridge_tree(mirror, 12, 0.5 - 1e-5)[0])
    after = ridge_core_signature(fresh_ridge_tree(mirror, 12, 0.5 + 1e-5)[0])
    assert before != after


def _watch(mesh, e):
    seen = []

    def on_event(st, rec):
        seen.append((rec, len(st.psi), len(st.vertices), len(st.queue)))

    res = sweep_edge(mesh, e, on_event=on_event)
    return res, seen


@pytest.mark.parametrize("name,e", [("gocta", 2), ("hull8", 7), ("hull8", 11)])
def test_event_log_properties(name, e, request):
    mesh = request.getfixturevalue(name)
    res, seen = _watch(mesh, e)
    assert res.log
    us = [r.u for r in res.log]
    assert all(a < b or r.degenerate for a, b, r in zip(us, us[1:], res.log[1:]))
    assert res.breakpoints == us
    sizes = [s[1] for s in seen]
    assert sizes == sorted(sizes)
    n = mesh.n_vertices
    for rec, _, nverts, qlen in seen:
        assert nverts == n - 2
        assert qlen <= 8 * n * n
        if rec.kind == CROSSING:
            assert rec.psi_nodes_added <= 1
        elif rec.kind == MERGE:
            assert rec.psi_nodes_added == 0


@pytest.mark.parametrize("name,e", [("gocta", 2), ("hull8", 7)])
def test_associations_realize_after_events(name, e, request):
    mesh = request.getfixturevalue(name)
    res = sweep_edge(mesh, e)
    us = [0.0] + res.breakpoints + [1.0]
    checked = 0
    for k in range(1, len(us) - 1):
        if us[k + 1] - us[k] < 1e-4:
            continue
        u = us[k] + 0.5 * (us[k + 1] - us[k])
        st = sweep_edge(mesh, e, u_end=u).state
        s = st.source(u)
        for w in st.vertices.values():
            t = locate(mesh, w.face, st.position(w, u))
            lengths = []
            for seq in st.associations(w):
                p = realize_geodesic(mesh, s, t, seq)
                assert p is not None
                lengths.append(p.length)
            assert max(lengths) - min(lengths) <= 1e-7 * mesh.diameter
            checked += 1
    assert checked


@pytest.mark.parametrize("name,e", [("gtetra", 0), ("gocta", 5), ("hull8", 2)])
def test_snapshot_equivalence(name, e, request, rng):
    mesh = request.getfixturevalue(name)
    full = sweep_edge(mesh, e)
    bps = np.array(full.breakpoints)
    tried = 0
    for u in np.sort(rng.uniform(0.001, 0.999, 50)):
        if bps.size and np.min(np.abs(bps - u)) < 1e-6:
            continue
        st = sweep_edge(mesh, e, u_end=float(u)).state
        assert st.signature(float(u)) == ridge_signature_at(mesh, e, float(u))
        tried += 1
    assert tried >= 45


def test_quiet_segment_has_no_events(hull8):
    res = sweep_edge(hull8, 7)
    bps = [0.0] + res.breakpoints + [1.0]
    k = max(range(len(bps) - 1), key=lambda i: bps[i + 1] - bps[i])
    lo, hi = bps[k], bps[k + 1]
    pad = 0.01 * (hi - lo)
    assert sweep_edge(hull8, 7, u0=lo + pad, u_end=hi - pad).log == []


@pytest.mark.parametrize("e", range(6))
def test_tetra_sigma_matches_sampling(gtetra, e):
    U1 = uniform_parameters(1000)
    assert sweep_edge(gtetra, e).sigma() == sampled_sigma(gtetra, e, U1)


def test_log_serialization(hull8):
    import json
    res = sweep_edge(hull8, 7)
    lines = res.log_lines().splitlines()
    assert len(lines) == len(res.log)
    row = json.loads(lines[0])
    assert set(row) == {"u", "type", "ids", "psi_nodes_added"}
    tree = res.psi.to_json()
    assert len(tree["parent"]) == len(res.psi)
