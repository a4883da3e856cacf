"""Command-line interface.

Every command writes JSON carrying the schema tag, tool version, mesh hash,
seed and tolerance set, except ``star`` (and ``ridge --format svg``) which
write SVG, and ``bench`` which prints a table.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, shapes
from .chen_han import DegeneracyError, build_ch_tree, geodesic_distance, tree_distance
from .container import load as load_container
from .container import save as save_container
from .mesh import (MeshError, SurfaceMesh, point_at_vertex, point_from_world, point_in_face,
                   point_on_edge, read_off, validate_convex)
from .oracles import bruteforce_distance, dijkstra_oracle, sampled_sigma, uniform_parameters
from .queries import build_edge_structure, build_one_point, one_point_query, two_point_query
from .ridge import build_ridge_tree
from .star import build_star_unfolding
from .svg import ridge_svg, star_svg
from .sweep import sweep_edge
from .tolerance import DEFAULT, Tolerances
from .unfolding import realize_geodesic

SCHEMA = "geodesia/1"


class UsageError(Exception):
    pass


# -- configuration -------------------------------------------------------------------


def parse_tolerances(items) -> Tolerances:
    overrides = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            overrides[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--tol value is not a number: {item!r}") from None
    try:
        return DEFAULT.with_overrides(overrides)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip("'\"")) from None


def load_mesh(spec: str, tol: Tolerances) -> SurfaceMesh:
    """An OFF file path, or a built-in: tetrahedron, cube, octahedron, hull:N:SEED."""
    if spec is None:
        raise UsageError("--mesh is required")
    if os.path.exists(spec):
        return read_off(spec, tol)
    builtins = {"tetrahedron": shapes.tetrahedron, "cube": shapes.cube, "octahedron": shapes.octahedron}
    if spec in builtins:
        return builtins[spec](tol)
    if spec.startswith("hull:"):
        try:
            _, n, seed = spec.split(":")
            return shapes.random_hull(int(n), int(seed), tol)
        except ValueError:
            raise UsageError(f"bad hull spec {spec!r}, expected hull:N:SEED") from None
    raise UsageError(f"mesh not found: {spec}")


def parse_point(mesh: SurfaceMesh, spec: str):
    """edge:E:U, vertex:V, face:F:B0,B1,B2 or xyz:X,Y,Z."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "edge":
            e, u = rest.split(":")
            return point_on_edge(mesh, int(e), float(u))
        if kind == "vertex":
            return point_at_vertex(mesh, int(rest))
        if kind == "face":
            f, bary = rest.split(":")
            return point_in_face(mesh, int(f), tuple(float(x) for x in bary.split(",")))
        if kind == "xyz":
            return point_from_world(mesh, [float(x) for x in rest.split(",")])
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad point {spec!r}: {exc}") from None
    raise UsageError(f"bad point {spec!r}; use edge:E:U, vertex:V, face:F:B0,B1,B2 or xyz:X,Y,Z")


def envelope(args, mesh: SurfaceMesh | None, **payload) -> dict:
    out = {"schema": SCHEMA, "version": __version__, "command": args.command, "seed": args.seed,
           "tolerances": args.tolerances.as_dict()}
    if mesh is not None:
        out["mesh"] = {"sha256": mesh.sha256(), "vertices": mesh.n_vertices, "faces": mesh.n_faces}
    out.update(payload)
    return out


def emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def threads() -> int:
    try:
        return max(1, int(os.environ.get("GEODESIA_THREADS", "1")))
    except ValueError:
        return 1


# -- commands ------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        mesh = load_mesh(args.mesh, args.tolerances)
    except MeshError as exc:
        emit(args, dump_json(envelope(args, None, manifold=False, convex=False, error=str(exc))))
        return 1
    rep = validate_convex(mesh)
    pairs = [{"vertex": v, "face": f, "height": h} for v, f, h in rep.violations]
    emit(args, dump_json(envelope(args, mesh, manifold=True, convex=rep.ok, offending=pairs)))
    return 0 if rep.ok else 1


def cmd_distance(args) -> int:
    mesh = load_mesh(args.mesh, args.tolerances)
    s, t = parse_point(mesh, args.source), parse_point(mesh, args.target)
    if args.method == "bruteforce":
        r = bruteforce_distance(mesh, s, t, args.maxlen)
        path = realize_geodesic(mesh, s, t, r.witness) if r.witness is not None else None
        payload = {"distance": r.distance, "method": "bruteforce", "guarantee": r.guarantee}
    elif args.method == "dijkstra":
        r = dijkstra_oracle(mesh, s, t, args.steiner)
        emit(args, dump_json(envelope(args, mesh, distance=r.distance, method="dijkstra", guarantee=r.guarantee,
                                      sequence=None, crossings=[])))
        return 0
    else:
        d, path = geodesic_distance(mesh, s, t)
        payload = {"distance": d, "method": "chen-han", "guarantee": "exact"}
    if path is not None:
        payload["sequence"] = list(path.sequence.edges)
        payload["anchor_face"] = path.sequence.anchor
        payload["crossings"] = [[float(x) for x in p.world(mesh)] for p in path.crossings]
    emit(args, dump_json(envelope(args, mesh, **payload)))
    return 0


def _ridge_json(rt) -> dict:
    verts = []
    for v in rt.vertices:
        item = {"kind": v.kind, "face": v.face, "xy": [float(v.xy[0]), float(v.xy[1])]}
        if v.kind == "leaf":
            item["vertex"] = v.ref
        elif v.kind == "deg2":
            item["edge"], item["param"] = v.ref, v.param
        else:
            item["generators"] = [{"sequence": list(seq), "face": f} for seq, f, _ in v.generators]
        verts.append(item)
    ridges = [{"ends": list(r.ends), "chain": list(r.chain), "sites": list(r.sites)} for r in rt.ridges]
    return {"vertices": verts, "ridges": ridges}


def cmd_ridge(args) -> int:
    mesh = load_mesh(args.mesh, args.tolerances)
    rt = build_ridge_tree(mesh, parse_point(mesh, args.source))
    if args.format == "svg":
        emit(args, ridge_svg(rt))
        return 0
    emit(args, dump_json(envelope(args, mesh, source=args.source, tree=_ridge_json(rt))))
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(ridge_svg(rt))
    return 0


def cmd_star(args) -> int:
    mesh = load_mesh(args.mesh, args.tolerances)
    star = build_star_unfolding(mesh, parse_point(mesh, args.source))
    if args.format == "json":
        emit(args, dump_json(envelope(args, mesh, source=args.source, images=len(star.source_images),
                                      kernel=[list(map(float, p)) for p in star.kernel])))
        return 0
    emit(args, star_svg(star))
    return 0


def cmd_sweep(args) -> int:
    mesh = load_mesh(args.mesh, args.tolerances)
    res = sweep_edge(mesh, args.edge)
    lines = [dump_json(envelope(args, mesh, edge=args.edge, record="header"))]
    for r in res.log:
        lines.append(dump_json({"record": "event", **r.to_json()}))
    lines.append(dump_json({"record": "psi", **res.psi.to_json()}))
    lines.append(dump_json({"record": "sigma", "sequences": [list(s) for s in res.sigma_listing()]}))
    emit(args, "".join(lines))
    return 0


def cmd_query(args) -> int:
    mesh = load_mesh(args.mesh, args.tolerances)
    structures = {}
    if args.load:
        st = load_container(args.load, mesh)
        structures[st.edge] = st
    if args.edge is not None and args.edge not in structures:
        structures[args.edge] = build_edge_structure(mesh, args.edge)
    if args.save:
        if args.edge is None:
            raise UsageError("--save needs --edge")
        save_container(structures[args.edge], args.save)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write(dump_json(envelope(args, mesh, record="header")))
        for lineno, line in enumerate(sys.stdin, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                e, u, E, lam = line.split()
                e, u, E, lam = int(e), float(u), int(E), float(lam)
            except ValueError:
                raise UsageError(f"line {lineno}: expected 'edge_id u edge_id u'") from None
            if e not in structures:
                structures[e] = build_edge_structure(mesh, e)
            stats: dict = {}
            d, path = two_point_query(structures[e], point_on_edge(mesh, e, u), point_on_edge(mesh, E, lam), stats)
            out.write(dump_json({"record": "answer", "s": [e, u], "t": [E, lam], "distance": d,
                                 "sequence": list(path.sequence.edges), "probes": stats["probes"]}))
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def bench_case(n: int, seed: int, edges: int, samples: int) -> dict:
    """Build and query statistics for one random hull."""
    mesh = shapes.random_hull(n, seed)
    rng = np.random.default_rng(seed)
    ids = sorted(rng.choice(mesh.n_edges, size=min(edges, mesh.n_edges), replace=False).tolist())
    events, sweep_t, build_t, probes2 = [], 0.0, 0.0, []
    for e in ids:
        t0 = time.perf_counter()
        res = sweep_edge(mesh, e)
        sweep_t += time.perf_counter() - t0
        events.append(len(res.log))
        t0 = time.perf_counter()
        st = build_edge_structure(mesh, e, res)
        build_t += time.perf_counter() - t0
        for _ in range(samples):
            stats: dict = {}
            s = point_on_edge(mesh, e, float(rng.uniform(0.01, 0.99)))
            two_point_query(st, s, shapes.random_edge_point(mesh, rng), stats)
            probes2.append(stats["probes"])
    probes1, one_t = [], 0.0
    for _ in range(3):
        s = shapes.random_edge_point(mesh, rng, 0.05)
        t0 = time.perf_counter()
        try:
            op = build_one_point(mesh, s)
        except DegeneracyError:
            continue
        one_t += time.perf_counter() - t0
        for _ in range(samples):
            stats = {}
            one_point_query(op, shapes.random_edge_point(mesh, rng), stats)
            probes1.append(stats["probes"])
    return {"n": n, "faces": mesh.n_faces, "edges_swept": len(ids), "events_mean": float(np.mean(events)),
            "events_max": int(max(events)), "sweep_s": sweep_t / len(ids), "edge_build_s": build_t / len(ids),
            "one_point_build_s": one_t / 3, "probes_one_max": max(probes1, default=0),
            "probes_two_max": max(probes2, default=0)}


def loglog_slope(xs, ys) -> float:
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.maximum(np.asarray(ys, dtype=float), 1e-12))
    return float(np.polyfit(x, y, 1)[0])


def cmd_bench(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",")]
    jobs = [(n, args.seed, args.edges, args.samples) for n in sizes]
    workers = min(threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(bench_case, *zip(*jobs)))
    else:
        rows = [bench_case(*j) for j in jobs]
    rows.sort(key=lambda r: r["n"])
    slope = loglog_slope([r["n"] for r in rows], [r["events_mean"] for r in rows]) if len(rows) > 1 else math.nan
    if args.format == "json":
        emit(args, dump_json(envelope(args, None, rows=rows, event_slope=slope, transforms="cached per node")))
        return 0
    head = ["n", "faces", "edges_swept", "events_mean", "events_max", "sweep_s", "edge_build_s",
            "one_point_build_s", "probes_one_max", "probes_two_max"]
    lines = ["  ".join(f"{h:>17}" for h in head)]
    for r in rows:
        lines.append("  ".join(f"{r[h]:>17.4f}" if isinstance(r[h], float) else f"{r[h]:>17}" for h in head))
    lines.append(f"event count log-log slope: {slope:.3f} (seed {args.seed}; transforms cached per node)")
    emit(args, "\n".join(lines) + "\n")
    return 0


def _suite_exact(rng, samples: int) -> tuple[bool, str]:
    worst = 0.0
    for mesh in (shapes.tetrahedron(), shapes.cube(), shapes.octahedron(), shapes.random_hull(8, 1)):
        for _ in range(samples):
            s, t = shapes.random_face_point(mesh, rng), shapes.random_face_point(mesh, rng)
            d, _ = geodesic_distance(mesh, s, t)
            b = bruteforce_distance(mesh, s, t, mesh.n_faces).distance
            worst = max(worst, abs(d - b) / mesh.diameter)
    return worst <= 1e-7, f"max relative gap {worst:.3e}"


def _suite_sandwich(rng, samples: int) -> tuple[bool, str]:
    worst = math.inf
    mesh = shapes.random_hull(8, 2)
    for _ in range(samples):
        s, t = shapes.random_face_point(mesh, rng), shapes.random_face_point(mesh, rng)
        d, _ = geodesic_distance(mesh, s, t)
        worst = min(worst, dijkstra_oracle(mesh, s, t, 4).distance - d)
    return worst >= -1e-9, f"min upper-bound slack {worst:.3e}"


def _suite_sweep(rng, samples: int) -> tuple[bool, str]:
    mesh = shapes.generic_tetrahedron()
    U = uniform_parameters(max(samples, 2))
    bad = [e for e in range(mesh.n_edges) if sweep_edge(mesh, e).sigma() != sampled_sigma(mesh, e, U)]
    return not bad, f"edges with differing sequence sets: {bad}"


def _suite_queries(rng, samples: int) -> tuple[bool, str]:
    mesh = shapes.random_hull(8, 3)
    e = int(rng.integers(mesh.n_edges))
    st = build_edge_structure(mesh, e)
    worst = 0.0
    for _ in range(samples):
        s = point_on_edge(mesh, e, float(rng.uniform(0.01, 0.99)))
        t = shapes.random_edge_point(mesh, rng)
        d, _ = two_point_query(st, s, t)
        worst = max(worst, abs(d - geodesic_distance(mesh, s, t)[0]))
    return worst <= 1e-7, f"edge {e}: max gap {worst:.3e}"


def _suite_kernel(rng, samples: int) -> tuple[bool, str]:
    mesh = shapes.random_hull(8, 4)
    s = shapes.random_face_point(mesh, rng)
    star = build_star_unfolding(mesh, s)
    tree = build_ch_tree(mesh, s)
    worst, checked = 0.0, 0
    for _ in range(samples * 5):
        t = shapes.random_face_point(mesh, rng)
        _, X = star.locate(t)
        if not star.in_kernel(X):
            continue
        d, _ = tree_distance(tree, t)
        ds = [math.dist(si, X) for si in star.source_images]
        worst = max(worst, abs(min(ds) - d), max(0.0, d - min(ds)))
        checked += 1
    return worst <= 1e-9, f"{checked} kernel points, max gap {worst:.3e}"


SUITES = {
    "exact-vs-bruteforce": _suite_exact,
    "dijkstra-upper-bound": _suite_sandwich,
    "sweep-vs-sampling": _suite_sweep,
    "two-point-vs-exact": _suite_queries,
    "kernel-no-short-cut": _suite_kernel,
}


def cmd_crosscheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    results = []
    for name, fn in SUITES.items():
        try:
            ok, detail = fn(rng, args.samples)
        except Exception as exc:  # a crashing suite is a failed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"suite": name, "pass": bool(ok), "detail": detail})
    if args.format == "json":
        emit(args, dump_json(envelope(args, None, suites=results, all_pass=all(r["pass"] for r in results))))
    else:
        emit(args, "".join(f"{'PASS' if r['pass'] else 'FAIL'} {r['suite']}: {r['detail']}\n" for r in results))
    return 0 if all(r["pass"] for r in results) else 1


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mesh", help="OFF file, or tetrahedron|cube|octahedron|hull:N:SEED")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a relative tolerance")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "svg", "table"), default=None)
    common.add_argument("--steiner", type=int, default=4, help="Steiner points per edge for the graph oracle")
    common.add_argument("--maxlen", type=int, default=8, help="sequence length bound for the exhaustive oracle")
    common.add_argument("--samples", type=int, default=20)

    p = argparse.ArgumentParser(prog="geodesia", description="Exact shortest paths on convex polyhedra.")
    p.add_argument("--version", action="version", version=f"geodesia {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check that the mesh is a closed convex surface")
    d = sub.add_parser("distance", parents=[common], help="geodesic distance and path between two points")
    d.add_argument("--source", "-s", required=True)
    d.add_argument("--target", "-t", required=True)
    d.add_argument("--method", choices=("chen-han", "bruteforce", "dijkstra"), default="chen-han")
    r = sub.add_parser("ridge", parents=[common], help="ridge tree of a source point")
    r.add_argument("--source", "-s", required=True)
    r.add_argument("--svg", help="also write an SVG overlay here")
    st = sub.add_parser("star", parents=[common], help="star unfolding drawing")
    st.add_argument("--source", "-s", required=True)
    sw = sub.add_parser("sweep", parents=[common], help="event log and sequence tree of an edge sweep")
    sw.add_argument("--edge", type=int, required=True)
    q = sub.add_parser("query", parents=[common], help="answer 'edge u edge u' lines from stdin")
    q.add_argument("--edge", type=int)
    q.add_argument("--load", help="read a GEOQ1 container")
    q.add_argument("--save", help="write the --edge structure as a GEOQ1 container")
    b = sub.add_parser("bench", parents=[common], help="build times, event and probe counts against n")
    b.add_argument("--sizes", default="8,12,16,20,24")
    b.add_argument("--edges", type=int, default=3, help="edges swept per mesh")
    sub.add_parser("crosscheck", parents=[common], help="run the oracle equivalence suites")
    return p


COMMANDS = {
    "validate": cmd_validate,
    "distance": cmd_distance,
    "ridge": cmd_ridge,
    "star": cmd_star,
    "sweep": cmd_sweep,
    "query": cmd_query,
    "bench": cmd_bench,
    "crosscheck": cmd_crosscheck,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.tolerances = parse_tolerances(args.tol)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"geodesia: error: {exc}", file=sys.stderr)
        return 2
    except (MeshError, DegeneracyError, OSError) as exc:
        print(f"geodesia: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
