"""Scenario runner and inspection tool.

Subcommands:
  run    simulate a scenario, write rings/route GeoJSON and a JSON report
  check  run the invariant suite against a scenario or a rings file
  serve  start the HTTP service

Exit codes: 0 ok, 1 loader or check failure, 2 no safe route.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import geojson as gj
from . import routing
from .geometry import point_in_polygon
from .spread import EngineConfig, IsochroneSet, Ring, Simulation
from .terrain import FuelCatalog, ScenarioConfig, TerrainGrid, load_ascii_grid
from .wind import provider_for


def _load_inputs(args):
    """Load every input file, reporting each failure on stderr."""
    failures = []
    scenario = grid = None
    try:
        scenario = ScenarioConfig.from_json_file(args.scenario)
    except Exception as exc:
        failures.append(f"scenario {args.scenario}: {exc}")
    try:
        catalog = FuelCatalog.from_csv(args.catalog) if args.catalog else FuelCatalog.default()
    except Exception as exc:
        catalog = None
        failures.append(f"catalog {args.catalog}: {exc}")
    try:
        fuel = load_ascii_grid(args.fuel)
        elev = load_ascii_grid(args.elevation)
        if catalog is not None:
            grid = TerrainGrid(fuel, elev, catalog)
    except Exception as exc:
        failures.append(f"terrain: {exc}")
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)
    if failures:
        raise SystemExit(1)
    return scenario, grid


def _engine(args) -> EngineConfig:
    if getattr(args, "engine_config", None):
        return EngineConfig.from_json_file(args.engine_config)
    return EngineConfig()


def _wind(scenario, args_dir) -> "object":
    return provider_for(scenario.wind, base_dir=args_dir)


def _ring_report(rings: IsochroneSet) -> list[dict]:
    return [
        {"minutes": r.minutes, "area_ha": round(r.area_m2() / 10_000.0, 4)}
        for r in sorted(rings.rings, key=lambda r: r.minutes)
    ]


def check_ring_schedule(rings: IsochroneSet, scenario: ScenarioConfig) -> bool:
    return sorted(r.minutes for r in rings.rings) == scenario.ring_minutes


def check_ring_nesting(rings: IsochroneSet) -> bool:
    ordered = sorted(rings.rings, key=lambda r: r.minutes)
    for inner, outer in zip(ordered, ordered[1:]):
        if not all(point_in_polygon(v, list(outer.vertices)) for v in inner.vertices):
            return False
    return True


def _cmd_run(args) -> int:
    scenario, grid = _load_inputs(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    provider = _wind(scenario, Path(args.scenario).parent)
    sim = Simulation(scenario, grid, provider, _engine(args))
    try:
        rings = sim.run()
    except Exception as exc:
        print(f"error: simulation failed: {exc}", file=sys.stderr)
        return 1
    frame = sim.frame
    ignition_iso = scenario.to_dict()["ignition_time"]
    rings_doc = gj.feature_collection(
        [gj.fire_feature("cli", ignition_iso, scenario.note, rings, frame)]
    )
    gj.validate_geojson(rings_doc)
    (out_dir / "rings.geojson").write_text(json.dumps(rings_doc, indent=2))

    report = {
        "scenario": scenario.to_dict(),
        "rings": _ring_report(rings),
        "routes": [],
        "checks": {
            "ring_schedule": check_ring_schedule(rings, scenario),
            "ring_nesting": check_ring_nesting(rings),
        },
    }
    for entry in report["rings"]:
        print(f"ring {entry['minutes']:>3d} min: {entry['area_ha']:.4f} ha")

    exit_code = 0
    if args.start and args.graph:
        lon, lat = (float(v) for v in args.start.split(","))
        mode = routing.get_mode(args.mode)
        try:
            graph = routing.load_graph(args.graph, frame)
        except Exception as exc:
            print(f"error: road graph {args.graph}: {exc}", file=sys.stderr)
            return 1
        timeline = routing.FireTimeline(rings)
        fire_dir = provider(scenario.ignition[0], scenario.ignition[1], 0.0).direction_to
        start_local = frame.to_local(lon, lat)
        try:
            best, rejected = routing.best_route(graph, start_local, mode, timeline, fire_dir)
        except (routing.SnapError, routing.NoEscapeError, routing.NoSafeRouteError) as exc:
            print(f"no safe route: {exc}", file=sys.stderr)
            exit_code = 2
        else:
            route_doc = gj.route_feature(best, rejected, graph, frame, mode.name)
            gj.validate_geojson(route_doc)
            (out_dir / "route.geojson").write_text(json.dumps(route_doc, indent=2))
            pts = graph.path_points(best.path)
            dist = sum(
                math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])
            )
            report["routes"].append(
                {
                    "start": [lon, lat],
                    "mode": mode.name,
                    "distance_m": round(dist, 2),
                    "time_to_safety_s": round(best.time_to_safety, 3),
                    "score": round(best.score, 6),
                }
            )
            print(
                f"route ({mode.name}): {dist:.0f} m, "
                f"{best.time_to_safety:.0f} s to safety, score {best.score:.3f}"
            )
    (out_dir / "report.json").write_text(json.dumps(report, indent=2))
    return exit_code


def _rings_from_geojson(path) -> IsochroneSet:
    """Rebuild a ring set (in lon/lat coordinates) from an emitted file."""
    doc = json.loads(Path(path).read_text())
    if doc.get("type") == "FeatureCollection":
        doc = doc["features"][0]
    minutes = sorted(doc["properties"]["ring_minutes"], reverse=True)  # outermost first
    polys = doc["geometry"]["coordinates"]
    rings = []
    for m, poly in zip(minutes, polys):
        exterior = poly[0]
        rings.append(Ring(minutes=m, vertices=tuple((x, y) for x, y in exterior[:-1])))
    return IsochroneSet(rings=tuple(rings))


def _toy_alpha_fixture():
    """Tiny graph + distant fire for the alpha-limit self-test."""
    rings = IsochroneSet(
        rings=tuple(
            Ring(
                minutes=m,
                vertices=((-s, -s), (s, -s), (s, s), (-s, s)),
            )
            for m, s in zip((0, 15, 30, 45, 60), (10.0, 20.0, 30.0, 40.0, 50.0))
        )
    )
    graph = routing.RoadGraph()
    coords = {
        0: (200.0, 0.0),     # start
        1: (700.0, 100.0),
        2: (1300.0, 0.0),    # safe, toward the fire's travel direction (east)
        3: (-600.0, -100.0),
        4: (-1500.0, 0.0),   # safe, directly away
        5: (200.0, 900.0),
    }
    for nid in sorted(coords):
        graph.add_node(coords[nid])
    all_modes = frozenset(routing.MODES)
    for a, b in [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 1)]:
        graph.add_edge(a, b, all_modes)
    return graph, routing.FireTimeline(rings), math.pi / 2.0  # fire moving east


def _enumerate_routes(graph, start_node, safe, mode):
    """All simple paths from start to any safe node, with entry times."""
    adj = graph.adjacency(mode)
    out = []

    def dfs(path, time_acc):
        node = path[-1]
        if node in safe and len(path) > 1:
            out.append(routing.ScoredRoute(path=list(path), entry_times=list(time_acc)))
        for nxt, cost in adj[node]:
            if nxt in path:
                continue
            path.append(nxt)
            time_acc.append(time_acc[-1] + cost)
            dfs(path, time_acc)
            path.pop()
            time_acc.pop()

    dfs([start_node], [0.0])
    return out


def check_alpha_limits() -> bool:
    """Selection under extreme alpha matches brute-force min-time / max-angle."""
    graph, timeline, fire_dir = _toy_alpha_fixture()
    safe = routing.safe_nodes(graph, timeline)
    if not safe:
        return False
    all_routes = _enumerate_routes(graph, 0, safe, routing.get_mode("walking"))
    if not all_routes:
        return False
    oracle_min_time = min(all_routes, key=lambda r: (r.time_to_safety, tuple(r.path)))
    k = len(all_routes)
    lo = routing.get_mode("walking", alpha=0.01)
    hi = routing.get_mode("walking", alpha=0.99)
    best_lo, _ = routing.best_route(graph, graph.nodes[0], lo, timeline, fire_dir, k=k)
    if best_lo.path != oracle_min_time.path:
        return False
    from .geometry import angular_difference, compass_bearing

    def route_angle(r):
        bearing = compass_bearing(graph.nodes[r.path[0]], graph.nodes[r.path[-1]])
        return angular_difference(bearing, fire_dir)

    oracle_max_angle = max(all_routes, key=lambda r: (route_angle(r), -r.time_to_safety))
    best_hi, _ = routing.best_route(graph, graph.nodes[0], hi, timeline, fire_dir, k=k)
    return best_hi.path == oracle_max_angle.path


def _cmd_check(args) -> int:
    results: dict[str, bool] = {}
    if args.rings:
        try:
            rings = _rings_from_geojson(args.rings)
            gj.validate_geojson(json.loads(Path(args.rings).read_text()))
            results["geojson_valid"] = True
        except Exception as exc:
            print(f"error: rings file {args.rings}: {exc}", file=sys.stderr)
            results["geojson_valid"] = False
            rings = None
        if rings is not None:
            results["ring_nesting"] = check_ring_nesting(rings)
    else:
        scenario, grid = _load_inputs(args)
        provider = _wind(scenario, Path(args.scenario).parent)
        sim = Simulation(scenario, grid, provider, _engine(args))
        rings = sim.run()
        results["ring_schedule"] = check_ring_schedule(rings, scenario)
        results["ring_nesting"] = check_ring_nesting(rings)
        results["event_monotonicity"] = all(
            a <= b for a, b in zip(sim.pop_times, sim.pop_times[1:])
        )
        doc = gj.feature_collection(
            [gj.fire_feature("cli", scenario.to_dict()["ignition_time"], "", rings, sim.frame)]
        )
        try:
            gj.validate_geojson(doc)
            results["geojson_valid"] = True
        except gj.GeoJSONError:
            results["geojson_valid"] = False
        if args.graph and args.start:
            results["conflict_soundness"] = _check_conflict_soundness(
                args, scenario, rings, sim.frame, provider
            )
    results["route_alpha_limits"] = check_alpha_limits()

    failed = [name for name, ok in results.items() if not ok]
    for name in sorted(results):
        print(f"{'PASS' if results[name] else 'FAIL'} {name}")
    return 1 if failed else 0


def _check_conflict_soundness(args, scenario, rings, frame, provider) -> bool:
    """Re-verify the selected route with a 5 m brute-force sampler."""
    lon, lat = (float(v) for v in args.start.split(","))
    mode = routing.get_mode(args.mode)
    graph = routing.load_graph(args.graph, frame)
    timeline = routing.FireTimeline(rings)
    fire_dir = provider(scenario.ignition[0], scenario.ignition[1], 0.0).direction_to
    try:
        best, _ = routing.best_route(graph, frame.to_local(lon, lat), mode, timeline, fire_dir)
    except (routing.SnapError, routing.NoEscapeError, routing.NoSafeRouteError):
        return True  # nothing returned, nothing to violate
    pts = graph.path_points(best.path)
    d = 0.0
    total = sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:]))
    while d <= total:
        seg_acc = 0.0
        p, t_u = pts[0], 0.0
        for i in range(len(pts) - 1):
            a, b = pts[i], pts[i + 1]
            seg = math.hypot(b[0] - a[0], b[1] - a[1])
            if d <= seg_acc + seg or i == len(pts) - 2:
                frac = 0.0 if seg == 0 else min(max((d - seg_acc) / seg, 0.0), 1.0)
                p = (a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1]))
                t_u = best.entry_times[i] + frac * (best.entry_times[i + 1] - best.entry_times[i])
                break
            seg_acc += seg
        if t_u + routing.DEFAULT_MARGIN_S >= timeline.arrival_time_s(p):
            return False
        d += 5.0
    return True


def _cmd_serve(args) -> int:
    from .service import ServiceConfig, run_service

    config = ServiceConfig.load(args.config)
    run_service(config)
    return 0


def _add_io_flags(p: argparse.ArgumentParser, require_terrain: bool) -> None:
    p.add_argument("scenario", nargs="?" if not require_terrain else None,
                   help="scenario JSON file")
    p.add_argument("--fuel", help="fuel class ASCII grid")
    p.add_argument("--elevation", help="elevation ASCII grid")
    p.add_argument("--catalog", help="fuel catalog CSV (default: built-in)")
    p.add_argument("--graph", help="road network GeoJSON")
    p.add_argument("--start", help="route start as lon,lat")
    p.add_argument("--mode", default="walking", choices=sorted(routing.MODES))
    p.add_argument("--engine-config", help="engine parameters JSON")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="firescape")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write outputs")
    _add_io_flags(p_run, require_terrain=True)
    p_run.add_argument("--out", required=True, help="output directory")

    p_check = sub.add_parser("check", help="run the invariant suite")
    _add_io_flags(p_check, require_terrain=False)
    p_check.add_argument("--rings", help="check an existing rings.geojson instead")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--config", help="service config JSON")

    args = parser.parse_args(argv)
    if args.command == "run":
        for flag in ("fuel", "elevation"):
            if not getattr(args, flag):
                parser.error(f"run requires --{flag}")
        return _cmd_run(args)
    if args.command == "check":
        if not args.rings and not (args.scenario and args.fuel and args.elevation):
            parser.error("check needs either --rings FILE or scenario + --fuel + --elevation")
        return _cmd_check(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
