"""Escape routing over a road graph with fire-avoidance and scoring.

Candidate routes are loopless time-shortest paths from the start to any
safe node (Yen's algorithm over a zero-cost virtual sink behind all safe
nodes). Candidates that would meet the fire are rejected; survivors are
scored by a convex blend of two normalized terms, the bearing away from
the fire's travel direction and the time to reach safety, and the argmax
wins.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
from dataclasses import dataclass

from .geometry import (
    LocalFrame,
    Point,
    angular_difference,
    compass_bearing,
    point_polygon_distance,
    point_polyline_distance,
    signed_turn,
)
from .spread import IsochroneSet

log = logging.getLogger(__name__)

SAFE_DISTANCE_M = 1000.0
SNAP_RADIUS_M = 200.0
OFF_ROUTE_M = 500.0
DEFAULT_MARGIN_S = 300.0
CONFLICT_STEP_M = 5.0
DEFAULT_K = 8


class SnapError(ValueError):
    """Start position too far from any road node."""


class NoEscapeError(ValueError):
    """The graph has no node at a safe distance from the final ring."""


class NoSafeRouteError(ValueError):
    """Every candidate route was rejected by the fire-conflict check."""

    def __init__(self, rejected: list["ScoredRoute"]):
        super().__init__(f"all {len(rejected)} candidate routes rejected")
        self.rejected = rejected


class OffRouteError(ValueError):
    """Position too far off the route; caller should re-plan."""


@dataclass(frozen=True)
class TransportMode:
    name: str
    speed_kmh: float
    alpha: float = 0.5  # angle vs time weight in the route score

    def __post_init__(self):
        if self.speed_kmh <= 0:
            raise ValueError("mode speed must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")

    @property
    def speed_mps(self) -> float:
        return self.speed_kmh * 1000.0 / 3600.0


MODES = {
    "walking": TransportMode("walking", 4.5),
    "cycling": TransportMode("cycling", 15.0),
    "driving": TransportMode("driving", 50.0),
}


def get_mode(name: str, alpha: float | None = None) -> TransportMode:
    try:
        mode = MODES[name]
    except KeyError:
        raise ValueError(f"unknown transport mode {name!r}") from None
    if alpha is not None:
        mode = TransportMode(mode.name, mode.speed_kmh, alpha)
    return mode


class RoadGraph:
    """Undirected georeferenced network; node ids are dense ints."""

    def __init__(self):
        self.nodes: list[Point] = []
        self.edges: dict[tuple[int, int], tuple[float, frozenset[str]]] = {}
        self._snap_index: dict[tuple[int, int], list[int]] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def _snap_key(self, p: Point) -> tuple[int, int]:
        return (int(math.floor(p[0])), int(math.floor(p[1])))

    def add_node(self, p: Point, snap_m: float = 1.0) -> int:
        kx, ky = self._snap_key(p)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for nid in self._snap_index.get((kx + dx, ky + dy), ()):
                    q = self.nodes[nid]
                    if math.hypot(p[0] - q[0], p[1] - q[1]) <= snap_m:
                        return nid
        nid = len(self.nodes)
        self.nodes.append(p)
        self._snap_index.setdefault((kx, ky), []).append(nid)
        return nid

    def add_edge(self, a: int, b: int, modes: frozenset[str]) -> None:
        if a == b:
            return  # zero-length after snapping
        key = (min(a, b), max(a, b))
        pa, pb = self.nodes[a], self.nodes[b]
        length = math.hypot(pb[0] - pa[0], pb[1] - pa[1])
        if key in self.edges:
            old_len, old_modes = self.edges[key]
            self.edges[key] = (min(old_len, length), old_modes | modes)
        else:
            self.edges[key] = (length, modes)

    def nearest_node(self, p: Point) -> tuple[int, float]:
        if not self.nodes:
            raise NoEscapeError("graph has no nodes")
        best, best_d = 0, math.inf
        for nid, q in enumerate(self.nodes):
            d = math.hypot(p[0] - q[0], p[1] - q[1])
            if d < best_d:
                best, best_d = nid, d
        return best, best_d

    def adjacency(self, mode: TransportMode) -> dict[int, list[tuple[int, float]]]:
        """Per-node (neighbor, travel seconds) lists, sorted for determinism."""
        adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(len(self.nodes))}
        for (a, b), (length, modes) in self.edges.items():
            if mode.name not in modes:
                continue
            cost = length / mode.speed_mps
            adj[a].append((b, cost))
            adj[b].append((a, cost))
        for lst in adj.values():
            lst.sort()
        return adj

    def path_points(self, path: list[int]) -> list[Point]:
        return [self.nodes[i] for i in path]


ALL_MODES = frozenset(MODES)


RoadFeature = tuple[list[tuple[float, float]], frozenset[str]]  # lon/lat coords, modes


def parse_road_features(doc: dict) -> list[RoadFeature]:
    """Extract (lon/lat polyline, modes) pairs from a FeatureCollection.

    Non-LineString geometries are skipped; features without a "modes"
    property default to all modes with a warning.
    """
    features = []
    for feat in doc.get("features", []):
        geom = feat.get("geometry") or {}
        if geom.get("type") != "LineString":
            log.warning("skipping non-LineString feature of type %s", geom.get("type"))
            continue
        props = feat.get("properties") or {}
        modes = props.get("modes")
        if modes is None:
            log.warning("road feature without 'modes'; defaulting to all modes")
            modes = sorted(ALL_MODES)
        modes = frozenset(m for m in modes if m in ALL_MODES)
        if not modes:
            continue
        coords = [(float(lon), float(lat)) for lon, lat in geom.get("coordinates", [])]
        features.append((coords, modes))
    return features


def build_graph(features: list[RoadFeature], frame: LocalFrame) -> RoadGraph:
    """Project road polylines into a local frame and link them into a graph.

    Every vertex becomes a node (deduplicated within a 1 m snap tolerance);
    each consecutive vertex pair becomes an undirected straight edge.
    """
    graph = RoadGraph()
    for coords, modes in features:
        node_ids = [graph.add_node(frame.to_local(lon, lat)) for lon, lat in coords]
        for a, b in zip(node_ids, node_ids[1:]):
            graph.add_edge(a, b, modes)
    if not graph.edges:
        raise NoEscapeError("empty road collection: no usable edges")
    return graph


def load_graph(path, frame: LocalFrame) -> RoadGraph:
    """Parse a GeoJSON road file and build its graph in one step."""
    with open(path) as fh:
        doc = json.load(fh)
    return build_graph(parse_road_features(doc), frame)


class FireTimeline:
    """Arrival-time queries against one fire's isochrone rings.

    A point inside ring m but outside the previous ring is assigned the
    previous ring's horizon (conservative early bound); points outside the
    outermost ring never see fire (infinity).
    """

    def __init__(self, rings: IsochroneSet):
        ordered = sorted(rings.rings, key=lambda r: r.minutes)
        if not ordered:
            raise ValueError("timeline needs at least one ring")
        self.rings = ordered
        self.interval = ordered[1].minutes - ordered[0].minutes if len(ordered) > 1 else 15
        self._bboxes = []
        for ring in ordered:
            xs = [v[0] for v in ring.vertices]
            ys = [v[1] for v in ring.vertices]
            self._bboxes.append((min(xs), min(ys), max(xs), max(ys)))

    @property
    def final_ring(self):
        return self.rings[-1]

    def containing_horizon(self, p: Point) -> int | None:
        """Smallest ring horizon (minutes) whose polygon contains p."""
        for ring, (x0, y0, x1, y1) in zip(self.rings, self._bboxes):
            if p[0] < x0 or p[0] > x1 or p[1] < y0 or p[1] > y1:
                continue
            if _ring_contains(ring.vertices, p):
                return ring.minutes
        return None

    def arrival_time_s(self, p: Point) -> float:
        h = self.containing_horizon(p)
        if h is None:
            return math.inf
        return 60.0 * max(0, h - self.interval)


def _ring_contains(vertices: tuple[Point, ...], p: Point) -> bool:
    from .geometry import point_in_polygon

    return point_in_polygon(p, list(vertices))


def safe_nodes(graph: RoadGraph, timeline: FireTimeline) -> set[int]:
    """Nodes at least 1 km from the final (60-minute) ring polygon."""
    final = list(timeline.final_ring.vertices)
    return {
        nid
        for nid, p in enumerate(graph.nodes)
        if point_polygon_distance(p, final) >= SAFE_DISTANCE_M
    }


@dataclass(frozen=True)
class RouteRejection:
    point: Point  # local-frame sample that met the fire
    slot_minutes: int | None  # ring horizon containing the sample
    user_time_s: float


@dataclass
class ScoredRoute:
    """A candidate or selected escape route."""

    path: list[int]
    entry_times: list[float]  # seconds from departure, one per node
    angle: float = 0.0  # radians in [0, pi] away from the fire direction
    time_to_safety: float = 0.0
    score: float = 0.0
    rejection: RouteRejection | None = None

    def __post_init__(self):
        self.time_to_safety = self.entry_times[-1] if self.entry_times else 0.0

    @property
    def rejected(self) -> bool:
        return self.rejection is not None


def _dijkstra(
    adj: dict[int, list[tuple[int, float]]],
    source: int,
    target: int,
    banned_nodes: frozenset[int] = frozenset(),
    banned_edges: frozenset[tuple[int, int]] = frozenset(),
) -> tuple[float, list[int]] | None:
    if source in banned_nodes:
        return None
    dist = {source: 0.0}
    parent: dict[int, int] = {}
    heap = [(0.0, source)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == target:
            path = [u]
            while path[-1] != source:
                path.append(parent[path[-1]])
            return d, path[::-1]
        for v, c in adj.get(u, ()):
            if v in banned_nodes or (u, v) in banned_edges:
                continue
            nd = d + c
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return None


def _k_shortest_paths(
    adj: dict[int, list[tuple[int, float]]], source: int, sink: int, k: int
) -> list[list[int]]:
    """Yen's k loopless shortest paths; ties broken by lexicographic path."""
    cost_of = {
        (u, v): c for u, lst in adj.items() for v, c in lst
    }
    first = _dijkstra(adj, source, sink)
    if first is None:
        return []
    accepted: list[list[int]] = []
    candidates: list[tuple[float, tuple[int, ...]]] = []
    seen: set[tuple[int, ...]] = set()
    heapq.heappush(candidates, (first[0], tuple(first[1])))
    seen.add(tuple(first[1]))
    while candidates and len(accepted) < k:
        cost, path = heapq.heappop(candidates)
        accepted.append(list(path))
        for i in range(len(path) - 1):
            root = path[: i + 1]
            root_cost = sum(cost_of[(root[j], root[j + 1])] for j in range(i))
            banned_edges = {
                (p[i], p[i + 1])
                for p in [tuple(a) for a in accepted]
                if len(p) > i + 1 and p[: i + 1] == root
            }
            banned_nodes = frozenset(root[:-1])
            spur = _dijkstra(adj, root[-1], sink, banned_nodes, frozenset(banned_edges))
            if spur is None:
                continue
            total = tuple(root[:-1]) + tuple(spur[1])
            if total not in seen:
                seen.add(total)
                heapq.heappush(candidates, (root_cost + spur[0], total))
    return accepted


def candidate_routes(
    graph: RoadGraph,
    start: Point,
    mode: TransportMode,
    timeline: FireTimeline,
    k: int = DEFAULT_K,
) -> list[ScoredRoute]:
    """Up to k loopless time-shortest routes from start to any safe node.

    The start snaps to the nearest node within 200 m. A start node that is
    itself safe yields the single zero-length degenerate route.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    start_node, snap_dist = graph.nearest_node(start)
    if snap_dist > SNAP_RADIUS_M:
        raise SnapError(
            f"start is {snap_dist:.0f} m from the nearest road node (limit {SNAP_RADIUS_M:.0f} m)"
        )
    safe = safe_nodes(graph, timeline)
    if not safe:
        raise NoEscapeError("no node is 1 km clear of the final ring: no escape available")
    if start_node in safe:
        return [ScoredRoute(path=[start_node], entry_times=[0.0])]
    adj = graph.adjacency(mode)
    sink = len(graph.nodes)
    for nid in sorted(safe):
        adj.setdefault(nid, [])
        adj[nid] = adj[nid] + [(sink, 0.0)]
    routes = []
    for path in _k_shortest_paths(adj, start_node, sink, k):
        node_path = path[:-1]  # drop the virtual sink
        times = [0.0]
        for a, b in zip(node_path, node_path[1:]):
            length, _ = graph.edges[(min(a, b), max(a, b))]
            times.append(times[-1] + length / mode.speed_mps)
        routes.append(ScoredRoute(path=node_path, entry_times=times))
    return routes


def check_fire_conflict(
    route: ScoredRoute,
    graph: RoadGraph,
    timeline: FireTimeline,
    margin: float = DEFAULT_MARGIN_S,
    step: float = CONFLICT_STEP_M,
) -> RouteRejection | None:
    """Reject a route that reaches any sample point within ``margin`` seconds
    of the fire's (conservative) arrival there. Samples every ``step`` meters
    of geometry plus the endpoint; None means the route passes."""
    pts = graph.path_points(route.path)
    for p, t_u in _route_samples(pts, route.entry_times, step):
        arrival = timeline.arrival_time_s(p)
        if t_u + margin >= arrival:
            return RouteRejection(
                point=p, slot_minutes=timeline.containing_horizon(p), user_time_s=t_u
            )
    return None


def _route_samples(pts: list[Point], times: list[float], step: float):
    """Yield (point, user time) pairs every ``step`` meters along the path."""
    if len(pts) == 1:
        yield pts[0], times[0]
        return
    seg_lens = [
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])
    ]
    total = sum(seg_lens)
    d = 0.0
    while d < total:
        yield _point_at(pts, times, seg_lens, d)
        d += step
    yield pts[-1], times[-1]


def _point_at(pts, times, seg_lens, d):
    acc = 0.0
    for i, seg in enumerate(seg_lens):
        if d <= acc + seg or i == len(seg_lens) - 1:
            frac = 0.0 if seg == 0.0 else (d - acc) / seg
            frac = min(max(frac, 0.0), 1.0)
            a, b = pts[i], pts[i + 1]
            p = (a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1]))
            t = times[i] + frac * (times[i + 1] - times[i])
            return p, t
        acc += seg
    return pts[-1], times[-1]


def score_route(
    route: ScoredRoute,
    fire_direction: float,
    mode: TransportMode,
    t_min: float,
    graph: RoadGraph,
) -> ScoredRoute:
    """Fill in the angle/time terms and the convex score.

    angle term: bearing from the start to the reached safe node, measured
    against the fire's travel direction and normalized by pi. time term:
    fastest candidate's time over this route's time (1.0 is best). A
    zero-length route gets the perfect time term and a bearing directly
    away from the fire.
    """
    if len(route.path) >= 2:
        bearing = compass_bearing(graph.nodes[route.path[0]], graph.nodes[route.path[-1]])
        route.angle = angular_difference(bearing, fire_direction)
    else:
        route.angle = math.pi  # degenerate safe start: face away from the fire
    angle_norm = route.angle / math.pi
    if route.time_to_safety <= 0.0:
        time_norm = 1.0
    else:
        time_norm = t_min / route.time_to_safety
    route.score = mode.alpha * angle_norm + (1.0 - mode.alpha) * time_norm
    return route


def pick_best(survivors: list[ScoredRoute]) -> ScoredRoute:
    """Argmax score; ties by smaller time_to_safety, then lexicographic path."""
    return min(
        survivors, key=lambda r: (-r.score, r.time_to_safety, tuple(r.path))
    )


def best_route(
    graph: RoadGraph,
    start: Point,
    mode: TransportMode,
    timeline: FireTimeline,
    fire_direction: float,
    k: int = DEFAULT_K,
    margin: float = DEFAULT_MARGIN_S,
) -> tuple[ScoredRoute, list[ScoredRoute]]:
    """Generate, filter, and score candidates; return (winner, rejected)."""
    candidates = candidate_routes(graph, start, mode, timeline, k)
    survivors, rejected = [], []
    for route in candidates:
        route.rejection = check_fire_conflict(route, graph, timeline, margin)
        (rejected if route.rejected else survivors).append(route)
    if not survivors:
        raise NoSafeRouteError(rejected)
    t_min = min(r.time_to_safety for r in survivors)
    for route in survivors:
        score_route(route, fire_direction, mode, t_min, graph)
    return pick_best(survivors), rejected


@dataclass(frozen=True)
class Guidance:
    relative_bearing: float  # radians, heading-relative, (-pi, pi], + is right
    distance_m: float  # remaining distance to the route's end
    turns: list[tuple[int, str]]  # (node id, "left" | "right" | "straight")


TURN_THRESHOLD = math.radians(30.0)


def guidance(
    graph: RoadGraph, route: ScoredRoute, position: Point, heading: float
) -> Guidance:
    """Heading-relative bearing to the next un-passed node, remaining
    distance, and per-node turn directions for the rest of the route."""
    pts = graph.path_points(route.path)
    if point_polyline_distance(position, pts) > OFF_ROUTE_M:
        raise OffRouteError("position more than 500 m off the route")
    next_idx = _next_unpassed(pts, position)
    target = pts[next_idx]
    bearing = compass_bearing(position, target)
    rel = signed_turn(heading, bearing)
    remaining = math.hypot(target[0] - position[0], target[1] - position[1])
    for i in range(next_idx, len(pts) - 1):
        remaining += math.hypot(pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1])
    turns = []
    for i in range(max(next_idx, 1), len(pts) - 1):
        before = compass_bearing(pts[i - 1], pts[i])
        after = compass_bearing(pts[i], pts[i + 1])
        turn = signed_turn(before, after)
        if turn > TURN_THRESHOLD:
            label = "right"
        elif turn < -TURN_THRESHOLD:
            label = "left"
        else:
            label = "straight"
        turns.append((route.path[i], label))
    return Guidance(relative_bearing=rel, distance_m=remaining, turns=turns)


def _next_unpassed(pts: list[Point], position: Point) -> int:
    """Index of the first route node beyond the projection of position."""
    if len(pts) == 1:
        return 0
    best_d, best_along = math.inf, 0.0
    acc = 0.0
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        if seg == 0.0:
            acc += seg
            continue
        t = ((position[0] - a[0]) * (b[0] - a[0]) + (position[1] - a[1]) * (b[1] - a[1])) / (seg * seg)
        t = min(max(t, 0.0), 1.0)
        proj = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        d = math.hypot(position[0] - proj[0], position[1] - proj[1])
        if d < best_d:
            best_d = d
            best_along = acc + t * seg
        acc += seg
    # first node whose cumulative distance exceeds the projection
    acc = 0.0
    for i in range(len(pts) - 1):
        seg = math.hypot(pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1])
        acc += seg
        if acc > best_along + 1e-9:
            return i + 1
    return len(pts) - 1
