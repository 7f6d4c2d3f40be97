"""Fire-front propagation: Lagrangian markers on a discrete-event loop.

The front is a closed CCW loop of markers, each carrying the position it
will occupy at its ``arrival`` time plus the previous position/time so the
front can be reconstructed at any instant in between. Events pop in time
order; each pop advances one marker a fixed spatial increment ``dq`` along
its outward normal at the local rate of spread. Snapshots at multiples of
the ring interval become the nested isochrone polygons clients see.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

from .geometry import LocalFrame, Point, prune_loops, signed_area
from .terrain import (
    NON_BURNABLE,
    FuelParams,
    OutOfBoundsError,
    ScenarioConfig,
    TerrainGrid,
)
from .wind import WindProvider, provider_for


class IgnitionError(ValueError):
    """Ignition point rejected (non-burnable fuel)."""


@dataclass
class EngineConfig:
    """Numerical knobs of the front tracker."""

    dq: float = 10.0  # spatial increment per advance, meters
    d_min: float = 5.0  # remesh: remove markers crowded below this spacing
    d_max: float = 25.0  # remesh: split gaps wider than this
    remesh_cadence: int = 64  # event pops between remesh passes
    r_init: float = 5.0  # ignition disk radius, meters
    n_init: int = 16  # ignition disk marker count

    @classmethod
    def from_json_file(cls, path) -> "EngineConfig":
        with open(path) as fh:
            data = json.load(fh)
        cfg = cls()
        for key in ("dq", "d_min", "d_max", "r_init"):
            if key in data:
                setattr(cfg, key, float(data[key]))
        for key in ("remesh_cadence", "n_init"):
            if key in data:
                setattr(cfg, key, int(data[key]))
        if not 0 < cfg.d_min < cfg.d_max:
            raise ValueError("require 0 < d_min < d_max")
        if cfg.dq <= 0:
            raise ValueError("dq must be positive")
        return cfg


@dataclass
class Marker:
    """One front particle. ``(x, y)`` is where it arrives at ``arrival``
    seconds after ignition; ``prev_*`` is the segment it travels along."""

    id: int
    x: float
    y: float
    arrival: float
    prev_x: float
    prev_y: float
    prev_time: float
    prev_id: int = -1
    next_id: int = -1
    frozen: str | None = None  # None | "fuel" | "boundary"

    @property
    def position(self) -> Point:
        return (self.x, self.y)

    def position_at(self, t: float) -> Point:
        """Linear interpolation along the current travel segment."""
        if t >= self.arrival:
            return (self.x, self.y)
        if t <= self.prev_time or self.arrival == self.prev_time:
            return (self.prev_x, self.prev_y)
        frac = (t - self.prev_time) / (self.arrival - self.prev_time)
        return (self.prev_x + frac * (self.x - self.prev_x),
                self.prev_y + frac * (self.y - self.prev_y))


class FireFront:
    """Closed CCW loop of markers with doubly-linked neighbor ids."""

    def __init__(self):
        self.markers: dict[int, Marker] = {}
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.markers)

    def new_marker(self, x: float, y: float, arrival: float) -> Marker:
        m = Marker(self._next_id, x, y, arrival, x, y, arrival)
        self._next_id += 1
        self.markers[m.id] = m
        return m

    @classmethod
    def from_positions(cls, positions: list[Point], arrival: float = 0.0) -> "FireFront":
        front = cls()
        ms = [front.new_marker(x, y, arrival) for x, y in positions]
        n = len(ms)
        for i, m in enumerate(ms):
            m.prev_id = ms[(i - 1) % n].id
            m.next_id = ms[(i + 1) % n].id
        return front

    def loop_ids(self) -> list[int]:
        """Marker ids in loop order, anchored at the smallest id."""
        if not self.markers:
            return []
        start = min(self.markers)
        ids = [start]
        cur = self.markers[start].next_id
        while cur != start:
            ids.append(cur)
            cur = self.markers[cur].next_id
        return ids

    def positions(self) -> list[Point]:
        return [self.markers[i].position for i in self.loop_ids()]

    def positions_at(self, t: float) -> list[Point]:
        return [self.markers[i].position_at(t) for i in self.loop_ids()]

    def signed_area(self) -> float:
        return signed_area(self.positions())

    def insert_between(self, a_id: int, b_id: int, x: float, y: float,
                       arrival: float, prev: Point, prev_time: float) -> Marker:
        m = self.new_marker(x, y, arrival)
        m.prev_x, m.prev_y, m.prev_time = prev[0], prev[1], prev_time
        a, b = self.markers[a_id], self.markers[b_id]
        m.prev_id, m.next_id = a_id, b_id
        a.next_id = m.id
        b.prev_id = m.id
        return m

    def remove(self, mid: int) -> None:
        m = self.markers.pop(mid)
        self.markers[m.prev_id].next_id = m.next_id
        self.markers[m.next_id].prev_id = m.prev_id


class EventQueue:
    """Priority queue of (time, marker id), ascending time then id.

    Each live marker has at most one pending event; superseded heap entries
    are discarded lazily on pop/peek.
    """

    def __init__(self):
        self._heap: list[tuple[float, int]] = []
        self.pending: dict[int, float] = {}

    def __len__(self) -> int:
        return len(self.pending)

    def push(self, time: float, mid: int) -> None:
        self.pending[mid] = time
        heapq.heappush(self._heap, (time, mid))

    def invalidate(self, mid: int) -> None:
        self.pending.pop(mid, None)

    def _discard_stale(self) -> None:
        while self._heap and self.pending.get(self._heap[0][1]) != self._heap[0][0]:
            heapq.heappop(self._heap)

    def peek(self) -> tuple[float, int] | None:
        self._discard_stale()
        return self._heap[0] if self._heap else None

    def pop(self) -> tuple[float, int]:
        self._discard_stale()
        time, mid = heapq.heappop(self._heap)
        del self.pending[mid]
        return time, mid


@dataclass(frozen=True)
class Ring:
    minutes: int
    vertices: tuple[Point, ...]

    def area_m2(self) -> float:
        return abs(signed_area(list(self.vertices)))


@dataclass(frozen=True)
class IsochroneSet:
    """Nested CCW fire perimeters at fixed minutes after ignition."""

    rings: tuple[Ring, ...]

    def minutes(self) -> list[int]:
        return [r.minutes for r in self.rings]

    def ring_at(self, minutes: int) -> Ring:
        for r in self.rings:
            if r.minutes == minutes:
                return r
        raise KeyError(f"no ring at minute {minutes}")


def ros(fuel: FuelParams, effective_wind: float, slope_tan: float,
        moisture_damp: float) -> float:
    """Rate of spread in m/min: damped base rate amplified multiplicatively
    by head wind and upslope; wind and slope never reverse spread."""
    if fuel.class_id == NON_BURNABLE:
        return 0.0
    return moisture_damp * fuel.r0 * (
        1.0 + fuel.wind_coeff * max(effective_wind, 0.0)
        + fuel.slope_coeff * max(slope_tan, 0.0)
    )


class Environment:
    """Terrain + wind accessors for one simulation, in its local frame."""

    def __init__(self, grid: TerrainGrid, frame: LocalFrame,
                 wind_provider: WindProvider, damp: float):
        self.grid = grid
        self.frame = frame
        self.wind_provider = wind_provider
        self.damp = damp

    def fuel_at(self, p: Point) -> FuelParams:
        try:
            _, params, _ = self.grid.sample(p, self.frame)
        except OutOfBoundsError:
            return self.grid.catalog[NON_BURNABLE]
        return params

    def slope_toward(self, p: Point, direction: float) -> float:
        return self.grid.slope_toward(p, direction, self.frame)

    def wind_vector(self, p: Point, t_s: float) -> Point:
        lon, lat = self.frame.to_lonlat(*p)
        return self.wind_provider(lon, lat, t_s).vector()

    def contains(self, p: Point) -> bool:
        return self.grid.contains_local(p, self.frame)

    def clamp(self, p: Point) -> Point:
        return self.grid.clamp_local(p, self.frame)


def outward_normal(front: FireFront, marker: Marker, t: float | None = None) -> Point | None:
    """Unit normal perpendicular to the neighbor chord, pointing out of the
    CCW loop (to the right of prev->next). None if the chord degenerates.

    With ``t`` the chord uses neighbor positions interpolated at that time;
    mixing stored destinations from different arrival times tilts the normal
    and destabilizes the front.
    """
    p = front.markers[marker.prev_id]
    n = front.markers[marker.next_id]
    if t is None:
        (px, py), (nx, ny) = p.position, n.position
    else:
        (px, py), (nx, ny) = p.position_at(t), n.position_at(t)
    dx, dy = nx - px, ny - py
    length = math.hypot(dx, dy)
    if length == 0.0:
        return None
    return (dy / length, -dx / length)


@dataclass(frozen=True)
class Advance:
    position: Point
    arrival: float
    frozen: str | None  # set when the marker stops here
    moved: bool


def advance_marker(marker: Marker, front: FireFront, env: Environment,
                   dq: float, now: float | None = None) -> Advance:
    """Compute one marker step of length dq along its outward normal.

    The travel time is dq over the local rate of spread; a zero rate or a
    degenerate normal freezes the marker in place, and a step that leaves
    the grid is clamped to the boundary and then frozen.
    """
    start_time = marker.arrival if now is None else max(marker.arrival, now)
    normal = outward_normal(front, marker, t=start_time if now is not None else None)
    if normal is None:
        return Advance(marker.position, marker.arrival, "fuel", False)
    fuel = env.fuel_at(marker.position)
    wind = env.wind_vector(marker.position, start_time)
    effective_wind = max(0.0, wind[0] * normal[0] + wind[1] * normal[1])
    slope_tan = env.slope_toward(marker.position, math.atan2(normal[1], normal[0]))
    rate = ros(fuel, effective_wind, slope_tan, env.damp)
    if rate <= 0.0:
        return Advance(marker.position, marker.arrival, "fuel", False)
    rate_mps = rate / 60.0
    target = (marker.x + dq * normal[0], marker.y + dq * normal[1])
    if env.contains(target):
        return Advance(target, start_time + dq / rate_mps, None, True)
    clamped = env.clamp(target)
    moved = math.hypot(clamped[0] - marker.x, clamped[1] - marker.y)
    if moved <= 1e-9:
        return Advance(marker.position, marker.arrival, "boundary", False)
    return Advance(clamped, start_time + moved / rate_mps, "boundary", True)


def _gap(a: Marker, b: Marker) -> float:
    return math.hypot(b.x - a.x, b.y - a.y)


def remesh(front: FireFront, d_min: float, d_max: float,
           queue: EventQueue | None = None, now: float = 0.0) -> FireFront:
    """Keep neighbor spacing inside [d_min, d_max].

    Gaps above d_max get a midpoint marker (arrival = mean of the pair);
    markers whose both gaps fall below d_min are removed, but never below a
    4-marker loop. Mutates and returns the front.
    """
    if not 0 < d_min < d_max:
        raise ValueError("require 0 < d_min < d_max")
    pairs = []
    ids = front.loop_ids()
    for i, mid in enumerate(ids):
        pairs.append((mid, ids[(i + 1) % len(ids)]))
    for a_id, b_id in pairs:
        a, b = front.markers[a_id], front.markers[b_id]
        if _gap(a, b) > d_max:
            mid_arrival = 0.5 * (a.arrival + b.arrival)
            prev = (0.5 * (a.prev_x + b.prev_x), 0.5 * (a.prev_y + b.prev_y))
            prev_time = 0.5 * (a.prev_time + b.prev_time)
            m = front.insert_between(
                a_id, b_id, 0.5 * (a.x + b.x), 0.5 * (a.y + b.y),
                mid_arrival, prev, prev_time,
            )
            if queue is not None:
                queue.push(max(now, mid_arrival), m.id)
    for mid in front.loop_ids():
        if len(front) <= 4:
            break
        m = front.markers.get(mid)
        if m is None:
            continue
        prev, nxt = front.markers[m.prev_id], front.markers[m.next_id]
        if _gap(prev, m) < d_min and _gap(m, nxt) < d_min:
            front.remove(mid)
            if queue is not None:
                queue.invalidate(mid)
    return front


def ignite(scenario: ScenarioConfig, grid: TerrainGrid,
           config: EngineConfig | None = None) -> tuple[FireFront, EventQueue]:
    """Initial front: a regular CCW polygon of radius r_init around the
    ignition point (the local-frame origin), all arrivals at t = 0."""
    config = config or EngineConfig()
    frame = LocalFrame(*scenario.ignition)
    class_id, _, _ = grid.sample((0.0, 0.0), frame)  # raises OutOfBoundsError outside
    if class_id == NON_BURNABLE:
        raise IgnitionError(
            f"non-burnable ignition at ({scenario.ignition[0]}, {scenario.ignition[1]})"
        )
    positions = []
    for k in range(config.n_init):
        a = 2.0 * math.pi * k / config.n_init
        positions.append((config.r_init * math.cos(a), config.r_init * math.sin(a)))
    front = FireFront.from_positions(positions, arrival=0.0)
    queue = EventQueue()
    for mid in front.loop_ids():
        queue.push(0.0, mid)
    return front, queue


class Simulation:
    """Owns one run's mutable state; not shared across threads."""

    def __init__(self, scenario: ScenarioConfig, grid: TerrainGrid,
                 wind_provider: WindProvider | None = None,
                 config: EngineConfig | None = None):
        self.scenario = scenario
        self.grid = grid
        self.config = config or EngineConfig()
        self.frame = LocalFrame(*scenario.ignition)
        provider = wind_provider if wind_provider is not None else provider_for(scenario.wind)
        self.env = Environment(grid, self.frame, provider, scenario.moisture_damp())
        self.pop_times: list[float] = []  # event-monotonicity trace

    def _snapshot(self, front: FireFront, t_s: float, minutes: int) -> Ring:
        verts = prune_loops(front.positions_at(t_s))
        return Ring(minutes=minutes, vertices=tuple(verts))

    def run(self) -> IsochroneSet:
        cfg = self.config
        front, queue = ignite(self.scenario, self.grid, cfg)
        interval = self.scenario.ring_interval
        ring_times = self.scenario.ring_minutes
        rings = [self._snapshot(front, 0.0, 0)]
        next_idx = 1
        pops = 0
        while queue and next_idx < len(ring_times):
            head = queue.peek()
            if head is None:
                break
            t, _ = head
            ring_s = ring_times[next_idx] * 60.0
            if t > ring_s:
                rings.append(self._snapshot(front, ring_s, ring_times[next_idx]))
                next_idx += 1
                continue
            t, mid = queue.pop()
            self.pop_times.append(t)
            pops += 1
            marker = front.markers[mid]
            step = advance_marker(marker, front, self.env, cfg.dq, now=t)
            if step.moved:
                marker.prev_x, marker.prev_y = marker.x, marker.y
                marker.prev_time = max(marker.arrival, t)
                marker.x, marker.y = step.position
                marker.arrival = step.arrival
                marker.frozen = step.frozen
                if step.frozen is None:
                    queue.push(step.arrival, mid)
                for nb_id in (marker.prev_id, marker.next_id):
                    nb = front.markers[nb_id]
                    if nb.frozen == "fuel" and nb_id not in queue.pending:
                        queue.push(t, nb_id)  # neighbor moved: re-evaluate normal
            else:
                marker.frozen = step.frozen
            if pops % cfg.remesh_cadence == 0:
                remesh(front, cfg.d_min, cfg.d_max, queue, now=t)
        # Contained or finished fire: remaining rings repeat the final front.
        while next_idx < len(ring_times):
            ring_s = ring_times[next_idx] * 60.0
            rings.append(self._snapshot(front, ring_s, ring_times[next_idx]))
            next_idx += 1
        return IsochroneSet(rings=tuple(rings))


def simulate(scenario: ScenarioConfig, grid: TerrainGrid,
             wind_provider: WindProvider | None = None,
             config: EngineConfig | None = None) -> IsochroneSet:
    """Run one scenario to its horizon and return the nested ring set."""
    return Simulation(scenario, grid, wind_provider, config).run()
