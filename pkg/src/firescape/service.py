"""HTTP service: fire lifecycle management, simulation on ignite, GeoJSON out.

State lives in a FireStore backed by an append-only JSON-lines journal;
replaying the journal after a restart reproduces responses byte for byte.
All mutations are serialized behind a single writer lock, reads are lock-free
snapshots of immutable ring data.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import geojson as gj
from . import routing
from .geometry import LocalFrame
from .spread import EngineConfig, IgnitionError, IsochroneSet, Ring, simulate
from .terrain import (
    NON_BURNABLE,
    FuelCatalog,
    OutOfBoundsError,
    ScenarioConfig,
    TerrainGrid,
    load_ascii_grid,
)
from .wind import FileWind, provider_for

log = logging.getLogger(__name__)

_ENV_KEYS = {
    "terrain_fuel": "TERRAIN_FUEL",
    "terrain_elev": "TERRAIN_ELEV",
    "fuel_catalog": "FUEL_CATALOG",
    "road_graph": "ROAD_GRAPH",
    "wind_backend": "WIND_BACKEND",
    "bind_addr": "BIND_ADDR",
    "journal_path": "JOURNAL_PATH",
}


@dataclass
class ServiceConfig:
    terrain_fuel: str = ""
    terrain_elev: str = ""
    fuel_catalog: str = ""  # empty -> built-in default catalog
    road_graph: str = ""
    wind_backend: str = "constant"  # "constant" or "file:<path>"
    bind_addr: str = "127.0.0.1:8000"
    journal_path: str = "fires.journal"
    cors_origin: str = "*"
    engine_config: str = ""

    @classmethod
    def load(cls, path=None) -> "ServiceConfig":
        """Read the JSON config file, then apply environment overrides."""
        cfg = cls()
        if path:
            with open(path) as fh:
                data = json.load(fh)
            for key, value in data.items():
                if hasattr(cfg, key):
                    setattr(cfg, key, value)
        for attr, env in _ENV_KEYS.items():
            if os.environ.get(env):
                setattr(cfg, attr, os.environ[env])
        return cfg


@dataclass
class FireEvent:
    id: str
    scenario: ScenarioConfig
    status: str = "pending"  # pending -> active -> stopped
    rings: IsochroneSet | None = None
    frame_anchor: tuple[float, float] | None = None

    @property
    def note(self) -> str:
        return self.scenario.note

    @property
    def frame(self) -> LocalFrame:
        anchor = self.frame_anchor or self.scenario.ignition
        return LocalFrame(anchor[0], anchor[1])

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "status": self.status,
            "scenario": self.scenario.to_dict(),
            "note": self.note,
            "rings": None,
        }
        if self.rings is not None:
            out["rings"] = gj.rings_geometry(self.rings, self.frame)
            out["ring_minutes"] = sorted(r.minutes for r in self.rings.rings)
        return out


def _rings_to_journal(rings: IsochroneSet) -> list[dict]:
    return [
        {"minutes": r.minutes, "vertices": [[x, y] for x, y in r.vertices]}
        for r in rings.rings
    ]


def _rings_from_journal(data: list[dict]) -> IsochroneSet:
    return IsochroneSet(
        rings=tuple(
            Ring(minutes=int(r["minutes"]), vertices=tuple((v[0], v[1]) for v in r["vertices"]))
            for r in data
        )
    )


class FireStore:
    """id -> FireEvent map with an append-only transition journal."""

    def __init__(self, journal_path):
        self.fires: dict[str, FireEvent] = {}
        self.journal_path = Path(journal_path)
        self.lock = threading.Lock()
        if self.journal_path.exists():
            self._replay()

    def _append(self, entry: dict) -> None:
        with open(self.journal_path, "a") as fh:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")

    def _replay(self) -> None:
        with open(self.journal_path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                self._apply(entry)

    def _apply(self, entry: dict) -> None:
        op = entry["op"]
        if op == "create":
            scenario = ScenarioConfig.from_dict(entry["scenario"])
            self.fires[entry["id"]] = FireEvent(id=entry["id"], scenario=scenario)
        elif op == "ignite":
            fire = self.fires[entry["id"]]
            fire.rings = _rings_from_journal(entry["rings"])
            fire.frame_anchor = tuple(entry["frame"])
            fire.status = "active"
        elif op == "stop":
            fire = self.fires[entry["id"]]
            fire.status = "stopped"
            fire.rings = None  # rings present iff active
        elif op == "delete":
            self.fires.pop(entry["id"], None)

    def create(self, scenario: ScenarioConfig) -> FireEvent:
        with self.lock:
            fire_id = str(uuid.uuid4())
            entry = {"op": "create", "id": fire_id, "scenario": scenario.to_dict()}
            self._apply(entry)
            self._append(entry)
            return self.fires[fire_id]

    def ignite(self, fire_id: str, rings: IsochroneSet, anchor: tuple[float, float]) -> FireEvent:
        with self.lock:
            entry = {
                "op": "ignite",
                "id": fire_id,
                "rings": _rings_to_journal(rings),
                "frame": [anchor[0], anchor[1]],
            }
            self._apply(entry)
            self._append(entry)
            return self.fires[fire_id]

    def stop(self, fire_id: str) -> FireEvent:
        with self.lock:
            entry = {"op": "stop", "id": fire_id}
            self._apply(entry)
            self._append(entry)
            return self.fires[fire_id]

    def delete(self, fire_id: str) -> None:
        with self.lock:
            entry = {"op": "delete", "id": fire_id}
            self._apply(entry)
            self._append(entry)


def _error(status: int, detail, kind: str = "error") -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": kind, "detail": detail})


def create_app(config: ServiceConfig) -> FastAPI:
    """Wire the HTTP API around loaded terrain, roads, and a fire store."""
    catalog = (
        FuelCatalog.from_csv(config.fuel_catalog) if config.fuel_catalog else FuelCatalog.default()
    )
    grid = TerrainGrid(
        load_ascii_grid(config.terrain_fuel), load_ascii_grid(config.terrain_elev), catalog
    )
    with open(config.road_graph) as fh:
        road_features = routing.parse_road_features(json.load(fh))
    engine_config = (
        EngineConfig.from_json_file(config.engine_config) if config.engine_config else EngineConfig()
    )
    store = FireStore(config.journal_path)

    app = FastAPI(title="firescape", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.grid = grid
    graph_cache: dict[str, routing.RoadGraph] = {}

    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _invalid_body(request: Request, exc: RequestValidationError):
        return _error(400, str(exc), "invalid_body")

    def _wind_provider(scenario: ScenarioConfig):
        if config.wind_backend.startswith("file:"):
            return FileWind(config.wind_backend[len("file:"):])
        return provider_for(scenario.wind)

    def _graph_for(fire: FireEvent) -> routing.RoadGraph:
        if fire.id not in graph_cache:
            graph_cache[fire.id] = routing.build_graph(road_features, fire.frame)
        return graph_cache[fire.id]

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/fires", status_code=201)
    def create_fire(payload: dict):
        try:
            scenario = ScenarioConfig.from_dict(payload)
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, f"invalid scenario: {exc}", "invalid_body")
        frame = LocalFrame(*scenario.ignition)
        try:
            class_id, _, _ = grid.sample((0.0, 0.0), frame)
        except OutOfBoundsError:
            return _error(422, "ignition outside the loaded terrain", "ignition_out_of_bounds")
        if class_id == NON_BURNABLE:
            return _error(422, "ignition on non-burnable fuel", "non_burnable_ignition")
        fire = store.create(scenario)
        return JSONResponse(status_code=201, content=fire.to_json())

    @app.get("/fires")
    def list_fires():
        features = [
            gj.fire_feature(
                fire.id,
                fire.scenario.to_dict()["ignition_time"],
                fire.note,
                fire.rings,
                fire.frame,
            )
            for fire in store.fires.values()
            if fire.status == "active"
        ]
        return JSONResponse(content=gj.feature_collection(features))

    @app.post("/fires/{fire_id}/ignite")
    def ignite_fire(fire_id: str):
        fire = store.fires.get(fire_id)
        if fire is None:
            return _error(404, f"no fire {fire_id}", "not_found")
        if fire.status != "pending":
            return _error(409, f"fire is {fire.status}, expected pending", "wrong_status")
        try:
            rings = simulate(
                fire.scenario, grid, _wind_provider(fire.scenario), engine_config
            )
        except (IgnitionError, OutOfBoundsError) as exc:
            return _error(422, str(exc), "ignition_rejected")
        fire = store.ignite(fire_id, rings, fire.scenario.ignition)
        return JSONResponse(content=fire.to_json())

    @app.post("/fires/{fire_id}/stop")
    def stop_fire(fire_id: str):
        fire = store.fires.get(fire_id)
        if fire is None:
            return _error(404, f"no fire {fire_id}", "not_found")
        if fire.status != "active":
            return _error(409, f"fire is {fire.status}, expected active", "wrong_status")
        fire = store.stop(fire_id)
        return JSONResponse(content=fire.to_json())

    @app.delete("/fires/{fire_id}")
    def delete_fire(fire_id: str):
        if fire_id not in store.fires:
            return _error(404, f"no fire {fire_id}", "not_found")
        store.delete(fire_id)
        graph_cache.pop(fire_id, None)
        return JSONResponse(content={"deleted": fire_id})

    @app.post("/route")
    def plan_route(payload: dict):
        try:
            lon, lat = float(payload["lon"]), float(payload["lat"])
            mode = routing.get_mode(str(payload["mode"]))
            fire_id = str(payload["fire_id"])
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, f"invalid route request: {exc}", "invalid_body")
        fire = store.fires.get(fire_id)
        if fire is None:
            return _error(404, f"no fire {fire_id}", "not_found")
        if fire.status != "active":
            return _error(409, f"fire is {fire.status}, expected active", "wrong_status")
        graph = _graph_for(fire)
        timeline = routing.FireTimeline(fire.rings)
        provider = _wind_provider(fire.scenario)
        fire_direction = provider(fire.scenario.ignition[0], fire.scenario.ignition[1], 0.0).direction_to
        start = fire.frame.to_local(lon, lat)
        try:
            best, rejected = routing.best_route(graph, start, mode, timeline, fire_direction)
        except routing.SnapError as exc:
            return _error(422, str(exc), "snap")
        except routing.NoEscapeError as exc:
            return _error(422, str(exc), "no_escape")
        except routing.NoSafeRouteError as exc:
            reasons = [
                {
                    "point": list(fire.frame.to_lonlat(*r.rejection.point)),
                    "slot_minutes": r.rejection.slot_minutes,
                    "user_time_s": round(r.rejection.user_time_s, 3),
                }
                for r in exc.rejected
            ]
            return _error(422, reasons, "no_safe_route")
        return JSONResponse(
            content=gj.route_feature(best, rejected, graph, fire.frame, mode.name)
        )

    return app


def run_service(config: ServiceConfig) -> None:
    import uvicorn

    host, _, port = config.bind_addr.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8000))
