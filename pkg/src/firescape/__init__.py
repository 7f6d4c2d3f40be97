"""Wildfire isochrone simulation and fire-avoiding escape routing."""

from .geometry import LocalFrame
from .spread import EngineConfig, IsochroneSet, Ring, Simulation, ros, simulate
from .terrain import (
    NON_BURNABLE,
    FuelCatalog,
    FuelParams,
    ScenarioConfig,
    TerrainGrid,
    WindSample,
    load_ascii_grid,
)
from .routing import (
    FireTimeline,
    RoadGraph,
    ScoredRoute,
    best_route,
    candidate_routes,
    guidance,
    load_graph,
    safe_nodes,
)

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "FireTimeline",
    "FuelCatalog",
    "FuelParams",
    "IsochroneSet",
    "LocalFrame",
    "NON_BURNABLE",
    "Ring",
    "RoadGraph",
    "ScenarioConfig",
    "ScoredRoute",
    "Simulation",
    "TerrainGrid",
    "WindSample",
    "best_route",
    "candidate_routes",
    "guidance",
    "load_ascii_grid",
    "load_graph",
    "ros",
    "safe_nodes",
    "simulate",
]
