"""Shared fixture builders: synthetic rasters, scenarios, and road files."""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone

import numpy as np
import pytest

from firescape.geometry import LocalFrame, M_PER_DEG_LAT, M_PER_DEG_LON_EQUATOR
from firescape.terrain import (
    FuelCatalog,
    Raster,
    ScenarioConfig,
    TerrainGrid,
    WindSample,
    write_ascii_grid,
)

XLL, YLL = 33.30, 35.10  # arbitrary corner in the eastern Mediterranean
IGNITION_TIME = datetime(2021, 4, 1, 12, 0, tzinfo=timezone.utc)


def make_raster(values, cellsize=30.0, xll=XLL, yll=YLL, nodata=-9999.0) -> Raster:
    arr = np.array(values, dtype=float)
    return Raster(
        ncols=arr.shape[1],
        nrows=arr.shape[0],
        xllcorner=xll,
        yllcorner=yll,
        cellsize=cellsize,
        nodata=nodata,
        values=arr,  # row 0 = south row
    )


def uniform_raster(nrows, ncols, value, **kw) -> Raster:
    return make_raster(np.full((nrows, ncols), float(value)), **kw)


def grid_center_lonlat(raster: Raster) -> tuple[float, float]:
    mx = math.cos(math.radians(raster.yllcorner)) * M_PER_DEG_LON_EQUATOR
    lon = raster.xllcorner + (raster.ncols * raster.cellsize / 2.0) / mx
    lat = raster.yllcorner + (raster.nrows * raster.cellsize / 2.0) / M_PER_DEG_LAT
    return lon, lat


def make_terrain(nrows=24, ncols=24, fuel_class=1, cellsize=30.0,
                 elevation=0.0, catalog=None) -> TerrainGrid:
    fuel = uniform_raster(nrows, ncols, fuel_class, cellsize=cellsize)
    if np.isscalar(elevation):
        elev = uniform_raster(nrows, ncols, elevation, cellsize=cellsize)
    else:
        elev = make_raster(elevation, cellsize=cellsize)
    return TerrainGrid(fuel, elev, catalog or FuelCatalog.default())


def make_scenario(grid: TerrainGrid, wind_speed=0.0, wind_dir_deg=0.0,
                  humidity=0.0, **kw) -> ScenarioConfig:
    lon, lat = grid_center_lonlat_from_grid(grid)
    return ScenarioConfig(
        ignition=(lon, lat),
        ignition_time=IGNITION_TIME,
        wind=WindSample(speed=wind_speed, direction_to=math.radians(wind_dir_deg)),
        humidity=humidity,
        temperature=25.0,
        **kw,
    )


def grid_center_lonlat_from_grid(grid: TerrainGrid) -> tuple[float, float]:
    mx = math.cos(math.radians(grid.origin[1])) * M_PER_DEG_LON_EQUATOR
    lon = grid.origin[0] + (grid.width_m / 2.0) / mx
    lat = grid.origin[1] + (grid.height_m / 2.0) / M_PER_DEG_LAT
    return lon, lat


def write_terrain_files(tmp_path, grid_rasters: tuple[Raster, Raster]):
    fuel, elev = grid_rasters
    fuel_path = tmp_path / "fuel.asc"
    elev_path = tmp_path / "elevation.asc"
    write_ascii_grid(fuel_path, fuel)
    write_ascii_grid(elev_path, elev)
    return fuel_path, elev_path


def road_geojson(frame: LocalFrame, lines, modes=("walking", "cycling", "driving")):
    """Build a road FeatureCollection from local-frame polylines."""
    features = []
    for line in lines:
        coords = [list(frame.to_lonlat(x, y)) for x, y in line]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {"modes": list(modes)},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def write_road_file(tmp_path, frame, lines, name="roads.geojson", **kw):
    path = tmp_path / name
    path.write_text(json.dumps(road_geojson(frame, lines, **kw)))
    return path


@pytest.fixture
def flat_grass_grid():
    return make_terrain(nrows=24, ncols=24, fuel_class=1)
