#!/usr/bin/env python3
"""Regenerate the committed demo dataset under data/demo/.

Deterministic: a fixed seed draws the fuel mosaic, so re-running produces
identical files.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import numpy as np

from firescape.geometry import LocalFrame, M_PER_DEG_LAT, M_PER_DEG_LON_EQUATOR
from firescape.terrain import Raster, write_ascii_grid

OUT = Path(__file__).resolve().parent.parent / "data" / "demo"
N = 64
CELL = 30.0
XLL, YLL = 33.30, 35.10


def build_fuel(rng: random.Random) -> np.ndarray:
    fuel = np.ones((N, N))  # grass baseline
    # shrub blobs
    for _ in range(6):
        cx, cy = rng.randrange(N), rng.randrange(N)
        r = rng.randint(4, 9)
        for row in range(N):
            for col in range(N):
                if (row - cy) ** 2 + (col - cx) ** 2 < r * r:
                    fuel[row, col] = 2.0
    # forest band in the north
    fuel[N - 14 : N - 4, 8 : N - 8] = 3.0
    # agricultural strip in the south
    fuel[4:10, 0:N] = 4.0
    # a lake, non-burnable
    for row in range(N):
        for col in range(N):
            if (row - 20) ** 2 / 36 + (col - 46) ** 2 / 16 < 4:
                fuel[row, col] = 0.0
    return fuel


def build_elevation() -> np.ndarray:
    elev = np.zeros((N, N))
    for row in range(N):
        for col in range(N):
            hill = 60.0 * math.exp(-((row - 44) ** 2 + (col - 18) ** 2) / 300.0)
            elev[row, col] = round(120.0 + 0.35 * row + hill, 1)
    return elev


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(7)
    fuel = Raster(N, N, XLL, YLL, CELL, -9999.0, build_fuel(rng))
    elev = Raster(N, N, XLL, YLL, CELL, -9999.0, build_elevation())
    write_ascii_grid(OUT / "fuel.asc", fuel)
    write_ascii_grid(OUT / "elevation.asc", elev)

    mx = math.cos(math.radians(YLL)) * M_PER_DEG_LON_EQUATOR
    ignition = (XLL + (N * CELL / 2) / mx, YLL + (N * CELL / 2) / M_PER_DEG_LAT)
    frame = LocalFrame(*ignition)

    scenario = {
        "ignition": [ignition[0], ignition[1]],
        "ignition_time": "2021-04-01T17:00:00Z",
        "wind": {"speed": 6.0 / 3.6, "direction_to_deg": 135.0},
        "humidity": 30.0,
        "temperature": 30.0,
        "horizon": 60,
        "ring_interval": 15,
        "note": "demo scenario: natural reserve, light southeast-bound wind",
    }
    (OUT / "scenario.json").write_text(json.dumps(scenario, indent=2) + "\n")

    (OUT / "catalog.csv").write_text(
        "id,name,r0,wind_coeff,slope_coeff,moisture_class\n"
        "0,non-burnable,0.0,0.0,0.0,none\n"
        "1,grass,2.0,0.7,1.8,fine\n"
        "2,shrub,1.2,0.6,1.6,medium\n"
        "3,forest,0.8,0.4,1.4,coarse\n"
        "4,agricultural,1.0,0.5,1.2,fine\n"
    )

    # street net: a ring road around the reserve plus four radial exits
    ring = [
        (500.0, 500.0), (500.0, -500.0), (-500.0, -500.0), (-500.0, 500.0), (500.0, 500.0)
    ]
    exits = [
        [(500.0, 0.0), (1400.0, 0.0), (2600.0, 0.0)],
        [(-500.0, 0.0), (-1400.0, 100.0), (-2600.0, 0.0)],
        [(0.0, 500.0), (150.0, 1500.0), (0.0, 2700.0)],
        [(0.0, -500.0), (-100.0, -1500.0), (0.0, -2700.0)],
    ]
    feeder = [[(350.0, 40.0), (500.0, 0.0)], [(350.0, 40.0), (250.0, 260.0), (0.0, 500.0)]]
    features = []
    for line in [ring] + exits + feeder:
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [list(frame.to_lonlat(x, y)) for x, y in line],
                },
                "properties": {"modes": ["walking", "cycling", "driving"]},
            }
        )
    roads = {"type": "FeatureCollection", "features": features}
    (OUT / "roads.geojson").write_text(json.dumps(roads, indent=2) + "\n")

    (OUT / "engine.json").write_text(
        json.dumps(
            {"dq": 10.0, "d_min": 5.0, "d_max": 25.0, "remesh_cadence": 64, "r_init": 5.0},
            indent=2,
        )
        + "\n"
    )

    (OUT / "service.json").write_text(
        json.dumps(
            {
                "terrain_fuel": "data/demo/fuel.asc",
                "terrain_elev": "data/demo/elevation.asc",
                "fuel_catalog": "data/demo/catalog.csv",
                "road_graph": "data/demo/roads.geojson",
                "wind_backend": "constant",
                "bind_addr": "127.0.0.1:8000",
                "journal_path": "fires.journal",
                "engine_config": "data/demo/engine.json",
            },
            indent=2,
        )
        + "\n"
    )
    print(f"wrote demo dataset to {OUT}")


if __name__ == "__main__":
    main()
