"""Wind field providers: a constant sample or a file-backed grid.

A provider is any callable ``(lon, lat, t_s) -> WindSample`` where ``t_s``
is seconds since ignition. The file backend reads a JSON grid and answers
with nearest-neighbor lookup (clamped at the edges, time-invariant).
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Callable

from .terrain import WindSample

WindProvider = Callable[[float, float, float], WindSample]


class ConstantWind:
    def __init__(self, sample: WindSample):
        self.sample = sample

    def __call__(self, lon: float, lat: float, t_s: float) -> WindSample:
        return self.sample


class FileWind:
    """JSON wind grid: lon0/lat0 of the cell-center origin, dlon/dlat spacing,
    2D ``speed`` (m/s) and ``direction_to_deg`` arrays indexed [lat][lon]."""

    def __init__(self, path):
        with open(path) as fh:
            data = json.load(fh)
        self.lon0 = float(data["lon0"])
        self.lat0 = float(data["lat0"])
        self.dlon = float(data["dlon"])
        self.dlat = float(data["dlat"])
        self.speed = [[float(v) for v in row] for row in data["speed"]]
        self.direction_deg = [[float(v) for v in row] for row in data["direction_to_deg"]]
        if len(self.speed) != len(self.direction_deg) or any(
            len(a) != len(b) for a, b in zip(self.speed, self.direction_deg)
        ):
            raise ValueError("wind grid speed/direction shapes differ")

    def __call__(self, lon: float, lat: float, t_s: float) -> WindSample:
        col = round((lon - self.lon0) / self.dlon)
        row = round((lat - self.lat0) / self.dlat)
        row = min(max(row, 0), len(self.speed) - 1)
        col = min(max(col, 0), len(self.speed[0]) - 1)
        return WindSample(
            speed=self.speed[row][col],
            direction_to=math.radians(self.direction_deg[row][col]),
        )


def provider_for(wind: WindSample | str, base_dir=None) -> WindProvider:
    """Build a provider from a scenario's wind field: an inline sample gives
    the constant backend, a path string the file backend."""
    if isinstance(wind, WindSample):
        return ConstantWind(wind)
    path = Path(wind)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return FileWind(path)
