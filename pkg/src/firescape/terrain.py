"""Gridded environment: fuel/elevation rasters, fuel catalog, scenario config.

Rasters arrive as ESRI ASCII grids whose corner coordinates are in degrees
(lon/lat of the lower-left corner) while ``cellsize`` is in meters (SRTM-style
30 m cells). Cell lookups convert lon/lat offsets to meters with the same
equirectangular scaling used by :class:`firescape.geometry.LocalFrame`.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .geometry import LocalFrame, Point

log = logging.getLogger(__name__)

#: Reserved fuel class id for cells that cannot burn (water, urban, NODATA).
NON_BURNABLE = 0

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


class GridParseError(ValueError):
    """Malformed ASCII grid header; the message names the offending key."""


class GridStructureError(ValueError):
    """Declared raster dimensions disagree with the data block."""


class OutOfBoundsError(ValueError):
    """Query point lies outside the raster extent."""


@dataclass(frozen=True)
class Raster:
    """One ASCII-grid field. ``values[row][col]`` with row 0 at the south edge."""

    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata: float
    values: np.ndarray


def load_ascii_grid(path) -> Raster:
    """Parse an ESRI ASCII grid (header + row-major values, north row first)."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    header: dict[str, float] = {}
    idx = 0
    while idx < len(lines) and len(header) < 6:
        parts = lines[idx].split()
        if len(parts) != 2:
            break
        key = parts[0].lower()
        if key not in _HEADER_KEYS:
            break
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise GridParseError(f"header key {parts[0]!r} has non-numeric value {parts[1]!r}")
        idx += 1
    for key in _HEADER_KEYS:
        if key not in header:
            raise GridParseError(f"missing header key {key!r}")
    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    if ncols != header["ncols"] or ncols < 2:
        raise GridParseError(f"header key 'ncols' must be an integer >= 2, got {header['ncols']}")
    if nrows != header["nrows"] or nrows < 2:
        raise GridParseError(f"header key 'nrows' must be an integer >= 2, got {header['nrows']}")
    if header["cellsize"] <= 0:
        raise GridParseError(f"header key 'cellsize' must be positive, got {header['cellsize']}")

    rows = []
    for ln in lines[idx:]:
        row = [float(v) for v in ln.split()]
        rows.append(row)
    if len(rows) != nrows:
        raise GridStructureError(f"expected {nrows} data rows, found {len(rows)}")
    for r, row in enumerate(rows):
        if len(row) != ncols:
            raise GridStructureError(f"row {r} has {len(row)} values, expected {ncols}")
    values = np.array(rows[::-1], dtype=float)  # file is north-first; store south-first
    return Raster(
        ncols=ncols,
        nrows=nrows,
        xllcorner=header["xllcorner"],
        yllcorner=header["yllcorner"],
        cellsize=header["cellsize"],
        nodata=header["nodata_value"],
        values=values,
    )


def write_ascii_grid(path, raster: Raster) -> None:
    """Inverse of :func:`load_ascii_grid` (round-trip stable)."""
    with open(path, "w") as fh:
        fh.write(f"ncols {raster.ncols}\n")
        fh.write(f"nrows {raster.nrows}\n")
        fh.write(f"xllcorner {raster.xllcorner!r}\n")
        fh.write(f"yllcorner {raster.yllcorner!r}\n")
        fh.write(f"cellsize {raster.cellsize!r}\n")
        fh.write(f"NODATA_value {raster.nodata!r}\n")
        for row in raster.values[::-1]:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def _fill_nodata_nearest(values: np.ndarray, nodata: float) -> np.ndarray:
    """Replace NODATA cells with the nearest valid cell's value."""
    mask = values == nodata
    if not mask.any():
        return values
    if mask.all():
        raise GridStructureError("elevation raster contains only NODATA cells")
    from scipy import ndimage

    _, (ri, ci) = ndimage.distance_transform_edt(mask, return_indices=True)
    return values[ri, ci]


@dataclass(frozen=True)
class FuelParams:
    """Spread parameters for one fuel class.

    r0 is the no-wind flat-ground rate of spread in m/min; wind_coeff scales
    per m/s of effective wind, slope_coeff per unit tan(slope). moisture_class
    is an informational label carried from the catalog file.
    """

    class_id: int
    name: str
    r0: float
    wind_coeff: float
    slope_coeff: float
    moisture_class: str = ""

    def __post_init__(self):
        if self.r0 < 0 or self.wind_coeff < 0 or self.slope_coeff < 0:
            raise ValueError(f"fuel class {self.class_id}: coefficients must be >= 0")
        if self.class_id == NON_BURNABLE and self.r0 != 0:
            raise ValueError("NON_BURNABLE class must have r0 = 0")


class FuelCatalog:
    """Immutable map fuel class id -> FuelParams."""

    def __init__(self, params: list[FuelParams]):
        self._by_id = {p.class_id: p for p in params}
        if NON_BURNABLE not in self._by_id:
            self._by_id[NON_BURNABLE] = FuelParams(NON_BURNABLE, "non-burnable", 0.0, 0.0, 0.0)

    def __contains__(self, class_id: int) -> bool:
        return class_id in self._by_id

    def __getitem__(self, class_id: int) -> FuelParams:
        return self._by_id[class_id]

    def class_ids(self) -> list[int]:
        return sorted(self._by_id)

    @classmethod
    def default(cls) -> "FuelCatalog":
        return cls(
            [
                FuelParams(0, "non-burnable", 0.0, 0.0, 0.0, "none"),
                FuelParams(1, "grass", 2.0, 0.7, 1.8, "fine"),
                FuelParams(2, "shrub", 1.2, 0.6, 1.6, "medium"),
                FuelParams(3, "forest", 0.8, 0.4, 1.4, "coarse"),
                FuelParams(4, "agricultural", 1.0, 0.5, 1.2, "fine"),
            ]
        )

    @classmethod
    def from_csv(cls, path) -> "FuelCatalog":
        """Load ``id,name,r0,wind_coeff,slope_coeff,moisture_class`` rows."""
        params = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"id", "name", "r0", "wind_coeff", "slope_coeff"}
            missing = required - set(reader.fieldnames or [])
            if missing:
                raise ValueError(f"fuel catalog missing columns: {sorted(missing)}")
            for row in reader:
                params.append(
                    FuelParams(
                        class_id=int(row["id"]),
                        name=row["name"].strip(),
                        r0=float(row["r0"]),
                        wind_coeff=float(row["wind_coeff"]),
                        slope_coeff=float(row["slope_coeff"]),
                        moisture_class=(row.get("moisture_class") or "").strip(),
                    )
                )
        return cls(params)


def moisture_damp(humidity: float) -> float:
    """Relative humidity (%) -> multiplicative damping in [0.2, 1.0]."""
    return min(1.0, max(0.2, 1.0 - humidity / 100.0 * 0.8))


@dataclass(frozen=True)
class WindSample:
    """Wind at a point: speed (m/s) and the compass direction the air moves
    toward, radians clockwise from geographic north."""

    speed: float
    direction_to: float

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("wind speed must be >= 0")
        object.__setattr__(self, "direction_to", self.direction_to % (2.0 * math.pi))

    def vector(self) -> Point:
        """Planar (east, north) velocity components in m/s."""
        return (self.speed * math.sin(self.direction_to), self.speed * math.cos(self.direction_to))


class TerrainGrid:
    """Co-registered fuel + elevation rasters bound to a fuel catalog."""

    def __init__(self, fuel: Raster, elevation: Raster, catalog: FuelCatalog):
        if (fuel.ncols, fuel.nrows) != (elevation.ncols, elevation.nrows):
            raise GridStructureError("fuel and elevation rasters differ in dimensions")
        if (
            fuel.xllcorner != elevation.xllcorner
            or fuel.yllcorner != elevation.yllcorner
            or fuel.cellsize != elevation.cellsize
        ):
            raise GridStructureError("fuel and elevation rasters differ in georeference")
        fuel_vals = fuel.values.copy()
        fuel_vals[fuel_vals == fuel.nodata] = NON_BURNABLE
        self.fuel = fuel_vals.astype(int)
        for class_id in np.unique(self.fuel):
            if int(class_id) not in catalog:
                raise ValueError(f"fuel class {int(class_id)} missing from catalog")
        self.elevation = _fill_nodata_nearest(elevation.values, elevation.nodata)
        self.catalog = catalog
        self.ncols = fuel.ncols
        self.nrows = fuel.nrows
        self.cell_size = fuel.cellsize
        self.origin = (fuel.xllcorner, fuel.yllcorner)

    @property
    def width_m(self) -> float:
        return self.ncols * self.cell_size

    @property
    def height_m(self) -> float:
        return self.nrows * self.cell_size

    def corner_local(self, frame: LocalFrame) -> Point:
        """Lower-left raster corner in local-frame meters. Cell boundaries are
        exact cell_size squares measured in the frame from this corner, so
        lookups stay pure float arithmetic with deterministic tie-breaks."""
        return frame.to_local(*self.origin)

    def cell_index(self, p: Point, frame: LocalFrame) -> tuple[int, int]:
        """(row, col) of the cell containing a local-frame point.

        Points on a shared cell edge belong to the lower column, then lower
        row, index; points on the far east/north boundary belong to the last
        cell. Raises OutOfBoundsError outside the extent.
        """
        cx, cy = self.corner_local(frame)
        u = (p[0] - cx) / self.cell_size
        v = (p[1] - cy) / self.cell_size
        if u < 0 or v < 0 or u > self.ncols or v > self.nrows:
            raise OutOfBoundsError(f"point {p} outside raster extent")
        col = min(int(math.floor(u)), self.ncols - 1)
        row = min(int(math.floor(v)), self.nrows - 1)
        if col > 0 and u == col:
            col -= 1
        if row > 0 and v == row:
            row -= 1
        return row, col

    def contains_local(self, p: Point, frame: LocalFrame) -> bool:
        cx, cy = self.corner_local(frame)
        return 0 <= p[0] - cx <= self.width_m and 0 <= p[1] - cy <= self.height_m

    def clamp_local(self, p: Point, frame: LocalFrame) -> Point:
        """Nearest point of the raster extent, in local-frame meters."""
        cx, cy = self.corner_local(frame)
        return (
            min(max(p[0], cx), cx + self.width_m),
            min(max(p[1], cy), cy + self.height_m),
        )

    def sample(self, p: Point, frame: LocalFrame) -> tuple[int, FuelParams, float]:
        """(fuel class, FuelParams, elevation m) of the cell containing p."""
        row, col = self.cell_index(p, frame)
        class_id = int(self.fuel[row, col])
        return class_id, self.catalog[class_id], float(self.elevation[row, col])

    def slope_toward(self, p: Point, direction: float, frame: LocalFrame) -> float:
        """tan(slope) one cell ahead of p along a planar direction (radians,
        CCW from +x east). Positive means uphill; probes outside the extent
        fall back to 0 (flat boundary)."""
        h = self.cell_size
        probe = (p[0] + h * math.cos(direction), p[1] + h * math.sin(direction))
        try:
            _, _, e0 = self.sample(p, frame)
            _, _, e1 = self.sample(probe, frame)
        except OutOfBoundsError:
            log.debug("slope probe outside extent at %s; assuming flat", probe)
            return 0.0
        return (e1 - e0) / h


@dataclass
class ScenarioConfig:
    """One fire scenario: where/when it starts and the weather around it."""

    ignition: Point  # (lon, lat)
    ignition_time: datetime
    wind: WindSample | str  # inline sample or path to a wind-field file
    humidity: float
    temperature: float
    horizon: int = 60
    ring_interval: int = 15
    note: str = ""

    def __post_init__(self):
        if self.ring_interval <= 0 or self.horizon <= 0 or self.horizon % self.ring_interval:
            raise ValueError("horizon must be a positive multiple of ring_interval")
        if not 0 <= self.humidity <= 100:
            raise ValueError("humidity must be within [0, 100] percent")
        if self.ignition_time.tzinfo is None:
            self.ignition_time = self.ignition_time.replace(tzinfo=timezone.utc)

    @property
    def ring_minutes(self) -> list[int]:
        return list(range(0, self.horizon + 1, self.ring_interval))

    def moisture_damp(self) -> float:
        return moisture_damp(self.humidity)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        wind = data["wind"]
        if isinstance(wind, dict):
            if "file" in wind:
                wind = str(wind["file"])
            else:
                wind = WindSample(
                    speed=float(wind["speed"]),
                    direction_to=math.radians(float(wind["direction_to_deg"])),
                )
        ts = data["ignition_time"]
        if isinstance(ts, str):
            ts = datetime.fromisoformat(ts.replace("Z", "+00:00"))
        return cls(
            ignition=(float(data["ignition"][0]), float(data["ignition"][1])),
            ignition_time=ts,
            wind=wind,
            humidity=float(data["humidity"]),
            temperature=float(data["temperature"]),
            horizon=int(data.get("horizon", 60)),
            ring_interval=int(data.get("ring_interval", 15)),
            note=str(data.get("note", "")),
        )

    def to_dict(self) -> dict:
        if isinstance(self.wind, WindSample):
            wind = {
                "speed": self.wind.speed,
                "direction_to_deg": math.degrees(self.wind.direction_to),
            }
        else:
            wind = {"file": self.wind}
        return {
            "ignition": [self.ignition[0], self.ignition[1]],
            "ignition_time": self.ignition_time.isoformat().replace("+00:00", "Z"),
            "wind": wind,
            "humidity": self.humidity,
            "temperature": self.temperature,
            "horizon": self.horizon,
            "ring_interval": self.ring_interval,
            "note": self.note,
        }

    @classmethod
    def from_json_file(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
