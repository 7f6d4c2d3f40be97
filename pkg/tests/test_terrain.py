import math
import random

import numpy as np
import pytest

from firescape.geometry import LocalFrame
from firescape.terrain import (
    NON_BURNABLE,
    FuelCatalog,
    FuelParams,
    GridParseError,
    GridStructureError,
    OutOfBoundsError,
    ScenarioConfig,
    TerrainGrid,
    WindSample,
    load_ascii_grid,
    moisture_damp,
    write_ascii_grid,
)

from conftest import XLL, make_raster, make_terrain, uniform_raster


def write_grid_text(tmp_path, text, name="grid.asc"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_smallest_valid_grid(tmp_path):
    path = write_grid_text(
        tmp_path,
        "ncols 2\nnrows 2\nxllcorner 33.0\nyllcorner 35.0\ncellsize 30\n"
        "NODATA_value -9999\n1 1\n1 1\n",
    )
    raster = load_ascii_grid(path)
    assert (raster.ncols, raster.nrows) == (2, 2)
    assert raster.cellsize == 30.0
    grid = TerrainGrid(raster, uniform_raster(2, 2, 0.0, xll=33.0, yll=35.0), FuelCatalog.default())
    assert (grid.fuel == 1).all()


def test_nodata_fuel_becomes_non_burnable(tmp_path):
    path = write_grid_text(
        tmp_path,
        "ncols 2\nnrows 2\nxllcorner 33.0\nyllcorner 35.0\ncellsize 30\n"
        "NODATA_value -9999\n1 -9999\n1 1\n",
    )
    raster = load_ascii_grid(path)
    grid = TerrainGrid(raster, uniform_raster(2, 2, 0.0, xll=33.0, yll=35.0), FuelCatalog.default())
    # NODATA was in the north row, which is stored as the last row
    assert grid.fuel[1, 1] == NON_BURNABLE
    assert grid.fuel[0, 0] == 1


def test_nodata_elevation_interpolated_from_neighbor():
    fuel = uniform_raster(2, 2, 1)
    elev = make_raster([[100.0, -9999.0], [100.0, 100.0]])
    grid = TerrainGrid(fuel, elev, FuelCatalog.default())
    assert grid.elevation[0, 1] == 100.0


def test_malformed_header_names_key(tmp_path):
    path = write_grid_text(
        tmp_path,
        "ncols 2\nnrows abc\nxllcorner 0\nyllcorner 0\ncellsize 30\nNODATA_value -9999\n1 1\n1 1\n",
    )
    with pytest.raises(GridParseError, match="nrows"):
        load_ascii_grid(path)


def test_missing_header_key_named(tmp_path):
    path = write_grid_text(
        tmp_path, "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n1 1\n1 1\n"
    )
    with pytest.raises(GridParseError, match="cellsize"):
        load_ascii_grid(path)


def test_row_count_mismatch_is_structural_error(tmp_path):
    path = write_grid_text(
        tmp_path,
        "ncols 2\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 30\nNODATA_value -9999\n1 1\n1 1\n",
    )
    with pytest.raises(GridStructureError):
        load_ascii_grid(path)


def test_round_trip_write_load(tmp_path):
    values = np.arange(12, dtype=float).reshape(3, 4) * 1.5 + 0.1
    raster = make_raster(values)
    path = tmp_path / "rt.asc"
    write_ascii_grid(path, raster)
    back = load_ascii_grid(path)
    assert (back.ncols, back.nrows) == (raster.ncols, raster.nrows)
    assert back.cellsize == raster.cellsize
    assert back.xllcorner == raster.xllcorner
    assert np.array_equal(back.values, raster.values)


def _aligned_frame(grid: TerrainGrid) -> LocalFrame:
    # Frame anchored at the grid corner makes local meters == grid meters.
    return LocalFrame(grid.origin[0], grid.origin[1])


def test_sample_cell_center():
    fuel = make_raster([[1, 2], [3, 4]])
    grid = TerrainGrid(fuel, uniform_raster(2, 2, 0.0), FuelCatalog.default())
    frame = _aligned_frame(grid)
    class_id, params, elev = grid.sample((15.0, 15.0), frame)
    assert class_id == 1 and params.name == "grass" and elev == 0.0
    assert grid.sample((45.0, 45.0), frame)[0] == 4


def test_sample_edge_tie_break_lower_column():
    fuel = make_raster([[1, 2], [3, 4]])
    grid = TerrainGrid(fuel, uniform_raster(2, 2, 0.0), FuelCatalog.default())
    frame = _aligned_frame(grid)
    # Exactly on the shared vertical edge between columns 0 and 1
    assert grid.sample((30.0, 15.0), frame)[0] == 1
    # Exactly on the shared horizontal edge between rows 0 and 1
    assert grid.sample((15.0, 30.0), frame)[0] == 1


def test_sample_outside_extent_errors():
    grid = make_terrain(2, 2)
    frame = _aligned_frame(grid)
    with pytest.raises(OutOfBoundsError):
        grid.sample((-0.01, 15.0), frame)
    with pytest.raises(OutOfBoundsError):
        grid.sample((15.0, 60.01), frame)


def test_sample_total_over_interior_matches_brute_force():
    rng = random.Random(20210401)
    values = [[rng.randint(1, 4) for _ in range(7)] for _ in range(5)]
    fuel = make_raster(values)
    grid = TerrainGrid(fuel, uniform_raster(5, 7, 0.0), FuelCatalog.default())
    frame = _aligned_frame(grid)
    for _ in range(10_000):
        x = rng.uniform(1e-6, grid.width_m - 1e-6)
        y = rng.uniform(1e-6, grid.height_m - 1e-6)
        class_id, _, _ = grid.sample((x, y), frame)
        row = min(int(y // 30.0), 4)
        col = min(int(x // 30.0), 6)
        assert class_id == values[row][col]


def test_slope_flat_grid_zero():
    grid = make_terrain(4, 4, elevation=50.0)
    frame = _aligned_frame(grid)
    for theta in (0.0, 1.0, 2.5, 4.0):
        assert grid.slope_toward((60.0, 60.0), theta, frame) == 0.0


def _ramp_grid():
    # elevation rises 3 m per 30 m column, eastward
    elev = [[3.0 * c for c in range(6)] for _ in range(4)]
    fuel = uniform_raster(4, 6, 1)
    return TerrainGrid(fuel, make_raster(elev), FuelCatalog.default())


def test_slope_ramp_up_and_down():
    grid = _ramp_grid()
    frame = _aligned_frame(grid)
    p = (45.0, 60.0)  # center of column 1
    assert grid.slope_toward(p, 0.0, frame) == pytest.approx(0.1)  # east, uphill
    assert grid.slope_toward(p, math.pi, frame) == pytest.approx(-0.1)  # west, downhill


def test_slope_antisymmetry_on_ramp():
    grid = _ramp_grid()
    frame = _aligned_frame(grid)
    h = grid.cell_size
    for theta in (0.0, math.pi / 2):
        p = (45.0, 45.0)
        q = (p[0] + h * math.cos(theta), p[1] + h * math.sin(theta))
        fwd = grid.slope_toward(p, theta, frame)
        back = grid.slope_toward(q, theta + math.pi, frame)
        assert abs(fwd + back) < 1e-9


def test_slope_probe_outside_extent_is_flat():
    grid = _ramp_grid()
    frame = _aligned_frame(grid)
    assert grid.slope_toward((170.0, 60.0), 0.0, frame) == 0.0  # probe exits east


def test_terrain_rejects_mismatched_rasters():
    fuel = uniform_raster(2, 2, 1)
    with pytest.raises(GridStructureError):
        TerrainGrid(fuel, uniform_raster(3, 2, 0.0), FuelCatalog.default())
    with pytest.raises(GridStructureError):
        TerrainGrid(fuel, uniform_raster(2, 2, 0.0, xll=XLL + 1), FuelCatalog.default())


def test_terrain_rejects_unknown_fuel_class():
    fuel = make_raster([[1, 99], [1, 1]])
    with pytest.raises(ValueError, match="99"):
        TerrainGrid(fuel, uniform_raster(2, 2, 0.0), FuelCatalog.default())


def test_moisture_damp_mapping():
    assert moisture_damp(30.0) == pytest.approx(0.76)
    assert moisture_damp(0.0) == 1.0
    assert moisture_damp(100.0) == pytest.approx(0.2)


def test_fuel_catalog_csv_round_trip(tmp_path):
    path = tmp_path / "catalog.csv"
    path.write_text(
        "id,name,r0,wind_coeff,slope_coeff,moisture_class\n"
        "0,non-burnable,0,0,0,none\n"
        "1,grass,2.0,0.7,1.8,fine\n"
    )
    catalog = FuelCatalog.from_csv(path)
    assert catalog[1].r0 == 2.0
    assert catalog[1].moisture_class == "fine"
    assert catalog[NON_BURNABLE].r0 == 0.0


def test_fuel_params_validation():
    with pytest.raises(ValueError):
        FuelParams(1, "bad", -1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        FuelParams(NON_BURNABLE, "water", 1.0, 0.0, 0.0)


def test_wind_sample_normalization_and_vector():
    w = WindSample(speed=2.0, direction_to=2.5 * math.pi)
    assert w.direction_to == pytest.approx(0.5 * math.pi)
    north = WindSample(speed=3.0, direction_to=0.0).vector()
    assert north == pytest.approx((0.0, 3.0))
    se = WindSample(speed=2.0, direction_to=math.radians(135.0)).vector()
    assert se[0] == pytest.approx(2.0 * math.sqrt(0.5))
    assert se[1] == pytest.approx(-2.0 * math.sqrt(0.5))


def test_scenario_config_round_trip():
    data = {
        "ignition": [33.35, 35.15],
        "ignition_time": "2021-04-01T12:00:00Z",
        "wind": {"speed": 1.6666666666666667, "direction_to_deg": 135.0},
        "humidity": 30.0,
        "temperature": 30.0,
        "horizon": 60,
        "ring_interval": 15,
        "note": "pilot",
    }
    cfg = ScenarioConfig.from_dict(data)
    assert cfg.moisture_damp() == pytest.approx(0.76)
    assert cfg.ring_minutes == [0, 15, 30, 45, 60]
    assert cfg.to_dict() == data


def test_scenario_config_rejects_bad_horizon():
    with pytest.raises(ValueError):
        ScenarioConfig.from_dict(
            {
                "ignition": [0, 0],
                "ignition_time": "2021-01-01T00:00:00Z",
                "wind": {"speed": 0, "direction_to_deg": 0},
                "humidity": 30,
                "temperature": 20,
                "horizon": 50,
            }
        )
