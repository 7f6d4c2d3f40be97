import json
import math

import pytest

from firescape.spread import simulate
from firescape.terrain import WindSample
from firescape.wind import ConstantWind, FileWind, provider_for

from conftest import make_scenario, make_terrain


def _wind_file(tmp_path, speeds, directions, lon0=33.30, lat0=35.10, d=0.01):
    path = tmp_path / "wind.json"
    path.write_text(
        json.dumps(
            {
                "lon0": lon0,
                "lat0": lat0,
                "dlon": d,
                "dlat": d,
                "speed": speeds,
                "direction_to_deg": directions,
            }
        )
    )
    return path


def test_constant_provider_ignores_query():
    sample = WindSample(2.0, math.radians(90.0))
    provider = ConstantWind(sample)
    assert provider(0.0, 0.0, 0.0) == sample
    assert provider(100.0, -45.0, 99999.0) == sample


def test_file_provider_nearest_neighbor(tmp_path):
    path = _wind_file(
        tmp_path,
        speeds=[[1.0, 2.0], [3.0, 4.0]],
        directions=[[0.0, 90.0], [180.0, 270.0]],
    )
    wind = FileWind(path)
    assert wind(33.30, 35.10, 0.0).speed == 1.0
    assert wind(33.31, 35.10, 0.0).speed == 2.0
    assert wind(33.30, 35.11, 0.0).speed == 3.0
    # nearest cell wins; beyond the grid clamps to the edge
    assert wind(33.304, 35.10, 0.0).speed == 1.0
    assert wind(33.306, 35.10, 0.0).speed == 2.0
    assert wind(34.0, 36.0, 0.0).speed == 4.0
    assert wind(33.31, 35.11, 0.0).direction_to == pytest.approx(math.radians(270.0))


def test_file_provider_rejects_mismatched_shapes(tmp_path):
    path = _wind_file(tmp_path, speeds=[[1.0, 2.0]], directions=[[0.0]])
    with pytest.raises(ValueError):
        FileWind(path)


def test_provider_for_dispatches(tmp_path):
    assert isinstance(provider_for(WindSample(1.0, 0.0)), ConstantWind)
    path = _wind_file(tmp_path, [[1.0]], [[0.0]])
    assert isinstance(provider_for(str(path)), FileWind)
    # relative paths resolve against the given base directory
    assert isinstance(provider_for("wind.json", base_dir=tmp_path), FileWind)


def test_scenario_with_wind_file_drives_simulation(tmp_path):
    grid = make_terrain()
    # one-cell field: strong wind toward the east everywhere
    path = _wind_file(tmp_path, [[4.0]], [[90.0]])
    scenario = make_scenario(grid)
    scenario.wind = str(path)
    rings = simulate(scenario, grid)
    final = rings.ring_at(60)
    east = max(v[0] for v in final.vertices)
    west = max(-v[0] for v in final.vertices)
    assert east > west
