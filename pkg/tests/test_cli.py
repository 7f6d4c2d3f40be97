import json

import pytest
from fastapi.testclient import TestClient

from firescape.cli import main
from firescape.geometry import LocalFrame
from firescape.service import ServiceConfig, create_app
from firescape.terrain import write_ascii_grid

from conftest import grid_center_lonlat, road_geojson, uniform_raster


@pytest.fixture
def fixture_dir(tmp_path):
    """A small damp-grass world with one 800 m street to safety."""
    n = 24
    fuel = uniform_raster(n, n, 1)
    elev = uniform_raster(n, n, 5.0)
    write_ascii_grid(tmp_path / "fuel.asc", fuel)
    write_ascii_grid(tmp_path / "elevation.asc", elev)
    ignition = grid_center_lonlat(fuel)
    frame = LocalFrame(*ignition)
    # humidity 95 -> damp 0.24 -> 60-min radius ~34 m; the street runs east
    scenario = {
        "ignition": list(ignition),
        "ignition_time": "2021-04-01T12:00:00Z",
        "wind": {"speed": 0.0, "direction_to_deg": 0.0},
        "humidity": 95.0,
        "temperature": 30.0,
        "horizon": 60,
        "ring_interval": 15,
        "note": "cli fixture",
    }
    (tmp_path / "scenario.json").write_text(json.dumps(scenario))
    roads = road_geojson(frame, [[(300.0, 0.0), (1100.0, 0.0), (1900.0, 0.0)]])
    (tmp_path / "roads.geojson").write_text(json.dumps(roads))
    start = frame.to_lonlat(300.0, 0.0)
    return {"tmp": tmp_path, "frame": frame, "start": start, "scenario": scenario}


def _run_args(fx, out="out", mode="walking", with_route=True):
    tmp = fx["tmp"]
    args = [
        "run",
        str(tmp / "scenario.json"),
        "--fuel", str(tmp / "fuel.asc"),
        "--elevation", str(tmp / "elevation.asc"),
        "--out", str(tmp / out),
    ]
    if with_route:
        args += [
            "--graph", str(tmp / "roads.geojson"),
            "--start", f"{fx['start'][0]},{fx['start'][1]}",
            "--mode", mode,
        ]
    return args


def test_run_walking_800m_reports_640s(fixture_dir, capsys):
    rc = main(_run_args(fixture_dir))
    assert rc == 0
    report = json.loads((fixture_dir["tmp"] / "out" / "report.json").read_text())
    (route,) = report["routes"]
    assert route["distance_m"] == pytest.approx(800.0, abs=0.01)
    assert route["time_to_safety_s"] == pytest.approx(640.0, abs=1.0)
    out = capsys.readouterr().out
    assert "ring" in out and "route" in out


def test_run_driving_same_street(fixture_dir):
    rc = main(_run_args(fixture_dir, out="out2", mode="driving"))
    assert rc == 0
    report = json.loads((fixture_dir["tmp"] / "out2" / "report.json").read_text())
    (route,) = report["routes"]
    assert route["time_to_safety_s"] == pytest.approx(800.0 / (50_000.0 / 3600.0), abs=0.1)


def test_run_missing_terrain_exit_1(fixture_dir, capsys):
    args = _run_args(fixture_dir, with_route=False)
    args[args.index("--fuel") + 1] = str(fixture_dir["tmp"] / "nope.asc")
    with pytest.raises(SystemExit) as err:
        main(args)
    assert err.value.code == 1
    assert "error" in capsys.readouterr().err


def test_run_output_files_and_schema(fixture_dir):
    main(_run_args(fixture_dir, out="out3"))
    out = fixture_dir["tmp"] / "out3"
    assert (out / "rings.geojson").exists()
    assert (out / "route.geojson").exists()
    report = json.loads((out / "report.json").read_text())
    assert set(report) == {"scenario", "rings", "routes", "checks"}
    assert [set(r) for r in report["rings"]] == [{"minutes", "area_ha"}] * 5
    assert set(report["routes"][0]) == {
        "start", "mode", "distance_m", "time_to_safety_s", "score",
    }
    assert set(report["checks"]) == {"ring_schedule", "ring_nesting"}
    assert all(report["checks"].values())
    for entry in report["rings"]:
        # report values are rounded to 4 decimals
        assert entry["area_ha"] == pytest.approx(
            _ring_area_from_geojson(out / "rings.geojson", entry["minutes"]), abs=6e-5
        )


def _ring_area_from_geojson(path, minutes):
    from firescape.geometry import signed_area

    doc = json.loads(path.read_text())
    feat = doc["features"][0]
    order = sorted(feat["properties"]["ring_minutes"], reverse=True)
    poly = feat["geometry"]["coordinates"][order.index(minutes)][0]
    frame = LocalFrame(*poly[0])
    verts = [frame.to_local(x, y) for x, y in poly[:-1]]
    return abs(signed_area(verts)) / 10_000.0


def test_cli_rings_match_service_rings_exactly(fixture_dir):
    """Shared engine: the ring geometry written by the CLI equals the ring
    geometry served over HTTP for the same scenario."""
    main(_run_args(fixture_dir, out="out4", with_route=False))
    cli_doc = json.loads((fixture_dir["tmp"] / "out4" / "rings.geojson").read_text())
    cli_geom = cli_doc["features"][0]["geometry"]

    tmp = fixture_dir["tmp"]
    config = ServiceConfig(
        terrain_fuel=str(tmp / "fuel.asc"),
        terrain_elev=str(tmp / "elevation.asc"),
        road_graph=str(tmp / "roads.geojson"),
        journal_path=str(tmp / "svc.journal"),
    )
    client = TestClient(create_app(config))
    fire = client.post("/fires", json=fixture_dir["scenario"]).json()
    client.post(f"/fires/{fire['id']}/ignite")
    served = client.get("/fires").json()["features"][0]["geometry"]
    assert json.dumps(cli_geom, sort_keys=True) == json.dumps(served, sort_keys=True)


def test_check_passes_on_homogeneous_fixture(fixture_dir, capsys):
    tmp = fixture_dir["tmp"]
    rc = main(
        [
            "check",
            str(tmp / "scenario.json"),
            "--fuel", str(tmp / "fuel.asc"),
            "--elevation", str(tmp / "elevation.asc"),
            "--graph", str(tmp / "roads.geojson"),
            "--start", f"{fixture_dir['start'][0]},{fixture_dir['start'][1]}",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS ring_nesting" in out
    assert "PASS event_monotonicity" in out
    assert "PASS route_alpha_limits" in out
    assert "PASS conflict_soundness" in out


def test_check_detects_corrupted_nesting(fixture_dir, capsys):
    main(_run_args(fixture_dir, out="out5", with_route=False))
    path = fixture_dir["tmp"] / "out5" / "rings.geojson"
    doc = json.loads(path.read_text())
    coords = doc["features"][0]["geometry"]["coordinates"]
    coords[1], coords[2] = coords[2], coords[1]  # ring 30 now outside ring 45
    corrupted = fixture_dir["tmp"] / "corrupted.geojson"
    corrupted.write_text(json.dumps(doc))
    rc = main(["check", "--rings", str(corrupted)])
    assert rc == 1
    assert "FAIL ring_nesting" in capsys.readouterr().out


def test_check_accepts_valid_rings_file(fixture_dir, capsys):
    main(_run_args(fixture_dir, out="out6", with_route=False))
    rc = main(["check", "--rings", str(fixture_dir["tmp"] / "out6" / "rings.geojson")])
    assert rc == 0
    assert "PASS ring_nesting" in capsys.readouterr().out
