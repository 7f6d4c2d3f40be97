"""GeoJSON wire format: fire rings, escape routes, structural validation.

Everything emitted follows RFC 7946: [lon, lat] positions in WGS84, closed
rings with CCW exteriors, MultiPolygon fires (outermost ring first) and
LineString routes.
"""

from __future__ import annotations

import math

from .geometry import LocalFrame, Point, signed_area
from .routing import RoadGraph, ScoredRoute
from .spread import IsochroneSet


class GeoJSONError(ValueError):
    """Document violates RFC 7946 structure."""


def _closed_lonlat_ring(vertices, frame: LocalFrame) -> list[list[float]]:
    ring = [list(frame.to_lonlat(x, y)) for x, y in vertices]
    ring.append(list(ring[0]))
    return ring


def rings_geometry(rings: IsochroneSet, frame: LocalFrame) -> dict:
    """MultiPolygon of the ring set, outermost (latest horizon) first."""
    ordered = sorted(rings.rings, key=lambda r: -r.minutes)
    return {
        "type": "MultiPolygon",
        "coordinates": [[_closed_lonlat_ring(r.vertices, frame)] for r in ordered],
    }


def fire_feature(
    fire_id: str, ignition_time: str, note: str, rings: IsochroneSet, frame: LocalFrame
) -> dict:
    return {
        "type": "Feature",
        "geometry": rings_geometry(rings, frame),
        "properties": {
            "id": fire_id,
            "ignition_time": ignition_time,
            "ring_minutes": sorted(r.minutes for r in rings.rings),
            "note": note,
        },
    }


def feature_collection(features: list[dict]) -> dict:
    return {"type": "FeatureCollection", "features": features}


def route_feature(
    route: ScoredRoute,
    rejected: list[ScoredRoute],
    graph: RoadGraph,
    frame: LocalFrame,
    mode_name: str,
) -> dict:
    coords = [list(frame.to_lonlat(*graph.nodes[nid])) for nid in route.path]
    if len(coords) == 1:
        coords = coords * 2  # degenerate already-safe start; keep a valid LineString
    rejected_props = []
    for r in rejected:
        rej = r.rejection
        rejected_props.append(
            {
                "point": list(frame.to_lonlat(*rej.point)),
                "slot_minutes": rej.slot_minutes,
                "user_time_s": round(rej.user_time_s, 3),
            }
        )
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {
            "score": route.score,
            "angle_deg": math.degrees(route.angle),
            "time_to_safety_s": route.time_to_safety,
            "mode": mode_name,
            "rejected_candidates": rejected_props,
        },
    }


# --- structural validator -------------------------------------------------

_GEOMETRY_TYPES = {
    "Point",
    "MultiPoint",
    "LineString",
    "MultiLineString",
    "Polygon",
    "MultiPolygon",
    "GeometryCollection",
}


def _check_position(pos, where: str) -> None:
    if not isinstance(pos, (list, tuple)) or not 2 <= len(pos) <= 3:
        raise GeoJSONError(f"{where}: position must be [lon, lat] or [lon, lat, alt]")
    for v in pos:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise GeoJSONError(f"{where}: non-finite coordinate {v!r}")
    lon, lat = pos[0], pos[1]
    if not -180.0 <= lon <= 180.0 or not -90.0 <= lat <= 90.0:
        raise GeoJSONError(f"{where}: coordinates ({lon}, {lat}) out of WGS84 range")


def _check_linear_ring(ring, where: str, want_ccw: bool) -> None:
    if not isinstance(ring, list) or len(ring) < 4:
        raise GeoJSONError(f"{where}: linear ring needs at least 4 positions")
    for pos in ring:
        _check_position(pos, where)
    if ring[0] != ring[-1]:
        raise GeoJSONError(f"{where}: linear ring is not closed")
    area = signed_area([tuple(p[:2]) for p in ring[:-1]])
    if want_ccw and area <= 0:
        raise GeoJSONError(f"{where}: exterior ring must be counter-clockwise")
    if not want_ccw and area >= 0:
        raise GeoJSONError(f"{where}: interior ring must be clockwise")


def _check_polygon(coords, where: str) -> None:
    if not isinstance(coords, list) or not coords:
        raise GeoJSONError(f"{where}: polygon needs at least one ring")
    for i, ring in enumerate(coords):
        _check_linear_ring(ring, f"{where} ring {i}", want_ccw=(i == 0))


def _check_geometry(geom, where: str) -> None:
    if not isinstance(geom, dict):
        raise GeoJSONError(f"{where}: geometry must be an object")
    gtype = geom.get("type")
    if gtype not in _GEOMETRY_TYPES:
        raise GeoJSONError(f"{where}: unknown geometry type {gtype!r}")
    if gtype == "GeometryCollection":
        for i, g in enumerate(geom.get("geometries", [])):
            _check_geometry(g, f"{where} geometry {i}")
        return
    coords = geom.get("coordinates")
    if coords is None:
        raise GeoJSONError(f"{where}: geometry missing coordinates")
    if gtype == "Point":
        _check_position(coords, where)
    elif gtype == "MultiPoint":
        for pos in coords:
            _check_position(pos, where)
    elif gtype == "LineString":
        if not isinstance(coords, list) or len(coords) < 2:
            raise GeoJSONError(f"{where}: LineString needs at least 2 positions")
        for pos in coords:
            _check_position(pos, where)
    elif gtype == "MultiLineString":
        for line in coords:
            if len(line) < 2:
                raise GeoJSONError(f"{where}: LineString needs at least 2 positions")
            for pos in line:
                _check_position(pos, where)
    elif gtype == "Polygon":
        _check_polygon(coords, where)
    elif gtype == "MultiPolygon":
        if not isinstance(coords, list):
            raise GeoJSONError(f"{where}: MultiPolygon coordinates must be a list")
        for i, poly in enumerate(coords):
            _check_polygon(poly, f"{where} polygon {i}")


def validate_geojson(doc: dict) -> None:
    """Raise GeoJSONError unless ``doc`` is structurally valid RFC 7946."""
    if not isinstance(doc, dict):
        raise GeoJSONError("document must be an object")
    dtype = doc.get("type")
    if dtype == "FeatureCollection":
        feats = doc.get("features")
        if not isinstance(feats, list):
            raise GeoJSONError("FeatureCollection missing features array")
        for i, f in enumerate(feats):
            validate_geojson(f)
    elif dtype == "Feature":
        if "properties" not in doc:
            raise GeoJSONError("Feature missing properties member")
        geom = doc.get("geometry")
        if geom is not None:
            _check_geometry(geom, "feature geometry")
    elif dtype in _GEOMETRY_TYPES:
        _check_geometry(doc, "geometry")
    else:
        raise GeoJSONError(f"unknown GeoJSON type {dtype!r}")
