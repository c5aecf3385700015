"""GeoJSON, adjacency CSV and report JSON I/O.

Coordinates are written with 12 significant digits.  A path of ``-`` means
stdin or stdout.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from typing import Any, Iterable, Sequence, TextIO

from shapely.geometry import mapping, shape
from shapely.geometry.base import BaseGeometry
from shapely.validation import explain_validity

from .model import Unit


class DataError(ValueError):
    """Input data that cannot be used: malformed, non-polygonal or invalid."""


def _read_text(source: str | TextIO) -> str:
    if hasattr(source, "read"):
        return source.read()
    if source == "-":
        return sys.stdin.read()
    with open(source, encoding="utf-8") as fh:
        return fh.read()


def _write_text(dest: str | TextIO, text: str) -> None:
    if hasattr(dest, "write"):
        dest.write(text)
    elif dest == "-":
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _round(obj: Any) -> Any:
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, (list, tuple)):
        return [_round(x) for x in obj]
    return obj


def parse_units(doc: Any, id_field: str | None = None) -> list[Unit]:
    """Units from a parsed GeoJSON FeatureCollection.

    The id comes from ``properties[id_field]`` when given, else the feature's
    ``id`` member, else its index.
    """
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise DataError("input is not a GeoJSON FeatureCollection")
    feats = doc.get("features")
    if not isinstance(feats, list):
        raise DataError("FeatureCollection has no feature list")
    units = []
    for k, feat in enumerate(feats):
        if not isinstance(feat, dict):
            raise DataError(f"feature {k} is not an object")
        props = dict(feat.get("properties") or {})
        if id_field is not None and id_field in props:
            uid = props[id_field]
        else:
            uid = feat.get("id", k)
        geom = feat.get("geometry")
        kind = geom.get("type") if isinstance(geom, dict) else None
        if kind not in ("Polygon", "MultiPolygon"):
            raise DataError(f"feature {uid!r} has non-polygonal geometry {kind!r}")
        try:
            g = shape(geom)
        except Exception as exc:  # shapely raises several types on bad coordinates
            raise DataError(f"feature {uid!r} has malformed coordinates: {exc}") from exc
        if g.is_empty:
            raise DataError(f"feature {uid!r} has empty geometry")
        if not g.is_valid:
            raise DataError(f"feature {uid!r} is invalid: {explain_validity(g)}")
        units.append(Unit(uid, g, props))
    ids = [u.id for u in units]
    if len(set(map(repr, ids))) != len(ids):
        raise DataError("feature ids are not unique")
    return units


def read_units(source: str | TextIO, id_field: str | None = None) -> list[Unit]:
    try:
        doc = json.loads(_read_text(source))
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed JSON: {exc}") from exc
    return parse_units(doc, id_field)


def _geometry_json(g: BaseGeometry | None) -> Any:
    if g is None or g.is_empty:
        return None
    m = mapping(g)
    return {"type": m["type"], "coordinates": _round(m["coordinates"])}


def units_to_geojson(units: Iterable[Unit]) -> dict:
    feats = []
    for u in units:
        feats.append(
            {
                "type": "Feature",
                "id": u.id,
                "properties": dict(u.attributes),
                "geometry": _geometry_json(u.geometry),
            }
        )
    return {"type": "FeatureCollection", "features": feats}


def dumps_units(units: Iterable[Unit]) -> str:
    return json.dumps(units_to_geojson(units), separators=(",", ":")) + "\n"


def write_units(units: Iterable[Unit], dest: str | TextIO) -> None:
    _write_text(dest, dumps_units(units))


def dumps_adjacency(graph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["unit_a", "unit_b", "shared_length", "class"])
    for e in graph.edges:
        w.writerow([e.a, e.b, f"{e.length:.12g}", e.kind])
    return buf.getvalue()


def write_adjacency(graph, dest: str | TextIO) -> None:
    _write_text(dest, dumps_adjacency(graph))


def read_adjacency(source: str | TextIO) -> list[dict]:
    return list(csv.DictReader(io.StringIO(_read_text(source))))


def write_report(report: Any, dest: str | TextIO) -> None:
    d = report.to_dict() if hasattr(report, "to_dict") else report
    _write_text(dest, json.dumps(d, indent=2, sort_keys=True, default=str) + "\n")


def polygons_to_geojson(items: Sequence[tuple[Any, BaseGeometry]]) -> dict:
    return units_to_geojson(Unit(i, g) for i, g in items)
