"""CSV / GeoJSON point readers, CSV writer and canonical JSON reports."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, List, Optional

from . import __version__
from .dataset import Record
from .errors import DataError, ParseError
from .geometry import Point

SCHEMA_VERSION = 1
CSV_HEADER = ("id", "x", "y")


def _scalar(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        v = float(text)
    except ValueError:
        return text
    return v if math.isfinite(v) else text


def _coord(text: str, line: int, path, name: str) -> float:
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"{name} coordinate {text!r} is not a number", line, path) from None
    if not math.isfinite(v):
        raise ParseError(f"{name} coordinate {text!r} is not finite", line, path)
    return v


def read_points_csv(path) -> List[Record]:
    """Read ``id,x,y[,attr...]`` rows; extra columns become attributes.

    Empty attribute cells are left out of the record's attribute map.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("missing header", 1, path) from None
        header = [h.strip() for h in header]
        if tuple(header[:3]) != CSV_HEADER:
            raise ParseError(f"header must start with id,x,y, got {','.join(header)}", 1, path)
        attr_names = header[3:]
        records, seen = [], {}
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line, path)
            rid = row[0].strip()
            if not rid:
                raise ParseError("empty id", line, path)
            if rid in seen:
                raise ParseError(f"duplicate id {rid!r} (first on line {seen[rid]})", line, path)
            seen[rid] = line
            x = _coord(row[1], line, path, "x")
            y = _coord(row[2], line, path, "y")
            attrs = {k: _scalar(v) for k, v in zip(attr_names, row[3:]) if v != ""}
            records.append(Record(rid, Point(x, y), attrs))
    return records


def write_points_csv(records: Iterable[Record], path) -> None:
    """Write records with shortest round-trip coordinates; atomic."""
    records = list(records)
    names = sorted({k for r in records for k in r.attributes})
    rows = [list(CSV_HEADER) + names]
    for r in records:
        rows.append([r.id, repr(r.location.x), repr(r.location.y)]
                    + ["" if r.attributes.get(k) is None else str(r.attributes[k]) for k in names])

    def dump(fh):
        csv.writer(fh, lineterminator="\n").writerows(rows)

    atomic_write(path, dump, newline="")


def read_geojson(path) -> List[Record]:
    """Point features of a FeatureCollection; any other geometry is rejected."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    feats = doc.get("features") if isinstance(doc, dict) else None
    if doc.get("type") != "FeatureCollection" or not isinstance(feats, list):
        raise ParseError("expected a GeoJSON FeatureCollection", None, path)
    out, seen = [], set()
    for i, f in enumerate(feats):
        geom = f.get("geometry") or {}
        if geom.get("type") != "Point":
            raise ParseError(f"feature {i}: only Point geometries are supported, "
                             f"got {geom.get('type')}", None, path)
        props = dict(f.get("properties") or {})
        rid = f.get("id", props.pop("id", None))
        rid = str(i) if rid is None else str(rid)
        if rid in seen:
            raise ParseError(f"feature {i}: duplicate id {rid!r}", None, path)
        seen.add(rid)
        x, y = geom["coordinates"][:2]
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in (x, y)):
            raise ParseError(f"feature {i}: non-finite coordinate", None, path)
        out.append(Record(rid, Point(float(x), float(y)), props))
    return out


def read_points(path) -> List[Record]:
    suffix = Path(path).suffix.lower()
    if suffix in (".geojson", ".json"):
        return read_geojson(path)
    return read_points_csv(path)


def looks_geographic(records: Iterable[Record]) -> bool:
    """True when every coordinate fits lon/lat ranges (likely not meters)."""
    records = list(records)
    return bool(records) and all(
        abs(r.location.x) <= 180 and abs(r.location.y) <= 90 for r in records)


# -- canonical JSON --------------------------------------------------------

def canonical_json(obj: Any) -> str:
    """Sorted keys, compact separators, shortest round-trip floats, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write(path, writer, newline=None) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(obj: Any, path) -> None:
    text = canonical_json(obj)
    atomic_write(path, lambda fh: fh.write(text), newline="")


def read_json(path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def records_digest(records: Iterable[Record]) -> str:
    """Content hash of records, independent of file formatting."""
    rows = [[r.id, r.location.x, r.location.y, dict(r.attributes)] for r in records]
    return "sha256:" + hashlib.sha256(canonical_json(rows).encode("utf-8")).hexdigest()


@dataclass
class ReportEnvelope:
    """Self-describing wrapper around a metric report and/or attack outcome."""

    kind: str
    config: dict
    digests: dict = field(default_factory=dict)
    metrics: Optional[dict] = None
    attack: Optional[dict] = None
    timing: Optional[dict] = None
    tool_version: str = __version__

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "tool": "geokanon",
            "tool_version": self.tool_version,
            "kind": self.kind,
            "config": self.config,
            "digests": self.digests,
        }
        if self.metrics is not None:
            d["metrics"] = self.metrics
        if self.attack is not None:
            d["attack"] = self.attack
        if self.timing is not None:
            d["timing"] = self.timing
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ReportEnvelope":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise DataError(f"unsupported report schema_version {d.get('schema_version')!r}")
        return cls(d["kind"], d["config"], d.get("digests", {}), d.get("metrics"),
                   d.get("attack"), d.get("timing"), d.get("tool_version", "?"))


def write_report_json(envelope: ReportEnvelope, path) -> None:
    write_json(envelope.to_dict(), path)


def read_report_json(path) -> ReportEnvelope:
    return ReportEnvelope.from_dict(read_json(path))
