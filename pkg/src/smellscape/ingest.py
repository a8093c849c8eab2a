"""Parsers for records, street networks, pollutant and venue tables.

Records are line-delimited: JSON Lines (one object per line with keys
``id, lat, lon, timestamp, tags, attributes, source``) or CSV with a header
``id,lat,lon,timestamp,tags[,source][,monochrome]`` where tags are
``;``-separated. Per-line problems are collected as rejects rather than
raised, so ``len(records) + len(rejects)`` always equals the number of input
lines (excluding a CSV header).
"""
from __future__ import annotations

import csv
import gzip
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable
from zoneinfo import ZoneInfo

from .errors import DegenerateGeometry, DuplicateSegmentId, InputError, MalformedRecord
from .geodesy import polyline_length
from .lexicon import candidate_ngrams

SOURCES = ("photo", "micropost")
POLLUTANTS = ("no2", "pm10", "pm25")
SNAPSHOT_FORMAT = "smellscape-dataset"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True, slots=True)
class GeoTaggedRecord:
    id: str
    lat: float
    lon: float
    timestamp: datetime
    tags: tuple = ()
    attributes: dict = field(default_factory=dict, compare=True, hash=False)
    source: str = "photo"

    @property
    def monochrome(self) -> bool:
        return bool(self.attributes.get("monochrome", False))


@dataclass(frozen=True, slots=True)
class StreetSegment:
    id: str
    polyline: tuple  # ((lat, lon), ...)
    length_m: float


@dataclass(frozen=True)
class Venue:
    lat: float
    lon: float
    kind: str


@dataclass
class PollutantTable:
    values: dict  # segment id -> (no2, pm10, pm25)

    def __len__(self):
        return len(self.values)

    def column(self, pollutant: str) -> dict:
        k = POLLUTANTS.index(pollutant)
        return {sid: v[k] for sid, v in self.values.items()}


@dataclass
class Parsed:
    """Accepted items plus per-line rejects."""

    items: list
    rejects: list = field(default_factory=list)

    @property
    def n_lines(self):
        return len(self.items) + len(self.rejects)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)


# -- helpers -----------------------------------------------------------------

def _lines(source) -> Iterable[str]:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        opener = gzip.open if str(source).endswith(".gz") else open
        with opener(source, "rt", encoding="utf-8", newline="") as fh:
            yield from (line.rstrip("\r\n") for line in fh)
    elif hasattr(source, "read"):
        for line in source:
            yield line.rstrip("\r\n")
    else:
        yield from source


def parse_timestamp(value) -> datetime:
    """RFC 3339 string or epoch seconds -> aware UTC datetime. Naive strings are UTC."""
    if isinstance(value, bool):
        raise ValueError("boolean timestamp")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError("non-finite timestamp")
        return datetime.fromtimestamp(value, tz=timezone.utc)
    s = str(value).strip()
    try:
        return datetime.fromtimestamp(float(s), tz=timezone.utc)
    except ValueError:
        pass
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def month_index(dt: datetime, tz: str | ZoneInfo = "UTC") -> int:
    """``year * 12 + (month - 1)`` of `dt` in the civil timezone `tz`."""
    zone = tz if isinstance(tz, ZoneInfo) else ZoneInfo(tz)
    local = dt.astimezone(zone)
    return local.year * 12 + local.month - 1


def _coord(value, name, lo, hi):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} not a number") from None
    if not math.isfinite(x):
        raise ValueError(f"{name} not finite")
    if not lo <= x <= hi:
        raise ValueError(f"{name} out of range")
    return x


def _make_record(obj: dict, text_ngrams: int) -> GeoTaggedRecord:
    rid = str(obj.get("id", "")).strip()
    if not rid:
        raise ValueError("missing id")
    lat = _coord(obj.get("lat"), "lat", -90.0, 90.0)
    lon = _coord(obj.get("lon"), "lon", -180.0, 180.0)
    if obj.get("timestamp") is None:
        raise ValueError("missing timestamp")
    try:
        ts = parse_timestamp(obj["timestamp"])
    except (ValueError, OverflowError, OSError):
        raise ValueError("timestamp not parseable") from None
    tags = obj.get("tags") or []
    if isinstance(tags, str):
        tags = [tags]
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ValueError("tags must be a list of strings")
    source = obj.get("source") or "photo"
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}")
    attrs = obj.get("attributes") or {}
    if not isinstance(attrs, dict):
        raise ValueError("attributes must be an object")
    if text_ngrams and obj.get("text"):
        tags = list(tags) + candidate_ngrams(str(obj["text"]), text_ngrams)
    return GeoTaggedRecord(rid, lat, lon, ts, tuple(tags), dict(attrs), source)


# -- records -------------------------------------------------------------------

def parse_records(stream, format: str = "jsonl", text_ngrams: int = 0) -> Parsed:
    """Parse line-delimited records.

    Parameters
    ----------
    stream : path, text stream or iterable of lines
    format : {"jsonl", "csv"}
    text_ngrams : int
        When positive, a record's free ``text`` field is split into word
        n-grams up to this length and appended to its tags.
    """
    if format == "jsonl":
        rows = _jsonl_rows(_lines(stream))
    elif format == "csv":
        rows = _csv_rows(_lines(stream))
    else:
        raise InputError(f"unknown record format {format!r}")
    out = Parsed([])
    for line_no, obj, err in rows:
        if err is None:
            try:
                out.items.append(_make_record(obj, text_ngrams))
                continue
            except ValueError as exc:
                err = str(exc)
        out.rejects.append(MalformedRecord(line_no, err))
    return out


def _jsonl_rows(lines):
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            yield line_no, None, "empty line"
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_no, None, f"invalid JSON: {exc.msg}"
            continue
        if not isinstance(obj, dict):
            yield line_no, None, "not an object"
        else:
            yield line_no, obj, None


def _csv_rows(lines):
    lines = iter(lines)
    header = next(lines, None)
    if header is None:
        return
    cols = [c.strip().lower() for c in next(csv.reader([header]))]
    for line_no, line in enumerate(lines, start=1):
        fields = next(csv.reader([line]), [])
        if len(fields) != len(cols):
            yield line_no, None, f"expected {len(cols)} fields, got {len(fields)}"
            continue
        row = dict(zip(cols, fields))
        obj = {k: row.get(k) for k in ("id", "lat", "lon", "timestamp", "source")}
        obj["tags"] = [t for t in (row.get("tags") or "").split(";") if t.strip()]
        if "monochrome" in row:
            obj["attributes"] = {"monochrome": row["monochrome"].strip().lower() in ("1", "true", "yes")}
        yield line_no, obj, None


def serialize_records(records) -> str:
    """JSON Lines text that :func:`parse_records` reads back to equal records."""
    return "".join(json.dumps(record_to_dict(r), sort_keys=True, ensure_ascii=False) + "\n"
                   for r in records)


def record_to_dict(r: GeoTaggedRecord) -> dict:
    return {"id": r.id, "lat": r.lat, "lon": r.lon,
            "timestamp": format_timestamp(r.timestamp), "tags": list(r.tags),
            "attributes": r.attributes, "source": r.source}


# -- street network --------------------------------------------------------------

def parse_street_network(source) -> list[StreetSegment]:
    """Read a GeoJSON FeatureCollection of LineString features.

    The segment id comes from the feature ``id`` or, failing that, the
    ``id`` property. Consecutive duplicate vertices are dropped.
    """
    doc = _load_json(source)
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise InputError("street network must be a GeoJSON FeatureCollection")
    segments, seen = [], set()
    for k, feat in enumerate(doc.get("features", [])):
        sid = feat.get("id")
        if sid is None:
            sid = (feat.get("properties") or {}).get("id")
        if sid is None or str(sid) == "":
            raise InputError(f"feature {k} has no id")
        sid = str(sid)
        if sid in seen:
            raise DuplicateSegmentId(sid)
        seen.add(sid)
        geom = feat.get("geometry") or {}
        coords = geom.get("coordinates")
        if geom.get("type") == "MultiLineString" and coords and len(coords) == 1:
            coords = coords[0]
        elif geom.get("type") != "LineString":
            raise DegenerateGeometry(sid, f"unsupported geometry {geom.get('type')!r}")
        pts = []
        for c in coords or []:
            try:
                lon = _coord(c[0], "lon", -180.0, 180.0)
                lat = _coord(c[1], "lat", -90.0, 90.0)
            except (ValueError, IndexError, TypeError) as exc:
                raise InputError(f"segment {sid!r}: {exc}") from None
            if not pts or pts[-1] != (lat, lon):
                pts.append((lat, lon))
        if len(pts) < 2:
            raise DegenerateGeometry(sid)
        segments.append(StreetSegment(sid, tuple(pts), polyline_length(pts)))
    return segments


def _load_json(source):
    if isinstance(source, dict):
        return source
    if hasattr(source, "read"):
        return json.load(source)
    with open(source, encoding="utf-8") as fh:
        return json.load(fh)


# -- tables ----------------------------------------------------------------------

def _table_rows(source, first_col):
    for line_no, line in enumerate(_lines(source), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if fields[0].lower() == first_col:
            continue
        yield line_no, fields


def parse_pollutants(source) -> Parsed:
    """CSV rows ``segment_id,no2,pm10,pm25``; ``Parsed.items`` holds one PollutantTable."""
    table, rejects = {}, []
    for line_no, fields in _table_rows(source, "segment_id"):
        if len(fields) != 4 or not fields[0]:
            rejects.append(MalformedRecord(line_no, "expected segment_id,no2,pm10,pm25"))
            continue
        try:
            vals = tuple(float(v) for v in fields[1:])
        except ValueError:
            rejects.append(MalformedRecord(line_no, "concentration not a number"))
            continue
        if not all(math.isfinite(v) for v in vals):
            rejects.append(MalformedRecord(line_no, "concentration not finite"))
        elif any(v < 0 for v in vals):
            rejects.append(MalformedRecord(line_no, "negative concentration"))
        elif fields[0] in table:
            rejects.append(MalformedRecord(line_no, f"duplicate segment id {fields[0]!r}"))
        else:
            table[fields[0]] = vals
    return Parsed([PollutantTable(table)], rejects)


def parse_venues(source) -> Parsed:
    """CSV rows ``lat,lon,kind``."""
    out = Parsed([])
    for line_no, fields in _table_rows(source, "lat"):
        if len(fields) != 3 or not fields[2]:
            out.rejects.append(MalformedRecord(line_no, "expected lat,lon,kind"))
            continue
        try:
            lat = _coord(fields[0], "lat", -90.0, 90.0)
            lon = _coord(fields[1], "lon", -180.0, 180.0)
        except ValueError as exc:
            out.rejects.append(MalformedRecord(line_no, str(exc)))
            continue
        out.items.append(Venue(lat, lon, fields[2].lower()))
    return out


# -- dataset snapshot ---------------------------------------------------------------

@dataclass
class Dataset:
    records: list
    segments: list
    pollutants: PollutantTable = field(default_factory=lambda: PollutantTable({}))
    venues: list = field(default_factory=list)
    timezone: str = "UTC"

    def save(self, path):
        doc = {
            "format": SNAPSHOT_FORMAT, "version": SNAPSHOT_VERSION,
            "timezone": self.timezone,
            "records": [record_to_dict(r) for r in self.records],
            "segments": [{"id": s.id, "polyline": [list(p) for p in s.polyline]}
                         for s in self.segments],
            "pollutants": {k: list(v) for k, v in sorted(self.pollutants.values.items())},
            "venues": [[v.lat, v.lon, v.kind] for v in self.venues],
        }
        # no name and mtime=0 keep the gzip header, and so the file, reproducible
        with open(path, "wb") as raw, gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as gz:
            gz.write(json.dumps(doc, sort_keys=True, ensure_ascii=False).encode("utf-8"))

    @classmethod
    def load(cls, path) -> "Dataset":
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("format") != SNAPSHOT_FORMAT:
            raise InputError(f"{path}: not a dataset snapshot")
        if doc.get("version") != SNAPSHOT_VERSION:
            raise InputError(f"{path}: unsupported snapshot version {doc.get('version')}")
        records = [_make_record(r, 0) for r in doc["records"]]
        segments = [StreetSegment(s["id"], tuple(map(tuple, s["polyline"])),
                                  polyline_length(s["polyline"])) for s in doc["segments"]]
        pollutants = PollutantTable({k: tuple(v) for k, v in doc["pollutants"].items()})
        venues = [Venue(*v) for v in doc["venues"]]
        return cls(records, segments, pollutants, venues, doc.get("timezone", "UTC"))


def read_dataset(records=None, streets=None, pollutants=None, venues=None,
                 timezone: str = "UTC", records_format: str = "jsonl",
                 text_ngrams: int = 0) -> tuple[Dataset, dict]:
    """Parse every input present; returns the dataset and a rejects report."""
    ZoneInfo(timezone)  # fail early on an unknown zone
    report = {}
    recs = parse_records(records, records_format, text_ngrams) if records else Parsed([])
    report["records"] = {"accepted": len(recs.items), "rejected": len(recs.rejects),
                         "rejects": [[e.line_no, e.reason] for e in recs.rejects]}
    segs = parse_street_network(streets) if streets else []
    report["segments"] = {"accepted": len(segs)}
    if pollutants:
        pol = parse_pollutants(pollutants)
        table = pol.items[0]
        report["pollutants"] = {"accepted": len(table), "rejected": len(pol.rejects),
                                "rejects": [[e.line_no, e.reason] for e in pol.rejects]}
    else:
        table = PollutantTable({})
    if venues:
        ven = parse_venues(venues)
        vlist = ven.items
        report["venues"] = {"accepted": len(vlist), "rejected": len(ven.rejects),
                            "rejects": [[e.line_no, e.reason] for e in ven.rejects]}
    else:
        vlist = []
    return Dataset(recs.items, segs, table, vlist, timezone), report
