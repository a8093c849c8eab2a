"""Validation studies and deterministic exporters (CSV, GeoJSON, JSON).

Every float written by this module uses fixed 6-decimal formatting and
every mapping is written with sorted keys, so identical inputs give
byte-identical files.
"""
from __future__ import annotations

import contextlib
import csv
import hashlib
import json
import math
import sys
import warnings
from collections import defaultdict

import numpy as np

from . import __version__
from .affect import _sentiment
from .errors import StatsError, UnknownLayer
from .geo import DEFAULT_MAX_DIST_M
from .ingest import POLLUTANTS
from .lexicon import CANONICAL_COLORS, EMOTIONS
from .smellmetrics import DEFAULT_MIN_TAGS, fraction_matrix, pleasure_score
from .stats import pearson, spearman

DEFAULT_SWEEP = (1, 10, 30, 50, 100)
AGGREGATIONS = ("density", "count", "fraction")

# z <= -1.5 ... z >= 1.5, red (unpleasant) to green (pleasant)
DIVERGING_RAMP = ("#d7191c", "#fdae61", "#ffffbf", "#a6d96a", "#1a9641")
NEUTRAL_RAMP = ("#f7f7f7", "#cccccc", "#969696", "#636363", "#252525")
COLOR_HEX = {
    "black": "#000000", "blue": "#1f4e9c", "brown": "#8b5a2b", "gray": "#808080",
    "green": "#2e8b57", "orange": "#ff8c00", "red": "#c0392b", "violet": "#8e44ad",
    "white": "#f5f5f5", "yellow": "#f1c40f",
}


# -- formatting --------------------------------------------------------------------------

def fmt_float(x) -> str:
    if x is None or not math.isfinite(x):
        return "NA"
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def dumps(obj) -> str:
    """JSON with sorted keys and 6-decimal floats; NaN/inf become null."""
    if obj is None or obj is True or obj is False:
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (np.integer,)):
        obj = int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return "null" if not math.isfinite(obj) else fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{dumps(k)}:{dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def provenance(inputs: dict | None = None, parameters: dict | None = None) -> dict:
    return {"tool": "smellscape", "version": __version__,
            "inputs": {k: file_digest(v) for k, v in sorted((inputs or {}).items()) if v},
            "parameters": dict(parameters or {})}


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if v is None:
        return "NA"
    return str(v)


def write_csv(path, header, rows, prov: dict | None = None):
    """CSV with a header row, preceded by ``#`` provenance comment lines.

    A `path` of ``"-"`` writes to standard output.
    """
    with (contextlib.nullcontext(sys.stdout) if path == "-"
          else open(path, "w", encoding="utf-8", newline="")) as fh:
        if prov:
            for k in sorted(prov):
                fh.write(f"# {k}: {dumps(prov[k])}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_json(path, obj: dict, prov: dict | None = None):
    doc = dict(obj)
    if prov:
        doc["provenance"] = prov
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc) + "\n")


# -- validation studies ------------------------------------------------------------------

def _safe(fn, x, y):
    try:
        return fn(x, y)
    except StatsError:
        return float("nan")


def validate_pollution(tallies, pollutants, segments, sweep=DEFAULT_SWEEP,
                       buffer_m: float | None = None) -> list:
    """Spearman correlation of smell presence with each pollutant.

    Smell presence per segment is aggregated three ways: density (tags per
    meter of length, or per square meter of a ``2 * buffer_m`` corridor),
    raw count, and fraction of the segment's smell tags.

    Returns rows ``(threshold, pollutant, category, method, n, rho)``.
    """
    if len(pollutants) == 0:
        warnings.warn("pollutant table is empty; nothing to validate", stacklevel=2)
        return []
    lengths = {s.id: s.length_m for s in segments}
    per_seg = tallies.group("segment")
    ids = per_seg.segment_labels()
    have = np.array([sid in pollutants.values and sid in lengths for sid in ids], dtype=bool)
    rows = []
    for t in sweep:
        ok = have & (per_seg["n_smell"] >= max(t, 1))
        sub = per_seg.select(ok)
        sids = [i for i, k in zip(ids, ok) if k]
        counts = sub["smell"].astype(float)
        size = np.array([lengths[s] for s in sids], dtype=float)
        if buffer_m:
            size = size * 2 * buffer_m
        methods = {"density": counts / size[:, None] if len(sids) else counts,
                   "count": counts,
                   "fraction": fraction_matrix(counts) if len(sids) else counts}
        for pol in POLLUTANTS:
            col = pollutants.column(pol)
            y = np.array([col[s] for s in sids], dtype=float)
            for j, cat in enumerate(tallies.categories):
                for name in AGGREGATIONS:
                    rows.append((t, pol, cat, name, len(sids), _safe(spearman, methods[name][:, j], y)))
    return rows


def pollution_summary(rows, threshold, pollutant) -> dict:
    """``{category: {method: rho}}`` for one threshold and pollutant."""
    out = defaultdict(dict)
    for t, pol, cat, method, _, rho in rows:
        if t == threshold and pol == pollutant:
            out[cat][method] = rho
    return dict(out)


def venue_counts(venues, index, max_dist_m: float = DEFAULT_MAX_DIST_M) -> dict:
    """``{kind: ndarray of counts per segment in index order}``."""
    if not venues:
        return {}
    lat = np.array([v.lat for v in venues])
    lon = np.array([v.lon for v in venues])
    seg, _ = index.snap_many(lat, lon, max_dist_m)
    out = {}
    for kind in sorted({v.kind for v in venues}):
        mask = np.array([v.kind == kind for v in venues]) & (seg >= 0)
        out[kind] = np.bincount(seg[mask], minlength=len(index))
    return out


def validate_venues(tallies, venues, index, sweep=DEFAULT_SWEEP,
                    max_dist_m: float = DEFAULT_MAX_DIST_M) -> list:
    """Correlation of f_S with per-segment venue counts across a min-tags sweep.

    Returns rows ``(threshold, kind, category, n, pearson, spearman)``.
    """
    counts = venue_counts(venues, index, max_dist_m)
    if not counts:
        return []
    per_seg = tallies.group("segment")
    rows = []
    for t in sweep:
        sub = per_seg.select(per_seg["n_smell"] >= max(t, 1))
        frac = fraction_matrix(sub["smell"])
        for kind, c in counts.items():
            y = c[sub.keys["segment"]].astype(float)
            for j, cat in enumerate(tallies.categories):
                rows.append((t, kind, cat, len(sub),
                             _safe(pearson, frac[:, j], y), _safe(spearman, frac[:, j], y)))
    return rows


# -- maps ---------------------------------------------------------------------------------

def diverging_color(z):
    if z is None or not math.isfinite(z):
        return None
    k = int(math.floor(z + 0.5))
    return DIVERGING_RAMP[min(max(k, -2), 2) + 2]


def neutral_color(f):
    if f is None or not math.isfinite(f):
        return None
    return NEUTRAL_RAMP[min(int(f * len(NEUTRAL_RAMP)), len(NEUTRAL_RAMP) - 1)]


def _parse_layer(layer, categories):
    if layer in ("pleasure", "sentiment"):
        return layer, None
    kind, _, name = layer.partition(":")
    if kind == "smell" and name in categories:
        return "smell", name
    if kind == "emotion" and name in EMOTIONS:
        return "emotion", name
    if not name and layer in categories:
        return "smell", layer
    raise UnknownLayer(f"unknown layer {layer!r}")


def export_geojson(tallies, segments, layer: str = "pleasure", min_tags: int = DEFAULT_MIN_TAGS,
                   associations=None) -> dict:
    """One LineString feature per street segment with the layer's metric and color.

    Parameters
    ----------
    layer : str
        ``pleasure``, ``sentiment``, ``smell:<category>`` or ``emotion:<emotion>``.
    associations : ColorAssociation, optional
        When given, category layers are drawn in the category's dominant color.
    """
    kind, name = _parse_layer(layer, tallies.categories)
    per_seg = tallies.group("segment")
    row_of = {sid: r for r, sid in enumerate(per_seg.segment_labels())}
    frac = fraction_matrix(per_seg["smell"]) if len(per_seg) else np.empty((0, len(tallies.categories)))
    emo = fraction_matrix(per_seg["emotion"]) if len(per_seg) else np.empty((0, len(EMOTIONS)))

    qual = (per_seg["n_smell"] >= max(min_tags, 1)) & (per_seg["n_tags"] > 0)
    z_p = np.full(len(per_seg), np.nan)
    z_s = np.full(len(per_seg), np.nan)
    if qual.any():
        sub = per_seg.select(qual)
        fp, fu = sub["pleasant"] / sub["n_tags"], sub["unpleasant"] / sub["n_tags"]
        try:
            z_p[qual] = pleasure_score(fp, fu, fp, fu)
        except StatsError:
            pass
        try:
            z_s[qual] = _sentiment(sub)
        except StatsError:
            pass

    dominant = None
    if kind == "smell" and associations is not None and name in associations.categories:
        norm = associations.categories[name].normalized
        dominant = max(CANONICAL_COLORS, key=lambda c: (norm[c], -CANONICAL_COLORS.index(c)))

    features = []
    for seg in segments:
        r = row_of.get(seg.id)
        props = {"segment_id": seg.id, "length_m": seg.length_m}
        if r is None:
            f_row = [None] * len(tallies.categories)
            e_row = [None] * len(EMOTIONS)
            zp = zs = None
            props["n_smell_tags"] = 0
            props["n_tags"] = 0
        else:
            f_row = [None if np.isnan(v) else float(v) for v in frac[r]]
            e_row = [None if np.isnan(v) else float(v) for v in emo[r]]
            zp = None if np.isnan(z_p[r]) else float(z_p[r])
            zs = None if np.isnan(z_s[r]) else float(z_s[r])
            props["n_smell_tags"] = int(per_seg["n_smell"][r])
            props["n_tags"] = int(per_seg["n_tags"][r])
        for c, v in zip(tallies.categories, f_row):
            props[f"f_{c}"] = v
        props["z_pleasure"] = zp
        props["z_sentiment"] = zs

        if kind == "pleasure":
            metric, color = zp, diverging_color(zp)
        elif kind == "sentiment":
            metric, color = zs, diverging_color(zs)
        elif kind == "smell":
            metric = f_row[tallies.categories.index(name)]
            if metric is None:
                color = None
            elif dominant is not None:
                color = COLOR_HEX[dominant]
                props["opacity"] = metric
            else:
                color = neutral_color(metric)
        else:
            metric = e_row[EMOTIONS.index(name)]
            color = neutral_color(metric)
        props["metric"] = metric
        if color is not None:
            props["color"] = color
        features.append({
            "type": "Feature", "id": seg.id, "properties": props,
            "geometry": {"type": "LineString", "coordinates": [[lon, lat] for lat, lon in seg.polyline]},
        })
    return {"type": "FeatureCollection", "layer": layer, "features": features}
