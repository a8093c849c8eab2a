"""Street-segment index, nearest-segment snapping and per-segment tallies."""
from __future__ import annotations

import json
import math
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from zoneinfo import ZoneInfo

import numpy as np

from .errors import InputError
from .geodesy import EARTH_RADIUS_M, point_arc_distance, to_unit
from .ingest import month_index
from .lexicon import EMOTIONS, Lexicons, normalize

DEFAULT_MAX_DIST_M = 50.0
TIE_TOLERANCE_M = 1e-9
_M_PER_DEG = math.pi * EARTH_RADIUS_M / 180.0


class SegmentIndex:
    """Uniform lat/lon grid over segment edges (consecutive polyline vertices).

    Parameters
    ----------
    segments : list of StreetSegment
    cell_m : float
        Grid cell size in meters. Queries visit every cell that could hold an
        edge within the requested radius, so results are exact for any radius;
        the cell size only affects speed.
    """

    def __init__(self, segments, cell_m: float = 100.0):
        self.segment_ids = tuple(s.id for s in segments)
        if len(set(self.segment_ids)) != len(self.segment_ids):
            raise ValueError("segment ids must be unique")
        self.segments = tuple(segments)
        # rank by id string, for the lexicographic tie-break
        order = sorted(range(len(segments)), key=lambda i: self.segment_ids[i])
        self.id_rank = np.empty(len(segments), dtype=np.int64)
        self.id_rank[order] = np.arange(len(segments))
        self._by_rank = np.asarray(order, dtype=np.int64)

        a_ll, b_ll, seg = [], [], []
        for k, s in enumerate(segments):
            pts = s.polyline
            for p, q in zip(pts[:-1], pts[1:]):
                a_ll.append(p)
                b_ll.append(q)
                seg.append(k)
        a_ll = np.asarray(a_ll, dtype=float).reshape(-1, 2)
        b_ll = np.asarray(b_ll, dtype=float).reshape(-1, 2)
        self.edge_segment = np.asarray(seg, dtype=np.int64)
        self._a = to_unit(a_ll[:, 0], a_ll[:, 1])
        self._b = to_unit(b_ll[:, 0], b_ll[:, 1])

        self.cell_m = float(cell_m)
        self._dlat = cell_m / _M_PER_DEG
        lat_all = np.concatenate([a_ll[:, 0], b_ll[:, 0]]) if len(a_ll) else np.zeros(1)
        self._max_abs_lat = float(np.max(np.abs(lat_all)))
        self._dlon = cell_m / (_M_PER_DEG * max(math.cos(math.radians(min(self._max_abs_lat, 89.0))), 1e-3))

        lat_lo = np.minimum(a_ll[:, 0], b_ll[:, 0])
        lat_hi = np.maximum(a_ll[:, 0], b_ll[:, 0])
        lon_lo = np.minimum(a_ll[:, 1], b_ll[:, 1])
        lon_hi = np.maximum(a_ll[:, 1], b_ll[:, 1])
        # poleward bulge of a great-circle arc over its endpoint box
        chord = np.hypot(lat_hi - lat_lo, (lon_hi - lon_lo) * math.cos(math.radians(min(self._max_abs_lat, 89.0))))
        bulge = np.radians(chord) ** 2 / 8 * max(1.0, math.tan(math.radians(min(self._max_abs_lat, 89.0))))
        bulge = np.degrees(bulge) + 1e-9
        lat_lo, lat_hi = lat_lo - bulge, lat_hi + bulge

        self._lat0 = float(lat_lo.min()) if len(lat_lo) else 0.0
        self._lon0 = float(lon_lo.min()) if len(lon_lo) else 0.0
        iy0, iy1 = self._iy(lat_lo), self._iy(lat_hi)
        ix0, ix1 = self._ix(lon_lo), self._ix(lon_hi)
        self._ny = int(iy1.max()) + 1 if len(iy1) else 1
        self._nx = int(ix1.max()) + 1 if len(ix1) else 1

        span_x = ix1 - ix0 + 1
        span_y = iy1 - iy0 + 1
        n_cells = span_x * span_y
        edge_rep = np.repeat(np.arange(len(n_cells)), n_cells)
        offs = np.arange(n_cells.sum()) - np.repeat(np.cumsum(n_cells) - n_cells, n_cells)
        cx = ix0[edge_rep] + offs // span_y[edge_rep]
        cy = iy0[edge_rep] + offs % span_y[edge_rep]
        keys = cx * self._ny + cy
        order = np.lexsort((edge_rep, keys))
        self._cell_keys, starts = np.unique(keys[order], return_index=True)
        self._cell_start = starts
        self._cell_end = np.append(starts[1:], len(order))
        self._cell_edges = edge_rep[order]

    def __len__(self):
        return len(self.segment_ids)

    def _iy(self, lat):
        return np.floor((np.asarray(lat) - self._lat0) / self._dlat).astype(np.int64)

    def _ix(self, lon):
        return np.floor((np.asarray(lon) - self._lon0) / self._dlon).astype(np.int64)

    def _candidates(self, lat, lon, max_dist_m):
        """(point index, edge index) pairs covering every edge within `max_dist_m`."""
        pad_lat = max_dist_m / _M_PER_DEG * 1.001 + 1e-9
        top = np.minimum(np.abs(lat) + pad_lat, 89.9)
        pad_lon = max_dist_m / (_M_PER_DEG * np.cos(np.radians(top))) * 1.001 + 1e-9
        iy0, iy1 = self._iy(lat - pad_lat), self._iy(lat + pad_lat)
        ix0, ix1 = self._ix(lon - pad_lon), self._ix(lon + pad_lon)
        iy0, ix0 = np.maximum(iy0, 0), np.maximum(ix0, 0)
        iy1, ix1 = np.minimum(iy1, self._ny - 1), np.minimum(ix1, self._nx - 1)
        pts, edges = [], []
        if len(lat) == 0:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        span_x = np.maximum(ix1 - ix0 + 1, 0)
        span_y = np.maximum(iy1 - iy0 + 1, 0)
        for dx in range(int(span_x.max(initial=0))):
            for dy in range(int(span_y.max(initial=0))):
                ok = (dx < span_x) & (dy < span_y)
                if not ok.any():
                    continue
                p_idx = np.nonzero(ok)[0]
                keys = (ix0[p_idx] + dx) * self._ny + (iy0[p_idx] + dy)
                pos = np.searchsorted(self._cell_keys, keys)
                pos_c = np.minimum(pos, len(self._cell_keys) - 1)
                hit = (pos < len(self._cell_keys)) & (self._cell_keys[pos_c] == keys)
                p_idx, pos_c = p_idx[hit], pos_c[hit]
                start, end = self._cell_start[pos_c], self._cell_end[pos_c]
                cnt = end - start
                rep_p = np.repeat(p_idx, cnt)
                offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
                pts.append(rep_p)
                edges.append(self._cell_edges[np.repeat(start, cnt) + offs])
        if not pts:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        return np.concatenate(pts), np.concatenate(edges)

    def snap_many(self, lat, lon, max_dist_m: float = DEFAULT_MAX_DIST_M):
        """Nearest segment for each point.

        Returns
        -------
        seg : ndarray of int
            Position in ``segment_ids``, or -1 when no segment is within
            `max_dist_m`.
        dist : ndarray of float
            Distance in meters (inf when unsnapped).
        """
        if not max_dist_m > 0:
            raise ValueError("max_dist_m must be positive")
        lat = np.asarray(lat, dtype=float).reshape(-1)
        lon = np.asarray(lon, dtype=float).reshape(-1)
        n = len(lat)
        seg_out = np.full(n, -1, dtype=np.int64)
        dist_out = np.full(n, np.inf)
        if n == 0 or len(self._cell_keys) == 0:
            return seg_out, dist_out
        p_i, e_i = self._candidates(lat, lon, max_dist_m)
        if len(p_i) == 0:
            return seg_out, dist_out
        pu = to_unit(lat, lon)
        d = point_arc_distance(pu[p_i], self._a[e_i], self._b[e_i])
        keep = d <= max_dist_m
        p_i, e_i, d = p_i[keep], e_i[keep], d[keep]
        if len(p_i) == 0:
            return seg_out, dist_out
        rank = self.id_rank[self.edge_segment[e_i]]
        order = np.lexsort((d, p_i))
        p_s, d_s = p_i[order], d[order]
        first = np.ones(len(p_s), dtype=bool)
        first[1:] = p_s[1:] != p_s[:-1]
        dmin = np.full(n, np.inf)
        dmin[p_s[first]] = d_s[first]
        tied = d <= dmin[p_i] + TIE_TOLERANCE_M
        p_t, r_t, d_t = p_i[tied], rank[tied], d[tied]
        order = np.lexsort((r_t, p_t))
        p_t, r_t, d_t = p_t[order], r_t[order], d_t[order]
        first = np.ones(len(p_t), dtype=bool)
        first[1:] = p_t[1:] != p_t[:-1]
        seg_out[p_t[first]] = self._by_rank[r_t[first]]
        dist_out[p_t[first]] = d_t[first]
        return seg_out, dist_out


def build_index(segments, cell_m: float = 100.0) -> SegmentIndex:
    return SegmentIndex(segments, cell_m)


def snap(point, index: SegmentIndex, max_dist_m: float = DEFAULT_MAX_DIST_M):
    """Id of the nearest segment to ``(lat, lon)`` within `max_dist_m`, else None.

    Ties within 1e-9 m go to the lexicographically smallest id.
    """
    seg, _ = index.snap_many([point[0]], [point[1]], max_dist_m)
    return None if seg[0] < 0 else index.segment_ids[seg[0]]


# -- tallies -------------------------------------------------------------------------

SCALAR_FIELDS = ("pleasant", "unpleasant", "positive", "negative",
                 "n_smell", "n_affect", "n_emotion", "n_tags", "n_records")
VECTOR_FIELDS = ("smell", "subcategory", "emotion")
_MONTH_BITS = 20


@dataclass
class CountTable:
    """Rows of integer counts keyed by named integer columns (e.g. segment, month).

    Vector fields: ``smell`` (rows x categories), ``subcategory`` and
    ``emotion`` (rows x 8). Scalar fields are listed in :data:`SCALAR_FIELDS`.
    ``n_emotion`` counts emotion instances, so a tag carrying k emotions adds
    k; ``n_smell`` equals the row sum of ``smell``.
    """

    keys: dict
    counts: dict
    segment_ids: tuple = ()
    categories: tuple = ()
    subcategories: tuple = ()
    report: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.counts["n_records"])

    def __getitem__(self, name):
        return self.counts[name]

    def _meta(self, **kw):
        base = dict(segment_ids=self.segment_ids, categories=self.categories,
                    subcategories=self.subcategories, report=dict(self.report))
        base.update(kw)
        return base

    def key(self, name):
        if name == "calendar_month":
            return self.keys["month"] % 12
        if name == "year":
            return self.keys["month"] // 12
        return self.keys[name]

    def group(self, *names) -> "CountTable":
        """Sum rows sharing the given key columns; rows come out sorted by key."""
        cols = [np.asarray(self.key(n), dtype=np.int64) for n in names]
        n = len(self)
        if n == 0:
            return CountTable({nm: np.empty(0, np.int64) for nm in names},
                              {k: v[:0] for k, v in self.counts.items()}, **self._meta())
        order = np.lexsort(tuple(reversed(cols))) if cols else np.arange(n)
        if cols:
            stacked = np.stack([c[order] for c in cols], axis=1)
            new = np.ones(n, dtype=bool)
            new[1:] = np.any(stacked[1:] != stacked[:-1], axis=1)
        else:
            stacked = np.empty((n, 0), np.int64)
            new = np.zeros(n, dtype=bool)
            new[0] = True
        starts = np.nonzero(new)[0]
        counts = {k: np.add.reduceat(v[order], starts, axis=0) for k, v in self.counts.items()}
        keys = {nm: stacked[starts, j] for j, nm in enumerate(names)}
        return CountTable(keys, counts, **self._meta())

    def select(self, mask) -> "CountTable":
        mask = np.asarray(mask)
        return CountTable({k: v[mask] for k, v in self.keys.items()},
                          {k: v[mask] for k, v in self.counts.items()}, **self._meta())

    def segment_labels(self):
        return [self.segment_ids[i] for i in self.keys["segment"]]

    def segment_tally(self, segment_id: str) -> "SegmentTally":
        k = self.segment_ids.index(segment_id)
        rows = np.nonzero(self.keys["segment"] == k)[0]
        months = {}
        for r in rows:
            months[int(self.keys["month"][r])] = {f: self.counts[f][r].copy() if self.counts[f].ndim > 1
                                                  else int(self.counts[f][r]) for f in self.counts}
        return SegmentTally(segment_id, months, self.categories, self.subcategories)

    @classmethod
    def concat(cls, tables) -> "CountTable":
        tables = [t for t in tables]
        first = tables[0]
        keys = {k: np.concatenate([t.keys[k] for t in tables]) for k in first.keys}
        counts = {k: np.concatenate([t.counts[k] for t in tables]) for k in first.counts}
        report = {}
        for t in tables:
            for k, v in t.report.items():
                report[k] = report.get(k, 0) + v
        return cls(keys, counts, **first._meta(report=report))

    # -- persistence ---------------------------------------------------------------

    def save(self, path):
        meta = {"format": "smellscape-tallies", "version": 1,
                "segment_ids": list(self.segment_ids), "categories": list(self.categories),
                "subcategories": list(self.subcategories), "report": self.report,
                "keys": list(self.keys)}
        arrays = {f"key_{k}": v for k, v in self.keys.items()}
        arrays.update({f"count_{k}": v for k, v in self.counts.items()})
        arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
        # fixed entry timestamps keep the archive byte-reproducible
        with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
            for name in sorted(arrays):
                info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
                with zf.open(info, "w", force_zip64=True) as fh:
                    np.lib.format.write_array(fh, np.ascontiguousarray(arrays[name]), allow_pickle=False)

    @classmethod
    def load(cls, path) -> "CountTable":
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(bytes(z["meta"]).decode("utf-8"))
            if meta.get("format") != "smellscape-tallies":
                raise InputError(f"{path}: not a tallies file")
            keys = {k: z[f"key_{k}"] for k in meta["keys"]}
            counts = {k[len("count_"):]: z[k] for k in z.files if k.startswith("count_")}
        return cls(keys, counts, tuple(meta["segment_ids"]), tuple(meta["categories"]),
                   tuple(meta["subcategories"]), meta["report"])


Tallies = CountTable


@dataclass
class SegmentTally:
    """All month buckets of one segment."""

    segment_id: str
    months: dict  # month index -> {field: count}
    categories: tuple = ()
    subcategories: tuple = ()

    def total(self) -> dict:
        out = {}
        for bucket in self.months.values():
            for k, v in bucket.items():
                out[k] = out[k] + v if k in out else (v.copy() if isinstance(v, np.ndarray) else v)
        return out

    def smell_counts(self) -> dict:
        tot = self.total()
        if not tot:
            return {c: 0 for c in self.categories}
        return {c: int(n) for c, n in zip(self.categories, tot["smell"])}


def _empty_table(lex: Lexicons, segment_ids) -> CountTable:
    nc, ns = len(lex.smell.categories), len(lex.smell.subcategories)
    counts = {"smell": np.zeros((0, nc), np.int64), "subcategory": np.zeros((0, ns), np.int64),
              "emotion": np.zeros((0, len(EMOTIONS)), np.int64)}
    counts.update({f: np.zeros(0, np.int64) for f in SCALAR_FIELDS})
    return CountTable({"segment": np.zeros(0, np.int64), "month": np.zeros(0, np.int64)}, counts,
                      tuple(segment_ids), lex.smell.categories, lex.smell.subcategories,
                      {"records": 0, "snapped": 0, "unsnapped": 0})


def _tally_chunk(records, index, codes, lex, max_dist_m, zone, dedup):
    n = len(records)
    lat = np.fromiter((r.lat for r in records), float, n)
    lon = np.fromiter((r.lon for r in records), float, n)
    seg, _ = index.snap_many(lat, lon, max_dist_m)
    snapped = np.nonzero(seg >= 0)[0]
    m = len(snapped)
    nc, ns, ne = len(lex.smell.categories), len(lex.smell.subcategories), len(EMOTIONS)

    month = np.empty(m, np.int64)
    scal = np.zeros((m, len(SCALAR_FIELDS)), np.int64)
    smell_ev, sub_ev, emo_ev = [], [], []
    emo_bits = [(k, 1 << k) for k in range(ne)]
    for row, i in enumerate(snapped):
        r = records[i]
        month[row] = month_index(r.timestamp, zone)
        words = [normalize(t) for t in r.tags]
        words = [w for w in words if w]
        if dedup:
            words = set(words)
        pl = un = po = ne_ = nsm = naf = nem = 0
        for w in words:
            c = codes.get(w)
            if c is None:
                continue
            cat, sub, pleas, pol, bits = c
            if cat >= 0:
                smell_ev.append(row * nc + cat)
                nsm += 1
                if sub >= 0:
                    sub_ev.append(row * ns + sub)
            if pleas > 0:
                pl += 1
            elif pleas < 0:
                un += 1
            if pol > 0:
                po += 1
                naf += 1
            elif pol < 0:
                ne_ += 1
                naf += 1
            if bits:
                for k, b in emo_bits:
                    if bits & b:
                        emo_ev.append(row * ne + k)
                        nem += 1
        scal[row] = (pl, un, po, ne_, nsm, naf, nem, len(words), 1)

    def mat(events, width):
        if width == 0:
            return np.zeros((m, 0), np.int64)
        return np.bincount(np.asarray(events, np.int64), minlength=m * width).reshape(m, width)

    counts = {"smell": mat(smell_ev, nc), "subcategory": mat(sub_ev, ns), "emotion": mat(emo_ev, ne)}
    counts.update({f: scal[:, j] for j, f in enumerate(SCALAR_FIELDS)})
    table = CountTable({"segment": seg[snapped], "month": month}, counts, index.segment_ids,
                       lex.smell.categories, lex.smell.subcategories,
                       {"records": n, "snapped": m, "unsnapped": n - m})
    return table.group("segment", "month")


def aggregate(records, index: SegmentIndex, lexicons: Lexicons,
              max_dist_m: float = DEFAULT_MAX_DIST_M, timezone: str = "UTC",
              dedup_tags: bool = True, workers: int = 1,
              chunk_size: int = 50_000) -> CountTable:
    """Snap records and tally every lexicon layer per (segment, month).

    Partial tallies are integer sums merged after sorting by key, so the
    result does not depend on `workers` or `chunk_size`.

    Parameters
    ----------
    dedup_tags : bool
        Count a repeated tag once per record (after normalization).
    """
    records = list(records)
    zone = ZoneInfo(timezone)
    codes = lexicons.tag_codes()
    chunks = [records[i:i + chunk_size] for i in range(0, len(records), chunk_size)]
    if not chunks:
        return _empty_table(lexicons, index.segment_ids)
    job = lambda ch: _tally_chunk(ch, index, codes, lexicons, max_dist_m, zone, dedup_tags)  # noqa: E731
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(ch) for ch in chunks]
    merged = CountTable.concat(parts).group("segment", "month")
    return merged
