"""Seeded synthetic cities with planted ground truth.

The generator lays out an irregular street grid and plants, per segment, a
smell-category distribution, a pleasantness and a sentiment latent (coupled
through a Gaussian copula), emotion mixtures tied to smell fractions,
pollutant levels tied to the emissions fraction, and venues tied to nature
(positively) and emissions (negatively) for parks, and to food for eateries. Counts are allocated by largest-remainder quotas, so a
segment's realized tag composition equals the planted one up to rounding.

Every record carries at most one tag per role (smell, affect, emotion,
color) plus a few non-lexicon tags, written in mixed case, snake case or
camel case to exercise normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.special import ndtr

from .geodesy import EARTH_RADIUS_M, polyline_length
from .ingest import Dataset, GeoTaggedRecord, PollutantTable, StreetSegment, Venue
from .lexicon import EMOTIONS, Lexicons

_M_PER_DEG = math.pi * EARTH_RADIUS_M / 180.0

NOISE_WORDS = (
    "london", "street", "city", "urban", "architecture", "iphone", "canon", "nikon",
    "photo", "travel", "uk", "europe", "walk", "people", "building", "night", "day",
    "summer trip", "holiday snaps", "instagood", "streetphotography", "weekend",
)
# dominant canonical color per category for planted photo colors
CATEGORY_COLOR = {
    "animals": "brown", "cleaning": "white", "emissions": "black", "food": "orange",
    "industry": "gray", "metro": "red", "nature": "green", "synthetic": "violet",
    "tobacco": "gray", "waste": "brown",
}
# (category, emotion, weight per unit fraction)
EMOTION_COUPLINGS = (("waste", "disgust", 6.0), ("nature", "joy", 4.0), ("emissions", "fear", 4.0))


def quotas(total: int, weights) -> np.ndarray:
    """Largest-remainder apportionment of `total` units by `weights`."""
    w = np.asarray(weights, dtype=float)
    if total <= 0 or w.sum() <= 0:
        return np.zeros(len(w), dtype=np.int64)
    exact = total * w / w.sum()
    base = np.floor(exact).astype(np.int64)
    rest = total - base.sum()
    order = np.lexsort((np.arange(len(w)), -(exact - base)))
    base[order[:rest]] += 1
    return base


def grid_network(n_segments: int, rng, center=(51.5, -0.12), spacing=(90.0, 220.0),
                 prefix="seg") -> list:
    """Irregular rectangular street grid with exactly `n_segments` segments.

    Each segment joins two adjacent intersections and carries a midpoint
    vertex, so polylines have three points.
    """
    side = 2
    while 2 * side * (side - 1) < n_segments:
        side += 1
    xs = np.concatenate([[0.0], np.cumsum(rng.uniform(*spacing, side - 1))])
    ys = np.concatenate([[0.0], np.cumsum(rng.uniform(*spacing, side - 1))])
    lat0, lon0 = center
    coslat = math.cos(math.radians(lat0))

    def ll(x, y):
        return (round(lat0 + (y - ys[-1] / 2) / _M_PER_DEG, 7),
                round(lon0 + (x - xs[-1] / 2) / (_M_PER_DEG * coslat), 7))

    edges = []
    for j in range(side):
        for i in range(side - 1):
            edges.append(((xs[i], ys[j]), (xs[i + 1], ys[j])))
            edges.append(((xs[j], ys[i]), (xs[j], ys[i + 1])))
    keep = np.sort(rng.choice(len(edges), size=n_segments, replace=False))
    width = max(4, len(str(n_segments)))
    segments = []
    for k, e in enumerate(keep):
        (x0, y0), (x1, y1) = edges[e]
        pts = (ll(x0, y0), ll((x0 + x1) / 2, (y0 + y1) / 2), ll(x1, y1))
        segments.append(StreetSegment(f"{prefix}{k:0{width}d}", pts, polyline_length(pts)))
    return segments


def point_near(segment, rng, lo=0.2, hi=0.8, max_offset_m=5.0, size=None):
    """Random points along the interior of a straight segment, offset sideways."""
    (a_lat, a_lon), (b_lat, b_lon) = segment.polyline[0], segment.polyline[-1]
    coslat = math.cos(math.radians(a_lat))
    dx = (b_lon - a_lon) * _M_PER_DEG * coslat
    dy = (b_lat - a_lat) * _M_PER_DEG
    norm = math.hypot(dx, dy)
    nx, ny = -dy / norm, dx / norm
    t = rng.uniform(lo, hi, size)
    off = rng.uniform(-max_offset_m, max_offset_m, size)
    lat = a_lat + t * (b_lat - a_lat) + off * ny / _M_PER_DEG
    lon = a_lon + t * (b_lon - a_lon) + off * nx / (_M_PER_DEG * coslat)
    return lat, lon


def _styled(word, rng):
    r = rng.random()
    if r < 0.15:
        return word.upper()
    if r < 0.30:
        return word.replace(" ", "_").title()
    if r < 0.40 and " " in word:
        parts = word.split()
        return parts[0] + "".join(p.capitalize() for p in parts[1:])
    return word


@dataclass
class PlantedCity:
    dataset: Dataset
    lexicons: Lexicons
    fractions: dict              # segment id -> planted f_S (categories order)
    pleasure_latent: dict        # segment id -> latent driving pleasantness
    sentiment_latent: dict       # segment id -> latent driving sentiment
    rho_spearman: float          # population Spearman of the two latents
    emotion_couplings: tuple = EMOTION_COUPLINGS
    params: dict = field(default_factory=dict)

    @property
    def categories(self):
        return self.lexicons.smell.categories


def planted_city(n_segments: int = 500, n_records: int = 50_000, seed: int = 0,
                 rho: float = 0.7, lexicons: Lexicons | None = None,
                 center=(51.5, -0.12), start_year: int = 2005, n_years: int = 10) -> PlantedCity:
    """Build a planted city. See the module docstring for what is planted.

    `rho` is the Spearman correlation between the pleasantness and sentiment
    latents; the copula uses Pearson ``2 sin(pi rho / 6)``.
    """
    lex = lexicons or Lexicons.default()
    rng = np.random.default_rng(seed)
    cats = lex.smell.categories
    segments = grid_network(n_segments, rng, center)
    ids = [s.id for s in segments]

    # word pools
    pools = {}
    for c in cats:
        words = lex.smell.words(c)
        pools[c] = {
            "pleasant": [w for w in words if w in lex.pleasantness.pleasant],
            "unpleasant": [w for w in words if w in lex.pleasantness.unpleasant],
            "neutral": [w for w in words if lex.pleasantness.lookup(w) is None],
        }
    positive = sorted(w for w, p in lex.affect.polarity.items() if p == "positive" and w not in lex.affect.emotions)
    negative = sorted(w for w, p in lex.affect.polarity.items() if p == "negative" and w not in lex.affect.emotions)
    emo_words = {e: sorted(w for w, es in lex.affect.emotions.items()
                           if es == frozenset([e]) and w not in lex.affect.polarity) for e in EMOTIONS}
    if not positive or not negative or not all(emo_words.values()):
        raise ValueError("affect lexicon lacks polarity-only or single-emotion words")
    nuances = {}
    for n, c in lex.color.nuances.items():
        if n not in lex.smell.entries and n not in lex.affect.polarity and n not in lex.affect.emotions:
            nuances.setdefault(c, []).append(n)
    nuances = {c: sorted(v) for c, v in nuances.items()}
    codes = lex.tag_codes()
    noise = [w for w in NOISE_WORDS if w not in codes and w not in lex.color.nuances]

    # planted per-segment quantities
    fractions = rng.dirichlet(np.full(len(cats), 0.7), size=n_segments)
    r_pearson = 2 * math.sin(math.pi * rho / 6)
    z1 = rng.standard_normal(n_segments)
    z2 = r_pearson * z1 + math.sqrt(1 - r_pearson ** 2) * rng.standard_normal(n_segments)
    u_p, u_s = ndtr(z1), ndtr(z2)
    volume = quotas(n_records, rng.lognormal(0.0, 0.9, n_segments))

    ci = {c: k for k, c in enumerate(cats)}
    months = np.arange(12)
    # plants bloom in spring and summer
    nature_season = 1.0 + 0.9 * np.cos(2 * np.pi * (months - 4.5) / 12)

    records = []
    rid = 0
    for k, seg in enumerate(segments):
        R = int(volume[k])
        if R == 0:
            continue
        f = fractions[k]
        n_smell = int(round(0.9 * R))
        cat_counts = quotas(n_smell, f)
        # pleasant / unpleasant picks within categories
        p_target = int(round(n_smell * (0.05 + 0.30 * u_p[k])))
        u_target = int(round(n_smell * (0.05 + 0.30 * (1 - u_p[k]))))
        cap_p = np.array([cat_counts[j] if pools[c]["pleasant"] else 0 for j, c in enumerate(cats)])
        pick_p = quotas(min(p_target, cap_p.sum()), cap_p)
        pick_p = np.minimum(pick_p, cap_p)
        left = cat_counts - pick_p
        cap_u = np.array([left[j] if pools[c]["unpleasant"] else 0 for j, c in enumerate(cats)])
        pick_u = np.minimum(quotas(min(u_target, cap_u.sum()), cap_u), cap_u)
        smell_tags = []
        for j, c in enumerate(cats):
            n_neutral = cat_counts[j] - pick_p[j] - pick_u[j]
            neutral_pool = pools[c]["neutral"] or pools[c]["pleasant"] or pools[c]["unpleasant"]
            for cls, n in (("pleasant", pick_p[j]), ("unpleasant", pick_u[j]), ("neutral", n_neutral)):
                pool = pools[c][cls] if cls != "neutral" else neutral_pool
                smell_tags += [(c, w) for w in rng.choice(pool, size=int(n))] if n else []
        rng.shuffle(smell_tags)

        n_aff = int(round(0.5 * R))
        n_pos = int(round(n_aff * (0.15 + 0.7 * u_s[k])))
        aff_tags = ([str(w) for w in rng.choice(positive, n_pos)]
                    + [str(w) for w in rng.choice(negative, n_aff - n_pos)])
        rng.shuffle(aff_tags)

        w_emo = np.ones(len(EMOTIONS))
        for c, e, gain in EMOTION_COUPLINGS:
            w_emo[EMOTIONS.index(e)] += gain * f[ci[c]]
        emo_counts = quotas(int(round(0.4 * R)), w_emo)
        emo_tags = [str(rng.choice(emo_words[e])) for e, n in zip(EMOTIONS, emo_counts) for _ in range(n)]
        rng.shuffle(emo_tags)

        lat, lon = point_near(seg, rng, size=R)
        slots = rng.permutation(R)
        smell_of = dict(zip(slots[:n_smell], smell_tags))
        aff_of = dict(zip(rng.permutation(R)[:n_aff], aff_tags))
        emo_of = dict(zip(rng.permutation(R)[:len(emo_tags)], emo_tags))
        for r in range(R):
            tags = []
            cat = None
            if r in smell_of:
                cat, w = smell_of[r]
                tags.append(_styled(str(w), rng))
                if rng.random() < 0.05:
                    tags.append(str(w).upper())  # duplicate, counted once
            if r in aff_of:
                tags.append(_styled(aff_of[r], rng))
            if r in emo_of:
                tags.append(_styled(emo_of[r], rng))
            if rng.random() < 0.3:
                if cat is not None and rng.random() < 0.7:
                    canon = CATEGORY_COLOR.get(cat, "gray")
                else:
                    canon = str(rng.choice(sorted(nuances)))
                tags.append(_styled(str(rng.choice(nuances[canon])), rng))
            for w in rng.choice(noise, size=int(rng.integers(0, 3)), replace=False):
                tags.append(str(w))
            weights = nature_season if cat == "nature" else np.ones(12)
            month = int(rng.choice(12, p=weights / weights.sum()))
            year = start_year + int(rng.integers(n_years))
            ts = datetime(year, month + 1, int(rng.integers(1, 29)), int(rng.integers(24)),
                          int(rng.integers(60)), tzinfo=timezone.utc)
            attrs = {"monochrome": True} if rng.random() < 0.05 else {}
            records.append(GeoTaggedRecord(f"r{rid:07d}", float(lat[r]), float(lon[r]), ts,
                                           tuple(tags), attrs, "photo"))
            rid += 1

    em = fractions[:, ci["emissions"]]
    no2 = np.clip(15 + 50 * em + rng.normal(0, 1.5, n_segments), 0, None)
    pm10 = np.clip(10 + 20 * em + rng.normal(0, 2.0, n_segments), 0, None)
    pm25 = np.clip(5 + 10 * em + rng.normal(0, 1.5, n_segments), 0, None)
    pollutants = PollutantTable({sid: (float(a), float(b), float(c))
                                 for sid, a, b, c in zip(ids, no2, pm10, pm25)})

    venues = []
    for k, seg in enumerate(segments):
        # parks sit on nature-heavy streets and away from traffic
        rates = {"natural": 8 * fractions[k, ci["nature"]] + 2 * max(0.0, 1 - 4 * em[k]),
                 "cuisine": 8 * fractions[k, ci["food"]]}
        for kind, rate in rates.items():
            n = int(rng.poisson(rate))
            if n:
                vlat, vlon = point_near(seg, rng, 0.3, 0.7, 4.0, size=n)
                venues += [Venue(float(a), float(b), kind) for a, b in zip(vlat, vlon)]

    dataset = Dataset(records, segments, pollutants, venues, "UTC")
    return PlantedCity(
        dataset, lex,
        fractions=dict(zip(ids, fractions)),
        pleasure_latent=dict(zip(ids, u_p)),
        sentiment_latent=dict(zip(ids, u_s)),
        rho_spearman=rho,
        params={"n_segments": n_segments, "n_records": n_records, "seed": seed, "rho": rho},
    )


def random_records(n: int, segments, seed: int = 0, lexicons: Lexicons | None = None,
                   tags_per_record: int = 4, miss_rate: float = 0.1) -> list:
    """Fast bulk records near random segments, for throughput tests."""
    lex = lexicons or Lexicons.default()
    rng = np.random.default_rng(seed)
    vocab = sorted(lex.smell.entries) + sorted(lex.affect.polarity) + list(NOISE_WORDS)
    seg_idx = rng.integers(len(segments), size=n)
    a = np.array([s.polyline[0] for s in segments])
    b = np.array([s.polyline[-1] for s in segments])
    t = rng.uniform(0.2, 0.8, n)
    lat = a[seg_idx, 0] + t * (b[seg_idx, 0] - a[seg_idx, 0]) + rng.normal(0, 2e-5, n)
    lon = a[seg_idx, 1] + t * (b[seg_idx, 1] - a[seg_idx, 1]) + rng.normal(0, 3e-5, n)
    far = rng.random(n) < miss_rate
    lat[far] += 0.5
    words = rng.integers(len(vocab), size=(n, tags_per_record))
    secs = rng.integers(1_104_537_600, 1_420_070_400, n)  # 2005-2014
    base = datetime(1970, 1, 1, tzinfo=timezone.utc)
    from datetime import timedelta
    out = []
    for i in range(n):
        out.append(GeoTaggedRecord(f"b{i:07d}", float(lat[i]), float(lon[i]),
                                   base + timedelta(seconds=int(secs[i])),
                                   tuple(vocab[j] for j in words[i]), {}, "photo"))
    return out


def write_inputs(dataset: Dataset, directory) -> dict:
    """Write a dataset as raw ingest inputs; returns ``{kind: path}``."""
    import json
    from pathlib import Path

    from .ingest import serialize_records

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {k: d / n for k, n in (("records", "records.jsonl"), ("streets", "streets.geojson"),
                                   ("pollutants", "pollutants.csv"), ("venues", "venues.csv"))}
    paths["records"].write_text(serialize_records(dataset.records), encoding="utf-8")
    fc = {"type": "FeatureCollection", "features": [
        {"type": "Feature", "id": s.id, "properties": {},
         "geometry": {"type": "LineString", "coordinates": [[lon, lat] for lat, lon in s.polyline]}}
        for s in dataset.segments]}
    paths["streets"].write_text(json.dumps(fc), encoding="utf-8")
    lines = ["segment_id,no2,pm10,pm25"] + [
        f"{sid},{a!r},{b!r},{c!r}" for sid, (a, b, c) in sorted(dataset.pollutants.values.items())]
    paths["pollutants"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    lines = ["lat,lon,kind"] + [f"{v.lat!r},{v.lon!r},{v.kind}" for v in dataset.venues]
    paths["venues"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    return paths
