"""Sentiment and emotion metrics and their correlation with smell fractions.

Positive/negative fractions are over all tags of a segment. Emotion
fractions count emotion instances: a tag carrying k emotions adds one to
each of k numerators and k to the denominator, so the eight fractions of a
segment always sum to one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StatsError
from .lexicon import EMOTIONS
from .smellmetrics import DEFAULT_MIN_TAGS, fraction_matrix, pleasure_score
from .stats import pearson, spearman

CORRELATIONS = {"pearson": pearson, "spearman": spearman}


@dataclass
class AffectProfile:
    segment_id: str
    z_sentiment: float | None
    emotions: dict | None  # emotion -> f_E
    n_affect_tags: int
    n_emotion_tags: int


def sentiment_score(f_positive, f_negative, pop_positive, pop_negative):
    """z(positive fraction) - z(negative fraction)."""
    return pleasure_score(f_positive, f_negative, pop_positive, pop_negative)


def emotion_fractions(tally) -> dict | None:
    """Emotion fractions from a mapping emotion -> count or a SegmentTally.

    >>> emotion_fractions({"joy": 3, "fear": 1})
    {'joy': 0.75, 'fear': 0.25}
    """
    if hasattr(tally, "total"):
        tot = tally.total()
        counts = dict(zip(EMOTIONS, (int(v) for v in tot["emotion"]))) if tot else {}
    else:
        counts = dict(tally)
    total = sum(counts.values())
    if total == 0:
        return None
    return {e: n / total for e, n in counts.items()}


def _qualifying(tallies, min_tags):
    per_seg = tallies.group("segment")
    return per_seg.select((per_seg["n_smell"] >= max(min_tags, 1)) & (per_seg["n_tags"] > 0))


def _sentiment(table):
    """z_sentiment over the rows of `table` having affect tags; NaN elsewhere."""
    has = table["n_affect"] > 0
    z = np.full(len(table), np.nan)
    if has.any():
        fp = table["positive"][has] / table["n_tags"][has]
        fn = table["negative"][has] / table["n_tags"][has]
        z[has] = sentiment_score(fp, fn, fp, fn)
    return z


def sentiment_segments(tallies, min_tags: int = DEFAULT_MIN_TAGS) -> dict:
    table = _qualifying(tallies, min_tags)
    z = _sentiment(table)
    return {sid: float(v) for sid, v in zip(table.segment_labels(), z) if not np.isnan(v)}


def sentiment_segment(tallies, segment_id: str, min_tags: int = DEFAULT_MIN_TAGS) -> float | None:
    return sentiment_segments(tallies, min_tags).get(segment_id)


def affect_profiles(tallies, min_tags: int = DEFAULT_MIN_TAGS) -> dict:
    per_seg = tallies.group("segment")
    frac = fraction_matrix(per_seg["emotion"])
    try:
        z = sentiment_segments(tallies, min_tags)
    except StatsError:
        z = {}
    out = {}
    for row, sid in enumerate(per_seg.segment_labels()):
        n_emo = int(per_seg["n_emotion"][row])
        emo = dict(zip(EMOTIONS, frac[row].tolist())) if n_emo > 0 else None
        out[sid] = AffectProfile(sid, z.get(sid), emo, int(per_seg["n_affect"][row]), n_emo)
    return out


def _safe(fn, x, y):
    try:
        return fn(x, y)
    except StatsError:
        return float("nan")


def _thresholds(sweep):
    if sweep is None:
        return []
    if isinstance(sweep, str):
        lo, hi, step = (int(v) for v in sweep.split(":"))
        return list(range(lo, hi + 1, step))
    return [int(v) for v in sweep]


def correlate_smell_sentiment(tallies, min_tags: int = DEFAULT_MIN_TAGS) -> dict:
    """Correlation across qualifying segments of each f_S with z_sentiment.

    Returns ``{"n": segments used, "pearson": {S: r}, "spearman": {S: rho}}``;
    undefined cells are NaN.
    """
    table = _qualifying(tallies, min_tags)
    z = _sentiment(table)
    ok = ~np.isnan(z)
    frac = fraction_matrix(table["smell"])[ok]
    out = {"n": int(ok.sum())}
    for name, fn in CORRELATIONS.items():
        out[name] = {c: _safe(fn, frac[:, j], z[ok]) for j, c in enumerate(tallies.categories)}
    return out


def sweep_smell_sentiment(tallies, sweep="10:300:10") -> list:
    """:func:`correlate_smell_sentiment` at each min-tags threshold, as ``(threshold, result)``."""
    return [(t, correlate_smell_sentiment(tallies, t)) for t in _thresholds(sweep)]


def correlate_pleasure_sentiment(tallies, sweep=(DEFAULT_MIN_TAGS,)) -> list:
    """Rows ``(threshold, n, spearman, pearson)`` of z_pleasure vs z_sentiment.

    Both scores are re-standardized over the segments qualifying at each
    threshold.
    """
    rows = []
    for t in _thresholds(sweep):
        table = _qualifying(tallies, t)
        zs = _sentiment(table)
        ok = ~np.isnan(zs)
        sub = table.select(ok)
        if len(sub) < 3:
            rows.append((t, len(sub), float("nan"), float("nan")))
            continue
        fp = sub["pleasant"] / sub["n_tags"]
        fu = sub["unpleasant"] / sub["n_tags"]
        try:
            zp = pleasure_score(fp, fu, fp, fu)
        except StatsError:
            rows.append((t, len(sub), float("nan"), float("nan")))
            continue
        rows.append((t, len(sub), _safe(spearman, zp, zs[ok]), _safe(pearson, zp, zs[ok])))
    return rows


def emotion_matrix(tallies, min_tags: int = DEFAULT_MIN_TAGS, method: str = "pearson"):
    """Correlation of f_S with f_E across qualifying segments.

    Returns ``(categories, emotions, matrix)`` where the matrix is
    categories x emotions with NaN for undefined cells. Segments qualify
    with at least `min_tags` smell tags and one emotion tag.
    """
    fn = CORRELATIONS[method]
    table = _qualifying(tallies, min_tags)
    table = table.select(table["n_emotion"] > 0)
    fs = fraction_matrix(table["smell"])
    fe = fraction_matrix(table["emotion"])
    mat = np.full((len(tallies.categories), len(EMOTIONS)), np.nan)
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            mat[i, j] = _safe(fn, fs[:, i], fe[:, j])
    return tuple(tallies.categories), EMOTIONS, mat
