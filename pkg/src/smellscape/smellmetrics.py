"""Smell-layer metrics: per-segment and per-month category fractions,
lag autocorrelation, monthly entropy, pleasantness z-scores and the
smell-of-the-month table.

Months are calendar months 1-12 unless ``per_year`` is requested, in which
case a month is the integer ``year * 12 + (month - 1)``.

Pleasant/unpleasant fractions are taken over all (deduplicated) tags of a
segment or month; population statistics use segments with at least
``min_tags`` smell tags, or the twelve calendar months.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MonthEmpty, SeriesTooShort, ZeroVariance
from .stats import as_series, shannon_entropy

DEFAULT_MIN_TAGS = 30
MONTH_NAMES = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
               "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")


@dataclass
class SegmentProfile:
    segment_id: str
    fractions: dict | None  # category -> f_S, None when no smell tags
    z_pleasure: float | None
    n_smell_tags: int


@dataclass
class MonthlySmellSeries:
    months: np.ndarray        # month indices (year * 12 + month - 1), consecutive
    names: tuple              # category (or subcategory) names
    fractions: np.ndarray     # (T, K)
    interpolated: np.ndarray  # (T,) bool, True where the month had no smell tags
    pleasant: np.ndarray      # (T,) fraction of tags, NaN where interpolated
    unpleasant: np.ndarray

    def series(self, name) -> np.ndarray:
        return self.fractions[:, self.names.index(name)]

    def entropy(self) -> np.ndarray:
        return np.array([shannon_entropy(f) for f in self.fractions])


def _level(table, level):
    if level == "category":
        return table["smell"], table.categories
    if level == "subcategory":
        return table["subcategory"], table.subcategories
    raise ValueError(f"unknown level {level!r}")


def fraction_matrix(counts) -> np.ndarray:
    """Row-normalize a count matrix; rows with no counts become NaN."""
    counts = np.asarray(counts, dtype=float)
    tot = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(tot > 0, counts / np.where(tot > 0, tot, 1), np.nan)


def segment_fractions(tally, categories=None) -> dict | None:
    """Category fractions of one segment, or None when it has no smell tags.

    `tally` may be a :class:`~smellscape.geo.SegmentTally` or a mapping of
    category -> count.

    >>> segment_fractions({"nature": 2, "food": 2, "waste": 0})
    {'nature': 0.5, 'food': 0.5, 'waste': 0.0}
    """
    if hasattr(tally, "smell_counts"):
        counts = tally.smell_counts()
    else:
        counts = dict(tally)
    if categories is not None:
        counts = {c: counts.get(c, 0) for c in categories}
    total = sum(counts.values())
    if total == 0:
        return None
    return {c: n / total for c, n in counts.items()}


def pleasure_score(f_pleasant, f_unpleasant, pop_pleasant, pop_unpleasant):
    """z(pleasant fraction) - z(unpleasant fraction) against the given populations."""
    pp = as_series(pop_pleasant, "pleasant population")
    pu = as_series(pop_unpleasant, "unpleasant population")
    sp, su = pp.std(), pu.std()
    if pp.size == 0 or sp == 0:
        raise ZeroVariance("pleasant fractions have zero variance")
    if pu.size == 0 or su == 0:
        raise ZeroVariance("unpleasant fractions have zero variance")
    f_pleasant = np.asarray(f_pleasant, dtype=float)
    f_unpleasant = np.asarray(f_unpleasant, dtype=float)
    z = (f_pleasant - pp.mean()) / sp - (f_unpleasant - pu.mean()) / su
    return float(z) if z.ndim == 0 else z


def _segment_table(tallies, min_tags):
    per_seg = tallies.group("segment")
    qualifying = (per_seg["n_smell"] >= max(min_tags, 1)) & (per_seg["n_tags"] > 0)
    return per_seg, qualifying


def pleasure_segments(tallies, min_tags: int = DEFAULT_MIN_TAGS) -> dict:
    """z_pleasure for every segment with at least `min_tags` smell tags."""
    per_seg, ok = _segment_table(tallies, min_tags)
    sub = per_seg.select(ok)
    if len(sub) == 0:
        return {}
    fp = sub["pleasant"] / sub["n_tags"]
    fu = sub["unpleasant"] / sub["n_tags"]
    z = pleasure_score(fp, fu, fp, fu)
    return dict(zip(sub.segment_labels(), np.atleast_1d(z).tolist()))


def pleasure_segment(tallies, segment_id: str, min_tags: int = DEFAULT_MIN_TAGS) -> float | None:
    return pleasure_segments(tallies, min_tags).get(segment_id)


def segment_profiles(tallies, min_tags: int = DEFAULT_MIN_TAGS) -> dict:
    """SegmentProfile for every segment present in `tallies`."""
    per_seg = tallies.group("segment")
    frac = fraction_matrix(per_seg["smell"])
    try:
        z = pleasure_segments(tallies, min_tags)
    except ZeroVariance:
        z = {}
    out = {}
    for row, sid in enumerate(per_seg.segment_labels()):
        n = int(per_seg["n_smell"][row])
        f = dict(zip(tallies.categories, frac[row].tolist())) if n > 0 else None
        out[sid] = SegmentProfile(sid, f, z.get(sid), n)
    return out


def _month_rows(tallies, per_year):
    return tallies.group("month") if per_year else tallies.group("calendar_month")


def _month_key(t, per_year):
    return int(t) if per_year else int(t) - 1


def monthly_fractions(tallies, t, per_year: bool = False, level: str = "category") -> dict | None:
    """City-wide fractions for month `t` (1-12, or a month index with `per_year`)."""
    table = _month_rows(tallies, per_year)
    keys = table.keys["month" if per_year else "calendar_month"]
    counts, names = _level(table, level)
    rows = np.nonzero(keys == _month_key(t, per_year))[0]
    if len(rows) == 0 or counts[rows[0]].sum() == 0:
        return None
    c = counts[rows[0]].astype(float)
    return dict(zip(names, (c / c.sum()).tolist()))


def monthly_series(tallies, level: str = "category") -> MonthlySmellSeries:
    """Per-(year, month) fraction series from the first to the last month with smell tags.

    Interior months without smell tags are linearly interpolated and flagged.
    """
    table = tallies.group("month")
    counts, names = _level(table, level)
    defined = counts.sum(axis=1) > 0
    if not defined.any():
        empty = np.empty((0, len(names)))
        return MonthlySmellSeries(np.empty(0, np.int64), tuple(names), empty,
                                  np.empty(0, bool), np.empty(0), np.empty(0))
    mk = table.keys["month"][defined]
    frac = fraction_matrix(counts[defined])
    n_tags = table["n_tags"][defined].astype(float)
    fp = table["pleasant"][defined] / n_tags
    fu = table["unpleasant"][defined] / n_tags
    months = np.arange(mk.min(), mk.max() + 1)
    interp = ~np.isin(months, mk)
    full = np.column_stack([np.interp(months, mk, frac[:, j]) for j in range(frac.shape[1])])
    pl = np.full(len(months), np.nan)
    un = np.full(len(months), np.nan)
    pos = np.searchsorted(months, mk)
    pl[pos], un[pos] = fp, fu
    return MonthlySmellSeries(months, tuple(names), full, interp, pl, un)


def seasonality(series, lag: int = 12) -> float:
    """Lag autocorrelation ``E[(f_t - mu)(f_{t+lag} - mu)] / sigma^2``.

    The expectation runs over all ``t`` with both ends inside the series;
    mean and variance are those of the whole series.
    """
    f = as_series(series)
    if lag < 1:
        raise ValueError("lag must be positive")
    if len(f) < 2 * lag:
        raise SeriesTooShort(f"need at least {2 * lag} months, got {len(f)}")
    var = f.var()
    if var == 0:
        raise ZeroVariance("constant series")
    mu = f.mean()
    return float(np.mean((f[:-lag] - mu) * (f[lag:] - mu)) / var)


def seasonality_by_category(tallies, lag: int = 12, level: str = "category") -> dict:
    """R per category; categories whose series is constant or too short map to NaN."""
    series = monthly_series(tallies, level)
    out = {}
    for j, name in enumerate(series.names):
        try:
            out[name] = seasonality(series.fractions[:, j], lag)
        except (ZeroVariance, SeriesTooShort):
            out[name] = float("nan")
    return out


def month_entropy(fractions) -> float:
    if isinstance(fractions, dict):
        fractions = list(fractions.values())
    return shannon_entropy(fractions)


def distinctiveness_ranking(tallies, per_year: bool = False, level: str = "category") -> list:
    """``(month, entropy)`` pairs, most distinctive (lowest entropy) first.

    Equal entropies keep calendar order.
    """
    table = _month_rows(tallies, per_year)
    keys = table.keys["month" if per_year else "calendar_month"]
    counts, _ = _level(table, level)
    out = []
    for key, c in zip(keys, counts):
        if c.sum() == 0:
            continue
        t = int(key) if per_year else int(key) + 1
        out.append((t, shannon_entropy(c / c.sum())))
    return sorted(out, key=lambda x: (x[1], x[0]))


def pleasure_months(tallies, per_year: bool = False) -> dict:
    """z_pleasure for each month, normalized over the population of months."""
    table = _month_rows(tallies, per_year)
    table = table.select(table["n_tags"] > 0)
    keys = table.keys["month" if per_year else "calendar_month"]
    fp = table["pleasant"] / table["n_tags"]
    fu = table["unpleasant"] / table["n_tags"]
    z = np.atleast_1d(pleasure_score(fp, fu, fp, fu))
    return {(int(k) if per_year else int(k) + 1): float(v) for k, v in zip(keys, z)}


def pleasure_month(tallies, t, per_year: bool = False) -> float:
    scores = pleasure_months(tallies, per_year)
    if t not in scores:
        raise MonthEmpty(f"month {t} has no tags")
    return scores[t]


def smell_of_month(tallies, t, min_tags: int = DEFAULT_MIN_TAGS,
                   per_year: bool = False, level: str = "category"):
    """Top smell of month `t` and the segment where its fraction peaks.

    Returns ``(name, segment_id)``; segment_id is None if no segment has
    `min_tags` smell tags in that month. Ties: alphabetical name, then
    smallest segment id.
    """
    fr = monthly_fractions(tallies, t, per_year, level)
    if fr is None:
        raise MonthEmpty(f"month {t} has no smell tags")
    best = max(fr.values())
    top = min(name for name, v in fr.items() if v == best)

    key = tallies.key("month" if per_year else "calendar_month")
    month_rows = tallies.select(key == _month_key(t, per_year)).group("segment")
    counts, names = _level(month_rows, level)
    n = counts.sum(axis=1)
    ok = n >= max(min_tags, 1)
    if not ok.any():
        return top, None
    f_top = counts[ok, names.index(top)] / n[ok]
    ids = [month_rows.segment_ids[i] for i in month_rows.keys["segment"][ok]]
    peak = f_top.max()
    return top, min(sid for sid, v in zip(ids, f_top) if v == peak)


def month_report(tallies, min_tags: int = DEFAULT_MIN_TAGS, level: str = "category") -> list:
    """Rows ``(month, smell, segment_id)`` for the twelve calendar months; empty months give Nones."""
    rows = []
    for t in range(1, 13):
        try:
            smell, seg = smell_of_month(tallies, t, min_tags, level=level)
        except MonthEmpty:
            smell, seg = None, None
        rows.append((t, smell, seg))
    return rows
