"""Build count tables directly, bypassing snapping."""
import numpy as np

from smellscape.geo import SCALAR_FIELDS, CountTable
from smellscape.lexicon import DEFAULT_CATEGORIES, EMOTIONS

SUBCATS = ("plants", "soil", "other")


def make_table(rows, segment_ids=None, categories=DEFAULT_CATEGORIES):
    """`rows`: dicts with segment (int), month (int) and any count fields.

    ``smell`` / ``emotion`` may be given as {name: count}. ``n_smell`` and
    ``n_emotion`` default to the vector sums; ``n_tags`` defaults to
    ``n_smell + n_affect``.
    """
    n = len(rows)
    segs = np.array([r["segment"] for r in rows], dtype=np.int64)
    if segment_ids is None:
        segment_ids = tuple(f"s{k:02d}" for k in range(int(segs.max(initial=-1)) + 1))
    counts = {f: np.zeros(n, np.int64) for f in SCALAR_FIELDS}
    counts["smell"] = np.zeros((n, len(categories)), np.int64)
    counts["subcategory"] = np.zeros((n, len(SUBCATS)), np.int64)
    counts["emotion"] = np.zeros((n, len(EMOTIONS)), np.int64)
    for i, r in enumerate(rows):
        for c, v in r.get("smell", {}).items():
            counts["smell"][i, categories.index(c)] = v
        for c, v in r.get("subcategory", {}).items():
            counts["subcategory"][i, SUBCATS.index(c)] = v
        for e, v in r.get("emotion", {}).items():
            counts["emotion"][i, EMOTIONS.index(e)] = v
        counts["n_smell"][i] = r.get("n_smell", counts["smell"][i].sum())
        counts["n_emotion"][i] = r.get("n_emotion", counts["emotion"][i].sum())
        for f in ("pleasant", "unpleasant", "positive", "negative", "n_affect", "n_records"):
            counts[f][i] = r.get(f, 0)
        counts["n_tags"][i] = r.get("n_tags", counts["n_smell"][i] + counts["n_affect"][i])
    month = np.array([r.get("month", 2012 * 12) for r in rows], dtype=np.int64)
    return CountTable({"segment": segs, "month": month}, counts, tuple(segment_ids),
                      tuple(categories), SUBCATS, {})


def random_table(rng, n_segments=20, n_months=24, zero_rate=0.2):
    rows = []
    for s in range(n_segments):
        for m in range(n_months):
            if rng.random() < zero_rate:
                continue
            smell = dict(zip(DEFAULT_CATEGORIES, rng.integers(0, 6, len(DEFAULT_CATEGORIES)).tolist()))
            n_smell = sum(smell.values())
            pl = int(rng.integers(0, n_smell + 1))
            un = int(rng.integers(0, n_smell - pl + 1))
            n_aff = int(rng.integers(1, 8))
            pos = int(rng.integers(0, n_aff + 1))
            emo = dict(zip(EMOTIONS, rng.integers(0, 4, len(EMOTIONS)).tolist()))
            rows.append({"segment": s, "month": 2010 * 12 + m, "smell": smell, "pleasant": pl,
                         "unpleasant": un, "n_affect": n_aff, "positive": pos, "negative": n_aff - pos,
                         "emotion": emo, "n_records": n_smell + n_aff,
                         "n_tags": n_smell + n_aff + int(rng.integers(0, 5))})
    return make_table(rows, tuple(f"s{k:02d}" for k in range(n_segments)))
