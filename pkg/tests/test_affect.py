import math

import numpy as np
import pytest

from helpers import make_table, random_table
from smellscape.affect import (
    affect_profiles, correlate_pleasure_sentiment, correlate_smell_sentiment, emotion_fractions,
    emotion_matrix, sentiment_segments, sweep_smell_sentiment,
)
from smellscape.lexicon import DEFAULT_CATEGORIES, EMOTIONS
from smellscape.smellmetrics import fraction_matrix, pleasure_segments
from smellscape.stats import pearson, permutation_test, spearman


def test_emotion_fraction_examples():
    assert emotion_fractions({"joy": 5}) == {"joy": 1.0}
    assert emotion_fractions({"joy": 3, "fear": 1}) == {"joy": 0.75, "fear": 0.25}
    assert emotion_fractions({}) is None


def test_sentiment_at_means_is_zero():
    # symmetric population: the middle segment sits at both means
    rows = [{"segment": k, "smell": {"food": 40}, "n_affect": 10, "positive": pos, "negative": 10 - pos,
             "n_tags": 50} for k, pos in enumerate([2, 5, 8])]
    z = sentiment_segments(make_table(rows))
    assert z["s01"] == pytest.approx(0.0, abs=1e-12)


def test_sentiment_toy_oracle():
    pos, neg, n = [3, 6, 1], [2, 1, 4], [20, 30, 10]
    rows = [{"segment": k, "smell": {"food": 40}, "n_affect": pos[k] + neg[k], "positive": pos[k],
             "negative": neg[k], "n_tags": n[k]} for k in range(3)]
    z = sentiment_segments(make_table(rows))
    fp = [p / m for p, m in zip(pos, n)]
    fn = [q / m for q, m in zip(neg, n)]

    def zs(v, pop):
        mu = sum(pop) / 3
        return (v - mu) / math.sqrt(sum((x - mu) ** 2 for x in pop) / 3)

    for k in range(3):
        assert z[f"s{k:02d}"] == pytest.approx(zs(fp[k], fp) - zs(fn[k], fn), abs=1e-12)


def test_segment_without_affect_excluded():
    rows = [{"segment": k, "smell": {"food": 40}, "n_affect": a, "positive": p, "negative": a - p, "n_tags": 60}
            for k, (a, p) in enumerate([(10, 2), (10, 7), (0, 0), (10, 5)])]
    t = make_table(rows)
    assert "s02" not in sentiment_segments(t)
    prof = affect_profiles(t)
    assert prof["s02"].z_sentiment is None and prof["s02"].emotions is None


def test_affect_profiles_sum_to_one():
    t = random_table(np.random.default_rng(1), 10, 6)
    for p in affect_profiles(t, 10).values():
        if p.n_emotion_tags:
            assert sum(p.emotions.values()) == pytest.approx(1, abs=1e-9)
            assert all(0 <= v <= 1 for v in p.emotions.values())


def test_emotion_matrix_cells_are_pearson_of_columns():
    t = random_table(np.random.default_rng(2), 15, 4)
    cats, emos, mat = emotion_matrix(t, 20)
    per = t.group("segment")
    per = per.select((per["n_smell"] >= 20) & (per["n_emotion"] > 0))
    fs, fe = fraction_matrix(per["smell"]), fraction_matrix(per["emotion"])
    assert mat.shape == (10, 8) and emos == EMOTIONS
    for i in range(10):
        for j in range(8):
            assert mat[i, j] == pytest.approx(pearson(fs[:, i], fe[:, j]), abs=1e-12)
    _, _, rho = emotion_matrix(t, 20, method="spearman")
    assert rho[0, 0] == pytest.approx(spearman(fs[:, 0], fe[:, 0]))


def test_emotion_matrix_missing_row():
    rows = [{"segment": k, "smell": {"food": 30 + k, "nature": 5 * k}, "emotion": {"joy": k + 1, "fear": 3}}
            for k in range(5)]
    cats, _, mat = emotion_matrix(make_table(rows), 1)
    assert np.isnan(mat[cats.index("waste")]).all()
    assert not np.isnan(mat[cats.index("nature"), EMOTIONS.index("joy")])


def test_segment_order_and_doubling_invariance():
    t = random_table(np.random.default_rng(3), 12, 5)
    _, _, m1 = emotion_matrix(t, 20)
    rev = type(t)({k: v[::-1] for k, v in t.keys.items()}, {k: v[::-1] for k, v in t.counts.items()},
                  t.segment_ids, t.categories, t.subcategories)
    dbl = type(t)(t.keys, {k: 2 * v for k, v in t.counts.items()}, t.segment_ids, t.categories, t.subcategories)
    _, _, m2 = emotion_matrix(rev, 20)
    np.testing.assert_allclose(m1, m2, atol=1e-12)
    _, _, m3 = emotion_matrix(dbl, 40)
    np.testing.assert_allclose(m1, m3, atol=1e-12)
    assert sentiment_segments(dbl, 40) == pytest.approx(sentiment_segments(t, 20))
    c1, c2 = correlate_smell_sentiment(t, 20), correlate_smell_sentiment(dbl, 40)
    assert c1["spearman"] == pytest.approx(c2["spearman"], nan_ok=True)


def test_correlate_smell_sentiment_shape():
    t = random_table(np.random.default_rng(4), 12, 5)
    res = correlate_smell_sentiment(t, 20)
    assert set(res["pearson"]) == set(DEFAULT_CATEGORIES) == set(res["spearman"])
    sweep = sweep_smell_sentiment(t, "10:30:10")
    assert [th for th, _ in sweep] == [10, 20, 30]


def test_pleasure_sentiment_monotone_and_independent():
    rng = np.random.default_rng(7)
    n = 60
    latent = rng.random(n)
    rows = [{"segment": k, "smell": {"food": 50}, "pleasant": int(5 + 30 * latent[k]), "unpleasant": 5,
             "n_affect": 40, "positive": int(5 + 30 * latent[k]), "negative": 10, "n_tags": 100} for k in range(n)]
    (_, m, rho, _), = correlate_pleasure_sentiment(make_table(rows, tuple(f"s{k:02d}" for k in range(n))))
    assert m == n and rho == pytest.approx(1.0)

    other = rng.random(n)
    rows = [dict(r, positive=int(5 + 30 * other[k])) for k, r in enumerate(rows)]
    t = make_table(rows, tuple(f"s{k:02d}" for k in range(n)))
    (_, _, rho, _), = correlate_pleasure_sentiment(t)
    per = t.group("segment")
    zp = np.array([v for _, v in sorted(pleasure_segments(t).items())])
    zs = np.array([v for _, v in sorted(sentiment_segments(t).items())])
    assert abs(rho) < 0.4
    assert spearman(zp, zs) == pytest.approx(rho)
    assert permutation_test(zp, zs, spearman, 2000) > 0.01
    assert len(per) == n


def test_planted_city_recovery(city, city_tallies):
    (_, n, rho, _), = correlate_pleasure_sentiment(city_tallies)
    assert n > 300
    assert abs(rho - 0.7) <= 0.1
    cats, emos, mat = emotion_matrix(city_tallies)
    for cat, emo, _ in city.emotion_couplings:
        assert mat[cats.index(cat), emos.index(emo)] > 0.5
