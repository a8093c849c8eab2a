import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import make_table, random_table
from smellscape.errors import MonthEmpty, SeriesTooShort, ZeroVariance
from smellscape.lexicon import DEFAULT_CATEGORIES
from smellscape.smellmetrics import (
    distinctiveness_ranking, fraction_matrix, month_entropy, month_report, monthly_fractions,
    monthly_series, pleasure_month, pleasure_months, pleasure_score, pleasure_segments,
    seasonality, seasonality_by_category, segment_fractions, segment_profiles, smell_of_month,
)

JAN = 2012 * 12


def test_segment_fraction_examples():
    assert segment_fractions({"nature": 2, "food": 2, "waste": 0}) == {"nature": 0.5, "food": 0.5, "waste": 0.0}
    f = segment_fractions({"waste": 7}, DEFAULT_CATEGORIES)
    assert f["waste"] == 1 and sum(f.values()) == 1
    assert segment_fractions({c: 0 for c in DEFAULT_CATEGORIES}) is None


def test_segment_fractions_from_tally():
    t = make_table([{"segment": 0, "smell": {"nature": 3}}, {"segment": 0, "month": JAN + 1, "smell": {"food": 1}}])
    assert segment_fractions(t.segment_tally("s00"))["nature"] == 0.75


def test_monthly_fraction_examples():
    t = make_table([{"segment": 0, "month": JAN, "smell": {"nature": 5}},
                    {"segment": 1, "month": JAN + 12, "smell": {"nature": 2}},
                    {"segment": 0, "month": JAN + 2, "smell": {"food": 30, "waste": 10}}])
    assert monthly_fractions(t, 1)["nature"] == 1
    f = monthly_fractions(t, 3)
    assert (f["food"], f["waste"]) == (0.75, 0.25)
    assert monthly_fractions(t, 5) is None
    assert monthly_fractions(t, JAN + 12, per_year=True)["nature"] == 1


def test_seasonality_examples():
    t = np.arange(120)
    assert seasonality(np.sin(2 * np.pi * t / 12)) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(SeriesTooShort):
        seasonality(np.arange(23.0))
    with pytest.raises(ZeroVariance):
        seasonality(np.ones(48))


def test_seasonality_formula():
    f = np.random.default_rng(2).random(40)
    mu, var = f.mean(), f.var()
    want = np.mean([(f[i] - mu) * (f[i + 12] - mu) for i in range(28)]) / var
    assert seasonality(f) == pytest.approx(want, abs=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.floats(0.01, 100), st.floats(-50, 50))
def test_seasonality_affine_invariant(seed, a, b):
    f = np.random.default_rng(seed).random(36)
    assert seasonality(a * f + b) == pytest.approx(seasonality(f), abs=1e-9)


def test_monthly_series_interpolates_interior_gaps():
    rows = [{"segment": 0, "month": JAN + m, "smell": {"nature": 1 + m % 3, "food": 1}}
            for m in range(30) if m not in (0, 10, 11, 29)]
    s = monthly_series(make_table(rows))
    assert s.months[0] == JAN + 1 and s.months[-1] == JAN + 28
    assert s.interpolated.sum() == 2
    row = np.nonzero(s.months == JAN + 10)[0][0]
    assert np.isnan(s.pleasant[row])
    assert s.fractions.sum(axis=1) == pytest.approx(np.ones(len(s.months)))
    r = seasonality_by_category(make_table(rows))
    assert set(r) == set(DEFAULT_CATEGORIES)
    assert math.isnan(r["waste"])


def test_entropy_examples():
    one_hot = [1.0] + [0.0] * 9
    assert month_entropy(one_hot) == 0
    assert month_entropy([0.1] * 10) == pytest.approx(math.log2(10))
    assert month_entropy([0.5, 0.5] + [0.0] * 8) == 1


def test_distinctiveness_ranking():
    t = make_table([{"segment": 0, "month": JAN, "smell": {c: 1 for c in DEFAULT_CATEGORIES}},
                    {"segment": 0, "month": JAN + 3, "smell": {"nature": 9}},
                    {"segment": 0, "month": JAN + 5, "smell": {"nature": 1, "food": 1}}])
    ranking = distinctiveness_ranking(t)
    assert [m for m, _ in ranking] == [4, 6, 1]
    assert ranking[0][1] == 0


def test_pleasure_zero_and_shift():
    fp = np.array([0.1, 0.2, 0.3, 0.6])
    fu = np.array([0.3, 0.1, 0.2, 0.2])
    assert pleasure_score(fp.mean(), fu.mean(), fp, fu) == 0.0
    base = pleasure_score(0.25, 0.15, fp, fu)
    assert pleasure_score(0.25 + fp.std(), 0.15, fp, fu) == pytest.approx(base + 1, abs=1e-12)
    with pytest.raises(ZeroVariance):
        pleasure_score(0.1, 0.1, [0.1, 0.1], fu[:2])


def test_three_segment_toy():
    p, u = [0.2, 0.4, 0.6], [0.1, 0.1, 0.4]
    rows = [{"segment": k, "smell": {"nature": 30}, "pleasant": round(p[k] * 100),
             "unpleasant": round(u[k] * 100), "n_tags": 100} for k in range(3)]
    z = pleasure_segments(make_table(rows))
    # population sigmas by hand
    sp = math.sqrt(((0.2 - 0.4) ** 2 + 0 + (0.6 - 0.4) ** 2) / 3)
    su = math.sqrt(((0.1 - 0.2) ** 2 * 2 + (0.4 - 0.2) ** 2) / 3)
    assert z["s02"] == pytest.approx((0.6 - 0.4) / sp - (0.4 - 0.2) / su, abs=1e-12)
    assert sum(z.values()) == pytest.approx(0.0, abs=1e-12)


def test_pleasure_min_tags_filter():
    rows = [{"segment": k, "smell": {"nature": n}, "pleasant": k, "unpleasant": 3 - k, "n_tags": 40}
            for k, n in enumerate([40, 35, 5, 31])]
    assert set(pleasure_segments(make_table(rows))) == {"s00", "s01", "s03"}


def test_pleasure_relabel_invariant():
    rng = np.random.default_rng(0)
    t = random_table(rng, 8, 3)
    z = pleasure_segments(t, 10)
    relabeled = type(t)(dict(t.keys), dict(t.counts), tuple(f"x{s}" for s in t.segment_ids),
                        t.categories, t.subcategories, {})
    z2 = pleasure_segments(relabeled, 10)
    assert sorted(z.values()) == pytest.approx(sorted(z2.values()))
    assert z2 == {f"x{k}": v for k, v in z.items()}


def test_pleasure_months():
    rows = [{"segment": 0, "month": JAN + m, "smell": {"nature": 10}, "pleasant": m, "unpleasant": 12 - m,
             "n_tags": 20} for m in range(12)]
    z = pleasure_months(make_table(rows))
    assert list(z) == list(range(1, 13))
    assert z[12] > z[1]
    assert sum(z.values()) == pytest.approx(0, abs=1e-12)
    assert pleasure_month(make_table(rows), 6) == z[6]
    with pytest.raises(MonthEmpty):
        pleasure_month(make_table(rows[:3]), 7)


def test_smell_of_month_planted_park():
    park, rows = 3, []
    rows.append({"segment": park, "month": JAN + 3, "smell": {"nature": 90}, "subcategory": {"plants": 90}})
    for s in range(6):
        rows.append({"segment": s, "month": JAN + 3, "smell": {"food": 2}, "subcategory": {"other": 2}})
        rows.append({"segment": s, "month": JAN + 4, "smell": {"waste": 5}, "subcategory": {"other": 5}})
    t = make_table(rows)
    assert smell_of_month(t, 4, min_tags=2) == ("nature", "s03")
    assert smell_of_month(t, 4, min_tags=2, level="subcategory") == ("plants", "s03")
    with pytest.raises(MonthEmpty):
        smell_of_month(t, 8)
    # every segment ties at f_waste = 1: smallest id wins
    assert smell_of_month(t, 5, min_tags=2) == ("waste", "s00")
    # common rescaling keeps the argmax
    scaled = type(t)(t.keys, {k: v * 7 for k, v in t.counts.items()}, t.segment_ids, t.categories, t.subcategories)
    assert smell_of_month(scaled, 4, min_tags=2) == ("nature", "s03")
    report = month_report(t, min_tags=2)
    assert report[3] == (4, "nature", "s03") and report[0] == (1, None, None)


def test_smell_of_month_alphabetical_tie():
    t = make_table([{"segment": 0, "month": JAN, "smell": {"waste": 4, "food": 4}}])
    assert smell_of_month(t, 1, min_tags=1)[0] == "food"


def naive_profiles(t, min_tags):
    """Direct loops over rows: fractions and pleasure z per segment."""
    agg = {}
    for i, s in enumerate(t.keys["segment"]):
        a = agg.setdefault(int(s), {"smell": np.zeros(len(t.categories)), "p": 0, "u": 0, "n": 0})
        a["smell"] += t["smell"][i]
        a["p"] += t["pleasant"][i]
        a["u"] += t["unpleasant"][i]
        a["n"] += t["n_tags"][i]
    frac = {t.segment_ids[s]: a["smell"] / a["smell"].sum() for s, a in agg.items() if a["smell"].sum() > 0}
    q = {t.segment_ids[s]: (a["p"] / a["n"], a["u"] / a["n"]) for s, a in agg.items() if a["smell"].sum() >= min_tags}
    ps = [v[0] for v in q.values()]
    us = [v[1] for v in q.values()]
    mp, mu = sum(ps) / len(ps), sum(us) / len(us)
    sp = math.sqrt(sum((x - mp) ** 2 for x in ps) / len(ps))
    su = math.sqrt(sum((x - mu) ** 2 for x in us) / len(us))
    z = {k: (v[0] - mp) / sp - (v[1] - mu) / su for k, v in q.items()}
    return frac, z


def naive_month_fractions(t, month):
    tot = np.zeros(len(t.categories))
    for i, m in enumerate(t.keys["month"]):
        if m % 12 == month - 1:
            tot += t["smell"][i]
    return tot / tot.sum()


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_equivalence(seed):
    t = random_table(np.random.default_rng(seed), 20, 24)
    frac, z = naive_profiles(t, 100)
    prof = segment_profiles(t, 100)
    for sid, f in frac.items():
        assert [prof[sid].fractions[c] for c in t.categories] == pytest.approx(f, abs=1e-12)
    got = pleasure_segments(t, 100)
    assert set(got) == set(z)
    for sid in z:
        assert got[sid] == pytest.approx(z[sid], abs=1e-9)
    for m in range(1, 13):
        f = monthly_fractions(t, m)
        assert [f[c] for c in t.categories] == pytest.approx(naive_month_fractions(t, m), abs=1e-12)


@settings(max_examples=100)
@given(st.lists(st.lists(st.integers(0, 50), min_size=10, max_size=10), min_size=1, max_size=20))
def test_fractions_sum_to_one(rows):
    f = fraction_matrix(rows)
    for r, row in zip(rows, f):
        if sum(r) > 0:
            assert abs(row.sum() - 1) <= 1e-9 and (row >= 0).all() and (row <= 1).all()
        else:
            assert np.isnan(row).all()
