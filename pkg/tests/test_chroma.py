from collections import Counter
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smellscape.chroma import (
    CoCounts, category_color_strength, color_associations, color_matrix, count_cooccurrences,
    export_bipartite, strongest_color, word_color_strength, word_strengths,
)
from smellscape.errors import EmptyCategory, NoQualifyingColors
from smellscape.ingest import GeoTaggedRecord
from smellscape.lexicon import CANONICAL_COLORS, Lexicons, normalize

T0 = datetime(2012, 1, 1, tzinfo=timezone.utc)
_LEX = Lexicons.default()


def _photo(tags, mono=False, rid="p"):
    return GeoTaggedRecord(rid, 0.0, 0.0, T0, tuple(tags), {"monochrome": True} if mono else {}, "photo")


def _counts(p_s, cells):
    """cells: {color: (p_c, p_cs)} for smell word 's'."""
    return CoCounts(Counter({("s", c): v[1] for c, v in cells.items()}),
                    Counter({c: v[0] for c, v in cells.items()}), Counter({"s": p_s}), 0)


def test_violet_flower_with_purple(lex):
    assert lex.smell.lookup("violet") is not None
    cc = count_cooccurrences([_photo(["violet", "purple"])], lex)
    assert cc.p_cs[("violet", "violet")] == 1
    # the flower word is not also read as a color
    assert cc.p_c["violet"] == 1


def test_photo_level_dedup(lex):
    cc = count_cooccurrences([_photo(["cut grass", "lime", "Olive", "green"])], lex)
    assert cc.p_cs[("cut grass", "green")] == 1
    assert cc.p_c["green"] == 1 and cc.p_s["cut grass"] == 1


def test_monochrome_skipped(lex):
    cc = count_cooccurrences([_photo(["cut grass", "green"], mono=True)], lex)
    assert cc.n_photos == 0 and not cc.p_cs and not cc.p_s


def test_strength_worked_example():
    cc = _counts(100, {"red": (100, 30), "blue": (50, 15)})
    s = word_color_strength("s", cc)
    assert s["red"] == pytest.approx(0.6, abs=1e-15)
    assert s["blue"] == pytest.approx(0.4, abs=1e-15)
    s7 = word_color_strength("s", cc.scaled(7))
    assert s7 == pytest.approx(s, abs=1e-15)


def test_strength_single_and_symmetric():
    assert word_color_strength("s", _counts(20, {"green": (40, 12)})) == {"green": 1.0}
    s = word_color_strength("s", _counts(20, {"green": (40, 12), "red": (40, 12)}))
    assert s == {"green": 0.5, "red": 0.5}


def test_strength_min_photos():
    cc = _counts(100, {"red": (100, 30), "blue": (50, 9)})
    assert word_color_strength("s", cc) == {"red": 1.0}
    with pytest.raises(NoQualifyingColors):
        word_color_strength("s", _counts(100, {"red": (100, 9)}))


def test_category_examples():
    cat = category_color_strength("nature", {"a": {"green": 0.7, "red": 0.3}, "b": {"green": 0.6, "blue": 0.4}})
    assert cat.raw["green"] == pytest.approx(1.3)
    assert cat.normalized["green"] == 1.0 and cat.entropy == 0.0
    cat = category_color_strength("x", {"a": {"green": 0.5, "red": 0.1}, "b": {"brown": 0.5}})
    assert cat.normalized["green"] == cat.normalized["brown"] == 0.5
    assert cat.entropy == pytest.approx(1.0)
    with pytest.raises(EmptyCategory):
        category_color_strength("x", {})


def test_argmax_tie_uses_canonical_order():
    assert strongest_color({"yellow": 0.5, "blue": 0.5}) == "blue"
    assert strongest_color({"white": 0.4, "black": 0.4, "red": 0.2}) == "black"


def test_bipartite_export():
    class Tax:
        categories = ("nature", "waste")
        entries = {"grass": ("nature", None), "bin": ("waste", None)}

    cc = CoCounts(Counter({("grass", "green"): 20}), Counter({"green": 30}), Counter({"grass": 25}), 40)
    assoc = color_associations(cc, Tax, 10)
    with pytest.warns(UserWarning):
        doc = export_bipartite(assoc, ["nature", "waste"])
    assert doc["edges"] == [{"source": "nature", "target": "green", "weight": 1.0, "raw": 1.0, "photos": 20}]
    assert doc["marginals"]["green"] == 1.0
    assert {n["id"] for n in doc["nodes"]} == {"nature", *CANONICAL_COLORS}


def naive_counts(photos, lex):
    """Recount per photo with explicit loops."""
    p_cs, p_c, p_s = Counter(), Counter(), Counter()
    for ph in photos:
        if ph.monochrome:
            continue
        smells, colors = set(), set()
        for t in ph.tags:
            w = normalize(t)
            if w in lex.smell.entries:
                smells.add(w)
        for t in ph.tags:
            w = normalize(t)
            if w not in smells and w in lex.color.nuances:
                colors.add(lex.color.nuances[w])
        for s in smells:
            p_s[s] += 1
            for c in colors:
                p_cs[(s, c)] += 1
        for c in colors:
            p_c[c] += 1
    return p_cs, p_c, p_s


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.lists(st.sampled_from(
    ["violet", "purple", "cut grass", "grass", "garbage", "Green", "lime", "red", "crimson", "smoke", "black",
     "coffee", "london"]), max_size=5), st.booleans()), max_size=50))
def test_counts_match_naive_recount(photos):
    lex = _LEX
    recs = [_photo(tags, mono, f"p{k}") for k, (tags, mono) in enumerate(photos)]
    cc = count_cooccurrences(recs, lex)
    p_cs, p_c, p_s = naive_counts(recs, lex)
    assert (+cc.p_cs, +cc.p_c, +cc.p_s) == (+p_cs, +p_c, +p_s)
    for (s, c), v in cc.p_cs.items():
        assert v <= min(cc.p_c[c], cc.p_s[s])
    for s in p_s:
        try:
            got = word_color_strength(s, cc, 1)
        except NoQualifyingColors:
            continue
        ratios = {c: p_cs[(s, c)] / (p_c[c] + p_s[s]) for c in CANONICAL_COLORS if p_cs[(s, c)] >= 1}
        tot = sum(ratios.values())
        assert got == pytest.approx({c: v / tot for c, v in ratios.items()}, abs=1e-15)


@settings(max_examples=200)
@given(st.integers(1, 500), st.lists(st.tuples(st.integers(1, 500), st.integers(0, 500)), min_size=10, max_size=10),
       st.integers(1, 9))
def test_strengths_normalized_and_scale_invariant(p_s, cells, k):
    cc = CoCounts(Counter({("s", c): min(pcs, pc, p_s) for c, (pc, pcs) in zip(CANONICAL_COLORS, cells)}),
                  Counter({c: pc for c, (pc, _) in zip(CANONICAL_COLORS, cells)}), Counter({"s": p_s}), 0)
    try:
        s = word_color_strength("s", cc, min_photos=1)
    except NoQualifyingColors:
        return
    assert abs(sum(s.values()) - 1) <= 1e-9
    assert all(0 <= v <= 1 for v in s.values())
    # with a threshold of one photo, scaling cannot change which colors survive
    assert word_color_strength("s", cc.scaled(k), min_photos=1) == pytest.approx(s, abs=1e-12)


def test_planted_city_colors(city):
    cc = count_cooccurrences(city.dataset.records, city.lexicons)
    assoc = color_associations(cc, city.lexicons.smell, 10)
    words = word_strengths(cc, 10)
    assert words
    for v in words.values():
        assert abs(sum(v.values()) - 1) <= 1e-9
    cats, colors, mat = color_matrix(assoc)
    ent = [assoc.categories[c].entropy for c in cats]
    assert ent == sorted(ent)
    dominant = {c: colors[int(np.argmax(row))] for c, row in zip(cats, mat)}
    assert dominant.get("nature") == "green"
    assert dominant.get("emissions") == "black"

