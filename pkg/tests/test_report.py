import json

import numpy as np
import pytest

from helpers import make_table
from smellscape.errors import UnknownLayer
from smellscape.geo import build_index
from smellscape.ingest import PollutantTable, StreetSegment, Venue, parse_street_network
from smellscape.report import (
    DIVERGING_RAMP, diverging_color, dumps, export_geojson, fmt_float, pollution_summary, provenance,
    validate_pollution, validate_venues, write_csv, write_json,
)
from smellscape.smellmetrics import fraction_matrix
from smellscape.stats import spearman


def _segments(n):
    return [StreetSegment(f"s{k:02d}", ((51.5 + 0.001 * k, -0.12), (51.5 + 0.001 * k, -0.119)), 69.4 + k)
            for k in range(n)]


def test_formatting():
    assert fmt_float(1 / 3) == "0.333333"
    assert fmt_float(-1e-9) == "0.000000"
    assert fmt_float(float("nan")) == "NA"
    assert dumps({"b": 1.0, "a": [1, None, float("inf")], "c": "x"}) == '{"a":[1,null,null],"b":1.000000,"c":"x"}'


def test_diverging_ramp():
    assert diverging_color(0.0) == DIVERGING_RAMP[2] == "#ffffbf"
    assert diverging_color(-9) == DIVERGING_RAMP[0]
    assert diverging_color(3.2) == DIVERGING_RAMP[4]
    assert diverging_color(0.49) == DIVERGING_RAMP[2]
    assert diverging_color(0.5) == DIVERGING_RAMP[3]
    assert diverging_color(float("nan")) is None


def test_csv_provenance(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("hello")
    out = tmp_path / "o.csv"
    write_csv(out, ["a", "b"], [(1, 0.5), ("x", None)], provenance({"in": src}, {"k": 2}))
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# inputs: ")
    assert "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824" in lines[0]
    assert lines[-3:] == ["a,b", "1,0.500000", "x,NA"]
    assert not any("time" in line for line in lines)


def test_validate_pollution_cells_match_stats():
    rng = np.random.default_rng(0)
    n = 30
    em = rng.random(n)
    rows = [{"segment": k, "smell": {"emissions": int(10 + 40 * em[k]), "nature": int(rng.integers(5, 40))}}
            for k in range(n)]
    t = make_table(rows)
    segs = _segments(n)
    pol = PollutantTable({f"s{k:02d}": (20 + 30 * em[k], 10.0, 5.0 + k) for k in range(n)})
    out = validate_pollution(t, pol, segs, sweep=(1,))
    per = t.group("segment")
    frac = fraction_matrix(per["smell"])
    j = t.categories.index("emissions")
    no2 = [20 + 30 * em[k] for k in range(n)]
    cell = pollution_summary(out, 1, "no2")["emissions"]
    assert cell["fraction"] == pytest.approx(spearman(frac[:, j], no2))
    assert cell["count"] == pytest.approx(spearman(per["smell"][:, j], no2))
    dens = per["smell"][:, j] / np.array([s.length_m for s in segs])
    assert cell["density"] == pytest.approx(spearman(dens, no2))
    # constant pm10 gives undefined cells
    assert np.isnan(pollution_summary(out, 1, "pm10")["emissions"]["fraction"])


def test_validate_pollution_empty_table():
    t = make_table([{"segment": 0, "smell": {"food": 3}}])
    with pytest.warns(UserWarning):
        assert validate_pollution(t, PollutantTable({}), _segments(1)) == []


def test_validate_venues():
    segs = _segments(6)
    idx = build_index(segs)
    assert validate_venues(make_table([{"segment": 0, "smell": {"food": 3}}]), [], idx) == []
    rows = [{"segment": k, "smell": {"nature": 5 * k + 1, "food": 10}} for k in range(6)]
    venues = [Venue(51.5 + 0.001 * k, -0.1195, "natural") for k in range(6) for _ in range(k)]
    out = validate_venues(make_table(rows), venues, idx, sweep=(1,))
    kinds = {r[1] for r in out}
    assert kinds == {"natural"}
    assert len(out) == 10
    nature = next(r for r in out if r[2] == "nature")
    assert nature[5] == pytest.approx(1.0)
    assert nature[4] > 0.9


def test_planted_pollution_and_venues(city, city_tallies, city_index):
    rows = validate_pollution(city_tallies, city.dataset.pollutants, city.dataset.segments)
    cell = pollution_summary(rows, 30, "no2")["emissions"]
    assert cell["fraction"] >= 0.9
    assert cell["fraction"] > cell["count"] and cell["fraction"] > cell["density"]
    ven = validate_venues(city_tallies, city.dataset.venues, city_index, sweep=(30,))
    get = {(r[1], r[2]): r[5] for r in ven}
    assert get[("natural", "nature")] > 0.3
    assert get[("natural", "emissions")] < 0
    assert get[("cuisine", "food")] > 0.3


def test_geojson_layers():
    segs = _segments(3)
    rows = [{"segment": k, "smell": {"nature": 30 + 10 * k, "food": 10}, "pleasant": 5 * k, "unpleasant": 4 - 2 * k,
             "n_affect": 5, "positive": k + 1, "negative": 1, "n_tags": 60} for k in range(2)]
    t = make_table(rows, ("s00", "s01", "s02"))
    doc = export_geojson(t, segs, "pleasure")
    f0, f1, f2 = doc["features"]
    assert f0["properties"]["z_pleasure"] == pytest.approx(-f1["properties"]["z_pleasure"])
    assert f2["properties"]["metric"] is None and "color" not in f2["properties"]
    assert f2["properties"]["n_tags"] == 0
    assert f0["properties"]["f_nature"] == pytest.approx(0.75)
    doc = export_geojson(t, segs, "smell:nature")
    assert doc["features"][0]["properties"]["metric"] == pytest.approx(0.75)
    assert doc["features"][0]["properties"]["color"]
    with pytest.raises(UnknownLayer):
        export_geojson(t, segs, "smell:perfume")


def test_geojson_single_segment_midramp():
    segs = _segments(3)
    rows = [{"segment": k, "smell": {"food": 40}, "pleasant": p, "unpleasant": u, "n_tags": 40}
            for k, (p, u) in enumerate([(2, 4), (4, 4), (6, 4)])]
    rows[0]["unpleasant"], rows[2]["unpleasant"] = 2, 6
    doc = export_geojson(make_table(rows), segs, "pleasure")
    mid = doc["features"][1]["properties"]
    assert mid["z_pleasure"] == pytest.approx(0, abs=1e-12)
    assert mid["color"] == "#ffffbf"


def test_geojson_round_trip_and_bytes(tmp_path):
    segs = _segments(4)
    t = make_table([{"segment": k, "smell": {"food": 40, "nature": k}, "n_tags": 40} for k in range(4)])
    doc = export_geojson(t, segs, "smell:food")
    again = parse_street_network(json.loads(dumps(doc)))
    assert [s.polyline for s in again] == [s.polyline for s in segs]
    write_json(tmp_path / "a.json", doc)
    write_json(tmp_path / "b.json", export_geojson(t, segs, "smell:food"))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
