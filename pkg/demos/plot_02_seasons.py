"""
Seasonality and the smell of each month
=======================================

Lag-12 autocorrelation of the monthly category series, the entropy of
each calendar month, and the street where the month's top smell peaks.
"""
import numpy as np

from smellscape.geo import aggregate, build_index
from smellscape.smellmetrics import (distinctiveness_ranking, month_report, monthly_series,
                                     pleasure_months, seasonality, seasonality_by_category)
from smellscape.synth import planted_city

# sanity check on pure signals first
t = np.arange(120)
print("sine, period 12:", round(seasonality(np.sin(2 * np.pi * t / 12)), 6))
print("white noise     :", round(seasonality(np.random.default_rng(0).uniform(size=120)), 3))

city = planted_city(n_segments=300, n_records=30_000, seed=2)
tallies = aggregate(city.dataset.records, build_index(city.dataset.segments), city.lexicons)

###############################################################################
# Nature is planted with a spring/summer bump, so it should stand out.
R = seasonality_by_category(tallies)
for cat, r in sorted(R.items(), key=lambda kv: -kv[1]):
    print(f"{cat:10s} R = {r:+.3f}")

series = monthly_series(tallies)
print(f"{len(series.months)} months, {series.interpolated.sum()} interpolated")

###############################################################################
# Most distinctive months have the lowest entropy.
for month, h in distinctiveness_ranking(tallies)[:3]:
    print("month", month, "entropy", round(h, 3))

for month, smell, seg in month_report(tallies):
    print(month, smell, seg)

print({m: round(z, 2) for m, z in pleasure_months(tallies).items()})
