"""
Pleasantness, sentiment and emotions
====================================

Pleasantness is a z-score difference of pleasant and unpleasant tag
fractions; sentiment does the same with positive and negative words.
Emotion fractions are correlated against smell fractions segment by
segment.
"""
import numpy as np

from smellscape.affect import correlate_pleasure_sentiment, emotion_matrix, sweep_smell_sentiment
from smellscape.geo import aggregate, build_index
from smellscape.smellmetrics import pleasure_score
from smellscape.synth import planted_city

# a fraction sitting at both population means scores exactly zero
pp, pu = np.array([0.25, 0.75]), np.array([0.5, 0.0])
print(pleasure_score(0.5, 0.25, pp, pu), pleasure_score(1.0, 0.25, pp, pu))

city = planted_city(n_segments=400, n_records=40_000, seed=3, rho=0.7)
tallies = aggregate(city.dataset.records, build_index(city.dataset.segments), city.lexicons)

###############################################################################
# The generator couples pleasantness and sentiment with Spearman 0.7.
for t, n, rho, r in correlate_pleasure_sentiment(tallies, sweep=(10, 30, 100)):
    print(f"min_tags {t:3d}: n={n:3d} spearman {rho:.3f} pearson {r:.3f}")

###############################################################################
# Planted emotion couplings show up as the strongest cells.
cats, emos, mat = emotion_matrix(tallies)
for c, e, _ in city.emotion_couplings:
    print(f"{c}-{e}: {mat[cats.index(c), emos.index(e)]:+.2f}")
i, j = np.unravel_index(np.nanargmax(mat), mat.shape)
print("strongest cell", cats[i], emos[j])

for t, res in sweep_smell_sentiment(tallies, "30:90:30"):
    best = max(res["spearman"], key=lambda c: abs(res["spearman"][c]))
    print(f"min_tags {t}: n={res['n']} strongest smell-sentiment link {best} {res['spearman'][best]:+.2f}")
