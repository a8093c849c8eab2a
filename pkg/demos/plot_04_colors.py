"""
Colors of smells
================

Photos carrying both a smell word and a color word link the two. The
strength of a color for a word discounts how common that color is overall;
per category, each word votes for its strongest color.
"""
from collections import Counter

from smellscape.chroma import CoCounts, color_associations, color_matrix, count_cooccurrences, \
    word_color_strength
from smellscape.synth import planted_city

# hand example: 30 of 100 red photos and 15 of 50 blue ones mention the word
cc = CoCounts(Counter({("s", "red"): 30, ("s", "blue"): 15}),
              Counter({"red": 100, "blue": 50}), Counter({"s": 100}))
print(word_color_strength("s", cc))

city = planted_city(n_segments=300, n_records=40_000, seed=4)
counts = count_cooccurrences(city.dataset.records, city.lexicons)
assoc = color_associations(counts, city.lexicons.smell)

###############################################################################
# Rows come out from most to least color-specific (lowest entropy first).
cats, colors, mat = color_matrix(assoc)
for cat, row in zip(cats, mat):
    best = colors[row.argmax()]
    print(f"{cat:10s} -> {best:7s} {row.max():.2f}  entropy {assoc.categories[cat].entropy:.2f}")
