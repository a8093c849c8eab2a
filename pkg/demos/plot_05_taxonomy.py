"""
Clustering smell words into categories
======================================

Words that are tagged together on the same photos form a weighted
co-occurrence graph; Louvain modularity search splits it into groups.
Here each synthetic photo mostly draws its smell words from one
dictionary category, with an occasional stray word from another.
"""
import numpy as np
from collections import Counter

from smellscape.lexicon import Lexicons
from smellscape.taxonomy import build_graph, cluster, describe_clusters, modularity

lex = Lexicons.default()
rng = np.random.default_rng(5)
cats = lex.smell.categories
photos = []
for _ in range(20_000):
    words = list(lex.smell.words(cats[rng.integers(len(cats))]))
    tags = list(rng.choice(words, size=min(3, len(words)), replace=False))
    if rng.random() < 0.2:
        tags.append(rng.choice(sorted(lex.smell.entries)))
    photos.append(tags)

graph = build_graph(photos, lex.smell.entries)
print(len(graph.nodes), "words,", len(graph.weights), "edges")

parts = cluster(graph, resolution=1.0, seed=0)
print(len(parts), "clusters, modularity", round(modularity(graph, parts), 3))

###############################################################################
# Compare each cluster against the reference dictionary category.
for c in describe_clusters(graph, parts, top=4):
    ref = Counter(lex.smell.entries[w][0] for w in c["members"])
    major, hits = ref.most_common(1)[0]
    print(f"{c['cluster']:2d} {c['size']:3d} {major:10s} {hits / c['size']:.0%} {c['top_words']}")

# same seed, same answer
assert cluster(graph, seed=0) == parts
