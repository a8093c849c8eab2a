"""Word co-occurrence graph and deterministic modularity clustering.

Clustering is a Louvain-style procedure: repeated local moving of nodes to
the neighboring community with the largest modularity gain, followed by
aggregation of communities into super-nodes, until nothing moves.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import EmptyGraph
from .lexicon import normalize

_EPS = 1e-12


@dataclass(frozen=True)
class CoOccurrenceGraph:
    nodes: tuple    # sorted words
    weights: dict   # (u, v) with u < v -> number of records containing both

    def weighted_degree(self) -> dict:
        deg = dict.fromkeys(self.nodes, 0)
        for (u, v), w in self.weights.items():
            deg[u] += w
            deg[v] += w
        return deg


def build_graph(records, vocabulary) -> CoOccurrenceGraph:
    """Edge weight = number of records whose tag set contains both words.

    Nodes are the vocabulary words seen on at least one record. `records`
    may be GeoTaggedRecord objects or plain tag iterables.
    """
    vocab = {normalize(w) for w in vocabulary}
    seen = set()
    weights = defaultdict(int)
    for r in records:
        tags = r.tags if hasattr(r, "tags") else r
        words = sorted({normalize(t) for t in tags} & vocab)
        seen.update(words)
        for u, v in combinations(words, 2):
            weights[(u, v)] += 1
    return CoOccurrenceGraph(tuple(sorted(seen)), dict(sorted(weights.items())))


def modularity(graph: CoOccurrenceGraph, partition, resolution: float = 1.0) -> float:
    """Newman modularity of a partition given as a list of node sets."""
    m = sum(graph.weights.values())
    if m == 0:
        return 0.0
    comm = {u: k for k, block in enumerate(partition) for u in block}
    deg = graph.weighted_degree()
    inside = defaultdict(float)
    tot = defaultdict(float)
    for (u, v), w in graph.weights.items():
        if comm[u] == comm[v]:
            inside[comm[u]] += w
    for u, d in deg.items():
        tot[comm[u]] += d
    return sum(inside[c] / m - resolution * (tot[c] / (2 * m)) ** 2 for c in tot)


def _local_moving(adj, loops, order, resolution):
    """One level of node moves; returns community labels per node."""
    n = len(adj)
    k = np.array([sum(adj[i].values()) + 2 * loops[i] for i in range(n)])
    m2 = k.sum()
    comm = list(range(n))
    tot = k.astype(float).copy()
    if m2 == 0:
        return comm
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            links = defaultdict(float)
            for j, w in adj[i].items():
                links[comm[j]] += w
            tot[ci] -= k[i]
            ki = k[i]

            def gain(c):
                return links.get(c, 0.0) - resolution * tot[c] * ki / m2

            best_c, best_g = ci, gain(ci)
            for c in sorted(links):
                g = gain(c)
                if g > best_g + _EPS or (abs(g - best_g) <= _EPS and c < best_c and best_c != ci):
                    best_c, best_g = c, g
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                improved = True
    return comm


def cluster(graph: CoOccurrenceGraph, resolution: float = 1.0, seed: int | None = None) -> list:
    """Partition the graph's nodes into communities.

    Nodes are visited in sorted order, or in a permutation drawn from
    `seed` when one is given; moves need a strictly positive modularity gain
    and equal gains go to the smallest community index. The result is a
    list of sorted word lists ordered by their first (smallest) word.
    """
    if not graph.nodes:
        raise EmptyGraph("graph has no nodes")
    idx = {u: i for i, u in enumerate(graph.nodes)}
    n = len(graph.nodes)
    adj = [dict() for _ in range(n)]
    for (u, v), w in graph.weights.items():
        adj[idx[u]][idx[v]] = adj[idx[u]].get(idx[v], 0) + w
        adj[idx[v]][idx[u]] = adj[idx[v]].get(idx[u], 0) + w
    loops = [0.0] * n
    membership = list(range(n))  # original node -> current super-node
    rng = np.random.default_rng(seed) if seed is not None else None

    while True:
        order = list(range(len(adj))) if rng is None else [int(x) for x in rng.permutation(len(adj))]
        comm = _local_moving(adj, loops, order, resolution)
        # relabel in order of first appearance over super-node index
        relabel = {}
        for c in comm:
            relabel.setdefault(c, len(relabel))
        comm = [relabel[c] for c in comm]
        if len(relabel) == len(adj):
            break
        new_adj = [defaultdict(float) for _ in range(len(relabel))]
        new_loops = [0.0] * len(relabel)
        for i, nbrs in enumerate(adj):
            ci = comm[i]
            new_loops[ci] += loops[i]
            for j, w in nbrs.items():
                cj = comm[j]
                if ci == cj:
                    if i < j:
                        new_loops[ci] += w
                else:
                    new_adj[ci][cj] += w
        adj = [dict(d) for d in new_adj]
        loops = new_loops
        membership = [comm[s] for s in membership]

    blocks = defaultdict(list)
    for u, s in zip(graph.nodes, membership):
        blocks[s].append(u)
    return sorted((sorted(b) for b in blocks.values()), key=lambda b: b[0])


def describe_clusters(graph: CoOccurrenceGraph, partition, top: int = 10) -> list:
    """Per cluster: size and member words ranked by weighted degree (ties by word)."""
    deg = graph.weighted_degree()
    out = []
    for k, block in enumerate(partition):
        ranked = sorted(block, key=lambda u: (-deg[u], u))
        out.append({"cluster": k, "size": len(block), "top_words": ranked[:top], "members": sorted(block)})
    return out
