"""Color-smell association from photo tags.

A photo contributes at most once to each count. A tag matched as a smell
word is not reused as a color term on the same photo (``violet`` the flower
does not make a photo violet); monochrome photos are skipped.
"""
from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCategory, NoQualifyingColors
from .lexicon import CANONICAL_COLORS, normalize
from .stats import shannon_entropy

DEFAULT_MIN_PHOTOS = 10
_COLOR_RANK = {c: i for i, c in enumerate(CANONICAL_COLORS)}


@dataclass
class CoCounts:
    p_cs: Counter = field(default_factory=Counter)  # (smell word, color) -> photos
    p_c: Counter = field(default_factory=Counter)   # color -> photos
    p_s: Counter = field(default_factory=Counter)   # smell word -> photos
    n_photos: int = 0

    def __add__(self, other):
        return CoCounts(self.p_cs + other.p_cs, self.p_c + other.p_c,
                        self.p_s + other.p_s, self.n_photos + other.n_photos)

    def scaled(self, k: int) -> "CoCounts":
        return CoCounts(Counter({x: v * k for x, v in self.p_cs.items()}),
                        Counter({x: v * k for x, v in self.p_c.items()}),
                        Counter({x: v * k for x, v in self.p_s.items()}), self.n_photos * k)


@dataclass
class CategoryColor:
    category: str
    raw: dict         # color -> summed strongest-color strength
    normalized: dict  # color -> share of the summed strength (all canonical colors)
    entropy: float
    photos: dict      # color -> photos backing the edge


@dataclass
class ColorAssociation:
    words: dict       # smell word -> {color: strength}
    categories: dict  # category -> CategoryColor

    def sorted_categories(self) -> list:
        """Categories by ascending color-mixture entropy, then name."""
        return sorted(self.categories.values(), key=lambda c: (c.entropy, c.category))


def count_cooccurrences(records, lexicons) -> CoCounts:
    smell, color = lexicons.smell, lexicons.color
    out = CoCounts()
    for r in records:
        if r.monochrome:
            continue
        words = {normalize(t) for t in r.tags}
        words.discard("")
        smells = {w for w in words if w in smell.entries}
        colors = {c for w in words - smells if (c := color.nuances.get(w))}
        out.n_photos += 1
        out.p_s.update(smells)
        out.p_c.update(colors)
        out.p_cs.update((s, c) for s in smells for c in colors)
    return out


def word_color_strength(s: str, counts: CoCounts, min_photos: int = DEFAULT_MIN_PHOTOS) -> dict:
    """Strength of each surviving color for smell word `s`.

    ``(p_cs / (p_c + p_s))`` renormalized over colors with ``p_cs >= min_photos``.
    """
    p_s = counts.p_s.get(s, 0)
    ratios = {}
    for c in CANONICAL_COLORS:
        p_cs = counts.p_cs.get((s, c), 0)
        if p_cs >= min_photos and p_cs > 0:
            ratios[c] = p_cs / (counts.p_c[c] + p_s)
    total = sum(ratios.values())
    if not ratios or total == 0:
        raise NoQualifyingColors(s)
    return {c: v / total for c, v in ratios.items()}


def word_strengths(counts: CoCounts, min_photos: int = DEFAULT_MIN_PHOTOS) -> dict:
    out = {}
    for s in sorted(counts.p_s):
        try:
            out[s] = word_color_strength(s, counts, min_photos)
        except NoQualifyingColors:
            pass
    return out


def strongest_color(strengths: dict) -> str:
    """Argmax color; ties go to the earliest color in canonical order."""
    best = max(strengths.values())
    return min((c for c, v in strengths.items() if v == best), key=_COLOR_RANK.__getitem__)


def category_color_strength(category: str, strengths: dict, counts: CoCounts | None = None,
                            min_photos: int = 0) -> CategoryColor:
    """Aggregate word strengths of one category onto their strongest colors.

    Parameters
    ----------
    strengths : dict
        Smell word -> color strength vector, for the category's words only.
    counts, min_photos
        When given, edges backed by fewer than `min_photos` photos are dropped
        before renormalizing.
    """
    raw = {c: 0.0 for c in CANONICAL_COLORS}
    photos = {c: 0 for c in CANONICAL_COLORS}
    for s in sorted(strengths):
        vec = strengths[s]
        c = strongest_color(vec)
        raw[c] += vec[c]
        if counts is not None:
            photos[c] += counts.p_cs.get((s, c), 0)
    if counts is not None and min_photos:
        raw = {c: (v if photos[c] >= min_photos else 0.0) for c, v in raw.items()}
    total = sum(raw.values())
    if total == 0:
        raise EmptyCategory(category)
    norm = {c: v / total for c, v in raw.items()}
    return CategoryColor(category, raw, norm, shannon_entropy(list(norm.values())), photos)


def color_associations(counts: CoCounts, taxonomy, min_photos: int = DEFAULT_MIN_PHOTOS) -> ColorAssociation:
    words = word_strengths(counts, min_photos)
    cats = {}
    for cat in taxonomy.categories:
        members = {s: v for s, v in words.items() if taxonomy.entries.get(s, (None,))[0] == cat}
        try:
            cats[cat] = category_color_strength(cat, members, counts, min_photos)
        except EmptyCategory:
            continue
    return ColorAssociation(words, cats)


def color_matrix(assoc: ColorAssociation, normalized: bool = True):
    """``(categories, colors, matrix)`` with rows in ascending-entropy order."""
    rows = assoc.sorted_categories()
    attr = "normalized" if normalized else "raw"
    mat = np.array([[getattr(r, attr)[c] for c in CANONICAL_COLORS] for r in rows]).reshape(len(rows), -1)
    return [r.category for r in rows], CANONICAL_COLORS, mat


def export_bipartite(assoc: ColorAssociation, categories=None) -> dict:
    """Node/edge document for the category-color graph.

    Each color node carries ``marginal``: the mean of its normalized strength
    over the exported categories.
    """
    cats = []
    names = categories if categories is not None else sorted(assoc.categories)
    for name in names:
        cc = assoc.categories.get(name)
        if cc is None or sum(cc.normalized.values()) == 0:
            warnings.warn(f"category {name!r} has no color association; omitted", stacklevel=2)
            continue
        cats.append(cc)
    marginals = {c: (float(np.mean([cc.normalized[c] for cc in cats])) if cats else 0.0)
                 for c in CANONICAL_COLORS}
    nodes = [{"id": cc.category, "kind": "smell", "entropy": cc.entropy} for cc in cats]
    nodes += [{"id": c, "kind": "color", "marginal": marginals[c]} for c in CANONICAL_COLORS]
    edges = [{"source": cc.category, "target": c, "weight": cc.normalized[c],
              "raw": cc.raw[c], "photos": cc.photos[c]}
             for cc in cats for c in CANONICAL_COLORS if cc.normalized[c] > 0]
    return {"nodes": nodes, "edges": edges, "marginals": marginals}
