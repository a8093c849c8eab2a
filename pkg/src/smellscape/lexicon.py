"""Smell taxonomy, affect lexicon, color terms and pleasantness lists.

All four are loaded from small UTF-8 delimited files:

* smell dictionary: ``category,subcategory,word`` (subcategory may be empty);
  an optional ``# categories: a, b, ...`` line declares the top-level
  categories, otherwise :data:`DEFAULT_CATEGORIES` is used.
* affect lexicon: ``word,polarity,emotion;emotion;...`` where polarity is
  ``positive``, ``negative`` or empty.
* color terms: ``nuance,canonical``.
* pleasantness: ``word,class`` with class ``pleasant`` or ``unpleasant``.

A header row whose first field matches the column name is skipped, as are
blank lines and ``#`` comments. Lookups are exact matches on the
:func:`normalize`-d form of a tag.
"""
from __future__ import annotations

import csv
import io
import logging
import re
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import DuplicateWord, MalformedRow, UnknownCategory

log = logging.getLogger(__name__)

DEFAULT_CATEGORIES = (
    "animals", "cleaning", "emissions", "food", "industry",
    "metro", "nature", "synthetic", "tobacco", "waste",
)
EMOTIONS = (
    "anger", "fear", "anticipation", "trust",
    "surprise", "sadness", "joy", "disgust",
)
POLARITIES = ("positive", "negative")
# Canonical order doubles as the argmax tie-break order in chroma.
CANONICAL_COLORS = (
    "black", "blue", "brown", "gray", "green",
    "orange", "red", "violet", "white", "yellow",
)

_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_SEPARATORS = re.compile(r"[_\-]+")
_CATEGORY_DIRECTIVE = re.compile(r"^#\s*categories\s*:(.*)$", re.IGNORECASE)


@lru_cache(maxsize=1 << 18)
def normalize(tag: str) -> str:
    """Canonical form of a tag or dictionary word.

    Camel-case runs are split, underscores and hyphens become spaces, the
    result is lower-cased and whitespace is collapsed.

    >>> normalize("Cut_Grass")
    'cut grass'
    >>> normalize("  freshCutGrass ")
    'fresh cut grass'
    """
    s = _CAMEL.sub(" ", tag)
    s = _SEPARATORS.sub(" ", s)
    return " ".join(s.lower().split())


def _open_text(source):
    """Accept a path, an open text stream, or an iterable of lines."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, encoding="utf-8", newline="") as fh:
            return fh.read().splitlines()
    if hasattr(source, "read"):
        return source.read().splitlines()
    return [line.rstrip("\r\n") for line in source]


def _rows(lines, header_first: str):
    """Yield ``(line_no, fields)`` skipping blanks, comments and the header."""
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if fields[0].lower() == header_first:
            continue
        yield line_no, fields


@dataclass(frozen=True)
class SmellTaxonomy:
    categories: tuple[str, ...]
    entries: Mapping[str, tuple[str, str | None]]

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return normalize(word) in self.entries

    def lookup(self, word: str) -> tuple[str, str | None] | None:
        return self.entries.get(normalize(word))

    @property
    def subcategories(self) -> tuple[str, ...]:
        return tuple(sorted({sub for _, sub in self.entries.values() if sub}))

    def words(self, category: str | None = None) -> list[str]:
        return sorted(w for w, (c, _) in self.entries.items()
                      if category is None or c == category)

    def report(self) -> dict:
        per_category = {c: 0 for c in self.categories}
        for c, _ in self.entries.values():
            per_category[c] += 1
        return {"words": len(self.entries), "categories": len(self.categories),
                "per_category": per_category}


@dataclass(frozen=True)
class AffectLexicon:
    polarity: Mapping[str, str]
    emotions: Mapping[str, frozenset]

    def __post_init__(self):
        object.__setattr__(self, "polarity", MappingProxyType(dict(self.polarity)))
        object.__setattr__(self, "emotions", MappingProxyType(
            {w: frozenset(e) for w, e in self.emotions.items()}))

    def __len__(self):
        return len(set(self.polarity) | set(self.emotions))

    def lookup(self, word: str) -> tuple[str | None, frozenset]:
        w = normalize(word)
        return self.polarity.get(w), self.emotions.get(w, frozenset())


@dataclass(frozen=True)
class ColorLexicon:
    nuances: Mapping[str, str]
    canonical: tuple[str, ...] = CANONICAL_COLORS

    def __post_init__(self):
        table = dict(self.nuances)
        for c in self.canonical:
            table.setdefault(c, c)
        object.__setattr__(self, "nuances", MappingProxyType(table))

    def __len__(self):
        return len(self.nuances)

    def lookup(self, word: str) -> str | None:
        return self.nuances.get(normalize(word))


@dataclass(frozen=True)
class PleasantnessLists:
    pleasant: frozenset = field(default_factory=frozenset)
    unpleasant: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        pleasant = frozenset(normalize(w) for w in self.pleasant)
        unpleasant = frozenset(normalize(w) for w in self.unpleasant)
        both = pleasant & unpleasant
        if both:
            raise DuplicateWord(sorted(both)[0])
        object.__setattr__(self, "pleasant", pleasant)
        object.__setattr__(self, "unpleasant", unpleasant)

    def lookup(self, word: str) -> str | None:
        w = normalize(word)
        if w in self.pleasant:
            return "pleasant"
        if w in self.unpleasant:
            return "unpleasant"
        return None


# -- loaders ---------------------------------------------------------------

def load_smell_taxonomy(source, categories: Iterable[str] | None = None) -> SmellTaxonomy:
    lines = _open_text(source)
    declared = None
    for line in lines:
        m = _CATEGORY_DIRECTIVE.match(line.strip())
        if m:
            declared = tuple(normalize(c) for c in m.group(1).split(",") if c.strip())
            break
    if categories is not None:
        declared = tuple(normalize(c) for c in categories)
    elif declared is None:
        declared = DEFAULT_CATEGORIES
    known = set(declared)

    entries: dict[str, tuple[str, str | None]] = {}
    for line_no, fields in _rows(lines, "category"):
        if len(fields) != 3 or not fields[0] or not fields[2]:
            raise MalformedRow(line_no, "expected category,subcategory,word")
        category, sub, word = normalize(fields[0]), normalize(fields[1]) or None, normalize(fields[2])
        if not word:
            raise MalformedRow(line_no, "empty word")
        if category not in known:
            raise UnknownCategory(category)
        if word in entries:
            raise DuplicateWord(word)
        entries[word] = (category, sub)

    if not entries:
        warnings.warn("smell dictionary is empty", stacklevel=2)
    tax = SmellTaxonomy(declared, entries)
    log.info("loaded smell taxonomy: %d words in %d categories", len(tax), len(declared))
    return tax


def load_affect_lexicon(source) -> AffectLexicon:
    polarity: dict[str, str] = {}
    emotions: dict[str, frozenset] = {}
    seen = set()
    for line_no, fields in _rows(_open_text(source), "word"):
        if len(fields) == 2:
            fields.append("")
        if len(fields) != 3 or not fields[0]:
            raise MalformedRow(line_no, "expected word,polarity,emotions")
        word = normalize(fields[0])
        if word in seen:
            raise DuplicateWord(word)
        seen.add(word)
        pol = fields[1].lower()
        if pol:
            if pol not in POLARITIES:
                raise MalformedRow(line_no, f"unknown polarity {pol!r}")
            polarity[word] = pol
        emos = frozenset(e.strip().lower() for e in fields[2].split(";") if e.strip())
        bad = emos - set(EMOTIONS)
        if bad:
            raise MalformedRow(line_no, f"unknown emotion {sorted(bad)[0]!r}")
        if emos:
            emotions[word] = emos
    if not seen:
        warnings.warn("affect lexicon is empty", stacklevel=2)
    return AffectLexicon(polarity, emotions)


def load_color_lexicon(source) -> ColorLexicon:
    nuances: dict[str, str] = {}
    for line_no, fields in _rows(_open_text(source), "nuance"):
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise MalformedRow(line_no, "expected nuance,canonical")
        nuance, canon = normalize(fields[0]), normalize(fields[1])
        if canon not in CANONICAL_COLORS:
            raise UnknownCategory(canon)
        if nuance in nuances:
            raise DuplicateWord(nuance)
        nuances[nuance] = canon
    return ColorLexicon(nuances)


def load_pleasantness(source) -> PleasantnessLists:
    classes: dict[str, set] = {"pleasant": set(), "unpleasant": set()}
    seen = set()
    for line_no, fields in _rows(_open_text(source), "word"):
        if len(fields) != 2 or fields[1].lower() not in classes:
            raise MalformedRow(line_no, "expected word,pleasant|unpleasant")
        word = normalize(fields[0])
        if word in seen:
            raise DuplicateWord(word)
        seen.add(word)
        classes[fields[1].lower()].add(word)
    return PleasantnessLists(frozenset(classes["pleasant"]), frozenset(classes["unpleasant"]))


# -- serializers (inverse of the loaders) ----------------------------------

def dump_smell_taxonomy(tax: SmellTaxonomy) -> str:
    buf = io.StringIO()
    buf.write("# categories: " + ", ".join(tax.categories) + "\n")
    buf.write("category,subcategory,word\n")
    for word in sorted(tax.entries):
        cat, sub = tax.entries[word]
        buf.write(f"{cat},{sub or ''},{word}\n")
    return buf.getvalue()


def dump_affect_lexicon(lex: AffectLexicon) -> str:
    lines = ["word,polarity,emotions"]
    for word in sorted(set(lex.polarity) | set(lex.emotions)):
        emos = ";".join(e for e in EMOTIONS if e in lex.emotions.get(word, ()))
        lines.append(f"{word},{lex.polarity.get(word, '')},{emos}")
    return "\n".join(lines) + "\n"


def dump_color_lexicon(lex: ColorLexicon) -> str:
    lines = ["nuance,canonical"] + [f"{n},{c}" for n, c in sorted(lex.nuances.items())]
    return "\n".join(lines) + "\n"


def dump_pleasantness(lists: PleasantnessLists) -> str:
    lines = ["word,class"]
    lines += [f"{w},pleasant" for w in sorted(lists.pleasant)]
    lines += [f"{w},unpleasant" for w in sorted(lists.unpleasant)]
    return "\n".join(lines) + "\n"


# -- classification ----------------------------------------------------------

def classify_tag(tag: str, taxonomy: SmellTaxonomy):
    return taxonomy.lookup(tag)


def classify_affect(tag: str, lexicon: AffectLexicon):
    return lexicon.lookup(tag)


def classify_color(tag: str, lexicon: ColorLexicon):
    return lexicon.lookup(tag)


def candidate_ngrams(text: str, max_n: int = 3) -> list[str]:
    """Word n-grams (n <= max_n) of free text, for matching multi-word entries.

    >>> candidate_ngrams("the cut grass", 2)
    ['the', 'cut', 'grass', 'the cut', 'cut grass']
    """
    words = re.findall(r"[^\W_]+(?:'[^\W_]+)?", text.lower())
    out = []
    for n in range(1, max_n + 1):
        out.extend(" ".join(words[i:i + n]) for i in range(len(words) - n + 1))
    return out


def _data_file(name):
    return resources.files("smellscape").joinpath("data", name)


def default_smell_taxonomy() -> SmellTaxonomy:
    return load_smell_taxonomy(_data_file("smell_dictionary.csv").read_text("utf-8").splitlines())


def default_affect_lexicon() -> AffectLexicon:
    return load_affect_lexicon(_data_file("affect_lexicon.csv").read_text("utf-8").splitlines())


def default_color_lexicon() -> ColorLexicon:
    return load_color_lexicon(_data_file("color_terms.csv").read_text("utf-8").splitlines())


def default_pleasantness() -> PleasantnessLists:
    return load_pleasantness(_data_file("pleasantness.csv").read_text("utf-8").splitlines())


@dataclass(frozen=True)
class Lexicons:
    """The four lexicons bundled, plus a flat per-tag lookup used when tallying."""

    smell: SmellTaxonomy
    affect: AffectLexicon
    color: ColorLexicon
    pleasantness: PleasantnessLists

    @classmethod
    def default(cls) -> "Lexicons":
        return cls(default_smell_taxonomy(), default_affect_lexicon(),
                   default_color_lexicon(), default_pleasantness())

    @classmethod
    def load(cls, smell=None, affect=None, color=None, pleasant=None) -> "Lexicons":
        return cls(
            load_smell_taxonomy(smell) if smell else default_smell_taxonomy(),
            load_affect_lexicon(affect) if affect else default_affect_lexicon(),
            load_color_lexicon(color) if color else default_color_lexicon(),
            load_pleasantness(pleasant) if pleasant else default_pleasantness(),
        )

    def tag_codes(self) -> dict[str, tuple[int, int, int, int, int]]:
        """Normalized word -> (category idx, subcategory idx, pleasantness, polarity, emotion bits).

        Indices are -1 when absent; pleasantness and polarity are +1/-1/0;
        emotion bits follow :data:`EMOTIONS` order. Words in no lexicon are
        omitted.
        """
        cat_idx = {c: i for i, c in enumerate(self.smell.categories)}
        sub_idx = {s: i for i, s in enumerate(self.smell.subcategories)}
        words = (set(self.smell.entries) | set(self.affect.polarity) | set(self.affect.emotions)
                 | self.pleasantness.pleasant | self.pleasantness.unpleasant)
        codes = {}
        for w in words:
            cat, sub = self.smell.entries.get(w, (None, None))
            pl = 1 if w in self.pleasantness.pleasant else (-1 if w in self.pleasantness.unpleasant else 0)
            pol = {"positive": 1, "negative": -1}.get(self.affect.polarity.get(w), 0)
            bits = 0
            for k, e in enumerate(EMOTIONS):
                if e in self.affect.emotions.get(w, ()):
                    bits |= 1 << k
            codes[w] = (cat_idx[cat] if cat else -1, sub_idx[sub] if sub else -1, pl, pol, bits)
        return codes
