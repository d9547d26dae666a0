"""Lexicon-based 16-dimensional emotion scoring with intensity modifiers.

Posts are scored against a thesaurus of emotion terms (eight positive and
eight negative categories, words or phrases up to three tokens) plus a
modifier thesaurus of boosters and negators.  Phrases are merged greedily
longest-first into single units before scoring; a matched unit contributes
one to each of its categories, adjusted by the modifier weight of the
immediately preceding unit and clamped at zero, and category totals are
normalised by the merged unit count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

POSITIVE_CATEGORIES = ("Happy", "Good", "Alive", "Love",
                       "Positive", "Open", "Interested", "Strong")
NEGATIVE_CATEGORIES = ("Sad", "Afraid", "Hurt", "Angry",
                       "Depressed", "Helpless", "Confused", "Indifferent")
CATEGORIES = POSITIVE_CATEGORIES + NEGATIVE_CATEGORIES
CATEGORY_INDEX = {name: i for i, name in enumerate(CATEGORIES)}

MAX_PHRASE_TOKENS = 3

Unit = tuple[str, ...]


class LexiconError(ValueError):
    """Malformed lexicon file (unknown category, bad weight, bad phrase)."""


class EmotionLexicon:
    """Term (or phrase, pre-tokenised) to category-id sets.

    A term may belong to several categories; scoring increments each.
    """

    def __init__(self, entries: Optional[Mapping[Unit, Iterable[int]]] = None):
        self._entries: dict[Unit, frozenset[int]] = {}
        if entries:
            for unit, cats in entries.items():
                self.add(unit, cats)

    def add(self, unit: Unit, categories: Iterable[int]) -> None:
        merged = self._entries.get(unit, frozenset()) | frozenset(categories)
        self._entries[unit] = merged

    def __contains__(self, unit: Unit) -> bool:
        return unit in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def categories_for(self, unit: Unit) -> frozenset[int]:
        return self._entries.get(unit, frozenset())

    def units(self) -> set[Unit]:
        return set(self._entries)

    def phrases(self) -> set[Unit]:
        return {u for u in self._entries if len(u) > 1}

    def flat_terms(self) -> set[str]:
        return {" ".join(u) for u in self._entries}


class ModifierLexicon:
    """Intensity modifiers: term to weight in [-1, +1].

    Positive weights boost the following emotion term, negative weights damp
    it; -1 negates it outright.
    """

    def __init__(self, entries: Optional[Mapping[Unit, float]] = None):
        self._entries: dict[Unit, float] = {}
        if entries:
            for unit, w in entries.items():
                self.add(unit, w)

    def add(self, unit: Unit, weight: float) -> None:
        if not -1.0 <= weight <= 1.0:
            raise LexiconError(f"modifier weight {weight} out of [-1, 1] for {unit}")
        self._entries[unit] = float(weight)

    def __contains__(self, unit: Unit) -> bool:
        return unit in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def weight(self, unit: Unit) -> float:
        return self._entries[unit]

    def phrases(self) -> set[Unit]:
        return {u for u in self._entries if len(u) > 1}


@dataclass
class EmotionVector:
    """Per-post emotion intensities, indexed by CATEGORIES; token_count is the
    number of merged units the intensities were normalised by."""

    values: tuple[float, ...]
    token_count: int

    def __post_init__(self):
        if len(self.values) != len(CATEGORIES):
            raise ValueError("emotion vector needs one value per category")

    @classmethod
    def zero(cls) -> "EmotionVector":
        return cls((0.0,) * len(CATEGORIES), 0)

    def positive_total(self) -> float:
        return sum(self.values[:8])

    def negative_total(self) -> float:
        return sum(self.values[8:])


@dataclass
class SentimentScore:
    """Positive strength in [1, 4], negative strength in [-4, -1]."""

    pos: float
    neg: float


# ---------------------------------------------------------------------------
# Lexicon files
# ---------------------------------------------------------------------------

def _parse_unit(term: str, lineno: int) -> Unit:
    unit = tuple(term.lower().split())
    if not 1 <= len(unit) <= MAX_PHRASE_TOKENS:
        raise LexiconError(f"line {lineno}: term must be 1..{MAX_PHRASE_TOKENS} "
                           f"tokens, got {term!r}")
    return unit


def _iter_csv(path):
    # Blank lines and lines starting with '#' are ignored.
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            yield lineno, row


def load_emotion_lexicon(path) -> EmotionLexicon:
    """CSV rows "term,Category"; category names come from the fixed sixteen."""
    lex = EmotionLexicon()
    for lineno, row in _iter_csv(path):
        if len(row) != 2:
            raise LexiconError(f"line {lineno}: expected 'term,Category', got {row!r}")
        term, cat = row[0].strip(), row[1].strip()
        if cat not in CATEGORY_INDEX:
            raise LexiconError(f"line {lineno}: unknown category {cat!r}")
        lex.add(_parse_unit(term, lineno), (CATEGORY_INDEX[cat],))
    return lex


def load_modifier_lexicon(path) -> ModifierLexicon:
    """CSV rows "term,weight" with weight in [-1, +1]."""
    mods = ModifierLexicon()
    for lineno, row in _iter_csv(path):
        if len(row) != 2:
            raise LexiconError(f"line {lineno}: expected 'term,weight', got {row!r}")
        try:
            weight = float(row[1])
        except ValueError as exc:
            raise LexiconError(f"line {lineno}: bad weight {row[1]!r}") from exc
        if not -1.0 <= weight <= 1.0:
            raise LexiconError(f"line {lineno}: weight {weight} out of [-1, 1]")
        mods.add(_parse_unit(row[0].strip(), lineno), weight)
    return mods


def load_lexicon(emotion_path, modifier_path) -> tuple[EmotionLexicon, ModifierLexicon]:
    return load_emotion_lexicon(emotion_path), load_modifier_lexicon(modifier_path)


def default_lexicons() -> tuple[EmotionLexicon, ModifierLexicon]:
    from importlib.resources import files

    data = files("pathweave.data")
    return load_lexicon(data.joinpath("emotion_lexicon.csv"),
                        data.joinpath("modifiers.csv"))


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def merge_units(tokens: Sequence[str], phrases: Iterable[Unit]) -> list[Unit]:
    """Greedy longest-match merge of known phrases into single units."""
    inventory = phrases if isinstance(phrases, set) else set(phrases)
    units: list[Unit] = []
    i, n = 0, len(tokens)
    while i < n:
        matched = None
        for length in range(MAX_PHRASE_TOKENS, 1, -1):
            if i + length <= n:
                cand = tuple(tokens[i:i + length])
                if cand in inventory:
                    matched = cand
                    break
        if matched is None:
            matched = (tokens[i],)
        units.append(matched)
        i += len(matched)
    return units


def score_post(tokens: Sequence[str], lex: EmotionLexicon,
               mods: ModifierLexicon) -> EmotionVector:
    """Emotion intensity vector of one post.

    Tokens must come from emotion-mode preprocessing (stopwords kept, since
    modifiers live among them).  Each matched unit adds 1 to every category it
    belongs to, plus the modifier weight of the immediately preceding unit
    when there is one; a negative total is clamped to zero so negation cannot
    push an intensity below zero.  Totals are divided by the unit count.
    """
    phrase_inventory = lex.phrases() | mods.phrases()
    units = merge_units(tokens, phrase_inventory)
    n = len(units)
    if n == 0:
        return EmotionVector.zero()
    totals = [0.0] * len(CATEGORIES)
    prev: Optional[Unit] = None
    for unit in units:
        cats = lex.categories_for(unit)
        if cats:
            bump = 1.0
            if prev is not None and prev in mods:
                bump += mods.weight(prev)
            if bump < 0.0:
                bump = 0.0
            for ci in sorted(cats):
                totals[ci] += bump
        prev = unit
    return EmotionVector(tuple(t / n for t in totals), n)


def sentiment_of(ev: EmotionVector, scale: float = 10.0) -> SentimentScore:
    """Map emotion intensities onto the 1..4 / -1..-4 sentiment scales.

    A stand-in for an external sentiment tool: total positive and negative
    intensity saturate linearly onto the band, neutral posts land at (1, -1).
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    p = ev.positive_total()
    n = ev.negative_total()
    pos = 1.0 + 3.0 * min(1.0, scale * p)
    neg = -(1.0 + 3.0 * min(1.0, scale * n))
    return SentimentScore(pos, neg)


# ---------------------------------------------------------------------------
# Embedding-based lexicon expansion
# ---------------------------------------------------------------------------

class EmbeddingTable:
    """Dense word vectors for nearest-neighbour lookups."""

    def __init__(self, dim: int, vectors: Mapping[str, np.ndarray]):
        self.dim = dim
        self.vectors: dict[str, np.ndarray] = {}
        for term, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise ValueError(f"vector for {term!r} has shape {arr.shape}, "
                                 f"expected ({dim},)")
            self.vectors[term] = arr

    def __contains__(self, term: str) -> bool:
        return term in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def load_embeddings(path) -> EmbeddingTable:
    """Text format: optional "count dim" header, then "term v1 ... v_dim"."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if not line.strip():
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    dim = int(parts[1])
                    continue
                except ValueError:
                    pass
            term, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise ValueError(f"line {lineno}: expected {dim} values, "
                                 f"got {len(values)}")
            vectors[term] = np.array([float(x) for x in values], dtype=np.float64)
    if dim is None:
        raise ValueError("empty embedding file")
    return EmbeddingTable(dim, vectors)


@dataclass
class ExpansionResult:
    """Per-category candidate lists for human review, never auto-merged."""

    candidates: dict[str, list[tuple[str, str, float]]]  # (term, seed, cosine)
    skipped_seeds: dict[str, list[str]]


def expand_lexicon(seeds: Mapping[str, Sequence[str]], emb: EmbeddingTable,
                   k: int, min_sim: float,
                   exclude: Optional[Iterable[str]] = None) -> ExpansionResult:
    """Nearest-neighbour candidates per seed term, for manual curation.

    For every seed present in the embedding the k most cosine-similar terms
    at or above ``min_sim`` are listed, excluding the seed itself and any
    term in ``exclude`` (defaults to the union of all seed terms).  Seeds
    missing from the embedding land in ``skipped_seeds``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if exclude is None:
        exclude = {t for terms in seeds.values() for t in terms}
    else:
        exclude = set(exclude)

    terms = sorted(emb.vectors)
    matrix = np.stack([emb.vectors[t] for t in terms]) if terms else np.zeros((0, 0))
    norms = np.linalg.norm(matrix, axis=1) if terms else np.zeros(0)
    safe = np.where(norms > 0, norms, 1.0)
    unit = matrix / safe[:, None] if terms else matrix

    candidates: dict[str, list[tuple[str, str, float]]] = {}
    skipped: dict[str, list[str]] = {}
    for category in seeds:
        rows: list[tuple[str, str, float]] = []
        for seed in seeds[category]:
            if seed not in emb:
                skipped.setdefault(category, []).append(seed)
                continue
            if k == 0:
                continue
            q = emb.vectors[seed]
            qn = np.linalg.norm(q)
            if qn == 0:
                continue
            sims = unit @ (q / qn)
            scored = [(terms[i], float(sims[i])) for i in range(len(terms))
                      if terms[i] != seed and terms[i] not in exclude
                      and norms[i] > 0 and sims[i] >= min_sim]
            scored.sort(key=lambda x: (-x[1], x[0]))
            rows.extend((t, seed, s) for t, s in scored[:k])
        if rows:
            rows.sort(key=lambda x: (-x[2], x[0], x[1]))
            candidates[category] = rows
    return ExpansionResult(candidates, skipped)


# ---------------------------------------------------------------------------
# Timelines
# ---------------------------------------------------------------------------

@dataclass
class TimelineBin:
    """One fixed interval of a user's emotion trajectory; ``mean`` is None
    for bins without posts."""

    index: int
    start: float
    mean: Optional[tuple[float, ...]]
    count: int


def emotion_timeline(posts: Sequence[tuple[float, EmotionVector]],
                     interval: float, origin: float) -> list[TimelineBin]:
    """Average emotion vectors into fixed time bins from the origin onward."""
    if interval <= 0:
        raise ValueError("interval must be positive")
    if not posts:
        return []
    buckets: dict[int, list[EmotionVector]] = {}
    for ts, ev in posts:
        i = int((ts - origin) // interval)
        if i < 0:
            raise ValueError("post predates the timeline origin")
        buckets.setdefault(i, []).append(ev)
    last = max(buckets)
    out = []
    for i in range(last + 1):
        members = buckets.get(i, [])
        if members:
            # fsum rounds the exact sum, so the mean is order-independent.
            mean = tuple(math.fsum(m.values[j] for m in members) / len(members)
                         for j in range(len(CATEGORIES)))
        else:
            mean = None
        out.append(TimelineBin(index=i, start=origin + i * interval,
                               mean=mean, count=len(members)))
    return out
