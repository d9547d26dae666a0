"""Stream ingestion, text normalisation, batching and sparse feature extraction.

A stream is a sequence of timestamped short messages.  This module turns it
into fixed-interval batches, builds one vocabulary per batch from a local
document-frequency threshold, and emits idf-weighted sparse vectors keyed by
term.  Everything here is pure over its inputs; batches can be processed in
parallel.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Optional, Sequence

logger = logging.getLogger("pathweave.corpus")

# Entries whose weight decays below this are dropped from sparse vectors.
PRUNE_EPS = 1e-12

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_TOKEN_RE = re.compile(r"[#@]?\w+(?:'\w+)*")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class Message:
    """One timestamped short text; timestamp is UTC epoch seconds."""

    id: str
    text: str
    timestamp: float
    author: Optional[str] = None


@dataclass
class Batch:
    """Messages of one fixed interval [start, end); end - start is the stream step."""

    index: int
    start: float
    end: float
    messages: list[Message] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.messages)


class Vocabulary:
    """Per-batch term set retained by a document-frequency floor.

    A term is kept iff it appears in at least ``min_fraction`` of the batch's
    messages.  Feature ids are dense 0..len-1, assigned in sorted term order.
    """

    def __init__(self, batch_index: int, doc_freq: Mapping[str, int], message_count: int):
        self.batch_index = batch_index
        self.message_count = message_count
        self._df = dict(doc_freq)
        self._ids = {t: i for i, t in enumerate(sorted(self._df))}

    def __contains__(self, term: str) -> bool:
        return term in self._df

    def __len__(self) -> int:
        return len(self._df)

    def terms(self) -> set[str]:
        return set(self._df)

    def doc_freq(self, term: str) -> int:
        return self._df[term]

    def feature_id(self, term: str) -> int:
        return self._ids[term]

    def idf(self, term: str) -> float:
        """Natural-log idf, clamped at zero (df == N would otherwise dip below)."""
        return max(0.0, math.log(self.message_count / (1 + self._df[term])))


class SparseVector:
    """Non-negative term-keyed weights; zero entries are never stored.

    ``vocab_ref`` records the batch index of the vocabulary that produced the
    vector (cluster representations keep the index of their birth layer).
    """

    __slots__ = ("entries", "vocab_ref")

    def __init__(self, entries: Optional[Mapping[str, float]] = None,
                 vocab_ref: Optional[int] = None):
        self.entries: dict[str, float] = {}
        if entries:
            for term, w in entries.items():
                if w > PRUNE_EPS:
                    self.entries[term] = float(w)
        self.vocab_ref = vocab_ref

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseVector) and self.entries == other.entries

    def __repr__(self) -> str:
        return f"SparseVector({self.entries!r}, vocab_ref={self.vocab_ref!r})"

    def get(self, term: str, default: float = 0.0) -> float:
        return self.entries.get(term, default)

    def terms(self) -> set[str]:
        return set(self.entries)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.entries.values()))

    def copy(self) -> "SparseVector":
        out = SparseVector(vocab_ref=self.vocab_ref)
        out.entries = dict(self.entries)
        return out

    def to_dict(self) -> dict:
        return {"entries": {t: self.entries[t] for t in sorted(self.entries)},
                "vocab_ref": self.vocab_ref}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SparseVector":
        return cls(d["entries"], d.get("vocab_ref"))


def similarity(a: SparseVector, b: SparseVector,
               universe: Optional[Iterable[str]] = None) -> float:
    """Cosine over the shared restricted term universe.

    With ``universe`` given, both vectors are first projected onto it (terms
    outside the universe are ignored in the dot product and the norms); this
    realises the restriction of a match to the intersection of two batch
    vocabularies.  Without it the universe is the union of both supports,
    which reduces to the plain cosine.  Returns 0.0 when the restricted
    universe is empty or either projected vector has zero norm.
    """
    ea, eb = a.entries, b.entries
    if universe is None:
        na2 = sum(w * w for w in ea.values())
        nb2 = sum(w * w for w in eb.values())
        if na2 <= 0.0 or nb2 <= 0.0:
            return 0.0
        if len(ea) > len(eb):
            ea, eb = eb, ea
        dot = sum(w * eb[t] for t, w in ea.items() if t in eb)
        if dot == 0.0:
            return 0.0
        return dot / math.sqrt(na2 * nb2)

    uni = universe if isinstance(universe, (set, frozenset)) else set(universe)
    na2 = sum(w * w for t, w in ea.items() if t in uni)
    nb2 = sum(w * w for t, w in eb.items() if t in uni)
    if na2 <= 0.0 or nb2 <= 0.0:
        return 0.0
    if len(ea) > len(eb):
        ea, eb = eb, ea
    dot = sum(w * eb[t] for t, w in ea.items() if t in eb and t in uni)
    if dot == 0.0:
        return 0.0
    return dot / math.sqrt(na2 * nb2)


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

@dataclass
class IngestResult:
    messages: list[Message]
    skipped: int = 0


def _parse_timestamp(raw: str) -> float:
    # RFC 3339; Python 3.10's fromisoformat does not accept a trailing Z.
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def ingest(source: Iterable[str]) -> IngestResult:
    """Parse a line-delimited JSON record stream into messages.

    Each record needs ``id``, ``text`` and an RFC 3339 ``timestamp``;
    ``author`` is optional.  Malformed records are counted and skipped with a
    warning; blank lines are ignored.
    """
    messages: list[Message] = []
    skipped = 0
    for lineno, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            msg = Message(
                id=str(rec["id"]),
                text=str(rec["text"]),
                timestamp=_parse_timestamp(rec["timestamp"]),
                author=rec.get("author"),
            )
            if not msg.id:
                raise ValueError("empty id")
        except (KeyError, ValueError, TypeError) as exc:
            skipped += 1
            logger.warning("skipping malformed record at line %d: %s", lineno, exc)
            continue
        messages.append(msg)
    return IngestResult(messages, skipped)


def ingest_path(path) -> IngestResult:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest(fh)


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PreprocessConfig:
    """Tokenisation profile.

    Pathway mode strips stopwords and keeps hashtags as features; emotion mode
    keeps stopwords because they can carry modifiers, and folds hashtags into
    plain words.  Both lowercase, drop URLs, user mentions and standalone
    numerals.
    """

    stopwords: frozenset[str] = frozenset()
    strip_urls: bool = True
    strip_mentions: bool = True
    keep_hashtags: bool = True
    remove_stopwords: bool = True
    strip_numerals: bool = True

    @classmethod
    def pathway_mode(cls, stopwords: Iterable[str] = ()) -> "PreprocessConfig":
        return cls(stopwords=frozenset(stopwords))

    @classmethod
    def emotion_mode(cls) -> "PreprocessConfig":
        return cls(stopwords=frozenset(), remove_stopwords=False, keep_hashtags=False)


def preprocess(text: str, cfg: PreprocessConfig) -> list[str]:
    """Normalise a message into tokens according to the profile."""
    text = text.lower()
    if cfg.strip_urls:
        text = _URL_RE.sub(" ", text)
    tokens: list[str] = []
    for tok in _TOKEN_RE.findall(text):
        if tok.startswith("@"):
            if cfg.strip_mentions:
                continue
            tok = tok[1:]
        if tok.startswith("#"):
            if not cfg.keep_hashtags:
                tok = tok.lstrip("#")
        if not tok:
            continue
        if cfg.strip_numerals and tok.lstrip("#").replace("_", "").isdigit():
            continue
        if cfg.remove_stopwords and not tok.startswith("#") and tok in cfg.stopwords:
            continue
        tokens.append(tok)
    return tokens


def load_stopwords(path) -> frozenset[str]:
    """Plain-text stopword list, one term per line, '#' starts a comment."""
    words = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                words.add(line)
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    from importlib.resources import files

    return load_stopwords(files("pathweave.data").joinpath("stopwords.txt"))


# ---------------------------------------------------------------------------
# Batching
# ---------------------------------------------------------------------------

def _normalize_for_dedupe(text: str) -> str:
    return " ".join(text.casefold().split())


def dedupe(batch: Batch) -> Batch:
    """Drop messages whose normalised text repeats an earlier one in the batch.

    Duplicated short texts inside one interval are overwhelmingly bot spam and
    would otherwise seed artificial pathways.
    """
    seen: set[str] = set()
    kept = []
    for msg in batch.messages:
        key = _normalize_for_dedupe(msg.text)
        if key in seen:
            continue
        seen.add(key)
        kept.append(msg)
    return Batch(batch.index, batch.start, batch.end, kept)


def partition(messages: Sequence[Message], interval: float, origin: float,
              slack: float = 0.0, sort: bool = False) -> list[Batch]:
    """Split a time-ordered message sequence into fixed-interval batches.

    Batch ``i`` covers ``[origin + i*interval, origin + (i+1)*interval)``.
    Empty intervals yield empty batches so downstream moving averages stay
    time-aligned.  A timestamp earlier than its predecessor by more than
    ``slack`` seconds is fatal unless ``sort`` is set.
    """
    if interval <= 0:
        raise ValueError("interval must be positive")
    msgs = sorted(messages, key=lambda m: m.timestamp) if sort else list(messages)
    prev = None
    for m in msgs:
        if prev is not None and m.timestamp < prev - slack:
            raise ValueError(
                f"message {m.id!r} out of order by {prev - m.timestamp:.3f}s; "
                "pre-sort the input or enable sort-on-ingest")
        prev = max(prev, m.timestamp) if prev is not None else m.timestamp

    batches: list[Batch] = []

    def batch_at(i: int) -> Batch:
        while len(batches) <= i:
            j = len(batches)
            batches.append(Batch(j, origin + j * interval, origin + (j + 1) * interval))
        return batches[i]

    for m in msgs:
        i = int((m.timestamp - origin) // interval)
        if i < 0:
            raise ValueError(f"message {m.id!r} predates the stream origin")
        batch_at(i).messages.append(m)
    return batches


# ---------------------------------------------------------------------------
# Vocabulary and feature vectors
# ---------------------------------------------------------------------------

def build_vocabulary_from_tokens(token_lists: Sequence[Sequence[str]],
                                 min_fraction: float,
                                 batch_index: int = 0) -> Vocabulary:
    """Vocabulary over pre-tokenised messages; term kept iff df/N >= min_fraction."""
    if not 0 <= min_fraction < 1:
        raise ValueError("min_fraction must be in [0, 1)")
    n = len(token_lists)
    df: dict[str, int] = {}
    for tokens in token_lists:
        for term in dict.fromkeys(tokens):
            df[term] = df.get(term, 0) + 1
    if n == 0:
        return Vocabulary(batch_index, {}, 0)
    kept = {t: c for t, c in df.items() if c / n >= min_fraction}
    return Vocabulary(batch_index, kept, n)


def build_vocabulary(batch: Batch, min_fraction: float,
                     cfg: Optional[PreprocessConfig] = None) -> Vocabulary:
    """Tokenise a batch in pathway mode and build its vocabulary."""
    if cfg is None:
        cfg = PreprocessConfig.pathway_mode(default_stopwords())
    token_lists = [preprocess(m.text, cfg) for m in batch.messages]
    return build_vocabulary_from_tokens(token_lists, min_fraction, batch.index)


def vectorize(tokens: Sequence[str], vocab: Vocabulary) -> SparseVector:
    """idf-weighted presence vector: each distinct in-vocabulary token
    contributes its idf once; out-of-vocabulary tokens are ignored."""
    entries = {}
    for term in dict.fromkeys(tokens):
        if term in vocab:
            w = vocab.idf(term)
            if w > 0.0:
                entries[term] = w
    return SparseVector(entries, vocab_ref=vocab.batch_index)
