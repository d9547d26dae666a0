"""Multi-faceted event detection over topic pathways.

Each indicator is the ratio of a segment statistic to its trailing moving
average inside the same pathway: volume proportion, mean positive sentiment,
and mean negative sentiment (as magnitudes, so "more negative" reads as a
larger indicator).  Indicators combine linearly under weights that sum to
one; a steady pathway therefore scores exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .pathways import TopicPathway

VOLUME = "volume"
POS_SENTIMENT = "pos_sentiment"
NEG_SENTIMENT = "neg_sentiment"

# Indicator value when the trailing average is zero but the segment is not.
ZERO_HISTORY_CAP = 10.0


@dataclass
class IndicatorWeights:
    """Sensitivity of each indicator to the final score; must sum to one."""

    volume: float = 0.1
    pos_sentiment: float = 0.45
    neg_sentiment: float = 0.45
    extensions: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, w in self.as_mapping().items():
            if w < 0 or w > 1:
                raise ValueError(f"weight {name} = {w} outside [0, 1]")
        total = math.fsum(self.as_mapping().values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"indicator weights sum to {total}, expected 1")

    def as_mapping(self) -> dict[str, float]:
        out = {VOLUME: self.volume, POS_SENTIMENT: self.pos_sentiment,
               NEG_SENTIMENT: self.neg_sentiment}
        out.update(self.extensions)
        return out


@dataclass
class EventConfig:
    window: int = 2
    weights: IndicatorWeights = field(default_factory=IndicatorWeights)
    threshold: float = 1.0
    min_volume_fraction: float = 0.01
    comparison: str = "strict"   # "strict" (>) or "ge" (>=)
    zero_history_cap: float = ZERO_HISTORY_CAP
    top_terms: int = 20          # "frequent terms" cutoff for triggers

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.comparison not in ("strict", "ge"):
            raise ValueError("comparison must be 'strict' or 'ge'")


@dataclass
class EventRecord:
    pathway_id: str
    batch_index: int
    i_v: float
    i_ps: float
    i_ns: float
    score: float
    flagged: bool
    trigger_terms: list[str]

    def to_dict(self) -> dict:
        return {"pathway_id": self.pathway_id, "batch_index": self.batch_index,
                "i_v": self.i_v, "i_ps": self.i_ps, "i_ns": self.i_ns,
                "score": self.score, "flagged": self.flagged,
                "trigger_terms": self.trigger_terms}


def _ratio(history: Iterable[float], current: float, window: int,
           cap: float) -> float:
    history = list(history)
    if len(history) != window:
        raise ValueError(f"history must hold exactly {window} values, "
                         f"got {len(history)}")
    total = math.fsum(history)
    if total == 0.0:
        return 0.0 if current == 0.0 else cap
    return current * window / total


def indicator_volume(history: Iterable[float], current: float, window: int,
                     cap: float = ZERO_HISTORY_CAP) -> float:
    """Volume proportion of the segment over its trailing moving average."""
    return _ratio(history, current, window, cap)


def indicator_sentiment(history: Iterable[float], current: float, window: int,
                        cap: float = ZERO_HISTORY_CAP) -> float:
    """Sentiment average over its trailing moving average.

    Signed inputs are folded to magnitudes first so the negative scale keeps
    "more negative means larger indicator" semantics.
    """
    return _ratio((abs(h) for h in history), abs(current), window, cap)


def event_score(indicators: Mapping[str, float],
                weights: IndicatorWeights) -> float:
    """Weighted linear combination; indicator names must match the weights."""
    wmap = weights.as_mapping()
    if set(indicators) != set(wmap):
        missing = set(wmap) - set(indicators)
        extra = set(indicators) - set(wmap)
        raise ValueError(f"indicator/weight mismatch: missing={sorted(missing)} "
                         f"unknown={sorted(extra)}")
    return math.fsum(wmap[name] * indicators[name] for name in sorted(indicators))


def frequent_terms(term_freqs: Mapping[str, int], top: int) -> list[str]:
    """Most frequent terms, count-descending with lexicographic ties."""
    ranked = sorted(term_freqs.items(), key=lambda kv: (-kv[1], kv[0]))
    return [t for t, _ in ranked[:top]]


def detect(pathways: Iterable[TopicPathway], cfg: EventConfig) -> list[EventRecord]:
    """Evaluate every eligible segment of every pathway.

    A segment is eligible once its pathway has a full window of predecessors
    and the segment holds at least ``min_volume_fraction`` of its batch.
    Trigger terms are the segment's frequent terms that appear in none of the
    previous window's frequent-term sets.  Records for all evaluated segments
    are returned; ``flagged`` marks the ones crossing the threshold.
    """
    w = cfg.window
    records: list[EventRecord] = []
    for pathway in sorted(pathways, key=lambda p: p.pathway_id):
        segs = pathway.segments
        for k in range(w, len(segs)):
            seg = segs[k]
            if seg.volume_proportion < cfg.min_volume_fraction:
                continue
            window_segs = segs[k - w:k]
            i_v = indicator_volume([s.volume_proportion for s in window_segs],
                                   seg.volume_proportion, w, cfg.zero_history_cap)
            i_ps = indicator_sentiment(
                [s.avg_pos_sentiment or 0.0 for s in window_segs],
                seg.avg_pos_sentiment or 0.0, w, cfg.zero_history_cap)
            i_ns = indicator_sentiment(
                [s.avg_neg_sentiment or 0.0 for s in window_segs],
                seg.avg_neg_sentiment or 0.0, w, cfg.zero_history_cap)
            score = event_score({VOLUME: i_v, POS_SENTIMENT: i_ps,
                                 NEG_SENTIMENT: i_ns}, cfg.weights)
            if cfg.comparison == "strict":
                flagged = score > cfg.threshold
            else:
                flagged = score >= cfg.threshold
            current_terms = frequent_terms(seg.term_freqs, cfg.top_terms)
            prior: set[str] = set()
            for s in window_segs:
                prior.update(frequent_terms(s.term_freqs, cfg.top_terms))
            triggers = [t for t in current_terms if t not in prior]
            records.append(EventRecord(
                pathway_id=pathway.pathway_id, batch_index=seg.batch_index,
                i_v=i_v, i_ps=i_ps, i_ns=i_ns, score=score, flagged=flagged,
                trigger_terms=triggers))
    return records
