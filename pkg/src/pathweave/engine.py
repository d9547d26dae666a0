"""Pipeline orchestration: configuration, the per-batch run loop, state
persistence and report emission.

The engine walks batches in time order and carries only the layer state
(live cluster representations plus the pathway registry), accumulated
segments, and a compact document log used by the coherence report.  A run
can stop after any batch, save, reload and continue with output identical to
an uninterrupted run: all randomness derives from the configured seed and
the batch index, never from process state.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .corpus import (Batch, Message, PreprocessConfig, build_vocabulary_from_tokens,
                     dedupe, default_stopwords, load_stopwords, partition,
                     preprocess, vectorize)
from .emotion import default_lexicons, load_lexicon, score_post, sentiment_of
from .events import EventConfig, EventRecord, IndicatorWeights, detect
from .gsom import GsomParams
from .metrics import coherence, collect_frequencies, top_terms
from .pathways import (BatchFeatures, LayerState, PathwayConfig, TopicPathway,
                       advance_layer)

logger = logging.getLogger("pathweave.engine")

STATE_FORMAT_VERSION = 1
REPORT_TOP_TERMS = 10


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


class StateError(ValueError):
    """Unreadable, corrupt or incompatible engine state."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _parse_origin(raw: str) -> Optional[float]:
    if not raw:
        return None
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ConfigError(f"bad origin timestamp {raw!r}: {exc}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


@dataclass
class EngineConfig:
    """Validated engine settings; see data/default_config.toml for docs."""

    interval_seconds: float = 604800.0
    origin: Optional[float] = None
    sort_input: bool = False
    slack_seconds: float = 0.0
    vocab_min_fraction: float = 0.005
    pathways: PathwayConfig = field(default_factory=PathwayConfig)
    events: EventConfig = field(default_factory=EventConfig)
    emotion_lexicon_path: Optional[str] = None
    modifier_lexicon_path: Optional[str] = None
    stopwords_path: Optional[str] = None
    sentiment_scale: float = 10.0
    rng_seed: int = 7

    def __post_init__(self):
        if self.interval_seconds <= 0:
            raise ConfigError("interval_seconds must be positive")
        if not 0 <= self.vocab_min_fraction < 1:
            raise ConfigError("vocabulary min_message_fraction must be in [0, 1)")
        if self.sentiment_scale <= 0:
            raise ConfigError("sentiment_scale must be positive")

    def fingerprint(self) -> str:
        """Digest of every setting that shapes outputs; resuming under a
        different fingerprint would silently break determinism."""
        payload = {
            "interval": self.interval_seconds, "origin": self.origin,
            "vocab": self.vocab_min_fraction,
            "pathways": {"hit": self.pathways.hit_fraction,
                         "topic": self.pathways.topic_threshold,
                         "new": self.pathways.min_new_fraction,
                         "dormant": self.pathways.max_dormant,
                         "seed": self.pathways.rng_seed},
            "gsom": [self.pathways.gsom.alpha0, self.pathways.gsom.alpha_min,
                     self.pathways.gsom.ordering_epochs,
                     self.pathways.gsom.smoothing_epochs,
                     self.pathways.gsom.sigma0, self.pathways.gsom.sigma_min,
                     self.pathways.gsom.growth_threshold],
            "events": [self.events.window, self.events.threshold,
                       self.events.min_volume_fraction, self.events.comparison,
                       sorted(self.events.weights.as_mapping().items())],
            "emotion": [self.emotion_lexicon_path, self.modifier_lexicon_path,
                        self.sentiment_scale],
            "stopwords": self.stopwords_path,
            "seed": self.rng_seed,
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def load_config(path: Optional[str] = None,
                seed_override: Optional[int] = None) -> EngineConfig:
    """Read a TOML config over the shipped defaults; None loads defaults."""
    from importlib.resources import files

    with files("pathweave.data").joinpath("default_config.toml").open("rb") as fh:
        merged = tomllib.load(fh)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                user = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML in {path}: {exc}") from exc
        for section, values in user.items():
            if section not in merged:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(values, dict):
                raise ConfigError(f"[{section}] must be a table")
            for key, val in values.items():
                if key not in merged[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                merged[section][key] = val

    s, v, p, g, e, m, r = (merged["stream"], merged["vocabulary"],
                           merged["pathways"], merged["gsom"], merged["events"],
                           merged["emotion"], merged["runtime"])
    seed = int(r["rng_seed"]) if seed_override is None else int(seed_override)
    try:
        weights = IndicatorWeights(volume=float(e["weight_volume"]),
                                   pos_sentiment=float(e["weight_pos_sentiment"]),
                                   neg_sentiment=float(e["weight_neg_sentiment"]))
        gsom = GsomParams(alpha0=float(g["alpha0"]), alpha_min=float(g["alpha_min"]),
                          ordering_epochs=int(g["ordering_epochs"]),
                          smoothing_epochs=int(g["smoothing_epochs"]),
                          sigma0=float(g["sigma0"]), sigma_min=float(g["sigma_min"]),
                          growth_threshold=float(g["growth_threshold"]),
                          rng_seed=seed)
        pathways = PathwayConfig(hit_fraction=float(p["hit_fraction"]),
                                 topic_threshold=float(p["topic_threshold"]),
                                 min_new_fraction=float(p["min_new_fraction"]),
                                 max_dormant=int(p["max_dormant"]),
                                 gsom=gsom, rng_seed=seed)
        events = EventConfig(window=int(e["window"]), weights=weights,
                             threshold=float(e["threshold"]),
                             min_volume_fraction=float(e["min_volume_fraction"]),
                             comparison=str(e["comparison"]),
                             zero_history_cap=float(e["zero_history_cap"]),
                             top_terms=int(e["top_terms"]))
        return EngineConfig(
            interval_seconds=float(s["interval_seconds"]),
            origin=_parse_origin(str(s["origin"])),
            sort_input=bool(s["sort_input"]),
            slack_seconds=float(s["slack_seconds"]),
            vocab_min_fraction=float(v["min_message_fraction"]),
            pathways=pathways, events=events,
            emotion_lexicon_path=str(m["lexicon"]) or None,
            modifier_lexicon_path=str(m["modifiers"]) or None,
            stopwords_path=str(r["stopwords"]) or None,
            sentiment_scale=float(m["sentiment_scale"]),
            rng_seed=seed)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from exc


# ---------------------------------------------------------------------------
# Engine state
# ---------------------------------------------------------------------------

@dataclass
class EngineState:
    """Everything a continuation needs; reload-and-continue must equal an
    uninterrupted run on the same input and seed."""

    config_fingerprint: str
    interval_seconds: float
    origin: Optional[float] = None
    last_batch: int = -1
    layer: LayerState = field(default_factory=LayerState)
    pathways: dict[str, TopicPathway] = field(default_factory=dict)
    # (batch_index, pathway_id or None, sorted distinct in-vocabulary terms)
    doc_log: list[tuple[int, Optional[str], list[str]]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"format_version": STATE_FORMAT_VERSION,
                "config_fingerprint": self.config_fingerprint,
                "interval_seconds": self.interval_seconds,
                "origin": self.origin,
                "last_batch": self.last_batch,
                "layer": self.layer.to_dict(),
                "pathways": {k: self.pathways[k].to_dict()
                             for k in sorted(self.pathways)},
                "doc_log": [[b, p, t] for b, p, t in self.doc_log]}

    @classmethod
    def from_dict(cls, d: dict) -> "EngineState":
        version = d.get("format_version")
        if version != STATE_FORMAT_VERSION:
            raise StateError(f"state format version {version!r} not supported "
                             f"(expected {STATE_FORMAT_VERSION})")
        return cls(config_fingerprint=d["config_fingerprint"],
                   interval_seconds=d["interval_seconds"],
                   origin=d["origin"], last_batch=d["last_batch"],
                   layer=LayerState.from_dict(d["layer"]),
                   pathways={k: TopicPathway.from_dict(v)
                             for k, v in d["pathways"].items()},
                   doc_log=[(b, p, list(t)) for b, p, t in d["doc_log"]])


def save_state(state: EngineState, path) -> None:
    """Single-line canonical JSON followed by a sha256 trailer line."""
    payload = json.dumps(state.to_dict(), sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload + "\n" + "sha256:" + digest + "\n")


def load_state(path) -> EngineState:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            content = fh.read()
    except OSError as exc:
        raise StateError(f"cannot read state {path}: {exc}") from exc
    lines = content.splitlines()
    if len(lines) != 2 or not lines[1].startswith("sha256:"):
        raise StateError(f"state file {path} is truncated or malformed")
    digest = hashlib.sha256(lines[0].encode("utf-8")).hexdigest()
    if lines[1] != "sha256:" + digest:
        raise StateError(f"state file {path} failed its checksum")
    try:
        return EngineState.from_dict(json.loads(lines[0]))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise StateError(f"state file {path} is malformed: {exc}") from exc


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------

class StreamEngine:
    """Drives the per-batch pipeline and accumulates reportable state."""

    def __init__(self, config: EngineConfig, state: Optional[EngineState] = None):
        self.config = config
        if config.stopwords_path:
            stopwords = load_stopwords(config.stopwords_path)
        else:
            stopwords = default_stopwords()
        self.pathway_pp = PreprocessConfig.pathway_mode(stopwords)
        self.emotion_pp = PreprocessConfig.emotion_mode()
        if config.emotion_lexicon_path or config.modifier_lexicon_path:
            if not (config.emotion_lexicon_path and config.modifier_lexicon_path):
                raise ConfigError("emotion lexicon and modifiers must be set together")
            self.lexicon, self.modifiers = load_lexicon(
                config.emotion_lexicon_path, config.modifier_lexicon_path)
        else:
            self.lexicon, self.modifiers = default_lexicons()
        if state is None:
            self.state = EngineState(config_fingerprint=config.fingerprint(),
                                     interval_seconds=config.interval_seconds,
                                     origin=config.origin)
        else:
            if state.config_fingerprint != config.fingerprint():
                raise StateError("state was produced under a different "
                                 "configuration; refusing to resume")
            self.state = state

    # -- per-batch processing ------------------------------------------------

    def process_messages(self, messages: Sequence[Message]) -> None:
        """Partition messages from the stream origin and advance one batch at
        a time.  On resume, input overlapping already-processed batches is an
        error; gaps between batches become empty (dormancy-ticking) batches."""
        if not messages:
            return
        if self.state.origin is None:
            self.state.origin = min(m.timestamp for m in messages)
        batches = partition(messages, self.state.interval_seconds,
                            self.state.origin, slack=self.config.slack_seconds,
                            sort=self.config.sort_input)
        for batch in batches:
            if batch.index <= self.state.last_batch:
                if batch.messages:
                    raise StateError(
                        f"batch {batch.index} was already processed; resume "
                        "input must start after the saved position")
                continue
            self._process_batch(batch)

    def _process_batch(self, batch: Batch) -> None:
        batch = dedupe(batch)
        ptokens = [preprocess(m.text, self.pathway_pp) for m in batch.messages]
        vocab = build_vocabulary_from_tokens(ptokens, self.config.vocab_min_fraction,
                                             batch.index)
        vectors = [vectorize(toks, vocab) for toks in ptokens]
        sentiments = []
        for m in batch.messages:
            ev = score_post(preprocess(m.text, self.emotion_pp),
                            self.lexicon, self.modifiers)
            s = sentiment_of(ev, self.config.sentiment_scale)
            sentiments.append((s.pos, s.neg))
        features = BatchFeatures(batch=batch, vocabulary=vocab, tokens=ptokens,
                                 vectors=vectors, sentiments=sentiments)
        result = advance_layer(features, self.state.layer, self.config.pathways)
        self.state.layer = result.state

        assignment: dict[str, Optional[str]] = {mid: None for mid in
                                                (m.id for m in batch.messages)}
        for seg in result.segments:
            pid = seg.pathway_id
            if pid not in self.state.pathways:
                self.state.pathways[pid] = TopicPathway(
                    pathway_id=pid, birth_layer=result.state.births[pid])
            self.state.pathways[pid].segments.append(seg)
            for mid in seg.message_ids:
                assignment[mid] = pid

        for i, m in enumerate(batch.messages):
            terms = sorted({t for t in ptokens[i] if t in vocab})
            if terms:
                self.state.doc_log.append((batch.index, assignment[m.id], terms))

        self.state.last_batch = batch.index
        logger.info("batch %d: %d messages, %d segments, %d live pathways",
                    batch.index, len(batch.messages), len(result.segments),
                    len(result.state.live))

    # -- reports ---------------------------------------------------------------

    def detect_events(self) -> list[EventRecord]:
        return detect(self.state.pathways.values(), self.config.events)

    def segment_rows(self) -> list[dict]:
        return segment_report(self.state)

    def event_rows(self) -> list[dict]:
        return event_report(self.state, self.config.events)

    def coherence_rows(self, m: int) -> list[tuple[str, int, float]]:
        return coherence_report(self.state, m)


def segment_report(state: EngineState) -> list[dict]:
    """One row per topic segment, time-ordered."""
    rows = []
    for pid in sorted(state.pathways):
        for seg in state.pathways[pid].segments:
            rows.append({"pathway_id": pid, "batch_index": seg.batch_index,
                         "n_messages": len(seg.message_ids),
                         "volume_proportion": seg.volume_proportion,
                         "top_terms": top_terms(seg.term_freqs, REPORT_TOP_TERMS),
                         "avg_pos": seg.avg_pos_sentiment,
                         "avg_neg": seg.avg_neg_sentiment})
    rows.sort(key=lambda r: (r["batch_index"], r["pathway_id"]))
    return rows


def event_report(state: EngineState, cfg: EventConfig) -> list[dict]:
    """One row per flagged segment, time-ordered."""
    rows = []
    for rec in detect(state.pathways.values(), cfg):
        if not rec.flagged:
            continue
        rows.append({"pathway_id": rec.pathway_id, "batch_index": rec.batch_index,
                     "i_v": rec.i_v, "i_ps": rec.i_ps, "i_ns": rec.i_ns,
                     "score": rec.score, "trigger_terms": rec.trigger_terms})
    rows.sort(key=lambda r: (r["batch_index"], r["pathway_id"]))
    return rows


def coherence_report(state: EngineState, m: int) -> list[tuple[str, int, float]]:
    """Per-pathway coherence over each pathway's own documents, then a
    whole-corpus baseline row computed from the same document log.

    Pathway top terms rank by raw in-pathway term frequency; the corpus
    baseline ranks by document frequency (the log keeps distinct terms only).
    """
    rows: list[tuple[str, int, float]] = []
    for pid in sorted(state.pathways):
        docs = [t for b, p, t in state.doc_log if p == pid]
        freqs: dict[str, int] = {}
        for seg in state.pathways[pid].segments:
            for term, c in seg.term_freqs.items():
                freqs[term] = freqs.get(term, 0) + c
        terms = top_terms(freqs, m)
        if not terms:
            continue
        rows.append((pid, len(terms), coherence(collect_frequencies(docs, terms))))
    corpus_docs = [t for _, _, t in state.doc_log]
    corpus_freqs: dict[str, int] = {}
    for doc in corpus_docs:
        for term in doc:
            corpus_freqs[term] = corpus_freqs.get(term, 0) + 1
    baseline_terms = top_terms(corpus_freqs, m)
    if baseline_terms:
        rows.append(("__corpus__", len(baseline_terms),
                     coherence(collect_frequencies(corpus_docs, baseline_terms))))
    return rows


def write_jsonl(rows: Sequence[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")
