"""Shared fixtures: synthetic planted-topic streams and a cached engine run."""

from __future__ import annotations

import json
import random
from datetime import datetime, timezone

import pytest

from pathweave import Message, StreamEngine, load_config

DAY = 86400.0
WEEK = 7 * DAY
STREAM_ORIGIN = datetime(2015, 1, 1, tzinfo=timezone.utc).timestamp()

TOPIC_CORES = {
    1: [f"alpha{k}" for k in range(10)],
    2: [f"bravo{k}" for k in range(10)],
    3: [f"charlie{k}" for k in range(10)],
    4: [f"delta{k}" for k in range(10)],
}
NEGATIVE_TERMS = ["sad", "angry", "worthless", "hopeless", "miserable"]


def weighted_sample(rng: random.Random, terms, weights, k: int) -> list[str]:
    """Distinct draw of k terms with probability proportional to weight."""
    chosen = []
    pool = list(zip(terms, weights))
    for _ in range(k):
        total = sum(w for _, w in pool)
        r = rng.uniform(0.0, total)
        acc = 0.0
        for i, (t, w) in enumerate(pool):
            acc += w
            if r <= acc:
                chosen.append(t)
                pool.pop(i)
                break
    return chosen


def make_stream(seed: int = 5):
    """Twelve weekly batches of 300 messages: three planted topics with
    disjoint ten-term cores and 5% uniform noise; topic 4 enters at batch 6;
    topic 1 triples in volume at batch 9 with 30% of its messages carrying
    negative-emotion terms.

    Term draws are Zipf-weighted inside each core so corpus-wide frequency
    ranks interleave the topics, as they do in real text.  Returns
    (messages, labels by id, origin); messages are time-sorted.
    """
    rng = random.Random(seed)
    zipf = [1.0 / (k + 1) for k in range(10)]
    noise_pool = [f"noise{k}" for k in range(200)]
    records = []
    mid = 0
    for b in range(12):
        topics = [1, 2, 3] if b < 6 else [1, 2, 3, 4]
        share = 285 // len(topics)
        counts = {t: share for t in topics}
        counts[1] += 285 - share * len(topics)
        if b == 9:
            counts[1] *= 3
        batch = []
        for t in topics:
            for i in range(counts[t]):
                text = " ".join(weighted_sample(rng, TOPIC_CORES[t], zipf, 5))
                if b == 9 and t == 1 and i < int(round(0.3 * counts[1])):
                    text += " " + rng.choice(NEGATIVE_TERMS)
                batch.append((text, t))
        for _ in range(15):
            batch.append((" ".join(rng.sample(noise_pool, 5)), 0))
        rng.shuffle(batch)
        for text, label in batch:
            ts = STREAM_ORIGIN + b * WEEK + rng.uniform(0.0, WEEK - 1.0)
            records.append({"id": str(mid), "text": text, "ts": ts,
                            "label": label, "batch": b})
            mid += 1
    records.sort(key=lambda m: m["ts"])
    labels = {m["id"]: m["label"] for m in records}
    return records, labels, STREAM_ORIGIN


def iso_utc(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ")


def write_jsonl_stream(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for m in records:
            fh.write(json.dumps({"id": m["id"], "text": m["text"],
                                 "timestamp": iso_utc(m["ts"])}) + "\n")


@pytest.fixture(scope="session")
def planted_stream():
    return make_stream(seed=5)


@pytest.fixture(scope="session")
def planted_engine(planted_stream):
    """One full engine pass over the planted stream, shared by the tests that
    only read its outputs.  Returns (engine, labels, elapsed seconds)."""
    import time

    records, labels, origin = planted_stream
    config = load_config()
    config.origin = origin
    engine = StreamEngine(config)
    started = time.monotonic()
    engine.process_messages([Message(m["id"], m["text"], m["ts"])
                             for m in records])
    elapsed = time.monotonic() - started
    return engine, labels, elapsed
