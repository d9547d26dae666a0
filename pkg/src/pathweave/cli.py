"""Command-line entry point.

Subcommands: run (full pipeline over a JSONL stream), emotions (per-post
emotion CSV and optional timeline), lexicon-expand (embedding neighbours for
manual curation), coherence (per-pathway scores from a saved state), report
(re-emit reports from a saved state).  Exit codes: 0 success, 1 runtime I/O
failure, 2 invalid configuration, arguments or state.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .corpus import PreprocessConfig, ingest_path, preprocess
from .emotion import (CATEGORIES, LexiconError, default_lexicons,
                      emotion_timeline, expand_lexicon, load_embeddings,
                      load_emotion_lexicon, load_lexicon, score_post)
from .engine import (ConfigError, StateError, StreamEngine, coherence_report,
                     event_report, load_config, load_state, save_state,
                     segment_report, write_jsonl)

logger = logging.getLogger("pathweave")


def _setup_logging() -> None:
    level_name = os.environ.get("PATHWEAVE_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    state = load_state(args.state) if args.state else None
    engine = StreamEngine(config, state)
    result = ingest_path(args.input)
    if result.skipped:
        logger.warning("skipped %d malformed records", result.skipped)
    engine.process_messages(result.messages)
    write_jsonl(engine.segment_rows(), out / "pathways.jsonl")
    write_jsonl(engine.event_rows(), out / "events.jsonl")
    save_state(engine.state, out / "state.json")
    print(f"processed {len(result.messages)} messages through batch "
          f"{engine.state.last_batch}; {len(engine.state.pathways)} pathways; "
          f"reports in {out}")
    return 0


def cmd_emotions(args) -> int:
    if args.lexicon or args.modifiers:
        if not (args.lexicon and args.modifiers):
            raise ConfigError("--lexicon and --modifiers must be given together")
        lex, mods = load_lexicon(args.lexicon, args.modifiers)
    else:
        lex, mods = default_lexicons()
    pp = PreprocessConfig.emotion_mode()
    result = ingest_path(args.input)
    scored = []
    for msg in result.messages:
        ev = score_post(preprocess(msg.text, pp), lex, mods)
        scored.append((msg, ev))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + list(CATEGORIES) + ["token_count"])
        for msg, ev in scored:
            writer.writerow([msg.id] + [repr(v) for v in ev.values]
                            + [ev.token_count])
    print(f"scored {len(scored)} posts -> {args.out}")
    if args.timeline:
        if not args.interval:
            raise ConfigError("--timeline needs --interval seconds")
        posts = [(msg.timestamp, ev) for msg, ev in scored]
        origin = min(ts for ts, _ in posts) if posts else 0.0
        bins = emotion_timeline(posts, args.interval, origin)
        with open(args.timeline, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_start"] + list(CATEGORIES) + ["n_posts"])
            for b in bins:
                mean = [repr(v) for v in b.mean] if b.mean is not None \
                    else [""] * len(CATEGORIES)
                writer.writerow([_iso(b.start)] + mean + [b.count])
        print(f"timeline with {len(bins)} bins -> {args.timeline}")
    return 0


def cmd_lexicon_expand(args) -> int:
    lex = load_emotion_lexicon(args.seeds)
    seeds: dict[str, list[str]] = {}
    for unit in sorted(lex.units()):
        for ci in sorted(lex.categories_for(unit)):
            seeds.setdefault(CATEGORIES[ci], []).append(" ".join(unit))
    emb = load_embeddings(args.embedding)
    result = expand_lexicon(seeds, emb, args.k, args.min_sim,
                            exclude=lex.flat_terms())
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["category", "candidate", "seed", "cosine"])
        for category in sorted(result.candidates):
            for term, seed, cos in result.candidates[category]:
                writer.writerow([category, term, seed, f"{cos:.6f}"])
        for category in sorted(result.skipped_seeds):
            for seed in result.skipped_seeds[category]:
                fh.write(f"# skipped,{category},{seed}\n")
    n = sum(len(v) for v in result.candidates.values())
    print(f"{n} candidates for review -> {args.out}")
    return 0


def cmd_coherence(args) -> int:
    state = load_state(args.state)
    rows = coherence_report(state, args.m)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pathway_id", "m", "coherence"])
        for pid, m, score in rows:
            writer.writerow([pid, m, repr(score)])
    print(f"{len(rows)} coherence rows -> {args.out}")
    return 0


def cmd_report(args) -> int:
    config = load_config(args.config) if args.config else load_config()
    state = load_state(args.state)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(segment_report(state), out / "pathways.jsonl")
    write_jsonl(event_report(state, config.events), out / "events.jsonl")
    print(f"reports for batches 0..{state.last_batch} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathweave",
        description="Topic pathways, events and emotions from a short-text stream")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline over a JSONL stream")
    p.add_argument("--config", help="TOML config (defaults ship in the package)")
    p.add_argument("--input", required=True, help="JSONL message stream")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--state", help="resume from this saved state file")
    p.add_argument("--seed", type=int, help="override the configured rng seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("emotions", help="per-post 16-dimension emotion CSV")
    p.add_argument("--input", required=True, help="JSONL message stream")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--lexicon", help="emotion lexicon CSV (term,Category)")
    p.add_argument("--modifiers", help="modifier lexicon CSV (term,weight)")
    p.add_argument("--timeline", help="also write a binned timeline CSV here")
    p.add_argument("--interval", type=float, help="timeline bin width, seconds")
    p.set_defaults(func=cmd_emotions)

    p = sub.add_parser("lexicon-expand",
                       help="embedding nearest-neighbour candidates for review")
    p.add_argument("--seeds", required=True, help="seed lexicon CSV (term,Category)")
    p.add_argument("--embedding", required=True,
                   help="text embedding: optional 'count dim' header, then "
                        "'term v1 .. vd' lines")
    p.add_argument("--k", type=int, default=10, help="neighbours per seed")
    p.add_argument("--min-sim", type=float, default=0.5, dest="min_sim",
                   help="minimum cosine similarity")
    p.add_argument("--out", required=True, help="review CSV path")
    p.set_defaults(func=cmd_lexicon_expand)

    p = sub.add_parser("coherence", help="coherence CSV from a saved state")
    p.add_argument("--state", required=True, help="state file from a run")
    p.add_argument("--m", type=int, default=10, help="top terms per topic")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("report", help="re-emit reports from a saved state")
    p.add_argument("--state", required=True, help="state file from a run")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="TOML config used for the run")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, StateError, LexiconError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
