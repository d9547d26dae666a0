"""Layered topic-pathway separation over batch-trained maps.

Each batch trains one map per surviving pathway, seeded from the pathway's
previous cluster representation, plus one fresh map for messages unlike any
known pathway.  Trained maps are generalised into cluster representation
vectors by max-pooling each hit node with its grid neighbours; those vectors
are all the state carried to the next batch, so no past raw data is needed.

Matching across batches uses the intersection cosine: representation terms
that fell out of the current vocabulary are ignored rather than penalised.
"""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .corpus import Batch, SparseVector, Vocabulary, similarity
from .gsom import GsomMap, GsomParams, assign, init_map, train

logger = logging.getLogger("pathweave.pathways")

NEW = None  # routing sentinel: no existing pathway is similar enough

# A grid neighbour joins a hit node's max-pool only when its weights resemble
# the hit node's. On maps trained over several topics, adjacent nodes can sit
# across a topic boundary; pooling them unconditionally would blend unrelated
# term cores into one representation.
POOL_MIN_SIM = 0.2

# Hit nodes whose weight cosine reaches this bar carry the same discussion.
# Competitive learning splits one topic across nodes that specialise on
# overlapping term subsets; treating each as its own topic would fork every
# pathway into fragments at every layer, so such nodes pool into one
# representation. Distinct topics in the same map sit near zero similarity
# and stay separate.
TOPIC_MERGE_SIM = 0.25


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class ClusterRep:
    """Max-pooled summary of a hit node; carries a pathway across batches."""

    layer: int
    pathway_id: str
    vector: SparseVector
    source: tuple[tuple[int, int], str]  # (hit node position, map id)

    def to_dict(self) -> dict:
        return {"layer": self.layer, "pathway_id": self.pathway_id,
                "vector": self.vector.to_dict(),
                "source": [list(self.source[0]), self.source[1]]}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterRep":
        return cls(layer=d["layer"], pathway_id=d["pathway_id"],
                   vector=SparseVector.from_dict(d["vector"]),
                   source=((d["source"][0][0], d["source"][0][1]), d["source"][1]))


@dataclass
class TopicSegment:
    """One pathway's share of one batch, with the statistics event detection
    needs (volume proportion, mean sentiment, term counts)."""

    pathway_id: str
    batch_index: int
    message_ids: list[str]
    volume_proportion: float
    avg_pos_sentiment: Optional[float] = None
    avg_neg_sentiment: Optional[float] = None
    term_freqs: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"pathway_id": self.pathway_id, "batch_index": self.batch_index,
                "message_ids": self.message_ids,
                "volume_proportion": self.volume_proportion,
                "avg_pos_sentiment": self.avg_pos_sentiment,
                "avg_neg_sentiment": self.avg_neg_sentiment,
                "term_freqs": {t: self.term_freqs[t] for t in sorted(self.term_freqs)}}

    @classmethod
    def from_dict(cls, d: dict) -> "TopicSegment":
        return cls(pathway_id=d["pathway_id"], batch_index=d["batch_index"],
                   message_ids=list(d["message_ids"]),
                   volume_proportion=d["volume_proportion"],
                   avg_pos_sentiment=d.get("avg_pos_sentiment"),
                   avg_neg_sentiment=d.get("avg_neg_sentiment"),
                   term_freqs=dict(d.get("term_freqs", {})))


@dataclass
class TopicPathway:
    """Chain of topic segments with one id; one evolving discussion."""

    pathway_id: str
    birth_layer: int
    segments: list[TopicSegment] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"pathway_id": self.pathway_id, "birth_layer": self.birth_layer,
                "segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, d: dict) -> "TopicPathway":
        return cls(pathway_id=d["pathway_id"], birth_layer=d["birth_layer"],
                   segments=[TopicSegment.from_dict(s) for s in d["segments"]])


# ---------------------------------------------------------------------------
# Generalisation and routing
# ---------------------------------------------------------------------------

def pooled_neighborhood(gmap: GsomMap, node, min_sim: float = POOL_MIN_SIM) -> list:
    """The hit node plus those 4-neighbours whose weights resemble it."""
    members = [node]
    for nbr in gmap.neighbors(node.pos):
        if similarity(node.weights, nbr.weights) >= min_sim:
            members.append(nbr)
    return members


def pool_max(vectors: Sequence[SparseVector],
             vocab_ref: Optional[int] = None) -> SparseVector:
    """Element-wise maximum over sparse vectors (absent entries count zero)."""
    pooled: dict[str, float] = {}
    for v in vectors:
        for term, w in v.entries.items():
            if w > pooled.get(term, 0.0):
                pooled[term] = w
    return SparseVector(pooled, vocab_ref=vocab_ref)


def hit_node_groups(gmap: GsomMap, inputs: Sequence[SparseVector],
                    hit_fraction: float,
                    merge_min_sim: float = TOPIC_MERGE_SIM) -> list[list]:
    """Hit nodes, grouped so that nodes carrying the same discussion pool
    into one representation.

    A node joins the strongest group whose leader it resembles (weight cosine
    at or above ``merge_min_sim``); otherwise it leads a new group.  Groups
    come back leaders-first by hit count, members by grid position.
    """
    assign(gmap, inputs)
    n = len(inputs)
    ordered = gmap.ordered_nodes()
    hit_nodes = [nd for nd in ordered if nd.hits / n >= hit_fraction]
    if not hit_nodes:
        hit_nodes = [max(ordered, key=lambda nd: nd.hits)]
    groups: list[list] = []
    for node in sorted(hit_nodes, key=lambda nd: (-nd.hits, nd.pos)):
        for g in groups:
            if similarity(node.weights, g[0].weights) >= merge_min_sim:
                g.append(node)
                break
        else:
            groups.append([node])
    for g in groups:
        g[1:] = sorted(g[1:], key=lambda nd: nd.pos)
    return groups


def generalize(gmap: GsomMap, inputs: Sequence[SparseVector], hit_fraction: float,
               pathway_id: str, pool_min_sim: float = POOL_MIN_SIM,
               merge_min_sim: float = TOPIC_MERGE_SIM) -> list[ClusterRep]:
    """Promote nodes claiming at least ``hit_fraction`` of the inputs into
    cluster representations by max-pooling each hit-node group with its
    similar 4-neighbours.

    If no node reaches the threshold the single highest-hit node is promoted
    so a trained map always yields at least one representation.  One rep per
    distinct group, anchored at the group's strongest node; reps with empty
    vectors are dropped.
    """
    if not inputs:
        raise ValueError("cannot generalise without inputs")
    if not 0 < hit_fraction < 1:
        raise ValueError("hit_fraction must be in (0, 1)")
    map_id = f"{gmap.birth_vocab}/{pathway_id}"
    layer = gmap.birth_vocab if gmap.birth_vocab is not None else 0
    reps = []
    for group in hit_node_groups(gmap, inputs, hit_fraction, merge_min_sim):
        members = []
        seen = set()
        for node in group:
            for m in pooled_neighborhood(gmap, node, pool_min_sim):
                if m.pos not in seen:
                    seen.add(m.pos)
                    members.append(m)
        vector = pool_max([m.weights for m in members], vocab_ref=gmap.birth_vocab)
        if not vector:
            continue
        reps.append(ClusterRep(layer=layer, pathway_id=pathway_id, vector=vector,
                               source=(group[0].pos, map_id)))
    reps.sort(key=lambda r: r.source[0])
    return reps


def route(vectors: Sequence[SparseVector], reps: Sequence[ClusterRep],
          threshold: float,
          universe: Optional[set[str]] = None) -> list[Optional[str]]:
    """Assign each vector to the most similar representation, or NEW when the
    best similarity is below the threshold (or no representations exist).

    Callers resolve ties by rep order: pass reps sorted oldest-birth first,
    then lexicographic id.  The first maximum wins.
    """
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must be in [0, 1]")
    out: list[Optional[str]] = []
    for v in vectors:
        best_id, best_sim = NEW, -1.0
        for rep in reps:
            sim = similarity(v, rep.vector, universe)
            if sim > best_sim:
                best_id, best_sim = rep.pathway_id, sim
        out.append(best_id if best_sim >= threshold and reps else NEW)
    return out


# ---------------------------------------------------------------------------
# Layer state and the per-batch step
# ---------------------------------------------------------------------------

@dataclass
class PathwayConfig:
    """Thresholds of the layering step plus the map training parameters."""

    hit_fraction: float = 0.05          # input share a node needs to seed a rep
    topic_threshold: float = 0.1        # min similarity to join a pathway
    min_new_fraction: float = 0.01      # batch share needed to found pathways
    max_dormant: int = 3                # layers a silent pathway survives
    merge_threshold: float = TOPIC_MERGE_SIM  # rep-to-rep "same discussion" bar
    fork_min_fraction: float = 0.25     # share of a pathway's batch a distinct
                                        # hit region needs to fork a child
    gsom: GsomParams = field(default_factory=GsomParams)
    rng_seed: int = 0

    def derived_seed(self, batch_index: int, key: str) -> int:
        # crc32 keeps per-map streams stable across runs and platforms
        return zlib.crc32(f"{self.rng_seed}:{batch_index}:{key}".encode("utf-8"))


@dataclass
class LiveRep:
    rep: ClusterRep
    dormant: int = 0

    def to_dict(self) -> dict:
        return {"rep": self.rep.to_dict(), "dormant": self.dormant}

    @classmethod
    def from_dict(cls, d: dict) -> "LiveRep":
        return cls(rep=ClusterRep.from_dict(d["rep"]), dormant=d["dormant"])


@dataclass
class LayerState:
    """Everything carried between batches: live representations and the
    pathway registry.  Committed states are never mutated in place."""

    live: dict[str, LiveRep] = field(default_factory=dict)
    births: dict[str, int] = field(default_factory=dict)
    parents: dict[str, Optional[str]] = field(default_factory=dict)
    next_ordinal: int = 0

    def clone(self) -> "LayerState":
        return LayerState(live={k: LiveRep(v.rep, v.dormant) for k, v in self.live.items()},
                          births=dict(self.births), parents=dict(self.parents),
                          next_ordinal=self.next_ordinal)

    def new_id(self) -> str:
        pid = f"p{self.next_ordinal:04d}"
        self.next_ordinal += 1
        return pid

    def to_dict(self) -> dict:
        return {"live": {k: self.live[k].to_dict() for k in sorted(self.live)},
                "births": {k: self.births[k] for k in sorted(self.births)},
                "parents": {k: self.parents[k] for k in sorted(self.parents)},
                "next_ordinal": self.next_ordinal}

    @classmethod
    def from_dict(cls, d: dict) -> "LayerState":
        return cls(live={k: LiveRep.from_dict(v) for k, v in d["live"].items()},
                   births=dict(d["births"]), parents=dict(d["parents"]),
                   next_ordinal=d["next_ordinal"])


@dataclass
class BatchFeatures:
    """A deduplicated batch vectorised against its own vocabulary.

    ``tokens``, ``vectors`` and ``sentiments`` align with ``batch.messages``.
    Sentiments are (positive, negative) pairs on the 1..4 / -1..-4 scales;
    when absent every message counts as neutral (1, -1).
    """

    batch: Batch
    vocabulary: Vocabulary
    tokens: Sequence[Sequence[str]]
    vectors: Sequence[SparseVector]
    sentiments: Optional[Sequence[tuple[float, float]]] = None


@dataclass
class LayerResult:
    state: LayerState
    segments: list[TopicSegment]
    unassigned: list[str] = field(default_factory=list)


def _argmax_rep(v: SparseVector, reps: Sequence[ClusterRep]) -> tuple[int, float]:
    """Index and similarity of the most similar rep (plain cosine; same-map
    vectors share a universe already).  All-zero similarities report the
    first rep."""
    best_i, best_sim = 0, -1.0
    for i, rep in enumerate(reps):
        sim = similarity(v, rep.vector)
        if sim > best_sim:
            best_i, best_sim = i, sim
    return best_i, max(best_sim, 0.0)


def _make_segment(pathway_id: str, features: BatchFeatures,
                  indices: Sequence[int]) -> TopicSegment:
    batch = features.batch
    n_batch = len(batch.messages)
    ids = [batch.messages[i].id for i in indices]
    vocab = features.vocabulary
    freqs: dict[str, int] = {}
    for i in indices:
        for tok in features.tokens[i]:
            if tok in vocab:
                freqs[tok] = freqs.get(tok, 0) + 1
    if features.sentiments is not None:
        pos = sum(features.sentiments[i][0] for i in indices) / len(indices)
        neg = sum(features.sentiments[i][1] for i in indices) / len(indices)
    else:
        pos, neg = 1.0, -1.0
    return TopicSegment(pathway_id=pathway_id, batch_index=batch.index,
                        message_ids=ids,
                        volume_proportion=len(indices) / n_batch,
                        avg_pos_sentiment=pos, avg_neg_sentiment=neg,
                        term_freqs=freqs)


def _split_by_rep(indices: list[int], reps: list[ClusterRep],
                  features: BatchFeatures, min_fraction: float = 0.0,
                  drop_orphans: bool = False
                  ) -> tuple[list[tuple[ClusterRep, list[int]]], list[int]]:
    """Assign each message to its closest rep of the same map and order the
    groups largest first (ties by grid position) for id assignment.

    Groups smaller than ``min_fraction`` of the messages fold into the
    largest group: a sliver of a pathway's batch is weight noise, not a new
    discussion, and must not fork a child pathway.  Messages with zero
    similarity to every rep either fold in too or, with ``drop_orphans``,
    come back separately (used when founding pathways, where an unmatchable
    message is noise).
    """
    groups: list[list[int]] = [[] for _ in reps]
    orphans: list[int] = []
    for i in indices:
        k, sim = _argmax_rep(features.vectors[i], reps)
        if sim == 0.0 and drop_orphans:
            orphans.append(i)
        else:
            groups[k].append(i)
    order = sorted(range(len(reps)),
                   key=lambda k: (-len(groups[k]), reps[k].source[0]))
    floor = min_fraction * len(indices)
    keep = [k for k in order
            if groups[k] and (k == order[0] or len(groups[k]) >= floor)]
    if keep:
        folded = [i for k in order if k not in keep for i in groups[k]]
        groups[keep[0]] = sorted(groups[keep[0]] + folded)
    return [(reps[k], groups[k]) for k in keep if groups[k]], orphans


def advance_layer(features: BatchFeatures, state: LayerState,
                  cfg: PathwayConfig) -> LayerResult:
    """Run one batch through the layer: route, train per-pathway maps, spawn
    pathways from unmatched content, emit segments, tick dormancy.

    Consumes only the current batch features and the previous layer state;
    earlier raw batches are never touched.
    """
    new_state = state.clone()
    batch = features.batch
    if not batch.messages:
        _tick_dormant(new_state, set(), cfg)
        return LayerResult(new_state, [], [])

    universe = features.vocabulary.terms()

    # Rep priority order for routing ties: oldest birth first, then id.
    rep_order = sorted(new_state.live,
                       key=lambda pid: (new_state.births[pid], pid))
    # Project reps onto the current vocabulary once; equals the restricted
    # similarity because message vectors already live inside the vocabulary.
    proj_reps = []
    for pid in rep_order:
        rep = new_state.live[pid].rep
        proj = SparseVector({t: w for t, w in rep.vector.entries.items()
                             if t in universe}, vocab_ref=rep.vector.vocab_ref)
        proj_reps.append(replace(rep, vector=proj))

    assignment = route(features.vectors, proj_reps, cfg.topic_threshold)

    routed: dict[str, list[int]] = {pid: [] for pid in rep_order}
    new_pool: list[int] = []
    for i, pid in enumerate(assignment):
        if pid is NEW:
            new_pool.append(i)
        else:
            routed[pid].append(i)

    segments: list[TopicSegment] = []
    unassigned: list[str] = []
    active: set[str] = set()

    # Surviving pathways: train a seeded map on their share of the batch.
    for pid in rep_order:
        indices = routed[pid]
        if not indices:
            continue
        active.add(pid)
        prev = new_state.live[pid].rep
        train_vecs = [features.vectors[i] for i in indices if features.vectors[i]]
        reps = []
        if train_vecs:
            seed_rng = cfg.derived_seed(batch.index, pid)
            gmap = init_map(prev.vector, replace(cfg.gsom, rng_seed=seed_rng),
                            vocab_terms=universe, birth_vocab=batch.index,
                            universe=universe)
            train(gmap, train_vecs)
            reps = generalize(gmap, train_vecs, cfg.hit_fraction, pid,
                              merge_min_sim=cfg.merge_threshold)
        if not reps:
            # Nothing trainable (empty vectors); keep the previous rep alive.
            segments.append(_make_segment(pid, features, indices))
            new_state.live[pid] = LiveRep(prev, dormant=0)
            continue
        split, _ = _split_by_rep(indices, reps, features, cfg.fork_min_fraction)
        keep_rep, keep_members = split[0]
        keep_vecs = [keep_rep.vector]
        forks = []
        for rep, member in split[1:]:
            # A secondary hit region still coherent with the pathway's prior
            # representation is the same discussion: widen the kept rep with
            # it.  Only content the pathway would no longer accept forks.
            if similarity(rep.vector, prev.vector) >= cfg.merge_threshold:
                keep_members.extend(member)
                keep_vecs.append(rep.vector)
            else:
                forks.append((rep, member))
        if len(keep_vecs) > 1:
            keep_rep = replace(keep_rep,
                               vector=pool_max(keep_vecs, vocab_ref=batch.index))
            keep_members.sort()
        keep_rep = replace(keep_rep, pathway_id=pid)
        new_state.live[pid] = LiveRep(keep_rep, dormant=0)
        segments.append(_make_segment(pid, features, keep_members))
        for rep, member in forks:
            child = new_state.new_id()
            rep = replace(rep, pathway_id=child)
            new_state.live[child] = LiveRep(rep, dormant=0)
            new_state.births[child] = batch.index
            new_state.parents[child] = pid
            active.add(child)
            segments.append(_make_segment(child, features, member))
            logger.info("pathway %s forked from %s at batch %d",
                        child, pid, batch.index)

    # Unmatched content: enough of it founds new pathways from a fresh map.
    min_new = max(1, int(cfg.min_new_fraction * len(batch.messages)))
    if new_pool and len(new_pool) >= min_new:
        train_vecs = [features.vectors[i] for i in new_pool if features.vectors[i]]
        reps = []
        if train_vecs:
            seed_rng = cfg.derived_seed(batch.index, "__new__")
            gmap = init_map(None, replace(cfg.gsom, rng_seed=seed_rng),
                            vocab_terms=universe, birth_vocab=batch.index,
                            universe=universe)
            train(gmap, train_vecs)
            reps = generalize(gmap, train_vecs, cfg.hit_fraction, "__new__",
                              merge_min_sim=cfg.merge_threshold)
        if reps:
            split, orphans = _split_by_rep(new_pool, reps, features,
                                           drop_orphans=True)
            unassigned.extend(batch.messages[i].id for i in orphans)
            for rep, member in split:
                pid = new_state.new_id()
                rep = replace(rep, pathway_id=pid)
                new_state.live[pid] = LiveRep(rep, dormant=0)
                new_state.births[pid] = batch.index
                new_state.parents[pid] = None
                active.add(pid)
                segments.append(_make_segment(pid, features, member))
                logger.info("pathway %s born at batch %d with %d messages",
                            pid, batch.index, len(member))
        else:
            unassigned.extend(batch.messages[i].id for i in new_pool)
    else:
        unassigned.extend(batch.messages[i].id for i in new_pool)

    _tick_dormant(new_state, active, cfg)
    return LayerResult(new_state, segments, unassigned)


def _tick_dormant(state: LayerState, active: set[str], cfg: PathwayConfig) -> None:
    """Advance dormancy for silent pathways and retire the long-silent ones."""
    for pid in list(state.live):
        if pid in active:
            continue
        lr = state.live[pid]
        lr.dormant += 1
        if lr.dormant > cfg.max_dormant:
            del state.live[pid]
            logger.info("pathway %s retired after %d silent layers", pid, lr.dormant)
