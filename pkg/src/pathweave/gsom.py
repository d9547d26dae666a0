"""Growing self-organising map over sparse term vectors.

The map starts as a 2x2 grid and adds nodes at the free 4-neighbour slots of
any node whose accumulated quantisation error crosses the growth threshold.
Training runs an ordering phase (decaying learning rate and neighbourhood,
growth enabled) followed by a smoothing phase (small fixed rate, no growth).

Match quality is the intersection cosine shared with the pathway layer: when
a map carries a term universe (the vocabulary of the batch it is learning),
node weights outside that universe are ignored during winner selection. All
node weights stay non-negative because updates are convex moves toward
non-negative inputs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .corpus import PRUNE_EPS, SparseVector

# Number of vocabulary terms activated per randomly initialised node.
INIT_TERM_SAMPLE = 5
# Jitter used for seeded neighbours and for growth without an opposite node.
JITTER = 0.01
# Updates beyond this many sigmas are numerically irrelevant and skipped.
NEIGHBORHOOD_CUTOFF_SIGMAS = 3.0


@dataclass
class GsomParams:
    """Learning schedule and growth threshold.

    Rates decay linearly across the ordering phase; the smoothing phase runs
    at the floor values with growth disabled.  Quantisation error accumulates
    across every ordering pass, so the growth threshold has to be balanced
    against ordering_epochs times the per-pass error influx: driving it too
    low fragments the map into near-duplicate nodes that no longer claim a
    meaningful share of inputs.
    """

    alpha0: float = 0.3
    alpha_min: float = 0.05
    ordering_epochs: int = 3
    smoothing_epochs: int = 20
    sigma0: float = 2.0
    sigma_min: float = 0.5
    growth_threshold: float = 100.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha_min <= self.alpha0 <= 1:
            raise ValueError("need 0 < alpha_min <= alpha0 <= 1")
        if self.sigma_min > self.sigma0:
            raise ValueError("sigma_min must not exceed sigma0")
        if self.growth_threshold <= 0:
            raise ValueError("growth_threshold must be positive")
        if self.ordering_epochs < 1 or self.smoothing_epochs < 0:
            raise ValueError("bad epoch counts")

    def alpha_at(self, epoch: int) -> float:
        if self.ordering_epochs <= 1:
            return self.alpha0
        f = min(1.0, epoch / (self.ordering_epochs - 1))
        return self.alpha0 + (self.alpha_min - self.alpha0) * f

    def sigma_at(self, epoch: int) -> float:
        if self.ordering_epochs <= 1:
            return self.sigma0
        f = min(1.0, epoch / (self.ordering_epochs - 1))
        return self.sigma0 + (self.sigma_min - self.sigma0) * f


class GsomNode:
    """Grid cell: position, sparse weights, accumulated error, hit count."""

    __slots__ = ("pos", "weights", "qe", "hits", "_unorm")

    def __init__(self, pos: tuple[int, int], weights: SparseVector):
        self.pos = pos
        self.weights = weights
        self.qe = 0.0
        self.hits = 0
        self._unorm: Optional[float] = None  # cached norm over the map universe

    def to_dict(self) -> dict:
        return {"pos": list(self.pos), "weights": self.weights.to_dict(),
                "qe": self.qe, "hits": self.hits}


class GsomMap:
    """Connected grid of nodes; positions are unique by construction."""

    def __init__(self, params: GsomParams, birth_vocab: Optional[int] = None,
                 universe: Optional[set[str]] = None,
                 rng: Optional[random.Random] = None):
        self.params = params
        self.birth_vocab = birth_vocab
        self.universe = universe
        self.rng = rng if rng is not None else random.Random(params.rng_seed)
        self.nodes: dict[tuple[int, int], GsomNode] = {}
        self._order: list[tuple[int, int]] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def add_node(self, node: GsomNode) -> None:
        if node.pos in self.nodes:
            raise ValueError(f"duplicate node position {node.pos}")
        self.nodes[node.pos] = node
        self._order = sorted(self.nodes)

    def ordered_nodes(self) -> list[GsomNode]:
        return [self.nodes[p] for p in self._order]

    def neighbors(self, pos: tuple[int, int]) -> list[GsomNode]:
        r, c = pos
        out = []
        for p in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            n = self.nodes.get(p)
            if n is not None:
                out.append(n)
        return out

    def vacant_neighbor_positions(self, pos: tuple[int, int]) -> list[tuple[int, int]]:
        r, c = pos
        return [p for p in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
                if p not in self.nodes]

    def _node_norm(self, node: GsomNode) -> float:
        if node._unorm is None:
            uni = self.universe
            if uni is None:
                n2 = sum(w * w for w in node.weights.entries.values())
            else:
                n2 = sum(w * w for t, w in node.weights.entries.items() if t in uni)
            node._unorm = math.sqrt(n2)
        return node._unorm

    def node_similarity(self, v: SparseVector, node: GsomNode,
                        v_norm: Optional[float] = None) -> float:
        """Intersection cosine between an input and one node, restricted to
        the map universe on the node side (inputs come from that universe)."""
        nn = self._node_norm(node)
        if nn <= 0.0:
            return 0.0
        if v_norm is None:
            v_norm = v.norm()
        if v_norm <= 0.0:
            return 0.0
        wents = node.weights.entries
        uni = self.universe
        if uni is None:
            dot = sum(w * wents[t] for t, w in v.entries.items() if t in wents)
        else:
            dot = sum(w * wents[t] for t, w in v.entries.items()
                      if t in wents and t in uni)
        if dot == 0.0:
            return 0.0
        return dot / (v_norm * nn)

    def to_dict(self) -> dict:
        return {"birth_vocab": self.birth_vocab,
                "nodes": [self.nodes[p].to_dict() for p in self._order]}


def _random_node_weights(gmap: GsomMap, terms: list[str]) -> dict[str, float]:
    k = min(INIT_TERM_SAMPLE, len(terms))
    sample = gmap.rng.sample(terms, k)
    return {t: gmap.rng.uniform(0.0, 1.0) for t in sample}


def init_map(seed: Optional[SparseVector], params: GsomParams,
             vocab_terms: Optional[Iterable[str]] = None,
             birth_vocab: Optional[int] = None,
             universe: Optional[set[str]] = None,
             rng: Optional[random.Random] = None) -> GsomMap:
    """Four starting nodes.

    Without a seed each node activates a small random sample of the current
    vocabulary with uniform [0,1] weights.  With a seed (a cluster
    representation carried over from the previous layer) node (0,0) takes the
    seed weights exactly and becomes the map's starting node; its three
    neighbours start as random vocabulary nodes so the seed keeps a clear
    competitive edge on the topic it represents.  Near-identical neighbours
    would instead split the topic's inputs evenly and fragment hit counting.
    Without vocabulary terms the neighbours fall back to jittered seed copies.
    """
    gmap = GsomMap(params, birth_vocab=birth_vocab, universe=universe, rng=rng)
    positions = [(0, 0), (0, 1), (1, 0), (1, 1)]
    terms = sorted(vocab_terms) if vocab_terms else []
    if seed is None:
        for pos in positions:
            weights = _random_node_weights(gmap, terms) if terms else {}
            gmap.add_node(GsomNode(pos, SparseVector(weights, vocab_ref=birth_vocab)))
    else:
        gmap.add_node(GsomNode(positions[0], seed.copy()))
        for pos in positions[1:]:
            if terms:
                weights = _random_node_weights(gmap, terms)
            else:
                weights = {t: max(0.0, w + gmap.rng.uniform(-JITTER, JITTER))
                           for t, w in seed.entries.items()}
            gmap.add_node(GsomNode(pos, SparseVector(weights, vocab_ref=seed.vocab_ref)))
    return gmap


def find_winner(gmap: GsomMap, v: SparseVector) -> GsomNode:
    """Most similar node; ties go to the lowest (row, col) position."""
    node, _ = _find_winner(gmap, v)
    return node


def _find_winner(gmap: GsomMap, v: SparseVector) -> tuple[GsomNode, float]:
    if not gmap.nodes:
        raise ValueError("map is empty")
    v_norm = v.norm()
    best = None
    best_sim = -1.0
    for pos in gmap._order:
        node = gmap.nodes[pos]
        sim = gmap.node_similarity(v, node, v_norm)
        if sim > best_sim:
            best, best_sim = node, sim
    return best, best_sim


def _apply_update(gmap: GsomMap, winner: GsomNode, v: SparseVector,
                  alpha: float, sigma: float) -> None:
    """Move every node inside the Gaussian neighbourhood toward the input.

    The update runs over the union of active dimensions of the input and the
    node; both sides are zero elsewhere, so untouched dimensions stay absent.
    """
    wr, wc = winner.pos
    cutoff2 = (NEIGHBORHOOD_CUTOFF_SIGMAS * sigma) ** 2
    two_sigma2 = 2.0 * sigma * sigma
    vents = v.entries
    for pos in gmap._order:
        r, c = pos
        d2 = (r - wr) ** 2 + (c - wc) ** 2
        if d2 > cutoff2 and pos != winner.pos:
            continue
        factor = alpha if d2 == 0 else alpha * math.exp(-d2 / two_sigma2)
        node = gmap.nodes[pos]
        wents = node.weights.entries
        # Dimensions are visited in dict order (input first, then node-only
        # terms) so weight dicts grow in a reproducible order across runs.
        for term, vw in vents.items():
            w = wents.get(term, 0.0)
            nw = w + factor * (vw - w)
            if nw > PRUNE_EPS:
                wents[term] = nw
            elif term in wents:
                del wents[term]
        decay = 1.0 - factor
        for term, w in list(wents.items()):
            if term in vents:
                continue
            nw = w * decay
            if nw > PRUNE_EPS:
                wents[term] = nw
            else:
                del wents[term]
        node._unorm = None


def grow(gmap: GsomMap, node: GsomNode) -> list[GsomNode]:
    """Spawn nodes at the vacant 4-neighbour slots of an over-stressed node.

    New weights extrapolate past the parent away from the opposite neighbour
    (2*w_parent - w_opposite, clamped at zero); without an opposite neighbour
    they are a jittered copy of the parent.  The parent's error resets to half
    the growth threshold so it cannot immediately re-trigger.
    """
    added = []
    r, c = node.pos
    for pos in gmap.vacant_neighbor_positions(node.pos):
        opp_pos = (2 * r - pos[0], 2 * c - pos[1])
        opp = gmap.nodes.get(opp_pos)
        if opp is not None:
            weights = {}
            for t in list(node.weights.entries) + [t for t in opp.weights.entries
                                                   if t not in node.weights.entries]:
                w = 2.0 * node.weights.get(t) - opp.weights.get(t)
                if w > PRUNE_EPS:
                    weights[t] = w
        else:
            weights = {t: max(0.0, w + gmap.rng.uniform(-JITTER, JITTER))
                       for t, w in node.weights.entries.items()}
        new = GsomNode(pos, SparseVector(weights, vocab_ref=gmap.birth_vocab))
        gmap.add_node(new)
        added.append(new)
    node.qe = gmap.params.growth_threshold / 2.0
    return added


def train_step(gmap: GsomMap, v: SparseVector, epoch: int) -> GsomNode:
    """One ordering-phase presentation: update neighbourhood, accumulate the
    winner's quantisation error, grow if it crossed the threshold."""
    p = gmap.params
    winner, sim = _find_winner(gmap, v)
    _apply_update(gmap, winner, v, p.alpha_at(epoch), p.sigma_at(epoch))
    winner.qe += 1.0 - sim
    if winner.qe > p.growth_threshold:
        grow(gmap, winner)
    return winner


def assign(gmap: GsomMap, inputs: Sequence[SparseVector]) -> dict[tuple[int, int], list[int]]:
    """Map input indices to their winning node positions (hit counting pass)."""
    for node in gmap.nodes.values():
        node.hits = 0
    claims: dict[tuple[int, int], list[int]] = {}
    for i, v in enumerate(inputs):
        winner = find_winner(gmap, v)
        winner.hits += 1
        claims.setdefault(winner.pos, []).append(i)
    return claims


def mean_quantisation_error(gmap: GsomMap, inputs: Sequence[SparseVector]) -> float:
    """Mean (1 - winner similarity) over the inputs."""
    if not inputs:
        return 0.0
    total = 0.0
    for v in inputs:
        _, sim = _find_winner(gmap, v)
        total += 1.0 - sim
    return total / len(inputs)


def train(gmap: GsomMap, inputs: Sequence[SparseVector]) -> GsomMap:
    """Ordering phase with growth, then smoothing at the floor rates, then a
    full assignment pass to set final hit counts."""
    if not inputs:
        raise ValueError("no inputs to train on")
    p = gmap.params
    order = list(range(len(inputs)))
    for epoch in range(p.ordering_epochs):
        gmap.rng.shuffle(order)
        for i in order:
            train_step(gmap, inputs[i], epoch)
    for _ in range(p.smoothing_epochs):
        gmap.rng.shuffle(order)
        for i in order:
            winner, _ = _find_winner(gmap, inputs[i])
            _apply_update(gmap, winner, inputs[i], p.alpha_min, p.sigma_min)
    assign(gmap, inputs)
    return gmap
