"""Topic coherence: log-ratio co-occurrence scoring over a topic's top terms.

For ranked terms v1..vM the score sums log((D(vm, vl) + 1) / D(vl)) over all
pairs l < m, where D counts documents containing a term (or both terms of a
pair).  Terms that co-occur wherever they appear score near zero; terms that
never meet drag the score down.  Used to compare per-pathway term lists
against a whole-corpus baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


@dataclass
class CoherenceInput:
    """Ranked top terms with their document and co-document frequencies.

    ``co_doc_freq`` keys are sorted term pairs; absent pairs count zero.
    """

    top_terms: list[str]
    doc_freq: dict[str, int] = field(default_factory=dict)
    co_doc_freq: dict[tuple[str, str], int] = field(default_factory=dict)


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def coherence(inp: CoherenceInput) -> float:
    """The double sum over ranked pairs, natural log.  A required term with
    zero document frequency violates the precondition and raises."""
    terms = inp.top_terms
    total = 0.0
    for m in range(1, len(terms)):
        for l in range(m):
            d_l = inp.doc_freq.get(terms[l], 0)
            if d_l <= 0:
                raise ValueError(f"term {terms[l]!r} has zero document frequency")
            co = inp.co_doc_freq.get(_pair(terms[m], terms[l]), 0)
            total += math.log((co + 1) / d_l)
    return total


def collect_frequencies(docs: Iterable[Iterable[str]],
                        terms: Sequence[str]) -> CoherenceInput:
    """Count document and pairwise co-document frequencies for the given
    ranked terms, by distinct presence per document."""
    term_set = set(terms)
    doc_freq: dict[str, int] = {t: 0 for t in terms}
    co: dict[tuple[str, str], int] = {}
    for doc in docs:
        present = sorted(set(doc) & term_set)
        for t in present:
            doc_freq[t] += 1
        for i in range(len(present)):
            for j in range(i + 1, len(present)):
                key = (present[i], present[j])
                co[key] = co.get(key, 0) + 1
    return CoherenceInput(top_terms=list(terms), doc_freq=doc_freq, co_doc_freq=co)


def top_terms(term_freqs: Mapping[str, int], m: int) -> list[str]:
    """Most frequent m terms, count-descending with lexicographic ties."""
    ranked = sorted(term_freqs.items(), key=lambda kv: (-kv[1], kv[0]))
    return [t for t, _ in ranked[:m]]
