"""Grow the emotion thesaurus from word-embedding neighbours.

Nearest-neighbour search around each seed term proposes candidates; the
output is a review list, never merged automatically, because embeddings
happily place antonyms next to each other (a famously close pair is shown
below).

Run:  python demos/04_lexicon_expansion.py
"""

import numpy as np

from pathweave import EmbeddingTable, expand_lexicon

# A toy embedding: three axes loosely meaning sad / glad / furniture.
VECTORS = {
    "sad":        [0.95, 0.05, 0.00],
    "tearful":    [0.90, 0.05, 0.05],
    "sorrowful":  [0.92, 0.08, 0.00],
    "joyful":     [0.70, 0.70, 0.00],   # near 'sad' in cosine, wrong polarity
    "happy":      [0.05, 0.95, 0.00],
    "cheerful":   [0.10, 0.90, 0.05],
    "glad":       [0.02, 0.97, 0.10],
    "table":      [0.00, 0.05, 0.95],
    "chair":      [0.05, 0.00, 0.92],
}


def main():
    emb = EmbeddingTable(3, {t: np.array(v) for t, v in VECTORS.items()})
    seeds = {"Sad": ["sad"], "Happy": ["happy"]}
    result = expand_lexicon(seeds, emb, k=4, min_sim=0.6)

    print("candidate terms per category (cosine to the seed)")
    print("--------------------------------------------------")
    for category, rows in result.candidates.items():
        print(f"\n  {category}:")
        for term, seed, cos in rows:
            print(f"    {term:<12} from {seed:<8} cos={cos:.3f}")

    print("\n'joyful' shows up under Sad with a high cosine: embeddings put "
          "opposite\nemotions in the same neighbourhood, which is exactly why "
          "the candidate list\ngoes to a human for curation instead of "
          "straight into the lexicon.")
    if result.skipped_seeds:
        print("skipped seeds:", result.skipped_seeds)


if __name__ == "__main__":
    main()
