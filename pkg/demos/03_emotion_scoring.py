"""Sixteen-dimensional emotion scoring with intensity modifiers.

Every post is scored against the bundled thesaurus of eight positive and
eight negative categories.  Boosters strengthen the following emotion term,
negators cancel it, phrases match as single units, and scores are normalised
by the unit count.  A per-user timeline averages vectors per time bin.

Run:  python demos/03_emotion_scoring.py
"""

from pathweave import (CATEGORIES, PreprocessConfig, default_lexicons,
                       emotion_timeline, preprocess, score_post, sentiment_of)

POSTS = [
    "I am so happy with the results, looking forward to the next checkup",
    "feeling very tired and completely overwhelmed today",
    "not okay. everything about this week was heart breaking",
    "kind of relaxed now, the support here is heart warming",
    "no emotion words here, just logistics and paperwork",
]


def nonzero(ev):
    return {CATEGORIES[i]: round(v, 3) for i, v in enumerate(ev.values) if v}


def main():
    lexicon, modifiers = default_lexicons()
    pp = PreprocessConfig.emotion_mode()

    print("per-post emotion vectors (nonzero categories only)")
    print("--------------------------------------------------")
    scored = []
    for day, text in enumerate(POSTS):
        tokens = preprocess(text, pp)
        ev = score_post(tokens, lexicon, modifiers)
        s = sentiment_of(ev)
        scored.append((day * 86400.0, ev))
        print(f"\n  {text!r}")
        print(f"    units={ev.token_count}  {nonzero(ev)}")
        print(f"    sentiment: positive {s.pos:.2f} / negative {s.neg:.2f}")

    print("\nwhy 'very happy' beats 'happy': the booster weight of the "
          "preceding unit\nis added to the match, while 'not' (-1) cancels "
          "it entirely.")

    print("\ndaily timeline (mean vector per bin)")
    print("------------------------------------")
    for tbin in emotion_timeline(scored, 86400.0, 0.0):
        if tbin.mean is None:
            print(f"  day {tbin.index}: no posts")
            continue
        top = sorted(enumerate(tbin.mean), key=lambda kv: -kv[1])[:2]
        summary = ", ".join(f"{CATEGORIES[i]}={v:.2f}" for i, v in top if v)
        print(f"  day {tbin.index}: {tbin.count} post(s)  {summary or 'neutral'}")


if __name__ == "__main__":
    main()
