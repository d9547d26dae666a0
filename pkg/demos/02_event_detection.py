"""Event indicators on a hand-built pathway history.

A topic segment is compared against the trailing moving average of its own
pathway: volume share, mean positive sentiment and mean negative sentiment
each become a ratio, and the weighted combination is the event score.  A
steady pathway scores exactly 1; bursts push it above the threshold.

Run:  python demos/02_event_detection.py
"""

from pathweave import EventConfig, detect
from pathweave.events import event_score, indicator_sentiment, indicator_volume
from pathweave.pathways import TopicPathway, TopicSegment


def segment(week, volume, pos=2.0, neg=-1.5, terms=None):
    return TopicSegment(pathway_id="demo", batch_index=week,
                        message_ids=[f"m{week}"], volume_proportion=volume,
                        avg_pos_sentiment=pos, avg_neg_sentiment=neg,
                        term_freqs=terms or {"usual": 10, "chatter": 8})


def main():
    print("single indicators")
    print("-----------------")
    print("volume 0.2 against history [0.1, 0.1]  ->",
          indicator_volume([0.1, 0.1], 0.2, 2))
    print("volume 0.3 against history [0.3, 0.3]  ->",
          indicator_volume([0.3, 0.3], 0.3, 2))
    print("negative -2.0 against history [-1, -1] ->",
          indicator_sentiment([-1.0, -1.0], -2.0, 2))

    from pathweave import IndicatorWeights
    weights = IndicatorWeights()  # volume 0.1, sentiment 0.45 each
    print("\ncombined score for indicators (2.0, 1.5, 1.0):",
          event_score({"volume": 2.0, "pos_sentiment": 1.5,
                       "neg_sentiment": 1.0}, weights))

    print("\na pathway with a burst in week 5")
    print("--------------------------------")
    history = [segment(w, 0.25) for w in range(5)]
    history.append(segment(5, 0.70, neg=-2.6,
                           terms={"usual": 12, "outage": 40, "refund": 22}))
    history.append(segment(6, 0.28))
    pathway = TopicPathway(pathway_id="demo", birth_layer=0, segments=history)

    for record in detect([pathway], EventConfig()):
        marker = "  << EVENT" if record.flagged else ""
        print(f"week {record.batch_index}:  i_v={record.i_v:.2f}  "
              f"i_ps={record.i_ps:.2f}  i_ns={record.i_ns:.2f}  "
              f"score={record.score:.3f}{marker}")
        if record.flagged:
            print(f"         trigger terms: {', '.join(record.trigger_terms)}")

    print("\nthe trigger terms are the newly frequent words absent from the "
          "two preceding segments;\nhere they point straight at the outage.")


if __name__ == "__main__":
    main()
