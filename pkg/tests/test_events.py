import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathweave.events import (EventConfig, IndicatorWeights, detect,
                              event_score, frequent_terms, indicator_sentiment,
                              indicator_volume)
from pathweave.pathways import TopicPathway, TopicSegment


def seg(pid, idx, vol, pos=2.0, neg=-2.0, terms=None):
    return TopicSegment(pathway_id=pid, batch_index=idx,
                        message_ids=[f"{pid}-{idx}"], volume_proportion=vol,
                        avg_pos_sentiment=pos, avg_neg_sentiment=neg,
                        term_freqs=terms or {})


def pathway(pid, segments):
    return TopicPathway(pathway_id=pid, birth_layer=segments[0].batch_index,
                        segments=segments)


class TestIndicators:
    def test_volume_doubling(self):
        assert indicator_volume([0.1, 0.1], 0.2, 2) == pytest.approx(2.0)

    def test_steady_state_exactly_one(self):
        assert indicator_volume([0.3, 0.3], 0.3, 2) == 1.0

    def test_zero_history_cap(self):
        assert indicator_volume([0.0, 0.0], 0.05, 2) == 10.0

    def test_zero_history_zero_current(self):
        assert indicator_volume([0.0, 0.0], 0.0, 2) == 0.0

    def test_wrong_window_length_rejected(self):
        with pytest.raises(ValueError):
            indicator_volume([0.1], 0.2, 2)

    def test_sentiment_ratio(self):
        assert indicator_sentiment([2.0, 2.0], 3.0, 2) == pytest.approx(1.5)

    def test_sentiment_constant_is_one(self):
        assert indicator_sentiment([2.5, 2.5], 2.5, 2) == 1.0

    def test_negative_magnitudes(self):
        assert indicator_sentiment([-1.0, -1.0], -2.0, 2) == pytest.approx(2.0)

    @given(st.lists(st.floats(min_value=0.01, max_value=5.0), min_size=3,
                    max_size=3),
           st.floats(min_value=0.01, max_value=5.0),
           st.floats(min_value=0.1, max_value=100.0))
    @settings(max_examples=80, deadline=None)
    def test_homogeneity(self, history, current, c):
        a = indicator_volume(history, current, 3)
        b = indicator_volume([h * c for h in history], current * c, 3)
        assert a == pytest.approx(b, rel=1e-9)

    @given(st.lists(st.floats(min_value=0.01, max_value=5.0), min_size=2,
                    max_size=2),
           st.floats(min_value=0.01, max_value=2.0),
           st.floats(min_value=0.001, max_value=1.0))
    @settings(max_examples=80, deadline=None)
    def test_monotonic_in_current(self, history, current, bump):
        lo = indicator_volume(history, current, 2)
        hi = indicator_volume(history, current + bump, 2)
        assert hi > lo


class TestEventScore:
    def test_published_weights_arithmetic(self):
        w = IndicatorWeights(volume=0.1, pos_sentiment=0.45, neg_sentiment=0.45)
        score = event_score({"volume": 2.0, "pos_sentiment": 1.5,
                             "neg_sentiment": 1.0}, w)
        assert score == pytest.approx(1.325)

    def test_all_ones_scores_one(self):
        w = IndicatorWeights()
        assert event_score({"volume": 1.0, "pos_sentiment": 1.0,
                            "neg_sentiment": 1.0}, w) == 1.0

    def test_single_indicator_with_full_weight(self):
        w = IndicatorWeights(volume=1.0, pos_sentiment=0.0, neg_sentiment=0.0)
        assert event_score({"volume": 2.5, "pos_sentiment": 9.0,
                            "neg_sentiment": 9.0}, w) == pytest.approx(2.5)

    def test_name_mismatch_rejected(self):
        w = IndicatorWeights()
        with pytest.raises(ValueError):
            event_score({"volume": 1.0}, w)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            IndicatorWeights(volume=0.5, pos_sentiment=0.5, neg_sentiment=0.5)

    def test_extension_slot(self):
        w = IndicatorWeights(volume=0.1, pos_sentiment=0.4, neg_sentiment=0.4,
                             extensions={"domain": 0.1})
        score = event_score({"volume": 1.0, "pos_sentiment": 1.0,
                             "neg_sentiment": 1.0, "domain": 3.0}, w)
        assert score == pytest.approx(1.2)

    @given(st.floats(min_value=0.0, max_value=5.0),
           st.floats(min_value=0.0, max_value=5.0),
           st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=60, deadline=None)
    def test_linear_in_each_indicator(self, iv, delta, mix):
        w = IndicatorWeights()
        base = {"volume": iv, "pos_sentiment": 1.0, "neg_sentiment": 1.0}
        bumped = dict(base, volume=iv + delta)
        assert event_score(bumped, w) - event_score(base, w) == \
            pytest.approx(0.1 * delta, abs=1e-9)


class TestDetect:
    def steady(self, n=6, vol=0.3):
        return pathway("p0", [seg("p0", i, vol) for i in range(n)])

    def test_steady_pathway_never_flags_strict(self):
        records = detect([self.steady()], EventConfig())
        assert records
        for r in records:
            assert r.score == pytest.approx(1.0, abs=1e-12)
            assert not r.flagged

    def test_ge_comparison_flags_steady(self):
        records = detect([self.steady()], EventConfig(comparison="ge"))
        assert all(r.flagged for r in records)

    def test_warmup_skips_first_window(self):
        records = detect([self.steady(n=5)], EventConfig(window=2))
        assert [r.batch_index for r in records] == [2, 3, 4]

    def test_volume_burst_flagged(self):
        segs = [seg("p0", i, 0.3) for i in range(4)] + [seg("p0", 4, 0.9)]
        records = detect([pathway("p0", segs)], EventConfig())
        flagged = [r for r in records if r.flagged]
        assert [r.batch_index for r in flagged] == [4]
        assert flagged[0].i_v == pytest.approx(3.0)
        assert flagged[0].score == pytest.approx(0.1 * 3.0 + 0.45 + 0.45)

    def test_min_volume_filter_excludes(self):
        segs = [seg("p0", i, 0.005) for i in range(4)] + [seg("p0", 4, 0.009)]
        records = detect([pathway("p0", segs)], EventConfig())
        assert records == []

    def test_negative_sentiment_burst(self):
        segs = [seg("p0", i, 0.3, neg=-1.0) for i in range(3)] + \
               [seg("p0", 3, 0.3, neg=-2.0)]
        records = detect([pathway("p0", segs)], EventConfig())
        last = records[-1]
        assert last.i_ns == pytest.approx(2.0)
        assert last.flagged  # 0.1 + 0.45 + 0.9 = 1.45 > 1

    def test_trigger_terms_are_new_frequent_terms(self):
        base = {"old1": 10, "old2": 8}
        segs = [seg("p0", i, 0.3, terms=base) for i in range(3)]
        segs.append(seg("p0", 3, 0.9, terms={"old1": 10, "fresh": 30}))
        records = detect([pathway("p0", segs)], EventConfig())
        assert records[-1].trigger_terms == ["fresh"]

    def test_window_three(self):
        segs = [seg("p0", i, 0.2) for i in range(5)] + [seg("p0", 5, 0.4)]
        records = detect([pathway("p0", segs)], EventConfig(window=3))
        assert [r.batch_index for r in records] == [3, 4, 5]
        assert records[-1].i_v == pytest.approx(2.0)

    def test_short_pathway_produces_nothing(self):
        records = detect([self.steady(n=2)], EventConfig(window=2))
        assert records == []


def test_frequent_terms_ranking():
    freqs = {"b": 3, "a": 3, "c": 9}
    assert frequent_terms(freqs, 2) == ["c", "a"]
