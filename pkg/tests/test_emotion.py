import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathweave.emotion import (CATEGORIES, CATEGORY_INDEX, EmbeddingTable,
                               EmotionLexicon, EmotionVector, LexiconError,
                               ModifierLexicon, default_lexicons,
                               emotion_timeline, expand_lexicon,
                               load_embeddings, load_emotion_lexicon,
                               load_modifier_lexicon, merge_units, score_post,
                               sentiment_of)


def lex_from(pairs):
    lex = EmotionLexicon()
    for term, cat in pairs:
        lex.add(tuple(term.split()), (CATEGORY_INDEX[cat],))
    return lex


def mods_from(pairs):
    mods = ModifierLexicon()
    for term, w in pairs:
        mods.add(tuple(term.split()), w)
    return mods


class TestLexiconFiles:
    def test_load_simple_term(self, tmp_path):
        p = tmp_path / "emo.csv"
        p.write_text("happy,Happy\n")
        lex = load_emotion_lexicon(p)
        assert lex.categories_for(("happy",)) == {CATEGORY_INDEX["Happy"]}

    def test_load_phrase_entry(self, tmp_path):
        p = tmp_path / "emo.csv"
        p.write_text("heart warming,Happy\n")
        lex = load_emotion_lexicon(p)
        assert ("heart", "warming") in lex

    def test_unknown_category_fatal_with_line(self, tmp_path):
        p = tmp_path / "emo.csv"
        p.write_text("happy,Happy\njoy,NoSuchCat\n")
        with pytest.raises(LexiconError, match="line 2"):
            load_emotion_lexicon(p)

    def test_duplicate_pairs_collapse(self, tmp_path):
        p = tmp_path / "emo.csv"
        p.write_text("grief,Sad\ngrief,Sad\n")
        lex = load_emotion_lexicon(p)
        assert len(lex) == 1

    def test_modifier_weight_out_of_range_fatal(self, tmp_path):
        p = tmp_path / "mods.csv"
        p.write_text("very,1.5\n")
        with pytest.raises(LexiconError):
            load_modifier_lexicon(p)

    def test_default_assets_contain_table_terms(self):
        lex, mods = default_lexicons()
        assert lex.categories_for(("happy",)) == {CATEGORY_INDEX["Happy"]}
        assert lex.categories_for(("heart", "warming")) == {CATEGORY_INDEX["Happy"]}
        assert lex.categories_for(("standoffish",)) == {CATEGORY_INDEX["Indifferent"]}
        # cross-category terms from the published table increment both
        assert lex.categories_for(("keen",)) == {CATEGORY_INDEX["Positive"],
                                                 CATEGORY_INDEX["Interested"]}
        assert mods.weight(("very",)) == pytest.approx(0.293)
        assert mods.weight(("not",)) == -1.0

    def test_sixteen_fixed_categories(self):
        assert len(CATEGORIES) == 16
        assert CATEGORIES[0] == "Happy" and CATEGORIES[8] == "Sad"


class TestMergeUnits:
    def test_greedy_longest_match(self):
        phrases = {("heart", "warming"), ("heart", "warming", "story")}
        units = merge_units(["a", "heart", "warming", "story"], phrases)
        assert units == [("a",), ("heart", "warming", "story")]

    def test_no_phrases_single_tokens(self):
        assert merge_units(["a", "b"], set()) == [("a",), ("b",)]

    def test_merge_consumes_tokens(self):
        phrases = {("kind", "of")}
        units = merge_units(["kind", "of", "okay"], phrases)
        assert units == [("kind", "of"), ("okay",)]


class TestScorePost:
    def setup_method(self):
        self.lex = lex_from([("happy", "Happy"), ("okay", "Good"),
                             ("sad", "Sad")])
        self.mods = mods_from([("very", 0.293), ("not", -1.0)])

    def test_plain_match_normalised_by_unit_count(self):
        ev = score_post(["i", "am", "happy"], self.lex, self.mods)
        assert ev.values[CATEGORY_INDEX["Happy"]] == pytest.approx(1 / 3)
        assert sum(ev.values) == pytest.approx(1 / 3)
        assert ev.token_count == 3

    def test_booster_adds_weight(self):
        ev = score_post(["very", "happy"], self.lex, self.mods)
        assert ev.values[CATEGORY_INDEX["Happy"]] == pytest.approx(1.293 / 2)

    def test_negation_clamps_to_zero(self):
        ev = score_post(["not", "okay"], self.lex, self.mods)
        assert ev.values[CATEGORY_INDEX["Good"]] == 0.0
        assert ev.token_count == 2

    def test_empty_tokens_zero_vector(self):
        ev = score_post([], self.lex, self.mods)
        assert ev == EmotionVector.zero()

    def test_modifier_before_non_emotion_token_ignored(self):
        ev = score_post(["very", "table", "happy"], self.lex, self.mods)
        # "very" precedes "table", so "happy" gets no boost
        assert ev.values[CATEGORY_INDEX["Happy"]] == pytest.approx(1 / 3)

    def test_multi_category_term_increments_both(self):
        lex = lex_from([("fine", "Happy"), ("fine", "Good")])
        ev = score_post(["fine"], lex, self.mods)
        assert ev.values[CATEGORY_INDEX["Happy"]] == 1.0
        assert ev.values[CATEGORY_INDEX["Good"]] == 1.0

    def test_phrase_counts_as_one_unit(self):
        lex = lex_from([("heart warming", "Happy")])
        ev = score_post(["a", "heart", "warming", "story"], lex, self.mods)
        assert ev.token_count == 3
        assert ev.values[CATEGORY_INDEX["Happy"]] == pytest.approx(1 / 3)

    def test_phrase_modifier_applies(self):
        mods = mods_from([("kind of", -0.293)])
        ev = score_post(["kind", "of", "okay"], self.lex, mods)
        assert ev.values[CATEGORY_INDEX["Good"]] == pytest.approx(0.707 / 2)

    def test_normalisation_bound(self):
        lex = lex_from([("happy", "Happy")])
        mods = mods_from([("very", 1.0)])
        ev = score_post(["very", "happy"] * 10, lex, mods)
        assert all(v <= 2.0 for v in ev.values)
        assert all(v >= 0.0 for v in ev.values)


class TestSentimentAdapter:
    def test_zero_vector_maps_to_band_floor(self):
        s = sentiment_of(EmotionVector.zero())
        assert (s.pos, s.neg) == (1.0, -1.0)

    def test_saturation(self):
        values = [0.0] * 16
        values[0] = 0.5  # scale 10 -> 5 >= 1 saturates
        s = sentiment_of(EmotionVector(tuple(values), 4))
        assert s.pos == 4.0

    def test_linear_formula(self):
        values = [0.0] * 16
        values[0] = 0.05
        s = sentiment_of(EmotionVector(tuple(values), 4), scale=10.0)
        assert s.pos == pytest.approx(2.5)

    def test_negative_side(self):
        values = [0.0] * 16
        values[8] = 0.05
        s = sentiment_of(EmotionVector(tuple(values), 4), scale=10.0)
        assert s.neg == pytest.approx(-2.5)
        assert s.pos == 1.0


class TestExpandLexicon:
    def setup_method(self):
        self.emb = EmbeddingTable(3, {
            "sad": np.array([1.0, 0.0, 0.0]),
            "tearful": np.array([0.9, 0.1, 0.0]),
            "table": np.array([0.0, 1.0, 0.0]),
            "gloomy": np.array([0.8, 0.0, 0.2]),
        })

    def test_neighbors_above_min_sim(self):
        res = expand_lexicon({"Sad": ["sad"]}, self.emb, k=5, min_sim=0.5)
        terms = [t for t, _, _ in res.candidates["Sad"]]
        assert "tearful" in terms and "gloomy" in terms
        assert "table" not in terms and "sad" not in terms

    def test_k_zero_empty(self):
        res = expand_lexicon({"Sad": ["sad"]}, self.emb, k=0, min_sim=0.0)
        assert res.candidates == {}

    def test_absent_seed_skipped(self):
        res = expand_lexicon({"Sad": ["melancholy"]}, self.emb, k=3, min_sim=0.5)
        assert res.skipped_seeds["Sad"] == ["melancholy"]
        assert res.candidates == {}

    def test_excludes_existing_lexicon_terms(self):
        res = expand_lexicon({"Sad": ["sad"]}, self.emb, k=5, min_sim=0.0,
                             exclude={"tearful", "sad"})
        terms = [t for t, _, _ in res.candidates["Sad"]]
        assert "tearful" not in terms

    def test_cosine_values_reported(self):
        res = expand_lexicon({"Sad": ["sad"]}, self.emb, k=1, min_sim=0.5)
        term, seed, cos = res.candidates["Sad"][0]
        assert (term, seed) == ("tearful", "sad")
        assert cos == pytest.approx(0.9 / math.sqrt(0.81 + 0.01), abs=1e-9)

    def test_embedding_file_roundtrip(self, tmp_path):
        p = tmp_path / "emb.txt"
        p.write_text("2 3\nsad 1.0 0.0 0.0\nglad 0.0 1.0 0.0\n")
        emb = load_embeddings(p)
        assert emb.dim == 3 and len(emb) == 2

    def test_embedding_file_without_header(self, tmp_path):
        p = tmp_path / "emb.txt"
        p.write_text("sad 1.0 0.0\nglad 0.0 1.0\n")
        emb = load_embeddings(p)
        assert emb.dim == 2 and len(emb) == 2


def _random_vectors(rng, n):
    out = []
    for _ in range(n):
        values = tuple(rng.uniform(0.0, 2.0) if rng.random() < 0.5 else 0.0
                       for _ in range(16))
        out.append(EmotionVector(values, rng.randint(1, 20)))
    return out


class TestTimeline:
    def test_single_member_identity(self):
        ev = EmotionVector(tuple([0.25] * 16), 4)
        bins = emotion_timeline([(5.0, ev)], 10.0, 0.0)
        assert len(bins) == 1
        assert bins[0].mean == ev.values
        assert bins[0].count == 1

    def test_two_member_mean(self):
        a = EmotionVector(tuple([1.0] + [0.0] * 15), 1)
        b = EmotionVector(tuple([0.0, 1.0] + [0.0] * 14), 1)
        bins = emotion_timeline([(0.0, a), (1.0, b)], 10.0, 0.0)
        assert bins[0].mean[0] == pytest.approx(0.5)
        assert bins[0].mean[1] == pytest.approx(0.5)

    def test_empty_bins_have_null_marker(self):
        ev = EmotionVector(tuple([1.0] * 16), 1)
        bins = emotion_timeline([(0.0, ev), (25.0, ev)], 10.0, 0.0)
        assert [b.mean is None for b in bins] == [False, True, False]
        assert bins[1].count == 0

    def test_permutation_invariant_exactly(self):
        rng = random.Random(3)
        posts = [(float(i % 7), v) for i, v in
                 enumerate(_random_vectors(rng, 40))]
        shuffled = list(posts)
        rng.shuffle(shuffled)
        b1 = emotion_timeline(posts, 2.0, 0.0)
        b2 = emotion_timeline(shuffled, 2.0, 0.0)
        assert [b.mean for b in b1] == [b.mean for b in b2]

    def test_mean_bounded_by_member_extremes(self):
        rng = random.Random(4)
        vectors = _random_vectors(rng, 10)
        posts = [(1.0, v) for v in vectors]
        bins = emotion_timeline(posts, 10.0, 0.0)
        for j in range(16):
            col = [v.values[j] for v in vectors]
            assert min(col) - 1e-12 <= bins[0].mean[j] <= max(col) + 1e-12

    def test_post_before_origin_rejected(self):
        ev = EmotionVector.zero()
        with pytest.raises(ValueError):
            emotion_timeline([(-1.0, ev)], 10.0, 0.0)


@given(st.lists(st.sampled_from(["happy", "very", "not", "sad", "table",
                                 "okay", "chair"]), max_size=12))
@settings(max_examples=150, deadline=None)
def test_score_post_stays_in_bounds(tokens):
    lex = lex_from([("happy", "Happy"), ("okay", "Good"), ("sad", "Sad")])
    mods = mods_from([("very", 0.293), ("not", -1.0)])
    ev = score_post(tokens, lex, mods)
    assert all(0.0 <= v <= 2.0 for v in ev.values)
    if not tokens:
        assert ev == EmotionVector.zero()
