import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import agent, corpus_of, tw
from hashtrace.bend import (
    CATEGORIES,
    INDICATOR_COUNTS,
    MANEUVERS,
    LexiconError,
    ManeuverContext,
    ManeuverScores,
    agent_maneuver_profile,
    build_context,
    compare_groups,
    cue_tokens,
    default_lexicon,
    extract_cues,
    hashtag_first_use,
    hashtag_majority_community,
    identify_opinion_leaders,
    load_lexicon,
    maneuver_indicators,
    score_maneuvers,
    validate_weights,
)

LEX = default_lexicon()


def ctx(leaders=(), community=None, first=None, majority=None, weights=None, lexicon=LEX):
    return ManeuverContext(
        opinion_leaders=set(leaders),
        agent_community=dict(community or {}),
        hashtag_first_use=dict(first or {}),
        hashtag_majority_community=dict(majority or {}),
        lexicon=lexicon,
        weights=validate_weights(weights or {}),
    )


class TestLexicon:
    def test_line_parsed(self, tmp_path):
        p = tmp_path / "lex.csv"
        p.write_text("# seed\nayo,encouragement\n")
        assert load_lexicon(p).entries == {"ayo": "encouragement"}

    def test_duplicate(self, tmp_path):
        p = tmp_path / "lex.csv"
        p.write_text("ayo,encouragement\nayo,rhetorical\n")
        with pytest.raises(LexiconError) as err:
            load_lexicon(p)
        assert err.value.lineno == 2

    @pytest.mark.parametrize("line", ["ayo,feelings", "two words,rhetorical", "ayo"])
    def test_malformed(self, tmp_path, line):
        p = tmp_path / "lex.csv"
        p.write_text(line + "\n")
        with pytest.raises(LexiconError):
            load_lexicon(p)

    def test_shipped_covers_all_categories(self):
        assert LEX.populated_categories() == set(CATEGORIES)


class TestCues:
    def test_empty(self):
        cv = extract_cues(tw("1", "a", text=""), LEX)
        assert all(cv[c] == 0 for c in CATEGORIES)
        assert (cv.question_marks, cv.exclamations, cv.negative_emoji) == (0, 0, 0)

    def test_two_encouragement_terms(self):
        assert extract_cues(tw("1", "a", text="Ayo semangat kawan"), LEX)["encouragement"] == 2

    def test_hashtags_and_mentions_not_cues(self):
        assert cue_tokens("#ayo @semangat http://t.co/ayo bela") == ["bela"]

    def test_distort_example_hand_count(self):
        text = "Sejak tidak ada khilafah. Palestina mejadi negri terjajah #AqsaCallsArmies #2nw9"
        assert extract_cues(tw("1", "a", text=text), LEX)["doubt_equivocal"] == 0

    def test_punctuation_and_emoji(self):
        cv = extract_cues(tw("1", "a", text="kenapa?? sedih :( \U0001F622 !"), LEX)
        assert (cv.question_marks, cv.exclamations, cv.negative_emoji) == (2, 1, 2)


class TestOpinionLeaders:
    def test_top_decile(self):
        c = corpus_of([tw(str(i), f"a{i}") for i in range(10)],
                      [agent(f"a{i}", 10 * (i + 1)) for i in range(10)])
        assert identify_opinion_leaders(c, 0.9) == {"a9"}

    def test_ties_kept(self):
        c = corpus_of([tw(str(i), f"a{i}") for i in range(4)], [agent(f"a{i}", 7) for i in range(4)])
        assert identify_opinion_leaders(c) == {"a0", "a1", "a2", "a3"}

    def test_no_metadata(self):
        with pytest.raises(ValueError):
            identify_opinion_leaders(corpus_of([tw("1", "a")]))

    def test_planted_influencers(self, default_scenario, default_corpus):
        n = sum(a.followers_count is not None for a in default_corpus.agents.values())
        leaders = identify_opinion_leaders(default_corpus, (n - 5) / (n - 1))
        assert leaders == set(default_scenario.truth.influencers)


class TestScoring:
    def test_no_cues_no_mentions(self):
        t = tw("1", "a", text="biasa saja")
        assert score_maneuvers(t, extract_cues(t, LEX), ctx()) == ManeuverScores()

    def test_back_both_indicators(self):
        t = tw("1", "a", text="Ayo @lead", mentions=["lead"])
        s = score_maneuvers(t, extract_cues(t, LEX), ctx(leaders={"lead"}))
        assert s.back == 1.0

    def test_bridge_example(self):
        influencers = ["su20", "roshq", "yuasna", "yobe"]
        text = ("@su20 @roshq @yuasna @yobe Meski keadaan ekonomi negeri ini defisit, tidak lantas "
                "hrs melegalkan sesuatu yang ALLOH SWT haramkan #MirasIndukMaksiat #zyl7")
        t = tw("1", "c1", text=text, hashtags=["mirasindukmaksiat", "zyl7"], mentions=influencers)
        c = ctx(leaders=influencers,
                community={"c1": 0, "su20": 1, "roshq": 1, "yuasna": 2, "yobe": 2},
                majority={"mirasindukmaksiat": 1})
        assert score_maneuvers(t, extract_cues(t, LEX), c).bridge >= 0.5

    def test_distract_first_use(self):
        from hashtrace.bend import FirstUse
        t = tw("1", "a", text="Wahai saudara!", hashtags=["892t"])
        c = ctx(first={"892t": FirstUse(t.created_at, "1", "a")})
        assert score_maneuvers(t, extract_cues(t, LEX), c).distract == 1.0

    def test_weights(self):
        t = tw("1", "a", text="Ayo")
        c = ctx(weights={"back": [3, 1]})
        assert score_maneuvers(t, extract_cues(t, LEX), c).back == pytest.approx(0.75)

    @pytest.mark.parametrize("bad", [{"back": [1]}, {"nope": [1]}, {"back": [0, 0]}, {"back": [-1, 2]}])
    def test_bad_weights(self, bad):
        with pytest.raises(ValueError):
            validate_weights(bad)

    def test_indicator_counts_match(self):
        t = tw("1", "a", text="x")
        ind = maneuver_indicators(t, extract_cues(t, LEX), ctx())
        assert {k: len(v) for k, v in ind.items()} == INDICATOR_COUNTS

    @settings(max_examples=60, deadline=None)
    @given(st.text(max_size=80), st.lists(st.sampled_from(["a", "b", "c", "lead"]), max_size=4))
    def test_scores_in_unit_interval(self, text, mentions):
        t = tw("1", "me", text=text, mentions=mentions)
        s = score_maneuvers(t, extract_cues(t, LEX), ctx(leaders={"lead"}, community={"me": 0, "a": 1}))
        assert all(0.0 <= v <= 1.0 for v in s.as_dict().values())


class TestContextHelpers:
    def test_first_use_tie_breaks_on_id(self):
        c = corpus_of([tw("2", "b", hashtags=["x"]), tw("1", "a", hashtags=["x"])])
        assert hashtag_first_use(c)["x"].tweet_id == "1"

    def test_majority_counts_distinct_users(self):
        c = corpus_of([tw(str(i), "a", hashtags=["x"], hour=i) for i in range(5)]
                      + [tw("b1", "b", hashtags=["x"]), tw("c1", "c", hashtags=["x"])])
        assert hashtag_majority_community(c, {"a": 0, "b": 1, "c": 1}) == {"x": 1}


class TestProfiles:
    def setup_method(self):
        self.c = corpus_of(
            [tw("1", "a", text="Ayo @lead", mentions=["lead"]), tw("2", "a", text="biasa"),
             tw("3", "z", text="biasa"), tw("4", "lead", text="halo")],
            [agent("lead", 1000), agent("a", 1), agent("z", 1)],
        )
        self.ctx = build_context(self.c, leader_percentile=0.9)

    def test_mean_of_two(self):
        assert agent_maneuver_profile("a", self.c, self.ctx).back == 0.5

    def test_no_tweets(self):
        with pytest.raises(ValueError):
            agent_maneuver_profile("ghost", self.c, self.ctx)

    def test_compare(self):
        cmp = compare_groups({"a"}, {"z"}, self.c, self.ctx)
        assert cmp.difference("back") == 0.5
        assert cmp.mean_b == ManeuverScores()

    def test_identical_groups_zero_difference(self):
        cmp = compare_groups({"z"}, {"lead"}, self.c, self.ctx)
        assert all(cmp.difference(m) == pytest.approx(0.0) for m in MANEUVERS)

    def test_overlap_and_empty(self):
        with pytest.raises(ValueError):
            compare_groups({"a"}, {"a", "z"}, self.c, self.ctx)
        with pytest.raises(ValueError):
            compare_groups(set(), {"z"}, self.c, self.ctx)

    def test_synthetic_separation(self, default_scenario, default_corpus):
        c = build_context(default_corpus)
        coord = set(default_scenario.truth.coordinated)
        cmp = compare_groups(coord, default_corpus.authors() - coord, default_corpus, c)
        assert sum(cmp.difference(m) > 0 for m in MANEUVERS) >= 4
        for m in ("back", "build", "bridge", "distract"):
            assert cmp.difference(m) > 0


class TestProperties:
    @settings(max_examples=30, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_tweet_order_invariance(self, rnd):
        tweets = [tw(str(i), f"u{i % 3}", i % 2, text="Ayo gabung!", hashtags=["x"] if i % 2 else ["y"],
                     mentions=[f"u{(i + 1) % 3}"], hour=1) for i in range(6)]
        agents = [agent(f"u{i}", 10 * i) for i in range(3)]
        shuffled = list(tweets)
        rnd.shuffle(shuffled)
        a, b = corpus_of(tweets, agents), corpus_of(shuffled, agents)
        ca, cb = build_context(a), build_context(b)
        for t in tweets:
            assert score_maneuvers(t, extract_cues(t, LEX), ca) == score_maneuvers(t, extract_cues(t, LEX), cb)

    @settings(max_examples=60, deadline=None)
    @given(st.text(max_size=60), st.lists(st.sampled_from(["a", "b", "lead"]), min_size=1, max_size=3))
    def test_mentions_drive_network_indicators(self, text, mentions):
        c = ctx(leaders={"lead"}, community={"me": 0, "a": 1, "b": 0, "lead": 1})
        t = tw("1", "me", text=text)
        ind = maneuver_indicators(t, extract_cues(t, LEX), c)
        assert not ind["back"][1] and not ind["build"][0] and not ind["build"][2]
        assert not ind["bridge"][0] and not ind["boost"][0] and not ind["boost"][2]

    @settings(max_examples=60, deadline=None)
    @given(st.text(alphabet="abc ayo!?", max_size=40))
    def test_encouragement_monotone(self, text):
        c = ctx(leaders={"lead"})
        before = tw("1", "me", text=text, mentions=["lead"])
        after = tw("1", "me", text=text + " ayo", mentions=["lead"])
        s0 = score_maneuvers(before, extract_cues(before, LEX), c).back
        s1 = score_maneuvers(after, extract_cues(after, LEX), c).back
        assert s1 >= s0
