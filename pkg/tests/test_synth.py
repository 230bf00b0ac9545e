import numpy as np
import pytest

from filmner.corpus import word_error_rate
from filmner.gazetteer import load_gazetteer
from filmner.matcher import ThresholdProfile, scan
from filmner.scoring import match_predictions
from filmner.synth import (
    ALPHABET,
    CorruptionConfig,
    corrupt,
    corruption_fraction,
    generate_corpus,
    mention_wer,
    near_miss,
    synthetic_gazetteer,
    word_list,
)
from filmner.corpus import check_labels

from oracles import edit_distance


def test_word_lists_are_disjoint():
    lists = {name: set(word_list(name)) for name in ("filler", "title", "keyword")}
    assert lists["filler"].isdisjoint(lists["title"])
    assert lists["filler"].isdisjoint(lists["keyword"])
    assert lists["title"].isdisjoint(lists["keyword"])


def test_corrupt_counts_edits():
    rng = np.random.default_rng(0)
    for _ in range(200):
        text, edits = corrupt("the grand budapest", 0.2, rng)
        assert edit_distance(text, "the grand budapest") <= edits
        assert set(text) <= set(ALPHABET)
    assert corrupt("abc", 0.0, rng) == ("abc", 0)


def test_near_miss_ratio():
    rng = np.random.default_rng(1)
    for _ in range(100):
        text, k = near_miss("midnight harbor lantern", (0.3, 0.45), rng)
        d = edit_distance(text, "midnight harbor lantern")
        # substitutions bound the distance; a cheaper alignment may exist
        assert 0 < d <= k
        assert 0.3 <= k / len(text) <= 0.45 + 1 / len(text)


def test_generation_is_deterministic():
    g = synthetic_gazetteer(50, seed=3)
    cfg = CorruptionConfig(seed=42, distractors_per_transcript=(1, 2))
    a, b = generate_corpus(g, cfg), generate_corpus(g, cfg)
    assert a.transcripts == b.transcripts and a.labels == b.labels and a.spans == b.spans
    c = generate_corpus(g, CorruptionConfig(seed=43))
    assert c.transcripts != a.transcripts


def test_channels_and_labels():
    g = synthetic_gazetteer(40, seed=0)
    corpus = generate_corpus(g, CorruptionConfig(channels=9, seed=1))
    assert len({t.channel_id for t in corpus.transcripts}) == 9
    for t in corpus.transcripts:
        check_labels(t, corpus.labels[t.episode_id])


def test_clean_corpus_has_verbatim_titles():
    g = synthetic_gazetteer(60, seed=4)
    corpus = generate_corpus(g, CorruptionConfig(char_error_rate=0.0, seed=4))
    by_ep = {t.episode_id: t for t in corpus.transcripts}
    for m in corpus.mentions:
        assert m.surface == g.get(m.film_id).title_tokens
        start, end = m.span
        assert tuple(by_ep[m.episode_id].tokens[start:end]) == m.surface
    tp = fn = 0
    for t in corpus.transcripts:
        a, _, c = match_predictions(corpus.labels[t.episode_id], scan(t, g, ThresholdProfile.uniform(0.0)))
        tp, fn = tp + a, fn + c
    assert fn == 0 and tp == len(corpus.mentions)


def test_corruption_fraction_tracks_rate():
    g = synthetic_gazetteer(200, seed=42)
    cfg = CorruptionConfig(char_error_rate=0.1, seed=42, channels=10, transcripts_per_channel=10,
                           mentions_per_transcript=(5, 5))
    corpus = generate_corpus(g, cfg)
    assert len(corpus.mentions) == 500
    assert abs(corruption_fraction(corpus) - 0.1) <= 0.02


def test_full_corruption_wer_near_one():
    # one-letter titles from letters no filler word is made of
    g = load_gazetteer([{"film_id": f"f{i}", "title": "q " * k} for i, k in enumerate(range(1, 5))])
    corpus = generate_corpus(g, CorruptionConfig(char_error_rate=1.0, seed=0, transcripts_per_channel=5))
    assert mention_wer(corpus, g) >= 0.9


def test_keyword_support_is_nearby():
    g = synthetic_gazetteer(60, seed=6)
    corpus = generate_corpus(g, CorruptionConfig(seed=6, keyword_rate=1.0))
    by_ep = {t.episode_id: t for t in corpus.transcripts}
    for m in corpus.mentions:
        kws = g.get(m.film_id).keywords
        if not kws:
            assert not m.keyword_support
            continue
        toks = by_ep[m.episode_id].tokens
        lo, hi = max(0, m.span[0] - 10), m.span[1] + 10
        near = toks[lo:hi]
        assert any(kw[0] in near for kw in kws)


def test_distractors_are_not_labeled():
    g = synthetic_gazetteer(80, seed=7)
    corpus = generate_corpus(g, CorruptionConfig(seed=7, distractors_per_transcript=(3, 3)))
    kinds = {s.kind for s in corpus.spans}
    assert kinds == {"mention", "distractor", "near_miss"}
    assert sum(len(v) for v in corpus.labels.values()) == len(corpus.mentions)


def test_synthetic_gazetteer_missing_rate():
    g = synthetic_gazetteer(400, seed=0, missing_rate=0.7)
    missing = sum(1 for f in g if f.budget is None or not f.keywords or f.plot is None or f.logline is None)
    assert abs(missing / len(g) - 0.7) < 0.06
    assert {f.n for f in synthetic_gazetteer(50, title_lengths=(0, 0, 1))} == {3}


@pytest.mark.parametrize("bad", [dict(char_error_rate=1.5), dict(channels=0),
                                 dict(mentions_per_transcript=(4, 2)), dict(keyword_rate=-0.1)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        CorruptionConfig(**bad)


def test_config_round_trip():
    cfg = CorruptionConfig(seed=5, mentions_per_transcript=(1, 2))
    assert CorruptionConfig.from_dict(cfg.to_dict()) == cfg
