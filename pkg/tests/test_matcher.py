import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filmner.corpus import GoldLabel, Transcript
from filmner.gazetteer import load_gazetteer
from filmner.matcher import (
    CandidateMention,
    ThresholdProfile,
    _code_matrix,
    _max_distance,
    _max_distances,
    _pair_distances,
    bounded_levenshtein,
    calibrate_thresholds,
    internal_folds,
    lev_ratio,
    levenshtein_distance,
    raw_matches,
    resolve_overlaps,
    scan,
)
from filmner.synth import CorruptionConfig, generate_corpus, synthetic_gazetteer

from oracles import edit_distance

short = st.text(alphabet="abcde ", max_size=9)


@pytest.mark.parametrize("a, b, d", [("coco", "cocoa", 1), ("", "abc", 3), ("kitten", "sitting", 3),
                                     ("abc", "abc", 0)])
def test_distance_examples(a, b, d):
    assert levenshtein_distance(a, b) == d


@settings(max_examples=300)
@given(short, short)
def test_distance_matches_oracle(a, b):
    assert levenshtein_distance(a, b) == edit_distance(a, b)


@settings(max_examples=300)
@given(short, short, st.integers(-2, 10))
def test_bounded_distance(a, b, limit):
    d = edit_distance(a, b)
    got = bounded_levenshtein(a, b, limit)
    if d <= max(limit, 0):
        assert got == d
    else:
        assert got > max(limit, 0)


def test_compiled_kernel_agrees_with_python():
    rng = random.Random(3)
    texts = ["".join(rng.choice("abc ") for _ in range(rng.randint(0, 12))) for _ in range(60)]
    codes, lens = _code_matrix(texts)
    pairs = list(itertools.product(range(len(texts)), repeat=2))
    a_idx = np.array([p[0] for p in pairs], dtype=np.int64)
    b_idx = np.array([p[1] for p in pairs], dtype=np.int64)
    limits = np.array([rng.randint(0, 8) for _ in pairs], dtype=np.int64)
    out = _pair_distances(codes, lens, codes, lens, a_idx, b_idx, limits)
    for k, (i, j) in enumerate(pairs):
        d = edit_distance(texts[i], texts[j])
        if d <= limits[k]:
            assert out[k] == d
        else:
            assert out[k] > limits[k]


@pytest.mark.parametrize("a, b, r", [("cocoa", "coco", 0.2), ("abc", "abc", 0.0), ("a", "b", 1.0)])
def test_ratio_examples(a, b, r):
    assert lev_ratio(a, b) == r


def test_ratio_of_two_empty_strings():
    with pytest.raises(ValueError):
        lev_ratio("", "")


@given(st.floats(0, 1), st.integers(1, 60))
def test_max_distance_is_the_largest_allowed(thr, longest):
    k = _max_distance(thr, longest)
    assert k / longest <= thr
    assert (k + 1) / longest > thr
    assert _max_distances(thr, np.array([longest]))[0] == k


def test_threshold_profile():
    with pytest.raises(ValueError):
        ThresholdProfile({1: 0.1})
    with pytest.raises(ValueError):
        ThresholdProfile.uniform(1.5)
    p = ThresholdProfile.uniform(0.25)
    assert ThresholdProfile.from_dict(p.to_dict()) == p


COCO = load_gazetteer([{"film_id": "coco", "title": "Coco"}])


def test_scan_cocoa():
    t = Transcript("ch", "ep", ["we", "watched", "cocoa", "yesterday"])
    hits = scan(t, COCO, ThresholdProfile.uniform(0.25))
    assert hits == [CandidateMention("ep", (2, 3), 1, "coco", "cocoa", 0.2)]
    assert scan(t, COCO, ThresholdProfile.uniform(0.1)) == []
    t2 = Transcript("ch", "ep", ["we", "watched", "coco"])
    assert [h.lev_ratio for h in scan(t2, COCO, ThresholdProfile.uniform(0.0))] == [0.0]


def test_scan_handles_split_and_merged_tokens():
    g = load_gazetteer([{"film_id": "ts", "title": "Toy Story"}, {"film_id": "up", "title": "Up"}])
    merged = Transcript("ch", "ep", ["saw", "toystory", "today"])
    assert [(m.film_id, m.span) for m in scan(merged, g, ThresholdProfile.uniform(0.15))] == [("ts", (1, 2))]
    split = Transcript("ch", "ep2", ["saw", "toy", "sto", "ry"])
    assert [(m.film_id, m.span) for m in scan(split, g, ThresholdProfile.uniform(0.15))] == [("ts", (1, 4))]


def test_windows_stop_at_sentence_breaks():
    g = load_gazetteer([{"film_id": "ts", "title": "Toy Story"}])
    t = Transcript.from_text("I like my toy. Story time.", "ch", "ep")
    assert scan(t, g, ThresholdProfile.uniform(0.0)) == []
    t = Transcript.from_text("I like toy story. Time.", "ch", "ep")
    assert len(scan(t, g, ThresholdProfile.uniform(0.0))) == 1


def _brute_raw(t, g, profile):
    out = set()
    for i in range(len(t)):
        for n in range(1, 7):
            if i + n > len(t):
                break
            text = " ".join(t.tokens[i:i + n])
            for f in g:
                if abs(f.n - n) > 1:
                    continue
                r = edit_distance(text, f.title_text) / max(len(text), len(f.title_text))
                if r <= profile[n]:
                    out.add(((i, i + n), f.film_id))
    return out


@pytest.mark.parametrize("seed", range(4))
def test_raw_matches_against_brute_force(seed):
    g = synthetic_gazetteer(25, seed=seed)
    corpus = generate_corpus(g, CorruptionConfig(char_error_rate=0.1, seed=seed, channels=1,
                                                 transcripts_per_channel=2, filler_length=(2, 5),
                                                 distractors_per_transcript=(1, 2)))
    profile = ThresholdProfile({1: 0.2, 2: 0.25, 3: 0.3, 4: 0.35, 5: 0.4, 6: 0.45})
    for t in corpus.transcripts:
        got = raw_matches(t, g, profile)
        assert {(c.span, c.film_id) for c in got} == _brute_raw(t, g, profile)
        assert len(got) == len({(c.span, c.film_id) for c in got})


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 0.4), st.floats(0, 0.4))
def test_scan_monotone_and_non_overlapping(seed, lo, hi):
    lo, hi = min(lo, hi), max(lo, hi)
    g = synthetic_gazetteer(30, seed=seed % 5)
    corpus = generate_corpus(g, CorruptionConfig(char_error_rate=0.1, seed=seed, channels=1,
                                                 transcripts_per_channel=1))
    t = corpus.transcripts[0]
    small = {(c.span, c.film_id) for c in raw_matches(t, g, ThresholdProfile.uniform(lo))}
    large = {(c.span, c.film_id) for c in raw_matches(t, g, ThresholdProfile.uniform(hi))}
    assert small <= large
    kept = scan(t, g, ThresholdProfile.uniform(hi))
    for a, b in zip(kept, kept[1:]):
        assert a.span[1] <= b.span[0]


def test_overlap_priority():
    g = load_gazetteer([
        {"film_id": "a", "title": "Alpha Beta", "budget": 10.0},
        {"film_id": "b", "title": "Beta Gamma", "budget": 20.0},
        {"film_id": "c", "title": "Alpha Beta Gamma"},
    ])
    t = Transcript("ch", "ep", "alpha beta gamma".split())
    assert [c.film_id for c in scan(t, g, ThresholdProfile.uniform(0.0))] == ["c"]
    raw = [c for c in raw_matches(t, g, ThresholdProfile.uniform(0.0)) if c.n == 2]
    assert [c.film_id for c in resolve_overlaps(raw, g)] == ["b"]


def test_internal_folds():
    ts = [Transcript(f"c{i % 5}", f"e{i}", ["a"]) for i in range(10)]
    folds = internal_folds(ts)
    assert sorted(i for f in folds for i in f) == list(range(10))
    for f in folds:
        chans = {ts[i].channel_id for i in f}
        for other in folds:
            if other is not f:
                assert not chans & {ts[i].channel_id for i in other}
    assert len(internal_folds(ts[:2])) == 2


def _one_token_set(rate=None, seed=0):
    rng = np.random.default_rng(seed)
    films = [{"film_id": f"f{i}", "title": w} for i, w in
             enumerate(["godzilla", "casablanca", "vertigo", "amadeus", "psycho", "rocky",
                        "gravity", "inception", "titanic", "memento", "alien", "batman"])]
    g = load_gazetteer(films)
    training = []
    for k, f in enumerate(g):
        title = f.title_text
        if rate == "one_edit":
            i = int(rng.integers(len(title)))
            title = title[:i] + ("x" if title[i] != "x" else "y") + title[i + 1:]
        toks = ["so", "we", "saw", title, "last", "week"]
        t = Transcript(f"c{k % 4}", f"e{k}", toks)
        training.append((t, [GoldLabel(t.episode_id, f.film_id, (3, 4))]))
    return g, training


def test_calibration_verbatim_gives_smallest_threshold():
    g, training = _one_token_set()
    prof = calibrate_thresholds(training, g)
    assert all(prof[n] == 0.0 for n in range(1, 7))


def test_calibration_one_edit_titles():
    g, training = _one_token_set("one_edit")
    prof = calibrate_thresholds(training, g)
    # every title has at least 5 characters, so one edit costs at most 0.2
    assert prof[1] >= 0.2 - 1e-12


def test_calibration_single_point_grid():
    g, training = _one_token_set("one_edit")
    assert calibrate_thresholds(training, g, grid=[0.0]) == ThresholdProfile.uniform(0.0)


def test_calibration_rejects_empty():
    with pytest.raises(ValueError):
        calibrate_thresholds([], COCO)
