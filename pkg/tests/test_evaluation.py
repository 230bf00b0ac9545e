import json

import numpy as np
import pytest

from filmner.corpus import GoldLabel, Transcript
from filmner.evaluation import (
    EvalReport,
    FoldResult,
    evaluate_systems,
    fit_closeness_thresholds,
    loco_folds,
    noun_phrase_mask,
    run_system,
)
from filmner.matcher import CandidateMention
from filmner.scoring import assign, match_predictions, prf
from filmner.synth import CorruptionConfig, generate_corpus, synthetic_gazetteer


def _lab(film, span=None):
    return GoldLabel("ep", film, span)


def _cand(film, span):
    return CandidateMention("ep", span, span[1] - span[0], film, "x", 0.0)


def test_match_identity():
    gold = [_lab("a", (0, 2)), _lab("b", (5, 6))]
    assert match_predictions(gold, gold) == (2, 0, 0)


def test_match_empty_predictions():
    assert match_predictions([_lab("a", (0, 1))] * 3, []) == (0, 0, 3)


def test_match_multiset_without_spans():
    assert match_predictions([_lab("x"), _lab("x")], [_lab("x")]) == (1, 0, 1)


def test_match_requires_overlap_and_film():
    gold = [_lab("a", (3, 5))]
    assert match_predictions(gold, [_cand("a", (4, 6))]) == (1, 0, 0)
    assert match_predictions(gold, [_cand("a", (5, 6))]) == (0, 1, 1)
    assert match_predictions(gold, [_cand("b", (3, 5))]) == (0, 1, 1)
    # one gold mention cannot be claimed twice
    assert assign(gold, [_cand("a", (3, 4)), _cand("a", (4, 5))]) == [True, False]


def test_prf_conventions():
    assert prf(0, 0, 0) == (0.0, 0.0, 0.0)
    assert prf(0, 0, 4) == (0.0, 0.0, 0.0)
    assert prf(2, 2, 0) == (0.5, 1.0, pytest.approx(2 / 3))


def _mini(channels):
    return [Transcript(ch, f"{ch}_{k}", ["a"]) for ch in channels for k in range(2)]


def test_loco_folds():
    corpus = _mini([f"c{i}" for i in range(9)])
    folds = loco_folds(corpus)
    assert len(folds) == 9
    for f in folds:
        assert {corpus[i].channel_id for i in f.test} == {f.channel_id}
        assert f.channel_id not in {corpus[i].channel_id for i in f.train}
        assert len(f.train) + len(f.test) == len(corpus)
    two = loco_folds([Transcript("x", "1", []), Transcript("y", "2", [])])
    assert [len(f.train) for f in two] == [1, 1]
    with pytest.raises(ValueError):
        loco_folds(_mini(["only"]))


def test_loco_folds_ignore_input_order():
    corpus = _mini(["b", "a", "c"])
    shuffled = [corpus[i] for i in (4, 0, 5, 2, 1, 3)]
    ids = lambda c, fs: [(f.channel_id, sorted(c[i].episode_id for i in f.test)) for f in fs]
    assert ids(corpus, loco_folds(corpus)) == ids(shuffled, loco_folds(shuffled))


def test_report_records(tmp_path):
    rep = EvalReport("demo", [FoldResult("c1", 3, 1, 0), FoldResult("c2", 1, 1, 2)], {"seed": 4})
    agg = rep.aggregate
    assert agg["precision"] == pytest.approx((0.75 + 0.5) / 2)
    rep.save(tmp_path)
    rows = [json.loads(line) for line in (tmp_path / "demo.jsonl").read_text().splitlines()]
    assert [r["row"] for r in rows] == ["fold", "fold", "aggregate"]
    assert rows[-1]["meta"] == {"seed": 4}
    assert "macro mean" in (tmp_path / "demo.txt").read_text()


def test_closeness_threshold_search():
    stats = np.array([[0.9, 0.8, 0.95], [0.9, 0.2, 0.95], [0.1, 0.1, 0.1], [0.95, 0.9, 1.0]])
    y = np.array([1, 0, 0, 1])
    thr = fit_closeness_thresholds(stats, y, [np.array([0, 1]), np.array([2, 3])], [0, 0])
    keep = np.all(stats >= np.array(thr), axis=1)
    assert keep.tolist() == [True, False, False, True]
    assert thr == (0.0, 0.25, 0.0)


def test_noun_phrase_mask():
    t = Transcript("c", "ep", ["we", "watched", "coco", "quickly"])
    cands = [_cand("a", (2, 3)), _cand("b", (1, 3))]
    assert noun_phrase_mask(t, cands).tolist() == [True, False]


@pytest.fixture(scope="module")
def small_corpus():
    g = synthetic_gazetteer(60, seed=9)
    corpus = generate_corpus(g, CorruptionConfig(seed=9, channels=3, char_error_rate=0.0))
    return g, corpus


def test_gold_system_scores_one(small_corpus):
    g, corpus = small_corpus
    rep = run_system("gold", corpus.transcripts, corpus.labels, g)
    assert [f.channel_id for f in rep.per_fold] == ["ch00", "ch01", "ch02"]
    assert rep.aggregate == {"precision": 1.0, "recall": 1.0, "f1": 1.0}


def test_baseline1_perfect_when_all_candidates_true(small_corpus):
    g, corpus = small_corpus
    rep = run_system("baseline1", corpus.transcripts, corpus.labels, g)
    assert rep.aggregate["precision"] == 1.0 and rep.aggregate["recall"] == 1.0


def test_all_systems_run_and_classifier_only_removes(small_corpus):
    g, corpus = small_corpus
    reps = evaluate_systems(["model", "baseline1", "baseline2", "baseline3"], corpus.transcripts,
                            corpus.labels, g, model_grid=[("l2", 1.0)])
    for name, rep in reps.items():
        assert len(rep.per_fold) == 3
        b1 = reps["baseline1"].per_fold
        for f, ref in zip(rep.per_fold, b1):
            assert f.tp + f.fp <= ref.tp + ref.fp
            assert f.tp <= ref.tp


def test_rejects_unlabeled_and_unknown(small_corpus):
    g, corpus = small_corpus
    with pytest.raises(ValueError):
        run_system("model", corpus.transcripts, {}, g)
    with pytest.raises(ValueError):
        run_system("oracle", corpus.transcripts, corpus.labels, g)
