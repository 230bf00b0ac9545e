"""Leave-one-channel-out evaluation of the classifier and three baselines.

Baselines, all applied to the same stage-one candidates:

* ``baseline1`` accepts every candidate.
* ``baseline2`` accepts candidates whose tokens are all noun-family tags.
* ``baseline3`` accepts candidates whose closeness mean, min and max all
  reach thresholds tuned on the training channels.

``gold`` scores the gold labels themselves and exists as a sanity check of
the scorer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import GoldLabel, Transcript
from .features import feature_matrix, featurize, transcript_tags
from .gazetteer import Gazetteer
from .matcher import DEFAULT_GRID as MATCHER_GRID
from .matcher import CandidateMention, ThresholdProfile, calibrate_thresholds
from .model import DEFAULT_GRID as MODEL_GRID
from .model import inner_folds, select_hyperparameters, train
from .pipeline import label_candidates, raw_matches_many, select_candidates
from .scoring import match_predictions, prf
from .tagger import NOUN_TAGS, PosTagger

SYSTEMS = ("model", "baseline1", "baseline2", "baseline3", "gold")
CLOSENESS_GRID = tuple(round(0.05 * i, 2) for i in range(21))


@dataclass(frozen=True)
class Fold:
    channel_id: str
    train: tuple[int, ...]
    test: tuple[int, ...]


def loco_folds(corpus: Sequence[Transcript]) -> list[Fold]:
    """One fold per channel, in sorted channel order."""
    channels = sorted({t.channel_id for t in corpus})
    if len(channels) < 2:
        raise ValueError("leave-one-channel-out needs at least two channels")
    folds = []
    for ch in channels:
        test = tuple(i for i, t in enumerate(corpus) if t.channel_id == ch)
        train_ = tuple(i for i, t in enumerate(corpus) if t.channel_id != ch)
        folds.append(Fold(ch, train_, test))
    return folds


@dataclass
class FoldResult:
    channel_id: str
    tp: int
    fp: int
    fn: int
    details: dict = field(default_factory=dict)

    @property
    def precision(self) -> float:
        return prf(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return prf(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self) -> float:
        return prf(self.tp, self.fp, self.fn)[2]


@dataclass
class EvalReport:
    system_name: str
    per_fold: list[FoldResult]
    meta: dict = field(default_factory=dict)

    @property
    def aggregate(self) -> dict[str, float]:
        """Unweighted means of the per-fold precision, recall and F1."""
        if not self.per_fold:
            return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
        return {
            "precision": float(np.mean([f.precision for f in self.per_fold])),
            "recall": float(np.mean([f.recall for f in self.per_fold])),
            "f1": float(np.mean([f.f1 for f in self.per_fold])),
        }

    def to_records(self) -> list[dict]:
        rows = []
        for f in self.per_fold:
            rows.append({
                "system": self.system_name, "row": "fold", "channel_id": f.channel_id,
                "tp": f.tp, "fp": f.fp, "fn": f.fn, "precision": f.precision,
                "recall": f.recall, "f1": f.f1, "details": f.details,
            })
        agg = self.aggregate
        rows.append({"system": self.system_name, "row": "aggregate", **agg,
                     "tp": sum(f.tp for f in self.per_fold),
                     "fp": sum(f.fp for f in self.per_fold),
                     "fn": sum(f.fn for f in self.per_fold),
                     "meta": self.meta})
        return rows

    def to_table(self) -> str:
        lines = [f"system: {self.system_name}",
                 f"{'channel':<16}{'tp':>6}{'fp':>6}{'fn':>6}{'prec':>8}{'rec':>8}{'f1':>8}"]
        for f in self.per_fold:
            lines.append(f"{f.channel_id:<16}{f.tp:>6}{f.fp:>6}{f.fn:>6}"
                         f"{f.precision:>8.3f}{f.recall:>8.3f}{f.f1:>8.3f}")
        agg = self.aggregate
        lines.append(f"{'macro mean':<34}{agg['precision']:>8.3f}{agg['recall']:>8.3f}{agg['f1']:>8.3f}")
        return "\n".join(lines) + "\n"

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / f"{self.system_name}.jsonl", "w", encoding="utf-8") as fh:
            for rec in self.to_records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        (directory / f"{self.system_name}.txt").write_text(self.to_table(), encoding="utf-8")


# -- baseline rules ---------------------------------------------------------------

def noun_phrase_mask(t: Transcript, candidates: Sequence[CandidateMention],
                     tagger: Optional[PosTagger] = None) -> np.ndarray:
    if not candidates:
        return np.zeros(0, dtype=bool)
    tags = transcript_tags(t, tagger)
    return np.array([all(tag in NOUN_TAGS for tag in tags[c.span[0]:c.span[1]])
                     for c in candidates], dtype=bool)


def fit_closeness_thresholds(stats: np.ndarray, y: np.ndarray, folds: Sequence[np.ndarray],
                             fold_missed: Sequence[int],
                             grid: Sequence[float] = CLOSENESS_GRID) -> tuple[float, float, float]:
    """Grid-search (mean, min, max) thresholds maximizing mean fold F1.

    ``stats`` holds one row of (mean, min, max) closeness per candidate. A
    candidate is kept when every statistic reaches its threshold. Ties go to
    the lexicographically smallest triple.
    """
    grid = np.asarray(grid, dtype=float)
    k = grid.size
    above = [stats[:, j][None, :] >= grid[:, None] for j in range(3)]  # (k, N) each
    best, best_score = (float(grid[0]),) * 3, -1.0
    for ai in range(k):
        keep_a = above[0][ai]
        scores = np.zeros((k, k))
        for f, missed in zip(folds, fold_missed):
            member = np.zeros(len(y), dtype=bool)
            member[f] = True
            pos = (keep_a & member & (y == 1)).astype(float)
            neg = (keep_a & member & (y == 0)).astype(float)
            lo_b = above[1].astype(float)
            hi_c = above[2].astype(float)
            tp = (lo_b * pos) @ hi_c.T
            fp = (lo_b * neg) @ hi_c.T
            fn = float(np.sum(member & (y == 1))) - tp + missed
            denom = 2 * tp + fp + fn
            with np.errstate(invalid="ignore", divide="ignore"):
                scores += np.where(tp > 0, 2 * tp / np.where(denom > 0, denom, 1), 0.0)
        scores /= max(len(folds), 1)
        scores = np.round(scores, 12)
        bi, ci = np.unravel_index(np.argmax(scores), scores.shape)  # first max = smallest
        if scores[bi, ci] > best_score:
            best_score = float(scores[bi, ci])
            best = (float(grid[ai]), float(grid[bi]), float(grid[ci]))
    return best


def _closeness_columns(X: np.ndarray) -> np.ndarray:
    return X[:, :3] if X.size else np.zeros((0, 3))


# -- runner -----------------------------------------------------------------------

def evaluate_systems(systems: Sequence[str], corpus: Sequence[Transcript],
                     labels: Optional[Mapping[str, Sequence[GoldLabel]]], g: Gazetteer,
                     matcher_grid: Sequence[float] = MATCHER_GRID,
                     model_grid=MODEL_GRID, seed: int = 0, jobs: int = 1,
                     tagger: Optional[PosTagger] = None) -> dict[str, EvalReport]:
    """Run several systems over shared LOCO folds and stage-one candidates."""
    for s in systems:
        if s not in SYSTEMS:
            raise ValueError(f"unknown system {s!r}; choose from {SYSTEMS}")
    if not labels or not any(labels.get(t.episode_id) for t in corpus):
        raise ValueError("corpus is unlabeled")
    corpus = list(corpus)
    gold = [list(labels.get(t.episode_id, [])) for t in corpus]
    folds = loco_folds(corpus)
    reports = {s: EvalReport(s, [], {"seed": seed}) for s in systems}

    needs_candidates = any(s != "gold" for s in systems)
    raw = None
    features = None
    if needs_candidates:
        loose = ThresholdProfile.uniform(max(matcher_grid))
        raw = raw_matches_many(corpus, g, loose, jobs)

    for fold in folds:
        if not needs_candidates:
            for s in systems:
                reports[s].per_fold.append(_score(fold, corpus, gold, {i: gold[i] for i in fold.test}))
            continue

        profile = calibrate_thresholds([(corpus[i], gold[i]) for i in fold.train], g,
                                       matcher_grid, raw=[raw[i] for i in fold.train])
        cands = {i: select_candidates(raw[i], profile, g) for i in fold.train + fold.test}
        base_details = {"thresholds": profile.to_dict()}

        if any(s in ("model", "baseline3") for s in systems):
            features = {i: feature_matrix(featurize(corpus[i], cands[i], g, tagger))
                        for i in fold.train + fold.test}
            X_tr = np.vstack([features[i] for i in fold.train])
            y_tr = np.concatenate([label_candidates(cands[i], gold[i]) for i in fold.train])
            groups = [corpus[i].channel_id for i in fold.train for _ in cands[i]]
            missed: dict[str, int] = {}
            for i in fold.train:
                ch = corpus[i].channel_id
                hit = int(label_candidates(cands[i], gold[i]).sum())
                missed[ch] = missed.get(ch, 0) + len(gold[i]) - hit

        for s in systems:
            details = dict(base_details)
            if s == "gold":
                preds = {i: gold[i] for i in fold.test}
                details = {}
            elif s == "baseline1":
                preds = {i: cands[i] for i in fold.test}
            elif s == "baseline2":
                preds = {}
                for i in fold.test:
                    mask = noun_phrase_mask(corpus[i], cands[i], tagger)
                    preds[i] = [c for c, keep in zip(cands[i], mask) if keep]
            elif s == "baseline3":
                inner = inner_folds(groups, y_tr, seed=seed)
                inner_missed = [sum(missed.get(ch, 0) for ch in {groups[r] for r in f}) for f in inner]
                thr = fit_closeness_thresholds(_closeness_columns(X_tr), y_tr, inner, inner_missed)
                details["closeness_thresholds"] = list(thr)
                preds = {}
                for i in fold.test:
                    st = _closeness_columns(features[i])
                    keep = np.all(st >= np.array(thr), axis=1) if len(st) else []
                    preds[i] = [c for c, k in zip(cands[i], keep) if k]
            else:
                preds = _model_predictions(fold, cands, features, X_tr, y_tr, groups,
                                           missed, model_grid, seed, jobs, details)
            reports[s].per_fold.append(_score(fold, corpus, gold, preds, details))
    return reports


def _model_predictions(fold, cands, features, X_tr, y_tr, groups, missed,
                       model_grid, seed, jobs, details):
    if len(np.unique(y_tr)) < 2:
        # nothing to learn from; fall back to accepting candidates iff positives dominate
        accept = bool(y_tr.size and y_tr.mean() >= 0.5)
        details["model"] = "constant"
        return {i: list(cands[i]) if accept else [] for i in fold.test}
    sel = select_hyperparameters(X_tr, y_tr, groups, model_grid, missed, seed=seed, jobs=jobs)
    model = train(X_tr, y_tr, sel.penalty, sel.strength, seed=seed,
                  decision_threshold=sel.decision_threshold)
    details["model"] = {"penalty": sel.penalty, "strength": sel.strength,
                        "decision_threshold": sel.decision_threshold,
                        "inner_f1": sel.score}
    preds = {}
    for i in fold.test:
        if len(cands[i]) == 0:
            preds[i] = []
            continue
        keep = model.predict(features[i])
        preds[i] = [c for c, k in zip(cands[i], keep) if k]
    return preds


def _score(fold: Fold, corpus, gold, preds, details=None) -> FoldResult:
    tp = fp = fn = 0
    for i in fold.test:
        a, b, c = match_predictions(gold[i], preds.get(i, []))
        tp, fp, fn = tp + a, fp + b, fn + c
    return FoldResult(fold.channel_id, tp, fp, fn, details or {})


def run_system(system: str, corpus: Sequence[Transcript],
               labels: Optional[Mapping[str, Sequence[GoldLabel]]], g: Gazetteer,
               **kwargs) -> EvalReport:
    return evaluate_systems([system], corpus, labels, g, **kwargs)[system]
