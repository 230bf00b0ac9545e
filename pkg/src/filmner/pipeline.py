"""End-to-end detection: fuzzy candidates, features, classifier."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import GoldLabel, Transcript
from .features import feature_matrix, featurize
from .gazetteer import Gazetteer
from .matcher import CandidateMention, ThresholdProfile, raw_matches, resolve_overlaps
from .model import LinearModel
from .scoring import assign
from .tagger import PosTagger


def _raw_job(args):
    t, g, profile = args
    return raw_matches(t, g, profile)


def raw_matches_many(transcripts: Sequence[Transcript], g: Gazetteer,
                     profile: ThresholdProfile, jobs: int = 1) -> list[list[CandidateMention]]:
    """:func:`raw_matches` for each transcript, in input order."""
    tasks = [(t, g, profile) for t in transcripts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_raw_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_raw_job(task) for task in tasks]


def select_candidates(raw: Sequence[CandidateMention], profile: ThresholdProfile,
                      g: Gazetteer) -> list[CandidateMention]:
    """Resolved candidates under ``profile`` from raw matches found with looser thresholds."""
    return resolve_overlaps((c for c in raw if c.lev_ratio <= profile[c.n]), g)


def label_candidates(candidates: Sequence[CandidateMention],
                     gold: Sequence[GoldLabel]) -> np.ndarray:
    return np.array(assign(gold, candidates), dtype=int)


@dataclass(frozen=True)
class Detection:
    candidate: CandidateMention
    probability: float
    accepted: bool

    def to_record(self) -> dict:
        rec = self.candidate.to_record()
        rec["probability"] = self.probability
        rec["accepted"] = self.accepted
        return rec


class FilmDetector:
    """Scan, featurize and classify with a fixed model and threshold profile.

    The gazetteer can grow between calls; the model never needs refitting
    because no feature depends on which titles exist.
    """

    def __init__(self, gazetteer: Gazetteer, profile: ThresholdProfile,
                 model: LinearModel, tagger: Optional[PosTagger] = None):
        self.gazetteer = gazetteer
        self.profile = profile
        self.model = model
        self.tagger = tagger

    def candidates(self, t: Transcript) -> list[CandidateMention]:
        return resolve_overlaps(raw_matches(t, self.gazetteer, self.profile), self.gazetteer)

    def score(self, t: Transcript) -> list[Detection]:
        cands = self.candidates(t)
        if not cands:
            return []
        X = feature_matrix(featurize(t, cands, self.gazetteer, self.tagger))
        probs = self.model.predict_proba(X)
        thr = self.model.decision_threshold
        return [Detection(c, float(p), bool(p >= thr)) for c, p in zip(cands, probs)]

    def detect(self, t: Transcript) -> list[CandidateMention]:
        return [d.candidate for d in self.score(t) if d.accepted]
