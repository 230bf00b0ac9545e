"""Per-candidate features for the second-stage classifier.

Features never include the surface strings themselves, only properties of
the match and of the matched film's metadata, so the classifier keeps
working unchanged when new films are added to the gazetteer.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import Transcript
from .gazetteer import MAX_N, FilmRecord, Gazetteer
from .matcher import CandidateMention
from .tagger import BOUNDARY, PENN_TAGS, LexiconTagger, PosTagger

CONTEXT_TAGS = PENN_TAGS + (BOUNDARY,)
_TAG_POS = {t: i for i, t in enumerate(CONTEXT_TAGS)}


def feature_names() -> list[str]:
    names = [
        "closeness_mean", "closeness_min", "closeness_max", "closeness_defined",
        "lev_ratio", "budget_norm", "budget_present",
    ]
    names += [f"ngram_{n}" for n in range(1, MAX_N + 1)]
    names += [f"title_pos_{t}" for t in PENN_TAGS]
    names += [f"pre_pos_{t}" for t in CONTEXT_TAGS]
    names += [f"post_pos_{t}" for t in CONTEXT_TAGS]
    return names


N_FEATURES = len(feature_names())


@dataclass(frozen=True)
class FeatureVector:
    closeness_mean: float
    closeness_min: float
    closeness_max: float
    closeness_defined: int
    lev_ratio: float
    budget_norm: float
    budget_present: int
    ngram_level: int
    title_pos_bag: dict
    pre_pos: str
    post_pos: str

    def to_array(self) -> np.ndarray:
        x = np.zeros(N_FEATURES)
        x[:7] = (self.closeness_mean, self.closeness_min, self.closeness_max,
                 self.closeness_defined, self.lev_ratio, self.budget_norm,
                 self.budget_present)
        x[7 + self.ngram_level - 1] = 1.0
        off = 7 + MAX_N
        for tag, count in self.title_pos_bag.items():
            x[off + _TAG_POS[tag]] = count
        off += len(PENN_TAGS)
        x[off + _TAG_POS[self.pre_pos]] = 1.0
        off += len(CONTEXT_TAGS)
        x[off + _TAG_POS[self.post_pos]] = 1.0
        return x


def closeness(t: Transcript, w_m: int, w_k: int) -> float:
    """One minus the token gap between two positions over the transcript length."""
    size = len(t)
    if not (0 <= w_m < size and 0 <= w_k < size):
        raise IndexError(f"positions {w_m}, {w_k} outside transcript of {size} tokens")
    return 1.0 - abs(w_m - w_k) / size


def token_positions(tokens: Sequence[str]) -> dict[str, list[int]]:
    index: dict[str, list[int]] = {}
    for i, tok in enumerate(tokens):
        index.setdefault(tok, []).append(i)
    return index


def first_occurrence(tokens: Sequence[str], phrase: Sequence[str],
                     index: Optional[dict[str, list[int]]] = None) -> Optional[int]:
    if index is None:
        index = token_positions(tokens)
    n = len(phrase)
    for i in index.get(phrase[0], ()):
        if tuple(tokens[i:i + n]) == tuple(phrase):
            return i
    return None


def closeness_stats(t: Transcript, candidate: CandidateMention, film: FilmRecord,
                    index: Optional[dict[str, list[int]]] = None,
                    ) -> tuple[float, float, float, int]:
    """Mean, min and max closeness to the film's keywords, plus a defined flag.

    Each keyword is anchored at its first occurrence in the transcript; the
    mention is anchored at its first token.
    """
    if candidate.film_id != film.film_id:
        raise ValueError(f"candidate is for {candidate.film_id}, not {film.film_id}")
    if index is None:
        index = token_positions(t.tokens)
    w_m = candidate.span[0]
    values = []
    for kw in film.keywords:
        w_k = first_occurrence(t.tokens, kw, index)
        if w_k is not None:
            values.append(closeness(t, w_m, w_k))
    if not values:
        return 0.0, 0.0, 0.0, 0
    lo, hi = min(values), max(values)
    mean = min(max(math.fsum(values) / len(values), lo), hi)
    return mean, lo, hi, 1


def budget_norm(films: Sequence[FilmRecord]) -> list[tuple[float, int]]:
    """Min-max scaled budget of each film among the films present.

    ``films`` are the matched films of one transcript's candidates, in
    candidate order. Absent budgets give ``(0.0, 0)``; when fewer than two
    distinct budgets are present every present budget maps to 0.5.
    """
    present = {f.film_id: f.budget for f in films if f.budget is not None}
    if not present:
        return [(0.0, 0) for _ in films]
    lo, hi = min(present.values()), max(present.values())
    out = []
    for f in films:
        if f.budget is None:
            out.append((0.0, 0))
        elif hi == lo:
            out.append((0.5, 1))
        else:
            out.append(((f.budget - lo) / (hi - lo), 1))
    return out


def transcript_tags(t: Transcript, tagger: Optional[PosTagger]) -> list[str]:
    if t.pos_tags is not None:
        tags = list(t.pos_tags)
    else:
        tags = (tagger or LexiconTagger()).tag(t.tokens)
    if len(tags) != len(t):
        raise ValueError("tagger returned the wrong number of tags")
    bad = {tag for tag in tags if tag not in _TAG_POS or tag == BOUNDARY}
    if bad:
        raise ValueError(f"tags outside the Penn Treebank set: {sorted(bad)}")
    return tags


def pos_context(t: Transcript, candidate: CandidateMention,
                tagger: Optional[PosTagger] = None,
                tags: Optional[Sequence[str]] = None) -> tuple[dict, str, str]:
    if tags is None:
        tags = transcript_tags(t, tagger)
    start, end = candidate.span
    bag: dict[str, int] = {}
    for tag in tags[start:end]:
        bag[tag] = bag.get(tag, 0) + 1
    pre = tags[start - 1] if start > 0 else BOUNDARY
    post = tags[end] if end < len(tags) else BOUNDARY
    return bag, pre, post


def featurize(t: Transcript, candidates: Sequence[CandidateMention], g: Gazetteer,
              tagger: Optional[PosTagger] = None) -> list[FeatureVector]:
    if not candidates:
        return []
    films = [g.get(c.film_id) for c in candidates]
    tags = transcript_tags(t, tagger)
    budgets = budget_norm(films)
    index = token_positions(t.tokens)
    out = []
    for c, film, (bnorm, bpresent) in zip(candidates, films, budgets):
        cmean, cmin, cmax, defined = closeness_stats(t, c, film, index)
        bag, pre, post = pos_context(t, c, tags=tags)
        out.append(FeatureVector(cmean, cmin, cmax, defined, c.lev_ratio,
                                 bnorm, bpresent, c.n, bag, pre, post))
    return out


def feature_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    if not vectors:
        return np.zeros((0, N_FEATURES))
    return np.vstack([v.to_array() for v in vectors])


def write_feature_table(path, candidates: Sequence[CandidateMention],
                        vectors: Sequence[FeatureVector]) -> None:
    """Delimited table: candidate identity columns, then one column per feature."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["episode_id", "start", "end", "film_id"] + feature_names())
        for c, v in zip(candidates, vectors):
            w.writerow([c.episode_id, c.span[0], c.span[1], c.film_id]
                       + [repr(float(x)) for x in v.to_array()])
