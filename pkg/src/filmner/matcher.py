"""Stage one: fuzzy lookup of transcript n-grams in the gazetteer.

Every window of 1 to 6 tokens is compared, as a single space-joined string,
to the titles whose token count is within one of the window's. A window
matches a title when the character edit distance divided by the longer
string's length is at most the threshold configured for the window length.

The hot loop is pruned twice before any dynamic programming runs: a
vectorized character-histogram lower bound discards most pairs, and the DP
itself is banded and stops as soon as a full row exceeds the allowed
distance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - pure-Python fallback, same results
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

from .corpus import GoldLabel, Transcript
from .gazetteer import MAX_N, FilmRecord, Gazetteer
from .scoring import match_predictions, prf

NGRAM_RANGE = range(1, MAX_N + 1)
DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(11))

_HIST_BINS = 32
# caps the (windows x titles x bins) temporary in the histogram bound
_BLOCK_CELLS = 1 << 21


def levenshtein_distance(a: str, b: str) -> int:
    return bounded_levenshtein(a, b, max(len(a), len(b)))


def bounded_levenshtein(a: str, b: str, limit: int) -> int:
    """Edit distance between ``a`` and ``b``, or ``limit + 1`` if it exceeds ``limit``."""
    if a == b:
        return 0
    limit = max(limit, 0)
    # common affixes never change the distance
    i = 0
    stop = min(len(a), len(b))
    while i < stop and a[i] == b[i]:
        i += 1
    a, b = a[i:], b[i:]
    j = 0
    stop = min(len(a), len(b))
    while j < stop and a[-1 - j] == b[-1 - j]:
        j += 1
    if j:
        a, b = a[:-j], b[:-j]
    if len(a) > len(b):
        a, b = b, a
    la, lb = len(a), len(b)
    cap = limit + 1
    if lb - la > limit:
        return cap
    if la == 0:
        return lb

    prev = [j if j <= limit else cap for j in range(lb + 1)]
    for i in range(1, la + 1):
        ca = a[i - 1]
        lo = max(1, i - limit)
        hi = min(lb, i + limit)
        cur = [cap] * (lb + 1)
        left = i if i <= limit else cap
        cur[0] = left
        row_min = left
        if lo > 1:
            left = cap
        for j in range(lo, hi + 1):
            v = prev[j - 1] + (ca != b[j - 1])
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if left + 1 < v:
                v = left + 1
            if v > cap:
                v = cap
            cur[j] = v
            left = v
            if v < row_min:
                row_min = v
        if row_min > limit:
            return cap
        prev = cur
    return min(prev[lb], cap)


@njit(cache=True, nogil=True)
def _pair_distances(a_codes, a_lens, b_codes, b_lens, a_idx, b_idx, limits):
    """Compiled twin of :func:`bounded_levenshtein` over many index pairs.

    Strings are rows of code-point matrices padded on the right; entry ``k``
    compares ``a[a_idx[k]]`` with ``b[b_idx[k]]`` and is capped at
    ``limits[k] + 1``.
    """
    out = np.empty(a_idx.shape[0], dtype=np.int64)
    width = b_codes.shape[1] + a_codes.shape[1] + 1
    prev = np.empty(width, dtype=np.int64)
    cur = np.empty(width, dtype=np.int64)
    for k in range(a_idx.shape[0]):
        a = a_codes[a_idx[k]]
        b = b_codes[b_idx[k]]
        la = a_lens[a_idx[k]]
        lb = b_lens[b_idx[k]]
        limit = max(limits[k], 0)
        cap = limit + 1
        s = 0
        while s < la and s < lb and a[s] == b[s]:
            s += 1
        ea = la
        eb = lb
        while ea > s and eb > s and a[ea - 1] == b[eb - 1]:
            ea -= 1
            eb -= 1
        # x is the shorter remaining piece
        if ea - s <= eb - s:
            x, xs, xl, y, ys, yl = a, s, ea - s, b, s, eb - s
        else:
            x, xs, xl, y, ys, yl = b, s, eb - s, a, s, ea - s
        if yl - xl > limit:
            out[k] = cap
            continue
        if xl == 0:
            out[k] = yl
            continue
        for j in range(yl + 1):
            prev[j] = j if j <= limit else cap
        exceeded = False
        for i in range(1, xl + 1):
            cx = x[xs + i - 1]
            lo = max(1, i - limit)
            hi = min(yl, i + limit)
            for j in range(yl + 1):
                cur[j] = cap
            left = i if i <= limit else cap
            cur[0] = left
            row_min = left
            if lo > 1:
                left = cap
            for j in range(lo, hi + 1):
                v = prev[j - 1] + (1 if cx != y[ys + j - 1] else 0)
                if prev[j] + 1 < v:
                    v = prev[j] + 1
                if left + 1 < v:
                    v = left + 1
                if v > cap:
                    v = cap
                cur[j] = v
                left = v
                if v < row_min:
                    row_min = v
            if row_min > limit:
                exceeded = True
                break
            for j in range(yl + 1):
                prev[j] = cur[j]
        out[k] = cap if exceeded else min(prev[yl], cap)
    return out


def _code_matrix(texts: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    lens = np.array([len(t) for t in texts], dtype=np.int64)
    codes = np.zeros((len(texts), max(int(lens.max()) if len(texts) else 0, 1)), dtype=np.uint32)
    for i, t in enumerate(texts):
        if t:
            codes[i, :len(t)] = np.frombuffer(t.encode("utf-32-le"), dtype=np.uint32)
    return codes, lens


def lev_ratio(matched: str, original: str) -> float:
    longest = max(len(matched), len(original))
    if longest == 0:
        raise ValueError("at least one string must be non-empty")
    return levenshtein_distance(matched, original) / longest


def _max_distance(threshold: float, longest: int) -> int:
    """Largest d with d / longest <= threshold, using the same float test."""
    d = int(math.floor(threshold * longest))
    while (d + 1) / longest <= threshold:
        d += 1
    while d >= 0 and d / longest > threshold:
        d -= 1
    return d


def _max_distances(threshold: float, longest: np.ndarray) -> np.ndarray:
    d = np.floor(threshold * longest).astype(np.int64)
    for _ in range(2):
        d += (d + 1) / longest <= threshold
        d -= d / longest > threshold
    return d


@dataclass(frozen=True)
class ThresholdProfile:
    """Maximum accepted edit-distance ratio for each window length."""

    per_n: Mapping[int, float]

    def __post_init__(self):
        per_n = {int(k): float(v) for k, v in dict(self.per_n).items()}
        if sorted(per_n) != list(NGRAM_RANGE):
            raise ValueError(f"thresholds needed for n=1..{MAX_N}, got {sorted(per_n)}")
        for n, v in per_n.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"threshold for n={n} outside [0, 1]: {v}")
        object.__setattr__(self, "per_n", per_n)

    def __getitem__(self, n: int) -> float:
        return self.per_n[n]

    @classmethod
    def uniform(cls, value: float) -> "ThresholdProfile":
        return cls({n: value for n in NGRAM_RANGE})

    def to_dict(self) -> dict[str, float]:
        return {str(n): self.per_n[n] for n in NGRAM_RANGE}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ThresholdProfile":
        return cls({int(k): v for k, v in d.items()})

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ThresholdProfile":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class CandidateMention:
    episode_id: str
    span: tuple[int, int]
    n: int
    film_id: str
    matched_text: str
    lev_ratio: float

    def to_record(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "span": list(self.span),
            "n": self.n,
            "film_id": self.film_id,
            "matched_text": self.matched_text,
            "lev_ratio": self.lev_ratio,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CandidateMention":
        return cls(rec["episode_id"], tuple(rec["span"]), rec["n"], rec["film_id"],
                   rec["matched_text"], rec["lev_ratio"])


# -- search index -------------------------------------------------------------

def _char_hist(text: str) -> np.ndarray:
    # bins are a coarsening of the alphabet; coarser histograms still give a
    # valid lower bound on the edit distance
    codes = np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32) & (_HIST_BINS - 1)
    return np.bincount(codes, minlength=_HIST_BINS).astype(np.int32)


class _Bucket:
    __slots__ = ("films", "texts", "lengths", "hists", "codes", "code_lens")

    def __init__(self, films: list[FilmRecord]):
        self.films = films
        self.texts = [f.title_text for f in films]
        self.lengths = np.array([len(t) for t in self.texts], dtype=np.int32)
        self.codes, self.code_lens = _code_matrix(self.texts)
        if films:
            self.hists = np.stack([_char_hist(t) for t in self.texts])
        else:
            self.hists = np.zeros((0, _HIST_BINS), dtype=np.int32)


def _search_index(g: Gazetteer) -> dict[int, _Bucket]:
    cached = getattr(g, "_search_cache", None)
    if cached is not None and cached[0] == g.version and cached[1] == len(g):
        return cached[2]
    index = {n: _Bucket(g.candidate_title_set(n)) for n in NGRAM_RANGE}
    g._search_cache = (g.version, len(g), index)
    return index


def _segment_ends(t: Transcript) -> list[int]:
    """For each token, the index of the last token of its sentence."""
    size = len(t)
    ends = [size - 1] * size
    if t.sentence_breaks:
        bi = 0
        breaks = t.sentence_breaks
        for i in range(size):
            while bi < len(breaks) and breaks[bi] < i:
                bi += 1
            if bi < len(breaks):
                ends[i] = breaks[bi]
    return ends


def raw_matches(t: Transcript, g: Gazetteer, profile: ThresholdProfile) -> list[CandidateMention]:
    """Every (window, film) pair within threshold, before overlap resolution."""
    size = len(t)
    if size == 0 or len(g) == 0:
        return []
    index = _search_index(g)
    tok_hist = np.stack([_char_hist(tok) for tok in t.tokens])
    cum_hist = np.vstack([np.zeros((1, _HIST_BINS), dtype=np.int32), np.cumsum(tok_hist, axis=0)])
    cum_len = np.concatenate([[0], np.cumsum([len(tok) for tok in t.tokens])])
    seg_end = _segment_ends(t)
    space_bin = ord(" ") & (_HIST_BINS - 1)

    found: list[CandidateMention] = []
    for n in NGRAM_RANGE:
        bucket = index[n]
        threshold = profile[n]
        if not bucket.films or n > size:
            continue
        starts = np.array([s for s in range(size - n + 1) if s + n - 1 <= seg_end[s]], dtype=np.int64)
        if starts.size == 0:
            continue
        win_hist = cum_hist[starts + n] - cum_hist[starts]
        win_hist[:, space_bin] += n - 1
        win_len = (cum_len[starts + n] - cum_len[starts] + n - 1).astype(np.int32)

        block = max(1, _BLOCK_CELLS // (len(bucket.films) * _HIST_BINS))
        for lo in range(0, starts.size, block):
            hi = lo + block
            diff = win_hist[lo:hi, None, :] - bucket.hists[None, :, :]
            surplus = np.clip(diff, 0, None).sum(axis=2)
            deficit = np.clip(-diff, 0, None).sum(axis=2)
            bound = np.maximum(surplus, deficit)
            longest = np.maximum(win_len[lo:hi, None], bucket.lengths[None, :])
            ok = bound / longest <= threshold
            wi, fi = np.nonzero(ok)
            if wi.size == 0:
                continue
            block_starts = starts[lo:hi]
            texts = [" ".join(t.tokens[s:s + n]) for s in block_starts.tolist()]
            w_codes, w_lens = _code_matrix(texts)
            tops = longest[wi, fi].astype(np.int64)
            limits = _max_distances(threshold, tops)
            dists = _pair_distances(w_codes, w_lens, bucket.codes, bucket.code_lens,
                                    wi.astype(np.int64), fi.astype(np.int64), limits)
            for k in np.flatnonzero(dists <= limits).tolist():
                start = int(block_starts[wi[k]])
                found.append(CandidateMention(
                    t.episode_id, (start, start + n), n, bucket.films[fi[k]].film_id,
                    texts[wi[k]], int(dists[k]) / int(tops[k]),
                ))
    return found


def _priority(c: CandidateMention, g: Gazetteer):
    budget = g.get(c.film_id).budget
    # longer window, closer match, bigger budget (absent last), film id
    return (-c.n, c.lev_ratio, budget is None, -(budget or 0.0), c.film_id, c.span)


def resolve_overlaps(raw: Iterable[CandidateMention], g: Gazetteer) -> list[CandidateMention]:
    """Keep the best match among overlapping spans; output sorted by start."""
    taken: list[tuple[int, int]] = []
    kept: list[CandidateMention] = []
    for c in sorted(raw, key=lambda c: _priority(c, g)):
        s, e = c.span
        if any(s < te and ts < e for ts, te in taken):
            continue
        taken.append(c.span)
        kept.append(c)
    kept.sort(key=lambda c: c.span)
    return kept


def scan(t: Transcript, g: Gazetteer, profile: ThresholdProfile) -> list[CandidateMention]:
    return resolve_overlaps(raw_matches(t, g, profile), g)


# -- calibration ----------------------------------------------------------------

def internal_folds(transcripts: Sequence[Transcript], k: int = 3) -> list[list[int]]:
    """Split transcript indices into at most ``k`` folds.

    Grouped by channel when there are more than ``k`` channels, otherwise by
    transcript position in episode-id order.
    """
    channels = sorted({t.channel_id for t in transcripts})
    if len(channels) > k:
        slot = {c: i % k for i, c in enumerate(channels)}
        key = [slot[t.channel_id] for t in transcripts]
        folds = [[i for i in range(len(transcripts)) if key[i] == f] for f in range(k)]
    else:
        order = sorted(range(len(transcripts)), key=lambda i: transcripts[i].episode_id)
        k = min(k, len(order))
        folds = [order[f::k] for f in range(k)]
    return [f for f in folds if f]


def _gold_level(label: GoldLabel, g: Gazetteer) -> int:
    if label.span is not None:
        return label.span[1] - label.span[0]
    return g.get(label.film_id).n


def calibrate_thresholds(
    training: Sequence[tuple[Transcript, Sequence[GoldLabel]]],
    g: Gazetteer,
    grid: Sequence[float] = DEFAULT_GRID,
    raw: Optional[Sequence[Sequence[CandidateMention]]] = None,
) -> ThresholdProfile:
    """Pick, for each n separately, the grid value with the best mean fold F1.

    Candidates of length ``n`` are scored against gold mentions spanning
    ``n`` tokens. Ties go to the smaller threshold. ``raw`` may supply
    precomputed :func:`raw_matches` at ``max(grid)`` for each transcript.
    """
    if not training:
        raise ValueError("training set is empty")
    grid = sorted(set(float(v) for v in grid))
    if not grid or grid[0] < 0 or grid[-1] > 1:
        raise ValueError("grid values must lie in [0, 1]")
    transcripts = [t for t, _ in training]
    if raw is None:
        loose = ThresholdProfile.uniform(grid[-1])
        raw = [raw_matches(t, g, loose) for t in transcripts]
    folds = internal_folds(transcripts)

    chosen = {}
    for n in NGRAM_RANGE:
        raw_n = [[c for c in r if c.n == n] for r in raw]
        gold_n = [[lab for lab in labels if _gold_level(lab, g) == n] for _, labels in training]
        best, best_score = grid[0], -1.0
        for thr in grid:
            scores = []
            for fold in folds:
                tp = fp = fn = 0
                for i in fold:
                    cands = resolve_overlaps((c for c in raw_n[i] if c.lev_ratio <= thr), g)
                    a, b, c = match_predictions(gold_n[i], cands)
                    tp, fp, fn = tp + a, fp + b, fn + c
                scores.append(prf(tp, fp, fn)[2])
            score = float(np.mean(scores))
            if score > best_score:
                best, best_score = thr, score
        chosen[n] = best
    return ThresholdProfile(chosen)
