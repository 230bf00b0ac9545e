"""Mention-level matching of predictions against gold labels."""
from __future__ import annotations

from collections import Counter
from typing import Sequence


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _start(item) -> int:
    return item.span[0] if item.span is not None else 0


def assign(gold: Sequence, predicted: Sequence) -> list[bool]:
    """For each prediction, whether it consumes a gold mention.

    With spans on both sides, predictions are visited in transcript order
    and each takes the earliest unconsumed gold mention of the same film
    whose span overlaps its own. Without spans, films are matched as a
    multiset. Returned flags follow the order of ``predicted``.
    """
    has_spans = all(g.span is not None for g in gold) and all(
        p.span is not None for p in predicted
    )
    hits = [False] * len(predicted)
    if not has_spans:
        remaining = Counter(g.film_id for g in gold)
        for i, p in enumerate(predicted):
            if remaining[p.film_id] > 0:
                remaining[p.film_id] -= 1
                hits[i] = True
        return hits

    gold_order = sorted(range(len(gold)), key=lambda i: (_start(gold[i]), i))
    used = [False] * len(gold)
    for i in sorted(range(len(predicted)), key=lambda i: (_start(predicted[i]), i)):
        p = predicted[i]
        for gi in gold_order:
            g = gold[gi]
            if not used[gi] and g.film_id == p.film_id and _overlaps(g.span, p.span):
                used[gi] = True
                hits[i] = True
                break
    return hits


def match_predictions(gold: Sequence, predicted: Sequence) -> tuple[int, int, int]:
    """Return ``(tp, fp, fn)`` for one episode."""
    tp = sum(assign(gold, predicted))
    return tp, len(predicted) - tp, len(gold) - tp


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall and F1, using 0 for any 0/0."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1
