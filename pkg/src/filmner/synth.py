"""Synthetic labeled corpora with controlled transcription noise.

Transcripts are filler words with film titles embedded at known spans. Each
embedded title is corrupted character by character, so tokens can merge or
split the way ASR output does. Some mentions get the film's keywords nearby;
distractor spans reuse titles of other films with no keyword support, either
as plausible noisy mentions or as near misses.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .corpus import GoldLabel, Transcript, word_error_rate
from .gazetteer import FilmRecord, Gazetteer, load_gazetteer

ALPHABET = string.ascii_lowercase + " "
KEYWORD_WINDOW = 10


def word_list(name: str) -> list[str]:
    text = (resources.files("filmner") / "data" / f"{name}_words.txt").read_text()
    return text.split()


@dataclass(frozen=True)
class CorruptionConfig:
    char_error_rate: float = 0.05
    seed: int = 0
    distractor_vocab_size: int = 200
    mentions_per_transcript: tuple[int, int] = (3, 6)
    transcripts_per_channel: int = 3
    channels: int = 9
    # share of mentions that get the film's keywords within KEYWORD_WINDOW tokens
    keyword_rate: float = 0.8
    distractors_per_transcript: tuple[int, int] = (0, 0)
    # share of distractors corrupted to a near miss instead of at char_error_rate
    near_miss_fraction: float = 0.5
    near_miss_ratio: tuple[float, float] = (0.3, 0.45)
    filler_length: tuple[int, int] = (12, 30)

    def __post_init__(self):
        for name in ("char_error_rate", "keyword_rate", "near_miss_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("distractor_vocab_size", "transcripts_per_channel", "channels"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("mentions_per_transcript", "distractors_per_transcript", "filler_length"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} must be a (min, max) pair with 0 <= min <= max")
            object.__setattr__(self, name, (int(lo), int(hi)))
        if self.filler_length[0] < 1:
            raise ValueError("filler_length minimum must be at least 1")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "CorruptionConfig":
        known = {k: tuple(v) if isinstance(v, list) else v
                 for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class EmbeddedSpan:
    episode_id: str
    film_id: str
    span: tuple[int, int]
    kind: str  # "mention", "distractor" or "near_miss"
    surface: tuple[str, ...]
    edits: int
    source_chars: int
    keyword_support: bool


@dataclass
class SyntheticCorpus:
    transcripts: list[Transcript]
    labels: dict[str, list[GoldLabel]]
    spans: list[EmbeddedSpan] = field(default_factory=list)

    @property
    def mentions(self) -> list[EmbeddedSpan]:
        return [s for s in self.spans if s.kind == "mention"]

    def all_labels(self) -> list[GoldLabel]:
        return [lab for t in self.transcripts for lab in self.labels.get(t.episode_id, [])]


def corrupt(text: str, rate: float, rng: np.random.Generator) -> tuple[str, int]:
    """Apply independent per-character edits; returns the text and the edit count."""
    out: list[str] = []
    edits = 0
    for ch in text:
        if rng.random() >= rate:
            out.append(ch)
            continue
        edits += 1
        op = rng.integers(3)
        if op == 0:  # substitute
            choices = [c for c in ALPHABET if c != ch]
            out.append(choices[rng.integers(len(choices))])
        elif op == 1:  # insert before
            out.append(ALPHABET[rng.integers(len(ALPHABET))])
            out.append(ch)
        # op == 2 deletes
    return "".join(out), edits


def near_miss(text: str, ratio: tuple[float, float], rng: np.random.Generator) -> tuple[str, int]:
    """Substitute letters at distinct positions so about ``ratio`` of the string differs."""
    letters = [i for i, c in enumerate(text) if c != " "]
    lo, hi = ratio
    k = max(1, min(len(letters), math.ceil(rng.uniform(lo, hi) * len(text))))
    chars = list(text)
    for i in rng.choice(letters, size=k, replace=False):
        choices = [c for c in string.ascii_lowercase if c != chars[i]]
        chars[i] = choices[rng.integers(len(choices))]
    return "".join(chars), k


def _surface(film: FilmRecord, rng: np.random.Generator, rate: float,
             ratio: Optional[tuple[float, float]] = None) -> tuple[list[str], int]:
    source = film.title_text
    for _ in range(20):
        if ratio is None:
            text, edits = corrupt(source, rate, rng)
        else:
            text, edits = near_miss(source, ratio, rng)
        tokens = text.split()
        if tokens:
            return tokens, edits
    return list(film.title_tokens), 0


def generate_corpus(g: Gazetteer, cfg: CorruptionConfig) -> SyntheticCorpus:
    if len(g) == 0:
        raise ValueError("gazetteer is empty")
    films = sorted(g, key=lambda f: f.film_id)
    vocab_rng = np.random.default_rng([cfg.seed, 0])
    filler_pool = word_list("filler")
    size = min(cfg.distractor_vocab_size, len(filler_pool))
    vocab = [filler_pool[i] for i in sorted(vocab_rng.choice(len(filler_pool), size, replace=False))]

    transcripts, labels, spans = [], {}, []
    for c in range(cfg.channels):
        channel = f"ch{c:02d}"
        for k in range(cfg.transcripts_per_channel):
            episode = f"{channel}_ep{k:03d}"
            rng = np.random.default_rng([cfg.seed, 1, c, k])
            t, labs, sp = _transcript(channel, episode, films, vocab, cfg, rng)
            transcripts.append(t)
            labels[episode] = labs
            spans += sp
    return SyntheticCorpus(transcripts, labels, spans)


def _transcript(channel, episode, films, vocab, cfg, rng):
    def filler(n):
        return [vocab[i] for i in rng.integers(len(vocab), size=n)]

    n_mentions = int(rng.integers(cfg.mentions_per_transcript[0], cfg.mentions_per_transcript[1] + 1))
    n_distract = int(rng.integers(cfg.distractors_per_transcript[0], cfg.distractors_per_transcript[1] + 1))
    n_mentions = min(n_mentions, len(films))
    order = rng.permutation(len(films))
    mentioned = [films[i] for i in order[:n_mentions]]
    used_kw = {kw for f in mentioned for kw in f.keywords}
    # distractors must not pick up keyword support by accident
    pool = [films[i] for i in order[n_mentions:] if not set(films[i].keywords) & used_kw]
    distractors = pool[:n_distract]

    events = [("mention", f) for f in mentioned]
    for f in distractors:
        kind = "near_miss" if rng.random() < cfg.near_miss_fraction else "distractor"
        events.append((kind, f))
    events = [events[i] for i in rng.permutation(len(events))]

    tokens: list[str] = []
    labs: list[GoldLabel] = []
    spans: list[EmbeddedSpan] = []
    for kind, film in events:
        ratio = cfg.near_miss_ratio if kind == "near_miss" else None
        surface, edits = _surface(film, rng, cfg.char_error_rate, ratio)
        support = bool(kind == "mention" and film.keywords and rng.random() < cfg.keyword_rate)
        before: list[list[str]] = []
        after: list[list[str]] = []
        if support:
            chosen = rng.choice(len(film.keywords), size=min(2, len(film.keywords)), replace=False)
            for i in chosen:
                (before if rng.random() < 0.5 else after).append(list(film.keywords[i]))

        tokens += filler(int(rng.integers(cfg.filler_length[0], cfg.filler_length[1] + 1)))
        for kw in before:
            tokens += kw + filler(int(rng.integers(0, 3)))
        start = len(tokens)
        tokens += surface
        end = len(tokens)
        for kw in after:
            tokens += filler(int(rng.integers(0, 3))) + kw
        if kind == "mention":
            labs.append(GoldLabel(episode, film.film_id, (start, end)))
        spans.append(EmbeddedSpan(episode, film.film_id, (start, end), kind, tuple(surface),
                                  edits, len(film.title_text), support))
    tokens += filler(int(rng.integers(cfg.filler_length[0], cfg.filler_length[1] + 1)))
    return Transcript(channel, episode, tokens), labs, spans


def corruption_fraction(corpus: SyntheticCorpus) -> float:
    """Edits applied to mention titles per source title character."""
    mentions = corpus.mentions
    chars = sum(m.source_chars for m in mentions)
    return sum(m.edits for m in mentions) / chars if chars else 0.0


def mention_wer(corpus: SyntheticCorpus, g: Gazetteer) -> float:
    """Token error rate of embedded mention surfaces against their titles."""
    errors = 0.0
    words = 0
    for m in corpus.mentions:
        ref = g.get(m.film_id).title_tokens
        errors += word_error_rate(ref, m.surface) * len(ref)
        words += len(ref)
    return errors / words if words else 0.0


def synthetic_gazetteer(n_films: int = 120, seed: int = 0,
                        title_lengths: Sequence[float] = (0.2, 0.3, 0.2, 0.15, 0.1, 0.05),
                        missing_rate: float = 0.7,
                        keywords_per_film: tuple[int, int] = (2, 4),
                        id_prefix: str = "f") -> Gazetteer:
    """Random films with metadata; ``missing_rate`` of them lack at least one field.

    ``title_lengths`` gives relative weights for titles of 1, 2, ... tokens.
    """
    rng = np.random.default_rng([seed, 2])
    title_vocab = word_list("title")
    kw_vocab = word_list("keyword")
    weights = np.asarray(title_lengths, dtype=float)
    weights = weights / weights.sum()
    seen: set[str] = set()
    records = []
    i = 0
    while len(records) < n_films:
        n = int(rng.choice(len(weights), p=weights)) + 1
        title = " ".join(title_vocab[j] for j in rng.choice(len(title_vocab), size=n, replace=False))
        i += 1
        if title in seen:
            if i > 50 * n_films:
                raise ValueError("could not draw enough distinct titles")
            continue
        seen.add(title)
        n_kw = int(rng.integers(keywords_per_film[0], keywords_per_film[1] + 1))
        keywords = [kw_vocab[j] for j in rng.choice(len(kw_vocab), size=n_kw, replace=False)]
        rec = {
            "film_id": f"{id_prefix}{len(records):04d}",
            "title": title.title(),
            "budget": float(round(math.exp(rng.uniform(math.log(1e6), math.log(2.5e8))), -5)),
            "keywords": keywords,
            "plot": f"A story about {keywords[0]} and {keywords[-1]}.",
            "logline": f"{title.title()}: {' '.join(keywords)}.",
            "release_year": int(rng.integers(2000, 2017)),
        }
        if rng.random() < missing_rate:
            fields = ["budget", "keywords", "plot", "logline"]
            drop = [f for f in fields if rng.random() < 0.5] or [fields[rng.integers(4)]]
            for f in drop:
                del rec[f]
        records.append(rec)
    return load_gazetteer(records)
