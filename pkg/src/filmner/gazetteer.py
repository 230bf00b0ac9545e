"""Film gazetteer: records, length buckets and line-delimited file I/O."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .corpus import iter_jsonl, normalize_text

MAX_N = 6


@dataclass(frozen=True)
class FilmRecord:
    film_id: str
    title: str
    title_tokens: tuple[str, ...]
    budget: Optional[float] = None
    keywords: tuple[tuple[str, ...], ...] = ()
    plot: Optional[str] = None
    logline: Optional[str] = None
    release_year: Optional[int] = None

    def __post_init__(self):
        if not self.film_id:
            raise ValueError("film_id is required")
        if not self.title_tokens:
            raise ValueError(f"film {self.film_id}: title normalizes to nothing")
        if self.budget is not None and self.budget < 0:
            raise ValueError(f"film {self.film_id}: negative budget")
        if any(len(k) == 0 for k in self.keywords):
            raise ValueError(f"film {self.film_id}: empty keyword")

    @property
    def n(self) -> int:
        return len(self.title_tokens)

    @property
    def title_text(self) -> str:
        return " ".join(self.title_tokens)

    @classmethod
    def from_record(cls, rec: dict) -> "FilmRecord":
        if "film_id" not in rec or "title" not in rec:
            raise ValueError(f"record needs film_id and title: {rec!r}")
        title = rec["title"]
        if not title or not title.strip():
            raise ValueError(f"film {rec['film_id']}: empty title")
        keywords = []
        for kw in rec.get("keywords") or []:
            toks = tuple(normalize_text(kw))
            if toks:
                keywords.append(toks)
        budget = rec.get("budget")
        year = rec.get("release_year")
        return cls(
            film_id=str(rec["film_id"]),
            title=title,
            title_tokens=tuple(normalize_text(title)),
            budget=None if budget is None else float(budget),
            keywords=tuple(keywords),
            plot=rec.get("plot"),
            logline=rec.get("logline"),
            release_year=None if year is None else int(year),
        )

    def to_record(self) -> dict:
        rec: dict = {"film_id": self.film_id, "title": self.title}
        if self.budget is not None:
            rec["budget"] = self.budget
        if self.keywords:
            rec["keywords"] = [" ".join(k) for k in self.keywords]
        for name in ("plot", "logline", "release_year"):
            value = getattr(self, name)
            if value is not None:
                rec[name] = value
        return rec


@dataclass
class Gazetteer:
    """Films indexed by title token count.

    Matching a window of ``n`` tokens only consults titles with ``n - 1``,
    ``n`` or ``n + 1`` tokens, so a single merged or split token boundary is
    tolerated without comparing against the whole database.
    """

    records: dict[str, FilmRecord] = field(default_factory=dict)
    length_index: dict[int, list[FilmRecord]] = field(default_factory=dict)
    # bumped on every insert; lets derived search indexes detect staleness
    version: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records.values())

    def __contains__(self, film_id: str) -> bool:
        return film_id in self.records

    def get(self, film_id: str) -> FilmRecord:
        try:
            return self.records[film_id]
        except KeyError:
            raise KeyError(f"unknown film_id {film_id!r}") from None

    def insert(self, record: FilmRecord) -> "Gazetteer":
        if record.film_id in self.records:
            raise ValueError(f"duplicate film_id {record.film_id!r}")
        self.records[record.film_id] = record
        self.length_index.setdefault(record.n, []).append(record)
        self.version += 1
        return self

    def copy(self) -> "Gazetteer":
        """Snapshot for copy-on-write updates; records are immutable."""
        return Gazetteer(
            dict(self.records),
            {n: list(b) for n, b in self.length_index.items()},
            self.version,
        )

    def candidate_title_set(self, n: int) -> list[FilmRecord]:
        if not 1 <= n <= MAX_N:
            raise ValueError(f"n must be in [1, {MAX_N}], got {n}")
        out: list[FilmRecord] = []
        for k in (n - 1, n, n + 1):
            out += self.length_index.get(k, [])
        return out

    def to_records(self) -> list[dict]:
        return [r.to_record() for r in self.records.values()]


def load_gazetteer(source: Iterable[dict]) -> Gazetteer:
    g = Gazetteer()
    for rec in source:
        g.insert(FilmRecord.from_record(rec))
    return g


def insert_film(g: Gazetteer, record: FilmRecord | dict) -> Gazetteer:
    if isinstance(record, dict):
        record = FilmRecord.from_record(record)
    return g.insert(record)


def candidate_title_set(g: Gazetteer, n: int) -> list[FilmRecord]:
    return g.candidate_title_set(n)


def read_gazetteer(path: str | Path) -> Gazetteer:
    return load_gazetteer(iter_jsonl(path))


def write_gazetteer(g: Gazetteer, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in g.to_records():
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
