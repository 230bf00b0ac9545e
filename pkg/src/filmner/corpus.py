"""Transcripts, gold labels and text normalization.

Transcripts arrive as lowercase, mostly punctuation-free ASR output. Before
matching, every digit run is spelled out the way a speaker would say it and
the text is split into word tokens.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
    "eighty", "ninety",
]
_SCALES = [(1_000_000, "million"), (1_000, "thousand")]

MAX_SPOKEN = 999_999_999

# digit groups with thousands separators, plain digit runs, optional decimals
_NUMBER_RE = re.compile(r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?")
_TOKEN_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)*|[.!?]")


def _below_hundred(n: int) -> list[str]:
    if n < 20:
        return [_ONES[n]]
    tens, ones = divmod(n, 10)
    return [_TENS[tens]] if ones == 0 else [_TENS[tens], _ONES[ones]]


def _below_thousand(n: int) -> list[str]:
    hundreds, rest = divmod(n, 100)
    words = [_ONES[hundreds], "hundred"] if hundreds else []
    if rest or not words:
        words += _below_hundred(rest)
    return words


def _cardinal(n: int) -> list[str]:
    if n < 1000:
        return _below_thousand(n)
    words: list[str] = []
    for scale, name in _SCALES:
        if n >= scale:
            head, n = divmod(n, scale)
            words += _below_thousand(head) + [name]
    if n:
        words += _below_thousand(n)
    return words


def _year(n: int) -> list[str]:
    head, tail = divmod(n, 100)
    words = _below_hundred(head)
    if tail == 0:
        return words + ["hundred"]
    if tail < 10:
        return words + ["oh", _ONES[tail]]
    return words + _below_hundred(tail)


def number_to_words(n: int) -> list[str]:
    """Spoken-English words for ``n``.

    Four-digit values in 1000-1999 and 2010-2099 are read as years
    ("nineteen eighty four", "twenty seventeen"); everything else is a plain
    cardinal with no "and" ("two thousand five", "one hundred one").
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError(f"expected int, got {type(n).__name__}")
    if n < 0 or n > MAX_SPOKEN:
        raise ValueError(f"{n} outside [0, {MAX_SPOKEN}]")
    if 1000 <= n <= 1999 or 2010 <= n <= 2099:
        return _year(n)
    return _cardinal(n)


def _digits_to_words(digits: str) -> list[str]:
    if len(digits) > 1 and digits[0] == "0" or int(digits) > MAX_SPOKEN:
        return [_ONES[int(d)] for d in digits]
    return number_to_words(int(digits))


def _spell_number(match: re.Match) -> str:
    text = match.group(0)
    whole, _, frac = text.partition(".")
    words = _digits_to_words(whole.replace(",", ""))
    if frac:
        words += ["point"] + [_ONES[int(d)] for d in frac]
    return " " + " ".join(words) + " "


def tokenize(raw: str) -> tuple[list[str], list[int]]:
    """Split ``raw`` into normalized tokens and sentence-end token indices."""
    text = _NUMBER_RE.sub(_spell_number, raw.lower())
    # anything left that is not a letter, apostrophe or sentence end splits tokens
    text = "".join(c if c.isalpha() or c in "'.!?" else " " for c in text)
    tokens: list[str] = []
    breaks: list[int] = []
    for m in _TOKEN_RE.finditer(text):
        piece = m.group(0)
        if piece in ".!?":
            if tokens and (not breaks or breaks[-1] != len(tokens) - 1):
                breaks.append(len(tokens) - 1)
        else:
            tokens.append(piece)
    return tokens, breaks


def normalize_text(raw: str) -> list[str]:
    """Lowercase, spell out numbers and tokenize ``raw``.

    >>> normalize_text("It cost 12 dollars.")
    ['it', 'cost', 'twelve', 'dollars']
    """
    return tokenize(raw)[0]


def word_error_rate(reference: Sequence[str], hypothesis: Sequence[str]) -> float:
    """Token-level edit distance divided by the reference length."""
    if len(reference) == 0:
        raise ValueError("reference must be non-empty")
    prev = list(range(len(hypothesis) + 1))
    for i, r in enumerate(reference, 1):
        cur = [i]
        for j, h in enumerate(hypothesis, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (r != h)))
        prev = cur
    return prev[-1] / len(reference)


@dataclass
class Transcript:
    channel_id: str
    episode_id: str
    tokens: list[str]
    sentence_breaks: Optional[list[int]] = None
    pos_tags: Optional[list[str]] = None

    def __post_init__(self):
        for tok in self.tokens:
            if not tok or tok != tok.lower() or any(c.isspace() for c in tok):
                raise ValueError(f"bad token {tok!r} in {self.episode_id}")
        if self.pos_tags is not None and len(self.pos_tags) != len(self.tokens):
            raise ValueError(
                f"{self.episode_id}: {len(self.pos_tags)} tags for "
                f"{len(self.tokens)} tokens"
            )
        if self.sentence_breaks is not None:
            b = self.sentence_breaks
            if any(x >= y for x, y in zip(b, b[1:])):
                raise ValueError("sentence_breaks must be strictly increasing")
            if b and (b[0] < 0 or b[-1] >= len(self.tokens)):
                raise ValueError("sentence_breaks out of range")

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_text(cls, raw: str, channel_id: str, episode_id: str,
                  pos_tags: Optional[list[str]] = None) -> "Transcript":
        tokens, breaks = tokenize(raw)
        return cls(channel_id, episode_id, tokens, breaks or None, pos_tags)

    def to_record(self) -> dict:
        rec = {
            "channel_id": self.channel_id,
            "episode_id": self.episode_id,
            "tokens": self.tokens,
        }
        if self.sentence_breaks is not None:
            rec["sentence_breaks"] = self.sentence_breaks
        if self.pos_tags is not None:
            rec["pos_tags"] = self.pos_tags
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Transcript":
        if "tokens" in rec:
            return cls(rec["channel_id"], rec["episode_id"], list(rec["tokens"]),
                       rec.get("sentence_breaks"), rec.get("pos_tags"))
        return cls.from_text(rec.get("text", ""), rec["channel_id"],
                             rec["episode_id"], rec.get("pos_tags"))


@dataclass(frozen=True)
class GoldLabel:
    episode_id: str
    film_id: str
    span: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.span is not None:
            start, end = self.span
            if not 0 <= start < end:
                raise ValueError(f"bad span {self.span}")
            object.__setattr__(self, "span", (int(start), int(end)))

    def to_record(self) -> dict:
        rec = {"episode_id": self.episode_id, "film_id": self.film_id}
        if self.span is not None:
            rec["span"] = list(self.span)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "GoldLabel":
        span = rec.get("span")
        return cls(rec["episode_id"], rec["film_id"], tuple(span) if span else None)


def check_labels(transcript: Transcript, labels: Iterable[GoldLabel]) -> None:
    for lab in labels:
        if lab.episode_id != transcript.episode_id:
            raise ValueError(f"label for {lab.episode_id} given to {transcript.episode_id}")
        if lab.span is not None and lab.span[1] > len(transcript):
            raise ValueError(
                f"label span {lab.span} beyond {len(transcript)} tokens "
                f"in {transcript.episode_id}"
            )


# -- file formats -----------------------------------------------------------

def read_transcript(path: str | Path) -> Transcript:
    """Read one transcript file.

    ``.json`` files hold a record with ``channel_id``, ``episode_id`` and
    either raw ``text`` or pre-normalized ``tokens``. Anything else is read
    as plain UTF-8 text; the channel is the parent directory name and the
    episode is the file stem.
    """
    path = Path(path)
    content = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return Transcript.from_record(json.loads(content))
    return Transcript.from_text(content, path.parent.name or "default", path.stem)


def write_transcript(transcript: Transcript, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(transcript.to_record(), ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_transcripts(paths: Iterable[str | Path]) -> list[Transcript]:
    """Read transcript files; directories are expanded to their files."""
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(f for f in p.iterdir() if f.is_file())
        else:
            files.append(p)
    out = [read_transcript(f) for f in files]
    seen = set()
    for t in out:
        if t.episode_id in seen:
            raise ValueError(f"duplicate episode_id {t.episode_id}")
        seen.add(t.episode_id)
    return out


def iter_jsonl(path: str | Path) -> Iterator[dict]:
    """Records of a JSON-lines file, skipping ``{"meta": ...}`` header lines."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                if set(rec) != {"meta"}:
                    yield rec


def write_jsonl(records: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_labels(path: str | Path) -> dict[str, list[GoldLabel]]:
    labels: dict[str, list[GoldLabel]] = {}
    for rec in iter_jsonl(path):
        lab = GoldLabel.from_record(rec)
        labels.setdefault(lab.episode_id, []).append(lab)
    return labels


def write_labels(labels: Iterable[GoldLabel], path: str | Path) -> None:
    write_jsonl((lab.to_record() for lab in labels), path)
