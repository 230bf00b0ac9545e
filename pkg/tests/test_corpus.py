import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filmner.corpus import (
    GoldLabel,
    Transcript,
    check_labels,
    normalize_text,
    number_to_words,
    read_labels,
    read_transcript,
    read_transcripts,
    tokenize,
    word_error_rate,
    write_labels,
    write_transcript,
)

from oracles import cardinal_value, year_value, edit_distance


@pytest.mark.parametrize("n, words", [
    (0, "zero"),
    (7, "seven"),
    (40, "forty"),
    (115, "one hundred fifteen"),
    (1984, "nineteen eighty four"),
    (1905, "nineteen oh five"),
    (1900, "nineteen hundred"),
    (2000, "two thousand"),
    (2005, "two thousand five"),
    (2017, "twenty seventeen"),
    (2100, "two thousand one hundred"),
    (3_040_201, "three million forty thousand two hundred one"),
])
def test_number_words(n, words):
    assert number_to_words(n) == words.split()


def _is_year(n):
    return 1000 <= n <= 1999 or 2010 <= n <= 2099


@given(st.integers(0, 999_999_999))
def test_number_words_round_trip(n):
    words = number_to_words(n)
    value = year_value(words) if _is_year(n) else cardinal_value(words)
    assert value == n


def test_number_words_distinct_below_hundred_thousand():
    seen = {tuple(number_to_words(n)) for n in range(100_000)}
    assert len(seen) == 100_000


@pytest.mark.parametrize("bad", [-1, 1_000_000_000])
def test_number_words_range(bad):
    with pytest.raises(ValueError):
        number_to_words(bad)


def test_number_words_rejects_non_int():
    with pytest.raises(TypeError):
        number_to_words(3.0)


@pytest.mark.parametrize("raw, tokens", [
    ("1984", ["nineteen", "eighty", "four"]),
    ("", []),
    ("It cost 12 dollars.", ["it", "cost", "twelve", "dollars"]),
    ("3.5 stars", ["three", "point", "five", "stars"]),
    ("$2,500", ["two", "thousand", "five", "hundred"]),
    ("1,200", ["twelve", "hundred"]),
    ("x² + 9", ["x", "nine"]),
    ("007", ["zero", "zero", "seven"]),
    ("Spider-Man", ["spider", "man"]),
    ("Don't STOP", ["don't", "stop"]),
])
def test_normalize_examples(raw, tokens):
    assert normalize_text(raw) == tokens


def test_sentence_breaks():
    tokens, breaks = tokenize("It cost 12 dollars. Wow!! Fine")
    assert tokens == ["it", "cost", "twelve", "dollars", "wow", "fine"]
    assert breaks == [3, 4]


@given(st.text(max_size=60))
def test_normalize_idempotent(raw):
    once = normalize_text(raw)
    assert normalize_text(" ".join(once)) == once
    assert all(t and t == t.lower() and not any(c.isdigit() for c in t) for t in once)


@settings(max_examples=200)
@given(st.lists(st.sampled_from("a b c d".split()), min_size=1, max_size=7),
       st.lists(st.sampled_from("a b c e".split()), max_size=7))
def test_wer_against_oracle(ref, hyp):
    assert word_error_rate(ref, hyp) == edit_distance(tuple(ref), tuple(hyp)) / len(ref)


def test_wer_empty_reference():
    with pytest.raises(ValueError):
        word_error_rate([], ["a"])


def test_transcript_validation():
    with pytest.raises(ValueError):
        Transcript("c", "e", ["Upper"])
    with pytest.raises(ValueError):
        Transcript("c", "e", ["a", "b"], pos_tags=["NN"])
    with pytest.raises(ValueError):
        Transcript("c", "e", ["a"], sentence_breaks=[1])


def test_transcript_io(tmp_path):
    t = Transcript.from_text("We saw Coco. Twice!", "chan", "ep1")
    write_transcript(t, tmp_path / "ep1.json")
    back = read_transcript(tmp_path / "ep1.json")
    assert back == t
    (tmp_path / "chan2").mkdir()
    (tmp_path / "chan2" / "ep2.txt").write_text("1984")
    raw = read_transcript(tmp_path / "chan2" / "ep2.txt")
    assert (raw.channel_id, raw.episode_id, raw.tokens) == ("chan2", "ep2", ["nineteen", "eighty", "four"])
    (tmp_path / "chan2" / "ep1.txt").write_text("again")
    with pytest.raises(ValueError):
        read_transcripts([tmp_path, tmp_path / "chan2"])


def test_labels_io(tmp_path):
    labels = [GoldLabel("ep1", "f1", (0, 2)), GoldLabel("ep1", "f2"), GoldLabel("ep2", "f1", (3, 4))]
    write_labels(labels, tmp_path / "labels.jsonl")
    back = read_labels(tmp_path / "labels.jsonl")
    assert back == {"ep1": labels[:2], "ep2": labels[2:]}
    rows = [json.loads(line) for line in (tmp_path / "labels.jsonl").read_text().splitlines()]
    assert rows[1].get("span") is None


def test_check_labels():
    t = Transcript("c", "ep", ["a", "b"])
    check_labels(t, [GoldLabel("ep", "f", (0, 2))])
    with pytest.raises(ValueError):
        check_labels(t, [GoldLabel("ep", "f", (1, 3))])
    with pytest.raises(ValueError):
        check_labels(t, [GoldLabel("other", "f", (0, 1))])
