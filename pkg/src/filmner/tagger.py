"""Lexicon and suffix-rule part-of-speech tagger over the Penn Treebank tags.

Transcripts are lowercase with no punctuation, so the usual capitalization
cues are unavailable. The tagger looks a word up in a closed-class lexicon,
then tries suffix rules, and falls back to NN. Transcripts that already
carry tags from a stronger external tagger bypass it entirely.
"""
from __future__ import annotations

from typing import Protocol, Sequence

PENN_TAGS = (
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS",
    "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT",
    "WP", "WP$", "WRB",
)
BOUNDARY = "<B>"
NOUN_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS", "CD"})


class PosTagger(Protocol):
    def tag(self, tokens: Sequence[str]) -> list[str]: ...


def _entries(tag: str, words: str) -> dict[str, str]:
    return {w: tag for w in words.split()}


LEXICON: dict[str, str] = {}
for _tag, _words in [
    ("CC", "and but or nor yet plus"),
    ("CD", "zero one two three four five six seven eight nine ten eleven twelve "
           "thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty "
           "thirty forty fifty sixty seventy eighty ninety hundred thousand million "
           "billion oh"),
    ("DT", "the a an this that these those some any no every each either neither "
           "another"),
    ("EX", "there"),
    ("IN", "of in on at by for with from about into over after before under "
           "between through during without within against among since until "
           "upon than because while although though if whether like near "
           "across behind beyond toward towards per via"),
    ("JJ", "good bad new old big great little small last first other own same "
           "few such best whole high long young right sure real"),
    ("JJR", "better worse more less bigger smaller older newer higher lower"),
    ("JJS", "most least biggest smallest oldest newest highest lowest"),
    ("MD", "can could will would shall should may might must"),
    ("PDT", "all both half"),
    ("POS", "'s"),
    ("PRP", "i you he she it we they me him her us them myself yourself "
            "himself herself itself ourselves themselves"),
    ("PRP$", "my your his its our their"),
    ("RB", "not n't very too also just only even still already always never "
           "often sometimes here now then again ever quite rather really almost "
           "yesterday today tomorrow tonight soon maybe perhaps away back so"),
    ("RBR", "further"),
    ("RP", "up out off down"),
    ("TO", "to"),
    ("UH", "uh um oh yeah yes okay ok wow hey well hmm"),
    ("VB", "be do have go get make see know take come think look want give "
           "use find tell ask work seem feel try leave call watch"),
    ("VBD", "was were did had went got made saw knew took came thought said "
            "told gave found felt left became began"),
    ("VBG", "being doing having going"),
    ("VBN", "been done gone seen known taken given"),
    ("VBP", "am are do have"),
    ("VBZ", "is has does says goes"),
    ("WDT", "which whatever"),
    ("WP", "who what whom whoever"),
    ("WP$", "whose"),
    ("WRB", "when where why how"),
]:
    for _w, _t in _entries(_tag, _words).items():
        LEXICON.setdefault(_w, _t)

# longest suffix wins; checked in order
SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("'s", "POS"),
    ("ness", "NN"), ("ment", "NN"), ("tion", "NN"), ("sion", "NN"),
    ("ship", "NN"), ("ity", "NN"), ("ism", "NN"), ("ist", "NN"),
    ("able", "JJ"), ("ible", "JJ"), ("ful", "JJ"), ("ous", "JJ"),
    ("ive", "JJ"), ("less", "JJ"), ("ish", "JJ"), ("ical", "JJ"),
    ("est", "JJS"),
    ("ing", "VBG"),
    ("ly", "RB"),
    ("ed", "VBD"),
    ("ize", "VB"), ("ise", "VB"), ("ify", "VB"),
    ("er", "NN"),
    ("ss", "NN"), ("us", "NN"), ("is", "NN"),
    ("s", "NNS"),
)


class LexiconTagger:
    """Closed-class lexicon, suffix heuristics, default NN."""

    def __init__(self, lexicon: dict[str, str] | None = None,
                 suffix_rules: Sequence[tuple[str, str]] = SUFFIX_RULES,
                 min_stem: int = 2):
        self.lexicon = dict(LEXICON if lexicon is None else lexicon)
        self.suffix_rules = tuple(sorted(suffix_rules, key=lambda r: -len(r[0])))
        self.min_stem = min_stem

    def tag_word(self, word: str) -> str:
        tag = self.lexicon.get(word)
        if tag is not None:
            return tag
        for suffix, tag in self.suffix_rules:
            if word.endswith(suffix) and len(word) - len(suffix) >= self.min_stem:
                return tag
        return "NN"

    def tag(self, tokens: Sequence[str]) -> list[str]:
        return [self.tag_word(tok) for tok in tokens]
