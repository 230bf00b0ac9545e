"""
Normalizing transcripts and measuring word error rate
=====================================================

ASR output and film titles must share one spelling before they can be
compared, so numbers become words and everything is lowercased.
"""
from filmner.corpus import Transcript, normalize_text, number_to_words, word_error_rate

# years are read as years, other numbers as plain cardinals
for n in (1984, 1905, 2005, 2017, 42, 3_040_201):
    print(n, "->", " ".join(number_to_words(n)))

print(normalize_text("We re-watched 2001: A Space Odyssey... it cost $10,500,000!"))

# sentence ends are kept as token indices so title windows never straddle them
t = Transcript.from_text("It cost 12 dollars. Then we saw Coco.", "demo", "ep1")
print(t.tokens, t.sentence_breaks)

# WER is token-level edit distance over the reference length
ref = normalize_text("Three Billboards Outside Ebbing, Missouri")
hyp = ["three", "bill", "boards", "outside", "ebbing", "missouri"]
print("WER", round(word_error_rate(ref, hyp), 3))
