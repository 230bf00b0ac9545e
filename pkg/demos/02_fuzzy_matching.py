"""
Finding title candidates with fuzzy matching
============================================

Every window of one to six tokens is compared against titles with one token
more or fewer. A window is a candidate when its Levenshtein ratio (edits
over the longer length) is within the threshold for its length.
"""
from filmner.corpus import GoldLabel, Transcript
from filmner.gazetteer import load_gazetteer
from filmner.matcher import ThresholdProfile, calibrate_thresholds, lev_ratio, scan
from filmner.synth import CorruptionConfig, generate_corpus, synthetic_gazetteer

print(lev_ratio("cocoa", "coco"))  # one edit over five characters

g = load_gazetteer([
    {"film_id": "coco", "title": "Coco"},
    {"film_id": "tb", "title": "Three Billboards Outside Ebbing, Missouri"},
])
t = Transcript.from_text("we watched cocoa and three bill boards outside ebbing missouri", "demo", "ep")

for thr in (0.0, 0.1, 0.25):
    hits = scan(t, g, ThresholdProfile.uniform(thr))
    print(thr, [(h.film_id, h.span, round(h.lev_ratio, 3)) for h in hits])

# thresholds per window length are tuned on labeled data
g = synthetic_gazetteer(100, seed=0)
corpus = generate_corpus(g, CorruptionConfig(char_error_rate=0.05, seed=0))
training = [(t, corpus.labels[t.episode_id]) for t in corpus.transcripts]
profile = calibrate_thresholds(training, g)
print("calibrated thresholds", profile.to_dict())
