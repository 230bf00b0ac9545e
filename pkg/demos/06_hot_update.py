"""
Adding films without retraining
===============================

The model only sees string-agnostic features, so a film inserted into the
gazetteer after training is detected by the same model.
"""
from filmner.corpus import Transcript
from filmner.gazetteer import insert_film
from filmner.matcher import calibrate_thresholds
from filmner.model import train
from filmner.features import feature_matrix, featurize
from filmner.pipeline import FilmDetector, label_candidates, raw_matches_many, select_candidates
from filmner.synth import CorruptionConfig, generate_corpus, synthetic_gazetteer

import numpy as np

g = synthetic_gazetteer(80, seed=5)
corpus = generate_corpus(g, CorruptionConfig(seed=5, distractors_per_transcript=(2, 4)))
profile = calibrate_thresholds([(t, corpus.labels[t.episode_id]) for t in corpus.transcripts], g)
cands = [select_candidates(r, profile, g) for r in raw_matches_many(corpus.transcripts, g, profile)]
X = np.vstack([feature_matrix(featurize(t, c, g)) for t, c in zip(corpus.transcripts, cands)])
y = np.concatenate([label_candidates(c, corpus.labels[t.episode_id])
                    for t, c in zip(corpus.transcripts, cands)])
model = train(X, y, "l2", 0.1)
detector = FilmDetector(g, profile, model)

t = Transcript.from_text("we talked about the starship scene in quilon vantry odesel, "
                         "and that mutiny at the end", "new", "ep")
print("before:", detector.detect(t))
insert_film(g, {"film_id": "new01", "title": "Quillon Vantry Odessel",
                "keywords": ["starship", "mutiny"]})
print("after: ", [(m.film_id, m.matched_text) for m in detector.detect(t)])
