"""
Features that do not depend on the title string
===============================================

Closeness to the film's keywords, the match quality, the film's budget and
part-of-speech context. None of them mention which film it is, which is
what lets a trained model handle films added later.
"""
import numpy as np

from filmner.corpus import Transcript
from filmner.features import feature_matrix, feature_names, featurize
from filmner.gazetteer import load_gazetteer
from filmner.matcher import ThresholdProfile, scan
from filmner.tagger import LexiconTagger

g = load_gazetteer([
    {"film_id": "gz", "title": "Godzilla", "keywords": ["monster", "japan"], "budget": 1.6e8},
    {"film_id": "coco", "title": "Coco", "budget": 1.75e8},
])
text = ("so we finally saw godzila and the monster was huge, apparently shot in japan. "
        "after that my kid wanted cocoa")
t = Transcript.from_text(text, "demo", "ep")
print(LexiconTagger().tag(t.tokens))

cands = scan(t, g, ThresholdProfile.uniform(0.25))
vectors = featurize(t, cands, g)
for c, v in zip(cands, vectors):
    print(c.matched_text, "->", c.film_id)
    print("  closeness mean/min/max", round(v.closeness_mean, 3), round(v.closeness_min, 3),
          round(v.closeness_max, 3), "defined", v.closeness_defined)
    print("  lev", v.lev_ratio, "budget", v.budget_norm, "pos", v.title_pos_bag, v.pre_pos, v.post_pos)

X = feature_matrix(vectors)
names = feature_names()
print(X.shape, [names[j] for j in np.flatnonzero(X[0])])
