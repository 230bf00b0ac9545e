"""
Training the classifier and testing features
============================================

Logistic regression with an L1 or L2 penalty, chosen with the decision
threshold by cross-validated F1. A permutation test then asks whether each
feature improves the fit more than a shuffled copy of itself would.
"""
import numpy as np

from filmner.features import feature_matrix, feature_names, featurize
from filmner.matcher import ThresholdProfile
from filmner.model import feature_significance, select_hyperparameters, train
from filmner.pipeline import label_candidates, raw_matches_many, select_candidates
from filmner.synth import CorruptionConfig, generate_corpus, synthetic_gazetteer

g = synthetic_gazetteer(120, seed=1)
corpus = generate_corpus(g, CorruptionConfig(seed=1, distractors_per_transcript=(4, 8),
                                             near_miss_fraction=0.25))
profile = ThresholdProfile.uniform(0.25)
raw = raw_matches_many(corpus.transcripts, g, profile)
cands = [select_candidates(r, profile, g) for r in raw]
X = np.vstack([feature_matrix(featurize(t, c, g)) for t, c in zip(corpus.transcripts, cands)])
y = np.concatenate([label_candidates(c, corpus.labels[t.episode_id])
                    for t, c in zip(corpus.transcripts, cands)])
groups = [t.channel_id for t, c in zip(corpus.transcripts, cands) for _ in c]
print(X.shape, "positives", int(y.sum()))

sel = select_hyperparameters(X, y, groups, grid=[("l1", 0.01), ("l1", 0.1), ("l2", 0.1), ("l2", 1.0)])
print(sel)
model = train(X, y, sel.penalty, sel.strength, decision_threshold=sel.decision_threshold,
              feature_names=feature_names())
top = np.argsort(-np.abs(model.weights))[:5]
print([(model.feature_names[j], round(model.weights[j], 3)) for j in top])

names = feature_names()
cols = [names.index(n) for n in ("closeness_defined", "lev_ratio", "budget_norm")]
pvals = feature_significance(X, y, model, trials=100, columns=cols)
print({names[j]: p for j, p in pvals.items()})
