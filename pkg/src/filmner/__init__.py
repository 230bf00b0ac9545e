"""Film-title mention detection in noisy speech transcripts.

Stage one fuzzy-matches transcript n-grams against a film gazetteer; stage
two classifies each candidate with a logistic regression over match and
metadata features.
"""
from .corpus import GoldLabel, Transcript, normalize_text, number_to_words, word_error_rate
from .gazetteer import FilmRecord, Gazetteer, insert_film, load_gazetteer, read_gazetteer
from .matcher import (
    CandidateMention,
    ThresholdProfile,
    calibrate_thresholds,
    lev_ratio,
    levenshtein_distance,
    scan,
)
from .features import FeatureVector, featurize
from .model import LinearModel, select_hyperparameters, train
from .tagger import LexiconTagger

__version__ = "0.1.0"
