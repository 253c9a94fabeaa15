"""Duplicate-event detection: candidate blocking, pair features, seeded
random forest, clique clustering, representative selection."""

from eventminer.dedup.blocking import generate_candidate_pairs, resolve_event_date
from eventminer.dedup.cluster import EventCluster, cluster_duplicates, select_representative
from eventminer.dedup.features import (ArticleView, DedupConfig, PairFeatures,
                                       compute_pair_features)
from eventminer.dedup.forest import (PairLabel, TrainedClassifier,
                                     load_pair_labels, score_pair,
                                     score_pairs, train_classifier)
from eventminer.dedup.similarity import ShingleSpace, shingle_tfidf_cosine

__all__ = [
    "ArticleView", "DedupConfig", "EventCluster", "PairFeatures", "PairLabel",
    "ShingleSpace", "TrainedClassifier", "cluster_duplicates",
    "compute_pair_features", "generate_candidate_pairs", "load_pair_labels",
    "resolve_event_date", "score_pair", "score_pairs",
    "select_representative", "shingle_tfidf_cosine", "train_classifier",
]
