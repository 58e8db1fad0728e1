"""Authorship attribution with a radial basis probabilistic network classifier
and a human-in-the-loop adaptive critic."""

from .lexicon import (
    FallbackLexicon,
    FeatureVector,
    GroupLexicon,
    TokenizedText,
    count_groups,
    featurize,
    load_fallback,
    load_group_db,
    tokenize,
)
from .neural import BandwidthSchedule, DenseNet, KernelSpec, ParzenReport
from .rbpnn import Attribution, EvaluationRecord, RBPNNModel, build_model, classify, evaluate
from .critic import AdaptiveCritic, GateDecision, ReviewItem, Verdict, compute_xi, gate
from .engine import Engine
from .store import Store, TextSample

__all__ = [
    "AdaptiveCritic",
    "Attribution",
    "BandwidthSchedule",
    "DenseNet",
    "Engine",
    "EvaluationRecord",
    "FallbackLexicon",
    "FeatureVector",
    "GateDecision",
    "GroupLexicon",
    "KernelSpec",
    "ParzenReport",
    "RBPNNModel",
    "ReviewItem",
    "Store",
    "TextSample",
    "TokenizedText",
    "Verdict",
    "build_model",
    "classify",
    "compute_xi",
    "count_groups",
    "evaluate",
    "featurize",
    "gate",
    "load_fallback",
    "load_group_db",
    "tokenize",
]

__version__ = "0.1.0"
