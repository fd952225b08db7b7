"""Learn attribute correspondences between merchant offers and a product catalog,
then reconcile, cluster and fuse offers into catalog products."""

from .corpus import (CandidateTuple, CatalogSchema, Corpus, CorpusError, MatchRecord, Offer,
                     Product, load_corpus)
from .distsim import FEATURE_NAMES, jaccard, js_divergence
from .matcher import (Correspondence, DegenerateTrainingSet, LogisticModel, learn,
                      select_correspondences)
from .pipeline import SynthesizedProduct, fuse_value, synthesize
from .synthetic import GroundTruth, SynthConfig, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "CandidateTuple", "CatalogSchema", "Corpus", "CorpusError", "MatchRecord", "Offer", "Product",
    "load_corpus", "FEATURE_NAMES", "jaccard", "js_divergence", "Correspondence",
    "DegenerateTrainingSet", "LogisticModel", "learn", "select_correspondences",
    "SynthesizedProduct", "fuse_value", "synthesize", "GroundTruth", "SynthConfig",
    "generate_synthetic",
]
