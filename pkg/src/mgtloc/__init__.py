"""mgtloc: localize machine-generated sentences inside mixed documents.

The pipeline: synthesize labeled mixed articles from human text plus
pre-generated machine text pools, score sentence windows with any chunk
scorer (built-in or external), aggregate window outputs into per-sentence
labels, and evaluate with average precision pooled per generator.
"""

from .adaloc import (
    AdaLocModel,
    ChunkExample,
    TrainConfig,
    adaloc_forward,
    bce_loss,
    build_chunk_examples,
    init_weights,
    load_model,
    make_oracle_model,
    save_model,
    train,
)
from .localizer import (
    LocalizationResult,
    WindowPlan,
    localize_adaloc,
    localize_single,
    localize_vote,
    plan_windows,
)
from .metrics import (
    EvalReport,
    average_precision,
    evaluate,
    expected_average_precision,
    localization_map,
)
from .scorers import (
    ChunkRequest,
    ChunkResult,
    ConstantScorer,
    HashFeatureScorer,
    NgramFeatureScorer,
    NgramScorerModel,
    OracleFeatureScorer,
    OracleScorer,
    RandomScorer,
    SidecarScorer,
    WindowRef,
    chunk_text,
    score_chunks,
    train_ngram_scorer,
    truncate_to_max_tokens,
)
from .segmenter import SegmenterConfig, segment, well_formed
from .synthesis import (
    DatasetStats,
    GenerationPool,
    PoolEntry,
    SpliceSkip,
    SynthesisConfig,
    article_rng,
    build_dataset,
    splice,
)
from .types import (
    FEATURE_DIM,
    MAX_CHUNK_TOKENS,
    Article,
    SamplingSpec,
    Sentence,
    SentencePrediction,
    SpliceMetadata,
    SpliceSegment,
    validate_article,
)

__version__ = "0.1.0"

__all__ = [
    "AdaLocModel",
    "Article",
    "ChunkExample",
    "ChunkRequest",
    "ChunkResult",
    "ConstantScorer",
    "DatasetStats",
    "EvalReport",
    "FEATURE_DIM",
    "GenerationPool",
    "HashFeatureScorer",
    "LocalizationResult",
    "MAX_CHUNK_TOKENS",
    "NgramFeatureScorer",
    "NgramScorerModel",
    "OracleFeatureScorer",
    "OracleScorer",
    "PoolEntry",
    "RandomScorer",
    "SamplingSpec",
    "SegmenterConfig",
    "Sentence",
    "SentencePrediction",
    "SidecarScorer",
    "SpliceMetadata",
    "SpliceSegment",
    "SpliceSkip",
    "SynthesisConfig",
    "TrainConfig",
    "WindowPlan",
    "WindowRef",
    "adaloc_forward",
    "article_rng",
    "average_precision",
    "bce_loss",
    "build_chunk_examples",
    "build_dataset",
    "chunk_text",
    "evaluate",
    "expected_average_precision",
    "init_weights",
    "load_model",
    "localization_map",
    "localize_adaloc",
    "localize_single",
    "localize_vote",
    "make_oracle_model",
    "plan_windows",
    "save_model",
    "score_chunks",
    "segment",
    "splice",
    "train",
    "train_ngram_scorer",
    "truncate_to_max_tokens",
    "validate_article",
    "well_formed",
]
