"""Corpus construction and evaluation tools for audience-laughter data.

The workflow: mine laughter candidates from timestamp disagreements
between two ASR systems (`align`), verify them acoustically with a
random forest over hand-rolled features (`audio`, `features`, `forest`),
merge them with detector output, and emit a word-level labeled dataset
(`labeling`) plus segment- and token-level metrics (`evaluation`).
`laughkit --help` lists the command line entry points.
"""

from .align import (
    AlignedPair,
    DualTranscript,
    MineConfig,
    align_tokens,
    extract_candidates,
    find_anomalous_words,
    mine_corpus,
)
from .audio import AudioClip, load_clip, read_wav
from .errors import (
    LaughkitError,
    ParseError,
    SchemaError,
    ValidationError,
)
from .evaluation import (
    EvalConfig,
    MetricReport,
    eval_segments,
    eval_tokens,
    iou,
    match_segments,
)
from .features import (
    FEATURE_NAMES,
    N_FEATURES,
    AcousticFeatureExtractor,
    FeatureConfig,
    FeatureRow,
    extract_feature_dict,
    extract_features,
    read_features_csv,
    write_features_csv,
)
from .forest import (
    ForestConfig,
    ForestModel,
    RandomForestLaughterClassifier,
    evaluate_cv,
    filter_candidates,
    load_model,
    save_model,
    train,
    verify,
)
from .labeling import LabelingConfig, emit_dataset, label_words
from .records import (
    LANGUAGES,
    CandidateLaughter,
    LabeledSequence,
    LaughterSegment,
    VideoRecord,
    Word,
)
from .stats import StatsReport, corpus_stats, format_stats_table

__version__ = "0.1.0"

__all__ = [
    "AlignedPair",
    "DualTranscript",
    "MineConfig",
    "align_tokens",
    "extract_candidates",
    "find_anomalous_words",
    "mine_corpus",
    "AudioClip",
    "load_clip",
    "read_wav",
    "LaughkitError",
    "ParseError",
    "SchemaError",
    "ValidationError",
    "EvalConfig",
    "MetricReport",
    "eval_segments",
    "eval_tokens",
    "iou",
    "match_segments",
    "FEATURE_NAMES",
    "N_FEATURES",
    "AcousticFeatureExtractor",
    "FeatureConfig",
    "FeatureRow",
    "extract_feature_dict",
    "extract_features",
    "read_features_csv",
    "write_features_csv",
    "ForestConfig",
    "ForestModel",
    "RandomForestLaughterClassifier",
    "evaluate_cv",
    "filter_candidates",
    "load_model",
    "save_model",
    "train",
    "verify",
    "LabelingConfig",
    "emit_dataset",
    "label_words",
    "LANGUAGES",
    "CandidateLaughter",
    "LabeledSequence",
    "LaughterSegment",
    "VideoRecord",
    "Word",
    "StatsReport",
    "corpus_stats",
    "format_stats_table",
    "__version__",
]
