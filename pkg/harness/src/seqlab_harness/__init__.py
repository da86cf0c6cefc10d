"""Toy transformer sequence labeler over laughter token datasets.

The harness is deliberately independent of the corpus toolkit: it talks
to it only through files (``dataset.jsonl`` in, ``predictions.jsonl``
out) so either side can be swapped without touching the other.
"""

from .data import DataError, Sequence, read_dataset, write_predictions
from .model import (
    Encoder,
    MLMModel,
    ModelConfig,
    TokenClassifier,
    load_checkpoint,
    save_checkpoint,
)
from .predict import load_classifier, predict, predict_sequences
from .pretrain import build_pretrain_corpus, pretrain
from .subwords import MASK_ID, PAD_ID, UNK_ID, SubwordVocab
from .train import train
from .windows import (
    STRIDE_MODES,
    TrainSpec,
    Windowed,
    expected_window_count,
    reassemble,
    window_starts,
    windowize,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Encoder",
    "MASK_ID",
    "MLMModel",
    "ModelConfig",
    "PAD_ID",
    "STRIDE_MODES",
    "Sequence",
    "SubwordVocab",
    "TokenClassifier",
    "TrainSpec",
    "UNK_ID",
    "Windowed",
    "build_pretrain_corpus",
    "expected_window_count",
    "load_checkpoint",
    "load_classifier",
    "predict",
    "predict_sequences",
    "pretrain",
    "read_dataset",
    "reassemble",
    "save_checkpoint",
    "train",
    "window_starts",
    "windowize",
    "write_predictions",
]
