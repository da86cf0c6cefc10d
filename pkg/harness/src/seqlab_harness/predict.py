"""Label a dataset file with a trained checkpoint."""

from __future__ import annotations

import torch

from .data import Sequence, read_dataset, write_predictions
from .model import ModelConfig, TokenClassifier, load_checkpoint
from .subwords import SubwordVocab
from .windows import TrainSpec, reassemble, windowize


def load_classifier(ckpt_path):
    blob = load_checkpoint(ckpt_path)
    if blob["kind"] != "classifier" or blob.get("head") is None:
        raise ValueError(
            f"{ckpt_path}: base checkpoint; run training to get a classifier"
        )
    vocab = SubwordVocab(blob["vocab_pieces"])
    config = ModelConfig.from_dict(blob["config"])
    model = TokenClassifier(config)
    model.encoder.load_state_dict(blob["encoder"])
    model.head.load_state_dict(blob["head"])
    model.eval()
    spec = TrainSpec.from_dict(blob["spec"]) if blob.get("spec") else TrainSpec()
    return model, vocab, spec


def predict_sequences(model, vocab: SubwordVocab, spec: TrainSpec,
                      sequences) -> list[Sequence]:
    out = []
    with torch.no_grad():
        for seq in sequences:
            windowed = windowize(vocab.encode_words(seq.tokens), spec)
            window_preds = []
            for window_ids in windowed.windows:
                ids = torch.tensor(window_ids, dtype=torch.long)
                logits = model(ids.unsqueeze(0))[0]
                window_preds.append(logits.argmax(dim=-1).tolist())
            labels = reassemble(windowed, window_preds)
            out.append(Sequence(seq.video_id, seq.language,
                                list(seq.tokens), labels))
    return out


def predict(ckpt_path, data_path, out_path) -> dict:
    """Write predictions.jsonl for every sequence in the dataset file."""
    model, vocab, spec = load_classifier(ckpt_path)
    sequences = read_dataset(data_path)
    predictions = predict_sequences(model, vocab, spec, sequences)
    write_predictions(out_path, predictions)
    return {
        "sequences": len(predictions),
        "words": sum(len(s.tokens) for s in predictions),
        "positive": sum(sum(s.labels) for s in predictions),
    }
