"""Fine-tune the token classifier on a labeled dataset file."""

from __future__ import annotations

import torch
from torch import nn

from .data import read_dataset
from .model import ModelConfig, TokenClassifier, load_checkpoint, \
    save_checkpoint
from .subwords import SubwordVocab
from .windows import TrainSpec, windowize


def _prepare(sequences, vocab: SubwordVocab, spec: TrainSpec):
    """Windowed tensors plus (positions, labels) per window for training."""
    prepared = []
    for seq in sequences:
        windowed = windowize(vocab.encode_words(seq.tokens), spec)
        per_window = []
        for w, start in enumerate(windowed.starts):
            length = len(windowed.windows[w])
            positions, labels = [], []
            for word_idx, p in enumerate(windowed.word_first):
                if start <= p < start + length:
                    positions.append(p - start)
                    labels.append(seq.labels[word_idx])
            per_window.append((
                torch.tensor(windowed.windows[w], dtype=torch.long),
                torch.tensor(positions, dtype=torch.long),
                torch.tensor(labels, dtype=torch.long),
            ))
        prepared.append((seq, windowed, per_window))
    return prepared


def train(data_path, out_path, spec: TrainSpec | None = None,
          base_path=None, quiet: bool = True) -> dict:
    """Train on dataset.jsonl and save a prediction checkpoint.

    Starts from a pretrained base checkpoint when given, otherwise from
    random initialization with a vocabulary built from the dataset.
    Returns summary counts and the final training loss.
    """
    spec = spec or TrainSpec()
    spec.validate()
    sequences = read_dataset(data_path)

    if base_path is not None:
        blob = load_checkpoint(base_path)
        vocab = SubwordVocab(blob["vocab_pieces"])
        config = ModelConfig.from_dict(blob["config"])
    else:
        vocab = SubwordVocab.build(
            [t for seq in sequences for t in seq.tokens], max_vocab=2000
        )
        config = ModelConfig(vocab_size=len(vocab))
    if config.max_positions < spec.max_subword_len:
        config.max_positions = spec.max_subword_len

    torch.manual_seed(spec.seed)
    model = TokenClassifier(config)
    if base_path is not None:
        model.encoder.load_state_dict(load_checkpoint(base_path)["encoder"])
    model.train()

    prepared = _prepare(sequences, vocab, spec)
    flat_windows = [
        chunk for _, _, per_window in prepared for chunk in per_window
    ]
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)
    # Laughter tokens are a small minority of each transcript, so an
    # unweighted loss just learns the majority class.  Balance the two
    # classes by inverse frequency instead.
    counts = [0, 0]
    for seq in sequences:
        for label in seq.labels:
            counts[label] += 1
    total_labels = counts[0] + counts[1]
    weight = torch.tensor(
        [total_labels / (2.0 * max(1, c)) for c in counts],
        dtype=torch.float32,
    )
    loss_fn = nn.CrossEntropyLoss(weight=weight)

    generator = torch.Generator().manual_seed(spec.seed)
    last_loss = float("nan")
    for epoch in range(spec.epochs):
        order = torch.randperm(len(flat_windows), generator=generator)
        total = 0.0
        for i in order.tolist():
            ids, positions, labels = flat_windows[i]
            logits = model(ids.unsqueeze(0))[0]
            loss = loss_fn(logits[positions], labels)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item()
        last_loss = total / max(1, len(flat_windows))
        if not quiet:
            print(f"epoch {epoch + 1}/{spec.epochs} loss {last_loss:.4f}")

    save_checkpoint(
        out_path, kind="classifier",
        encoder_state=model.encoder.state_dict(),
        head_state=model.head.state_dict(),
        vocab_pieces=vocab.pieces,
        config=config,
        spec_dict=spec.to_dict(),
    )
    return {
        "sequences": len(sequences),
        "windows": len(flat_windows),
        "epochs": spec.epochs,
        "final_loss": last_loss,
    }
