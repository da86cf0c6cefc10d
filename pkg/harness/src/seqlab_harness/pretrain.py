"""Masked-token pretraining of the compact encoder on a synthetic corpus.

There is no model hub to pull from, so "pretrained multilingual
encoder" means: generate a deterministic synthetic corpus over small
word lists in seven languages, build the subword vocabulary from it,
and train the encoder to fill in masked subwords. That is enough to
give fine-tuning informative, token-distinguishing representations.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .model import MLMModel, ModelConfig, save_checkpoint
from .subwords import MASK_ID, PAD_ID, SPECIALS, SubwordVocab

_WORDLISTS = {
    "cs": ["takze", "jsem", "tady", "rikam", "proste", "jednou", "potom",
           "vlastne", "trochu", "nikdo", "dneska", "videl"],
    "en": ["so", "anyway", "right", "there", "was", "this", "guy", "and",
           "then", "she", "says", "never", "really", "know"],
    "es": ["entonces", "digo", "claro", "porque", "nunca", "gente", "cosa",
           "luego", "mira", "bueno", "ahora", "tampoco"],
    "fr": ["alors", "donc", "voila", "jamais", "ensuite", "truc", "gens",
           "apres", "enfin", "bref", "encore", "toujours"],
    "hu": ["szoval", "aztan", "mondom", "soha", "ember", "dolog", "akkor",
           "megint", "persze", "kicsit", "senki", "most"],
    "it": ["allora", "quindi", "ecco", "mai", "poi", "roba", "gente",
           "dopo", "insomma", "ancora", "sempre", "nessuno"],
    "pt": ["entao", "depois", "nunca", "gente", "coisa", "olha", "agora",
           "sempre", "ainda", "claro", "tambem", "nada"],
}


def build_pretrain_corpus(seed: int = 0,
                          n_sentences: int = 400) -> list[list[str]]:
    rng = np.random.default_rng(seed)
    languages = sorted(_WORDLISTS)
    sentences = []
    for i in range(n_sentences):
        words = _WORDLISTS[languages[i % len(languages)]]
        length = int(rng.integers(5, 15))
        sentences.append(
            [words[int(k)] for k in rng.integers(0, len(words), length)]
        )
    return sentences


def pretrain(out_path, seed: int = 0, steps: int = 300,
             n_sentences: int = 400, batch_size: int = 8,
             config: ModelConfig | None = None,
             quiet: bool = True) -> SubwordVocab:
    """Train the encoder with masked-token prediction; save a base checkpoint."""
    sentences = build_pretrain_corpus(seed, n_sentences)
    vocab = SubwordVocab.build(
        [w for sent in sentences for w in sent], max_vocab=2000
    )
    if config is None:
        config = ModelConfig(vocab_size=len(vocab))
    elif config.vocab_size != len(vocab):
        raise ValueError("config.vocab_size must match the built vocabulary")

    encoded = []
    for sent in sentences:
        ids: list[int] = []
        for word in sent:
            ids.extend(vocab.encode_word(word))
        encoded.append(ids[: config.max_positions])

    torch.manual_seed(seed)
    rng = np.random.default_rng([seed, 1])
    model = MLMModel(config)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=3e-4)
    loss_fn = nn.CrossEntropyLoss(ignore_index=-100)

    for step in range(steps):
        picks = rng.integers(0, len(encoded), batch_size)
        batch = [encoded[int(i)] for i in picks]
        width = max(len(ids) for ids in batch)
        inputs = torch.full((len(batch), width), PAD_ID, dtype=torch.long)
        targets = torch.full((len(batch), width), -100, dtype=torch.long)
        for r, ids in enumerate(batch):
            row = torch.tensor(ids, dtype=torch.long)
            masked = row.clone()
            hit = torch.from_numpy(rng.random(len(ids)) < 0.15)
            if not bool(hit.any()):
                hit[int(rng.integers(0, len(ids)))] = True
            masked[hit] = MASK_ID
            inputs[r, : len(ids)] = masked
            targets[r, : len(ids)][hit] = row[hit]
        logits = model(inputs)
        loss = loss_fn(logits.reshape(-1, len(vocab)), targets.reshape(-1))
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if not quiet and (step + 1) % 50 == 0:
            print(f"pretrain step {step + 1}/{steps} loss {loss.item():.3f}")

    save_checkpoint(
        out_path, kind="base",
        encoder_state=model.encoder.state_dict(),
        head_state=None,
        vocab_pieces=vocab.pieces,
        config=config,
    )
    return vocab
