"""Compact transformer encoder with token-classification and MLM heads."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    ffn_size: int = 128
    max_positions: int = 512

    def to_dict(self) -> dict:
        return dict(vars(self))

    @classmethod
    def from_dict(cls, blob: dict) -> "ModelConfig":
        return cls(**blob)


class Encoder(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.token_embed = nn.Embedding(config.vocab_size, config.d_model)
        self.pos_embed = nn.Embedding(config.max_positions, config.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=config.d_model,
            nhead=config.n_heads,
            dim_feedforward=config.ffn_size,
            dropout=0.0,
            batch_first=True,
        )
        self.layers = nn.TransformerEncoder(layer, config.n_layers)
        self.norm = nn.LayerNorm(config.d_model)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        if ids.shape[-1] > self.config.max_positions:
            raise ValueError(
                f"window of {ids.shape[-1]} exceeds max_positions "
                f"{self.config.max_positions}"
            )
        positions = torch.arange(ids.shape[-1], device=ids.device)
        h = self.token_embed(ids) + self.pos_embed(positions)
        return self.norm(self.layers(h))


class TokenClassifier(nn.Module):
    """Encoder plus a binary head; logits per subword position."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.encoder = Encoder(config)
        self.head = nn.Linear(config.d_model, 2)
        # Near-zero head: the untrained model predicts at chance, and
        # fine-tuning decides argmax by coherent drift even at tiny
        # learning rates.
        nn.init.normal_(self.head.weight, std=1e-4)
        nn.init.zeros_(self.head.bias)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(ids))


class MLMModel(nn.Module):
    """Encoder plus a vocabulary head, for masked-token pretraining."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.encoder = Encoder(config)
        self.head = nn.Linear(config.d_model, config.vocab_size)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(ids))


def save_checkpoint(path, *, kind: str, encoder_state, head_state,
                    vocab_pieces, config: ModelConfig, spec_dict=None):
    torch.save({
        "kind": kind,
        "encoder": encoder_state,
        "head": head_state,
        "vocab_pieces": list(vocab_pieces),
        "config": config.to_dict(),
        "spec": spec_dict,
    }, path)


def load_checkpoint(path) -> dict:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    for key in ("kind", "encoder", "vocab_pieces", "config"):
        if key not in blob:
            raise ValueError(f"{path}: not a harness checkpoint ({key} missing)")
    return blob
