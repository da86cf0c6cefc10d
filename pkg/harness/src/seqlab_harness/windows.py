"""Sliding windows over subword streams, with a word-alignment map.

A sequence longer than `max_subword_len` is cut into overlapping
windows so every position keeps past context. The stride setting has
two readings and both are supported:

- "overlap" (default): consecutive windows share `window_stride`
  subwords, so starts advance by max_subword_len - window_stride.
- "step": starts advance by `window_stride` directly.

Each word is predicted exactly once, from its first subword, read in
the window where that subword sits closest to the window's center
(earlier window on ties). Reassembly is therefore lossless by
construction: one prediction per word, in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

STRIDE_MODES = ("overlap", "step")


@dataclass
class TrainSpec:
    max_subword_len: int = 512
    window_stride: int = 128
    epochs: int = 10
    learning_rate: float = 1e-5
    seed: int = 0
    stride_mode: str = "overlap"

    def validate(self) -> None:
        if self.max_subword_len < 1:
            raise ValueError("max_subword_len must be >= 1")
        if not 0 < self.window_stride < self.max_subword_len:
            raise ValueError(
                f"window_stride must be in (0, {self.max_subword_len}), "
                f"got {self.window_stride}"
            )
        if self.stride_mode not in STRIDE_MODES:
            raise ValueError(
                f"stride_mode must be one of {STRIDE_MODES}, "
                f"got '{self.stride_mode}'"
            )
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")

    @property
    def step(self) -> int:
        if self.stride_mode == "overlap":
            return self.max_subword_len - self.window_stride
        return self.window_stride

    def to_dict(self) -> dict:
        return {
            "max_subword_len": self.max_subword_len,
            "window_stride": self.window_stride,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "stride_mode": self.stride_mode,
        }

    @classmethod
    def from_dict(cls, blob: dict) -> "TrainSpec":
        spec = cls(**{k: blob[k] for k in cls().to_dict() if k in blob})
        spec.validate()
        return spec


def window_starts(n_subwords: int, spec: TrainSpec) -> list[int]:
    """Start offsets; the last window is the first one reaching the end."""
    if n_subwords <= spec.max_subword_len:
        return [0]
    starts = [0]
    while starts[-1] + spec.max_subword_len < n_subwords:
        starts.append(starts[-1] + spec.step)
    return starts


def expected_window_count(n_subwords: int, spec: TrainSpec) -> int:
    if n_subwords <= spec.max_subword_len:
        return 1
    return math.ceil((n_subwords - spec.max_subword_len) / spec.step) + 1


@dataclass
class Windowed:
    """One sequence cut into windows plus the word-alignment map.

    `word_first[i]` is the stream position of word i's first subword;
    `assigned[i]` is the window that predicts word i, and
    `position[i]` the in-window offset of that first subword.
    """

    ids: list[int]
    starts: list[int]
    windows: list[list[int]] = field(default_factory=list)
    word_first: list[int] = field(default_factory=list)
    assigned: list[int] = field(default_factory=list)
    position: list[int] = field(default_factory=list)

    @property
    def n_windows(self) -> int:
        return len(self.starts)


def windowize(word_pieces: list[list[int]], spec: TrainSpec) -> Windowed:
    """Cut a sequence (subword ids per word) into prediction windows."""
    spec.validate()
    if not word_pieces or any(not p for p in word_pieces):
        raise ValueError("every word needs at least one subword")
    ids: list[int] = []
    word_first: list[int] = []
    for pieces in word_pieces:
        word_first.append(len(ids))
        ids.extend(pieces)

    starts = window_starts(len(ids), spec)
    windows = [ids[s:s + spec.max_subword_len] for s in starts]

    assigned: list[int] = []
    position: list[int] = []
    for p in word_first:
        best = None
        for w, start in enumerate(starts):
            length = len(windows[w])
            if not start <= p < start + length:
                continue
            distance = abs((p - start) - (length - 1) / 2.0)
            if best is None or distance < best[0]:
                best = (distance, w)
        if best is None:
            raise AssertionError(f"subword position {p} not covered")
        w = best[1]
        assigned.append(w)
        position.append(p - starts[w])

    return Windowed(ids=ids, starts=starts, windows=windows,
                    word_first=word_first, assigned=assigned,
                    position=position)


def reassemble(windowed: Windowed,
               window_predictions: list[list[int]]) -> list[int]:
    """Word-level labels from per-window, per-position predictions."""
    if len(window_predictions) != windowed.n_windows:
        raise ValueError(
            f"expected {windowed.n_windows} windows of predictions, "
            f"got {len(window_predictions)}"
        )
    labels = []
    for w, pos in zip(windowed.assigned, windowed.position):
        labels.append(int(window_predictions[w][pos]))
    return labels
