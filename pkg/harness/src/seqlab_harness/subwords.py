"""Deterministic subword vocabulary: frequent words, then greedy pieces.

The vocabulary keeps the most frequent whole words plus all substrings
of length 2..6 above a frequency floor, with single characters as the
fall-back so any word tokenizes without unknowns (unseen characters map
to [UNK]). Encoding is greedy longest-prefix, which is deterministic
and has no merge-order state to serialize.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

PAD, UNK, MASK = "[PAD]", "[UNK]", "[MASK]"
SPECIALS = (PAD, UNK, MASK)
PAD_ID, UNK_ID, MASK_ID = 0, 1, 2

_MAX_PIECE_LEN = 6


class SubwordVocab:
    def __init__(self, pieces: list[str]):
        for i, special in enumerate(SPECIALS):
            if pieces[i] != special:
                raise ValueError(f"piece {i} must be {special}")
        self.pieces = list(pieces)
        self.index = {p: i for i, p in enumerate(self.pieces)}
        if len(self.index) != len(self.pieces):
            raise ValueError("duplicate pieces")
        self._max_len = max(
            (len(p) for p in self.pieces[len(SPECIALS):]), default=1
        )

    def __len__(self) -> int:
        return len(self.pieces)

    @classmethod
    def build(cls, words, max_vocab: int = 2000,
              min_piece_count: int = 2) -> "SubwordVocab":
        words = [w.casefold() for w in words]
        word_counts = Counter(words)
        chars = sorted({c for w in word_counts for c in w})

        substr_counts: Counter = Counter()
        for word, n in word_counts.items():
            for length in range(2, _MAX_PIECE_LEN + 1):
                for i in range(len(word) - length + 1):
                    substr_counts[word[i:i + length]] += n

        budget = max_vocab - len(SPECIALS) - len(chars)
        ranked_words = [
            w for w, _ in sorted(word_counts.items(),
                                 key=lambda kv: (-kv[1], kv[0]))
        ]
        keep_words = ranked_words[: budget // 2]
        taken = set(keep_words) | set(chars)
        ranked_subs = [
            s for s, n in sorted(substr_counts.items(),
                                 key=lambda kv: (-kv[1], kv[0]))
            if n >= min_piece_count and s not in taken
        ]
        keep_subs = ranked_subs[: budget - len(keep_words)]

        pieces = list(SPECIALS) + sorted(set(chars) | set(keep_words)
                                         | set(keep_subs))
        return cls(pieces)

    def encode_word(self, word: str) -> list[int]:
        """Greedy longest-prefix piece ids; unseen characters become UNK."""
        word = word.casefold()
        out: list[int] = []
        i = 0
        while i < len(word):
            for length in range(min(self._max_len, len(word) - i), 0, -1):
                piece = word[i:i + length]
                idx = self.index.get(piece)
                if idx is not None:
                    out.append(idx)
                    i += length
                    break
            else:
                out.append(UNK_ID)
                i += 1
        return out or [UNK_ID]

    def encode_words(self, words) -> list[list[int]]:
        return [self.encode_word(w) for w in words]

    def to_json(self) -> dict:
        return {"pieces": self.pieces}

    @classmethod
    def from_json(cls, blob: dict) -> "SubwordVocab":
        return cls(list(blob["pieces"]))

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, path) -> "SubwordVocab":
        return cls.from_json(
            json.loads(Path(path).read_text(encoding="utf-8"))
        )
