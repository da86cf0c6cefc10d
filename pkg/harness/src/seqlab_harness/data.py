"""Dataset and prediction files: JSON Lines, one labeled sequence per line.

This package talks to the corpus tooling only through files, so the
reader here is intentionally self-contained and validates just what the
harness needs: string tokens, binary integer labels, equal lengths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DataError(Exception):
    """A dataset or prediction file violates the line schema."""


@dataclass
class Sequence:
    video_id: str
    language: str
    tokens: list[str]
    labels: list[int]


def read_dataset(path) -> list[Sequence]:
    path = Path(path)
    sequences: list[Sequence] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc.msg}") \
                    from None
            for key in ("video_id", "language", "tokens", "labels"):
                if key not in obj:
                    raise DataError(f"{path}:{lineno}: missing field '{key}'")
            tokens = obj["tokens"]
            labels = obj["labels"]
            if not isinstance(obj["video_id"], str) or not obj["video_id"]:
                raise DataError(f"{path}:{lineno}: video_id must be a "
                                "non-empty string")
            if not isinstance(obj["language"], str) or not obj["language"]:
                raise DataError(f"{path}:{lineno}: language must be a "
                                "non-empty string")
            if not isinstance(tokens, list) or \
                    not all(isinstance(t, str) and t for t in tokens):
                raise DataError(f"{path}:{lineno}: tokens must be non-empty "
                                "strings")
            if not isinstance(labels, list) or \
                    not all(isinstance(x, int) and x in (0, 1) for x in labels):
                raise DataError(f"{path}:{lineno}: labels must be 0 or 1")
            if len(tokens) != len(labels):
                raise DataError(
                    f"{path}:{lineno}: {len(tokens)} tokens vs "
                    f"{len(labels)} labels"
                )
            if not tokens:
                raise DataError(f"{path}:{lineno}: empty sequence")
            sequences.append(Sequence(obj["video_id"], obj["language"],
                                      tokens, labels))
    if not sequences:
        raise DataError(f"{path}: no sequences")
    return sequences


def write_predictions(path, sequences: list[Sequence]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for seq in sequences:
            if len(seq.tokens) != len(seq.labels):
                raise DataError(
                    f"{seq.video_id}: {len(seq.tokens)} tokens vs "
                    f"{len(seq.labels)} labels"
                )
            fh.write(json.dumps({
                "video_id": seq.video_id,
                "language": seq.language,
                "tokens": list(seq.tokens),
                "labels": [int(x) for x in seq.labels],
            }, ensure_ascii=False) + "\n")
