"""Shared fixtures: a small labeled toy dataset and a pretrained base."""

import json
import time

import numpy as np
import pytest

from seqlab_harness import pretrain

SPEECH = ["so", "then", "my", "dog", "ate", "the", "whole", "cake", "and",
          "i", "said", "no", "way", "that", "happened", "again", "last",
          "week"]
LAUGH_TOKEN = "<laugh>"
TOY_LANGUAGES = ("en", "es", "fr")


def build_toy_dataset(path, seed=1, n_sentences=20):
    """Sentences of everyday words with laugh tokens mixed in (~25%)."""
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n_sentences):
            n = int(rng.integers(8, 15))
            tokens, labels = [], []
            for _ in range(n):
                if rng.random() < 0.25:
                    tokens.append(LAUGH_TOKEN)
                    labels.append(1)
                else:
                    tokens.append(SPEECH[int(rng.integers(len(SPEECH)))])
                    labels.append(0)
            if 1 not in labels:
                tokens[-1] = LAUGH_TOKEN
                labels[-1] = 1
            fh.write(json.dumps({
                "video_id": f"v{i:02d}",
                "language": TOY_LANGUAGES[i % len(TOY_LANGUAGES)],
                "tokens": tokens,
                "labels": labels,
            }) + "\n")


def token_f1(pred_path, gold_path):
    """Positive-class token F1, counted directly from the two files."""
    gold = {}
    with open(gold_path, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            gold[row["video_id"]] = row["labels"]
    tp = fp = fn = 0
    with open(pred_path, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            truth = gold[row["video_id"]]
            assert len(truth) == len(row["labels"])
            for p, g in zip(row["labels"], truth):
                if p == 1 and g == 1:
                    tp += 1
                elif p == 1:
                    fp += 1
                elif g == 1:
                    fn += 1
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


@pytest.fixture(scope="session")
def toy_data(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy")
    path = root / "toy.jsonl"
    build_toy_dataset(path)
    return path


@pytest.fixture(scope="session")
def base_checkpoint(tmp_path_factory):
    """Pretrained encoder checkpoint plus the wall time it took to build."""
    path = tmp_path_factory.mktemp("base") / "base.pt"
    t0 = time.perf_counter()
    pretrain(path, seed=0, steps=300)
    return {"path": path, "seconds": time.perf_counter() - t0}


@pytest.fixture()
def f1_of():
    return token_f1
