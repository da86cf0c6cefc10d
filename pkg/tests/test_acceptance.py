"""Acceptance suite: one test per top-level requirement, with pinned bounds.

Each test prints a single `[acceptance] <name>: PASS/FAIL` line with its
runtime, so a verbose run reads as a checklist. Everything here runs
without the training harness installed.
"""

import time

import numpy as np
import pytest

from laughkit import io as lkio
from laughkit.align import MineConfig, extract_candidates, DualTranscript
from laughkit.align import alignment_cost, align_tokens
from laughkit.audio import AudioClip
from laughkit.cli import main as cli_main
from laughkit.evaluation import EvalConfig, eval_segments, iou, match_segments
from laughkit.features import FEATURE_NAMES, extract_feature_dict
from laughkit.forest import (
    ForestConfig,
    ForestModel,
    filter_candidates,
    predict,
    save_model,
    train,
    verify,
)
from laughkit.features import FeatureRow
from laughkit.labeling import LabelingConfig, label_words
from laughkit.records import CandidateLaughter, LaughterSegment, Word

from oracles import levenshtein_cost, span_labels
from synth import random_label_video


class criterion:
    """Prints one `[acceptance] name: PASS/FAIL (t)` line per test."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    @property
    def elapsed(self):
        return time.perf_counter() - self.t0

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[acceptance] {self.name}: {status} ({self.elapsed:.2f}s)")
        return False


def test_correction_fixture_exact():
    """Two-system stretch pattern: candidate [0.5, 3.0], words repaired."""
    with criterion("correction fixture") as c:
        words_a = [Word("v", 0, "w1", 0.0, 3.0), Word("v", 1, "w2", 3.0, 3.4)]
        words_b = [Word("v", 0, "w1", 0.0, 0.4), Word("v", 1, "w2", 0.5, 3.4)]

        # Bare two-word pattern: the relative anomaly rule is degenerate
        # with two words, so pin the factor at 1.
        cands, corrected = extract_candidates(
            DualTranscript("v", words_a, words_b), [],
            MineConfig(rel_factor=1.0),
        )
        assert len(cands) == 1
        assert (cands[0].start_s, cands[0].end_s) == (0.5, 3.0)
        assert (corrected[0].start_s, corrected[0].end_s) == (0.0, 0.4)
        assert (corrected[1].start_s, corrected[1].end_s) == (3.0, 3.4)

        # Same pattern embedded in normal-length context, all defaults.
        filler_a = [Word("v", i + 2, f"f{i}", 3.5 + 0.4 * i, 3.8 + 0.4 * i)
                    for i in range(4)]
        cands, corrected = extract_candidates(
            DualTranscript("v", words_a + filler_a, words_b + filler_a), [],
            MineConfig(),
        )
        assert len(cands) == 1
        assert (cands[0].start_s, cands[0].end_s) == (0.5, 3.0)
        assert (corrected[0].start_s, corrected[0].end_s) == (0.0, 0.4)
        assert (corrected[1].start_s, corrected[1].end_s) == (3.0, 3.4)
        assert c.elapsed < 1.0


def test_label_oracle_equivalence():
    """1,000 random videos: span labels match the brute-force oracle."""
    with criterion("label oracle equivalence") as c:
        rng = np.random.default_rng(42)
        mismatches = 0
        for i in range(1000):
            words, laughs, duration = random_label_video(rng, f"v{i:04d}")
            got = list(label_words(words, laughs, LabelingConfig("span"),
                                   video_duration_s=duration))
            want = span_labels([(w.start_s, w.end_s) for w in words],
                               [(s.start_s, s.end_s) for s in laughs])
            mismatches += got != want
        assert mismatches == 0
        assert c.elapsed < 10.0


def test_alignment_cost_oracle():
    """500 random token-pair lists: DP cost matches the quadratic oracle."""
    with criterion("alignment cost oracle") as c:
        rng = np.random.default_rng(7)
        alphabet = ["a", "b", "c", "d", "e"]
        mismatches = 0
        for _ in range(500):
            n_a = int(rng.integers(0, 51))
            n_b = int(rng.integers(0, 51))
            tokens_a = [alphabet[k] for k in rng.integers(0, 5, n_a)]
            tokens_b = [alphabet[k] for k in rng.integers(0, 5, n_b)]
            got = alignment_cost(align_tokens(tokens_a, tokens_b))
            want = levenshtein_cost(tokens_a, tokens_b)
            mismatches += got != want
        assert mismatches == 0


def _random_segments(rng, video_id, max_n=6):
    out = []
    for _ in range(int(rng.integers(0, max_n + 1))):
        s = float(rng.uniform(0.0, 20.0))
        e = s + float(rng.uniform(0.05, 4.0))
        out.append(LaughterSegment(video_id, round(s, 3), round(e, 3),
                                   "detector", 0.9))
    out.sort(key=lambda seg: (seg.start_s, seg.end_s))
    return out


def test_iou_matching_invariants():
    """10,000 random interval sets: symmetry, range, monotonicity,
    count conservation; plus the pinned point values."""
    with criterion("IoU/matching invariants") as c:
        assert abs(iou((0.0, 1.0), (0.5, 1.5)) - 1.0 / 3.0) <= 1e-9

        rng = np.random.default_rng(2024)
        for i in range(10_000):
            pred = _random_segments(rng, "v")
            gold = _random_segments(rng, "v")

            if pred and gold:
                a = pred[int(rng.integers(0, len(pred)))]
                b = gold[int(rng.integers(0, len(gold)))]
                v = iou(a, b)
                assert v == iou(b, a)
                assert 0.0 <= v <= 1.0

            lo = EvalConfig(iou_threshold=0.2)
            hi = EvalConfig(iou_threshold=0.6)
            tp_lo, fp_lo, fn_lo = match_segments(pred, gold, lo)
            tp_hi, fp_hi, fn_hi = match_segments(pred, gold, hi)

            assert len(tp_lo) + len(fp_lo) == len(pred)
            assert len(tp_lo) + len(fn_lo) == len(gold)
            assert len({pi for pi, _ in tp_lo}) == len(tp_lo)
            assert len({gi for _, gi in tp_lo}) == len(tp_lo)
            assert len(tp_hi) <= len(tp_lo)

            if i % 10 == 0 and gold:
                report = eval_segments(list(gold), list(gold), lo)
                assert report.overall.f1 == 1.0


def test_verification_gate_exhaustive():
    """Every sub-0.5 s candidate is rejected before the model sees it."""
    with criterion("verification gate") as c:
        always_laughter = ForestModel(
            trees=[{"leaf": [1, 0]}],
            feature_order=list(FEATURE_NAMES),
            config=ForestConfig(n_estimators=1),
        )
        durations = [k / 1000.0 for k in range(1, 1000)] + [
            0.5, 0.999, 1.0, 1.5,
        ]
        candidates, rows = [], []
        for k, dur in enumerate(durations):
            start = 2.0 * k
            end = start + dur
            candidates.append(CandidateLaughter(
                "v", start, end, prev_word_idx=k, next_word_idx=None,
                corrected_prev_end_s=start, corrected_next_start_s=None,
            ))
            rows.append(FeatureRow("v", start, end, np.zeros(len(FEATURE_NAMES))))

        for dur in durations:
            expected = "pass" if dur >= 0.5 else "auto_other"
            assert verify(dur) == expected

        accepted = filter_candidates(candidates, rows, always_laughter)
        accepted_durs = sorted(round(s.end_s - s.start_s, 3) for s in accepted)
        assert accepted_durs == sorted(d for d in durations if d >= 0.5)
        assert all(s.end_s - s.start_s >= 0.5 for s in accepted)


def _blobs(n=200, seed=5):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal(loc=2.5, scale=0.6, size=(half, 6)),
        rng.normal(loc=-2.5, scale=0.6, size=(n - half, 6)),
    ])
    y = ["laughter"] * half + ["other"] * (n - half)
    return X, y


def _f1(y_true, y_pred, positive="laughter"):
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == p == positive)
    fp = sum(1 for t, p in zip(y_true, y_pred)
             if t != positive and p == positive)
    fn = sum(1 for t, p in zip(y_true, y_pred)
             if t == positive and p != positive)
    return 2 * tp / (2 * tp + fp + fn) if tp else 0.0


def test_random_forest_blobs(tmp_path):
    """Separable blobs learnable, shuffled labels not, training repeatable."""
    with criterion("random forest") as c:
        X, y = _blobs(n=200, seed=5)
        order = np.random.default_rng(99).permutation(len(X))
        test_idx, train_idx = order[:30], order[30:]
        cfg = ForestConfig(seed=3)

        model = train(X[train_idx], [y[i] for i in train_idx], cfg=cfg)
        holdout_f1 = _f1([y[i] for i in test_idx], predict(model, X[test_idx]))
        assert holdout_f1 >= 0.95

        y_shuffled = list(y)
        np.random.default_rng(1).shuffle(y_shuffled)
        noise_model = train(X[train_idx], [y_shuffled[i] for i in train_idx],
                            cfg=cfg)
        noise_f1 = _f1([y_shuffled[i] for i in test_idx],
                       predict(noise_model, X[test_idx]))
        assert 0.4 <= noise_f1 <= 0.6

        save_model(model, tmp_path / "a.json")
        rerun = train(X[train_idx], [y[i] for i in train_idx], cfg=cfg)
        save_model(rerun, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == \
            (tmp_path / "b.json").read_bytes()
        assert c.elapsed < 5.0


def test_feature_extraction_bounds():
    """Tone centroid near 440 Hz, silent-clip zeros, gain-invariant flatness."""
    with criterion("feature extraction") as c:
        sr = 22050
        t = np.arange(sr) / sr
        tone = 0.4 * np.sin(2 * np.pi * 440.0 * t)
        feats = extract_feature_dict(AudioClip(tone, sr, "tone", 0.0, 1.0))
        assert 415.0 <= feats["spectral_centroid"] <= 465.0

        silence = extract_feature_dict(
            AudioClip(np.zeros(sr), sr, "silence", 0.0, 1.0)
        )
        assert silence["rms_mean"] == 0.0
        assert silence["energy_p90"] == 0.0

        rng = np.random.default_rng(12)
        mix = 0.2 * rng.standard_normal(sr) + tone
        f1x = extract_feature_dict(AudioClip(mix, sr, "mix", 0.0, 1.0))
        f2x = extract_feature_dict(AudioClip(2.0 * mix, sr, "mix", 0.0, 1.0))
        rel = abs(f2x["spectral_flatness"] - f1x["spectral_flatness"]) / \
            abs(f1x["spectral_flatness"])
        assert rel <= 1e-6


def test_pipeline_determinism(demo_corpus, demo_model, tmp_path):
    """Same inputs and seed twice: byte-identical dataset, under 30 s."""
    with criterion("pipeline determinism") as c:
        digests = []
        for run in ("run1", "run2"):
            out_dir = tmp_path / run
            t0 = time.perf_counter()
            code = cli_main([
                "pipeline",
                "--manifest", str(demo_corpus.paths["manifest"]),
                "--words-a", str(demo_corpus.paths["words_a"]),
                "--words-b", str(demo_corpus.paths["words_b"]),
                "--laughter", str(demo_corpus.paths["laughter_detector"]),
                "--audio-dir", str(demo_corpus.paths["audio_dir"]),
                "--model", str(demo_model["model"]),
                "--out-dir", str(out_dir),
                "--seed", "0",
            ])
            elapsed = time.perf_counter() - t0
            assert code == 0
            assert elapsed < 30.0
            digests.append(lkio.sha256_file(out_dir / "dataset.jsonl"))
        assert digests[0] == digests[1]
