"""Word-level label creation from laughter segments.

Two schemes are implemented because they genuinely disagree for long
laughs and the choice changes the dataset:

- span: a laugh marks every word from the one at/just before its onset
  through the one at/just before its offset. Labels read as "the
  audience is laughing during/right after this word".
- next_word: word i is positive when a laugh starts after word i ends
  and no later than the end of word i+1. Labels read as "a laugh starts
  right after this word".

Emission records the scheme in the artifact sidecar so downstream
training knows what the labels mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .records import (
    LabeledSequence,
    LaughterSegment,
    VideoRecord,
    Word,
)

SCHEMES = ("span", "next_word")


@dataclass
class LabelingConfig:
    scheme: str = "span"

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValidationError(
                f"scheme must be one of {SCHEMES}, got '{self.scheme}'"
            )


def _span_labels(starts, ends, laughs, counters) -> list[int]:
    n = len(starts)
    labels = np.zeros(n, dtype=np.int64)
    for t0, t1 in laughs:
        containing0 = np.nonzero((starts <= t0) & (t0 <= ends))[0]
        if containing0.size:
            start_idx = int(containing0[0])
        else:
            before = np.nonzero(ends < t0)[0]
            start_idx = int(before[-1]) if before.size else 0
        containing1 = np.nonzero((starts <= t1) & (t1 <= ends))[0]
        if containing1.size:
            end_idx = int(containing1[-1])
        else:
            before = np.nonzero(ends < t1)[0]
            if not before.size:
                counters["laughs_skipped"] = counters.get("laughs_skipped", 0) + 1
                continue
            end_idx = int(before[-1])
        lo, hi = min(start_idx, end_idx), max(start_idx, end_idx)
        labels[lo:hi + 1] = 1
    return labels.tolist()


def _next_word_labels(ends, laughs, video_duration_s) -> list[int]:
    n = len(ends)
    upper = np.empty(n)
    upper[:-1] = ends[1:]
    upper[-1] = video_duration_s if video_duration_s is not None else math.inf
    labels = np.zeros(n, dtype=np.int64)
    for t0, _ in laughs:
        labels[(ends < t0) & (t0 <= upper)] = 1
    return labels.tolist()


def label_words(
    words: list[Word],
    laughs: list[LaughterSegment],
    cfg: LabelingConfig | None = None,
    video_duration_s: float | None = None,
    counters: dict | None = None,
) -> list:
    """Binary label per word. `counters` collects skipped-laugh warnings."""
    cfg = cfg or LabelingConfig()
    cfg.validate()
    if counters is None:
        counters = {}
    if not words:
        return []
    starts = np.array([w.start_s for w in words])
    ends = np.array([w.end_s for w in words])
    if np.any(starts[1:] < starts[:-1]):
        raise ValidationError("words must be sorted by start time")
    pairs = sorted((l.start_s, l.end_s) for l in laughs)
    if cfg.scheme == "span":
        return _span_labels(starts, ends, pairs, counters)
    return _next_word_labels(ends, pairs, video_duration_s)


@dataclass
class EmitReport:
    scheme: str
    per_language: dict = field(default_factory=dict)
    skipped_no_words: list[str] = field(default_factory=list)
    laughs_skipped: int = 0

    def to_dict(self) -> dict:
        per_lang = {
            lang: dict(stats)
            for lang, stats in sorted(self.per_language.items())
        }
        totals = {
            key: sum(stats[key] for stats in per_lang.values())
            for key in ("videos", "words", "positive")
        }
        return {
            "scheme": self.scheme,
            "per_language": per_lang,
            "totals": totals,
            "skipped_no_words": sorted(self.skipped_no_words),
            "laughs_skipped": self.laughs_skipped,
        }


def emit_dataset(
    manifest: list[VideoRecord],
    words: list[Word],
    laughter: list[LaughterSegment],
    cfg: LabelingConfig | None = None,
) -> tuple[list[LabeledSequence], EmitReport]:
    """Build one labeled sequence per manifest video.

    Laughter is clipped to the video bounds before labeling. Videos
    without words are skipped and listed in the report.
    """
    cfg = cfg or LabelingConfig()
    cfg.validate()
    words_by_vid: dict[str, list[Word]] = {}
    for w in words:
        words_by_vid.setdefault(w.video_id, []).append(w)
    laughs_by_vid: dict[str, list[LaughterSegment]] = {}
    for seg in laughter:
        laughs_by_vid.setdefault(seg.video_id, []).append(seg)

    report = EmitReport(scheme=cfg.scheme)
    sequences: list[LabeledSequence] = []
    for rec in manifest:
        vid_words = words_by_vid.get(rec.video_id, [])
        if not vid_words:
            report.skipped_no_words.append(rec.video_id)
            continue
        clipped = []
        for seg in laughs_by_vid.get(rec.video_id, []):
            s = max(0.0, seg.start_s)
            e = min(rec.duration_s, seg.end_s)
            if e > s:
                clipped.append(LaughterSegment(seg.video_id, s, e, seg.source,
                                               seg.score))
        counters: dict = {}
        labels = label_words(
            vid_words, clipped, cfg,
            video_duration_s=rec.duration_s, counters=counters,
        )
        report.laughs_skipped += counters.get("laughs_skipped", 0)
        sequences.append(
            LabeledSequence(
                video_id=rec.video_id,
                language=rec.language,
                tokens=[w.token for w in vid_words],
                labels=labels,
            )
        )
        stats = report.per_language.setdefault(
            rec.language, {"videos": 0, "words": 0, "positive": 0}
        )
        stats["videos"] += 1
        stats["words"] += len(labels)
        stats["positive"] += sum(labels)
    return sequences, report
