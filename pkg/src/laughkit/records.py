"""Domain records and their invariants.

Timestamps are decimal seconds inside a single video's timeline, stored
on disk with 3 fractional digits (quantize with `q3` before writing).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ValidationError

LANGUAGES = ("cs", "en", "es", "fr", "hu", "it", "pt")
SPLITS = ("train", "test")
LAUGHTER_SOURCES = ("detector", "asr_gap", "manual")


def q3(seconds: float) -> float:
    """Quantize a timestamp to the on-disk resolution of 1 ms."""
    return round(float(seconds), 3)


@dataclass
class VideoRecord:
    video_id: str
    language: str
    channel: str
    duration_s: float
    split: str


@dataclass
class Word:
    """One ASR token with begin/end timestamps."""

    video_id: str
    idx: int
    token: str
    start_s: float
    end_s: float


@dataclass
class LaughterSegment:
    """A time interval of audience laughter with a provenance tag."""

    video_id: str
    start_s: float
    end_s: float
    source: str
    score: Optional[float] = None


@dataclass
class LabeledSequence:
    """Per-video word sequence with binary laugh labels."""

    video_id: str
    language: str
    tokens: list[str]
    labels: list[int]


@dataclass
class CandidateLaughter:
    """A laughter interval recovered from a dual-ASR timestamp discrepancy.

    `prev_word_idx`/`next_word_idx` index into the corrected word list of
    the same video; `next_word_idx` is None when the anomaly sits on the
    final word.
    """

    video_id: str
    start_s: float
    end_s: float
    prev_word_idx: int
    next_word_idx: Optional[int]
    corrected_prev_end_s: float
    corrected_next_start_s: Optional[float]


def validate_video_record(rec: VideoRecord) -> None:
    if not rec.video_id:
        raise ValidationError("video_id must be non-empty")
    if rec.language not in LANGUAGES:
        raise ValidationError(
            f"language '{rec.language}' not in supported set {sorted(LANGUAGES)}"
        )
    if rec.split not in SPLITS:
        raise ValidationError(f"split '{rec.split}' not in {SPLITS}")
    if not (rec.duration_s >= 0):
        raise ValidationError(f"duration_s must be >= 0, got {rec.duration_s}")


def validate_word(word: Word) -> None:
    if not word.video_id:
        raise ValidationError("video_id must be non-empty")
    if word.idx < 0:
        raise ValidationError(f"idx must be >= 0, got {word.idx}")
    if word.token.strip() == "":
        raise ValidationError("token is empty after whitespace trimming")
    if not (0 <= word.start_s <= word.end_s):
        raise ValidationError(
            f"need 0 <= start_s <= end_s, got [{word.start_s}, {word.end_s}]"
        )


def validate_laughter(seg: LaughterSegment) -> None:
    if not seg.video_id:
        raise ValidationError("video_id must be non-empty")
    if not (seg.start_s < seg.end_s):
        raise ValidationError(
            f"need start_s < end_s, got [{seg.start_s}, {seg.end_s}]"
        )
    if seg.source not in LAUGHTER_SOURCES:
        raise ValidationError(f"source '{seg.source}' not in {LAUGHTER_SOURCES}")
    if seg.score is not None and not (0.0 <= seg.score <= 1.0):
        raise ValidationError(f"score must be in [0, 1], got {seg.score}")


def validate_labeled_sequence(seq: LabeledSequence) -> None:
    if seq.language not in LANGUAGES:
        raise ValidationError(
            f"language '{seq.language}' not in supported set {sorted(LANGUAGES)}"
        )
    if len(seq.tokens) != len(seq.labels):
        raise ValidationError(
            f"tokens/labels length mismatch: {len(seq.tokens)} vs {len(seq.labels)}"
        )
    for lab in seq.labels:
        if lab not in (0, 1):
            raise ValidationError(f"labels must be 0 or 1, got {lab!r}")


def validate_word_sequence(words: list[Word]) -> None:
    """Check the per-video ordering invariants on a word list.

    Within one video idx must be strictly increasing and start_s
    non-decreasing; words of different videos may be interleaved.
    """
    last: dict[str, Word] = {}
    for word in words:
        prev = last.get(word.video_id)
        if prev is not None:
            if word.idx <= prev.idx:
                raise ValidationError(
                    f"video '{word.video_id}': idx {word.idx} not greater "
                    f"than previous idx {prev.idx}"
                )
            if word.start_s < prev.start_s:
                raise ValidationError(
                    f"video '{word.video_id}': start_s {word.start_s} decreases "
                    f"below previous start_s {prev.start_s}"
                )
        last[word.video_id] = word


def validate_laughter_track(segments: list[LaughterSegment]) -> None:
    """Check that manual segments never overlap within one video."""
    manual: dict[str, list[LaughterSegment]] = {}
    for seg in segments:
        if seg.source == "manual":
            manual.setdefault(seg.video_id, []).append(seg)
    for video_id, segs in manual.items():
        segs = sorted(segs, key=lambda s: (s.start_s, s.end_s))
        for a, b in zip(segs, segs[1:]):
            if b.start_s < a.end_s:
                raise ValidationError(
                    f"video '{video_id}': manual segments "
                    f"[{a.start_s}, {a.end_s}] and [{b.start_s}, {b.end_s}] overlap"
                )


def validate_candidate(cand: CandidateLaughter) -> None:
    if not (cand.start_s < cand.end_s):
        raise ValidationError(
            f"need start_s < end_s, got [{cand.start_s}, {cand.end_s}]"
        )
    if cand.prev_word_idx < 0:
        raise ValidationError(f"prev_word_idx must be >= 0, got {cand.prev_word_idx}")
    if cand.next_word_idx is not None and cand.next_word_idx <= cand.prev_word_idx:
        raise ValidationError(
            f"next_word_idx {cand.next_word_idx} must exceed "
            f"prev_word_idx {cand.prev_word_idx}"
        )
