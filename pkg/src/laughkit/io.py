"""JSON-Lines readers and writers for every corpus artifact.

Readers reject anything that violates the record invariants, so a file
that loads is guaranteed valid. Writers validate before touching disk
and quantize timestamps to 3 fractional digits, making write→read a
round trip for millisecond-aligned data.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional

from .errors import ParseError, SchemaError, ValidationError
from .records import (
    CandidateLaughter,
    LabeledSequence,
    LaughterSegment,
    VideoRecord,
    Word,
    q3,
    validate_candidate,
    validate_labeled_sequence,
    validate_laughter,
    validate_laughter_track,
    validate_video_record,
    validate_word,
    validate_word_sequence,
)


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(path, lineno, "expected a JSON object per line")
            yield lineno, obj


def _field(obj: dict, name: str, kind, path: Path, lineno: int):
    if name not in obj:
        raise SchemaError(path, lineno, name, "missing")
    value = obj[name]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(path, lineno, name, f"expected number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(path, lineno, name, f"expected integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise SchemaError(path, lineno, name, f"expected string, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise SchemaError(path, lineno, name, f"expected list, got {value!r}")
        return value
    raise AssertionError(kind)


def _check(record, validator, path: Path, lineno: int) -> None:
    try:
        validator(record)
    except ValidationError as exc:
        raise ValidationError(f"{path}:{lineno}: {exc}") from exc


def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


# --- manifest --------------------------------------------------------------

def read_manifest(path) -> list[VideoRecord]:
    """Load manifest.jsonl, rejecting duplicate video ids."""
    path = Path(path)
    records: list[VideoRecord] = []
    seen: dict[str, int] = {}
    for lineno, obj in _iter_jsonl(path):
        rec = VideoRecord(
            video_id=_field(obj, "video_id", str, path, lineno),
            language=_field(obj, "language", str, path, lineno),
            channel=_field(obj, "channel", str, path, lineno),
            duration_s=_field(obj, "duration_s", float, path, lineno),
            split=_field(obj, "split", str, path, lineno),
        )
        _check(rec, validate_video_record, path, lineno)
        if rec.video_id in seen:
            raise ValidationError(
                f"{path}:{lineno}: duplicate video_id '{rec.video_id}' "
                f"(first seen on line {seen[rec.video_id]})"
            )
        seen[rec.video_id] = lineno
        records.append(rec)
    return records


def write_manifest(path, records: Iterable[VideoRecord]) -> None:
    path = Path(path)
    records = list(records)
    seen: set[str] = set()
    for rec in records:
        validate_video_record(rec)
        if rec.video_id in seen:
            raise ValidationError(f"duplicate video_id '{rec.video_id}'")
        seen.add(rec.video_id)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(_dump({
                "video_id": rec.video_id,
                "language": rec.language,
                "channel": rec.channel,
                "duration_s": q3(rec.duration_s),
                "split": rec.split,
            }) + "\n")


# --- words -----------------------------------------------------------------

def read_words(path) -> list[Word]:
    path = Path(path)
    words: list[Word] = []
    last: dict[str, Word] = {}
    for lineno, obj in _iter_jsonl(path):
        word = Word(
            video_id=_field(obj, "video_id", str, path, lineno),
            idx=_field(obj, "idx", int, path, lineno),
            token=_field(obj, "token", str, path, lineno).strip(),
            start_s=_field(obj, "start_s", float, path, lineno),
            end_s=_field(obj, "end_s", float, path, lineno),
        )
        _check(word, validate_word, path, lineno)
        prev = last.get(word.video_id)
        if prev is not None:
            _check([prev, word], validate_word_sequence, path, lineno)
        last[word.video_id] = word
        words.append(word)
    return words


def write_words(path, words: Iterable[Word]) -> None:
    path = Path(path)
    words = list(words)
    for word in words:
        validate_word(word)
    validate_word_sequence(words)
    with path.open("w", encoding="utf-8") as fh:
        for word in words:
            fh.write(_dump({
                "video_id": word.video_id,
                "idx": word.idx,
                "token": word.token.strip(),
                "start_s": q3(word.start_s),
                "end_s": q3(word.end_s),
            }) + "\n")


# --- laughter --------------------------------------------------------------

def read_laughter(path) -> list[LaughterSegment]:
    path = Path(path)
    segments: list[LaughterSegment] = []
    for lineno, obj in _iter_jsonl(path):
        score = obj.get("score")
        if score is not None:
            score = _field(obj, "score", float, path, lineno)
        seg = LaughterSegment(
            video_id=_field(obj, "video_id", str, path, lineno),
            start_s=_field(obj, "start_s", float, path, lineno),
            end_s=_field(obj, "end_s", float, path, lineno),
            source=_field(obj, "source", str, path, lineno),
            score=score,
        )
        _check(seg, validate_laughter, path, lineno)
        segments.append(seg)
    validate_laughter_track(segments)
    return segments


def write_laughter(path, segments: Iterable[LaughterSegment]) -> None:
    path = Path(path)
    segments = list(segments)
    for seg in segments:
        validate_laughter(seg)
    validate_laughter_track(segments)
    with path.open("w", encoding="utf-8") as fh:
        for seg in segments:
            obj: dict[str, Any] = {
                "video_id": seg.video_id,
                "start_s": q3(seg.start_s),
                "end_s": q3(seg.end_s),
                "source": seg.source,
            }
            if seg.score is not None:
                obj["score"] = round(float(seg.score), 6)
            fh.write(_dump(obj) + "\n")


# --- dataset / predictions --------------------------------------------------

def read_dataset(path) -> list[LabeledSequence]:
    path = Path(path)
    sequences: list[LabeledSequence] = []
    for lineno, obj in _iter_jsonl(path):
        seq = LabeledSequence(
            video_id=_field(obj, "video_id", str, path, lineno),
            language=_field(obj, "language", str, path, lineno),
            tokens=_field(obj, "tokens", list, path, lineno),
            labels=_field(obj, "labels", list, path, lineno),
        )
        for tok in seq.tokens:
            if not isinstance(tok, str):
                raise SchemaError(path, lineno, "tokens",
                                  f"expected strings, got {tok!r}")
        _check(seq, validate_labeled_sequence, path, lineno)
        sequences.append(seq)
    return sequences


def write_dataset(path, sequences: Iterable[LabeledSequence]) -> None:
    path = Path(path)
    sequences = list(sequences)
    for seq in sequences:
        validate_labeled_sequence(seq)
    with path.open("w", encoding="utf-8") as fh:
        for seq in sequences:
            fh.write(_dump({
                "video_id": seq.video_id,
                "language": seq.language,
                "tokens": list(seq.tokens),
                "labels": [int(x) for x in seq.labels],
            }) + "\n")


read_predictions = read_dataset
write_predictions = write_dataset


# --- ASR-gap candidates ------------------------------------------------------

def read_candidates(path) -> list[CandidateLaughter]:
    path = Path(path)
    out: list[CandidateLaughter] = []
    for lineno, obj in _iter_jsonl(path):
        next_idx = obj.get("next_word_idx")
        if next_idx is not None:
            next_idx = _field(obj, "next_word_idx", int, path, lineno)
        next_start = obj.get("corrected_next_start_s")
        if next_start is not None:
            next_start = _field(obj, "corrected_next_start_s", float, path, lineno)
        cand = CandidateLaughter(
            video_id=_field(obj, "video_id", str, path, lineno),
            start_s=_field(obj, "start_s", float, path, lineno),
            end_s=_field(obj, "end_s", float, path, lineno),
            prev_word_idx=_field(obj, "prev_word_idx", int, path, lineno),
            next_word_idx=next_idx,
            corrected_prev_end_s=_field(obj, "corrected_prev_end_s", float,
                                        path, lineno),
            corrected_next_start_s=next_start,
        )
        _check(cand, validate_candidate, path, lineno)
        out.append(cand)
    return out


def write_candidates(path, candidates: Iterable[CandidateLaughter]) -> None:
    path = Path(path)
    candidates = list(candidates)
    for cand in candidates:
        validate_candidate(cand)
    with path.open("w", encoding="utf-8") as fh:
        for cand in candidates:
            obj: dict[str, Any] = {
                "video_id": cand.video_id,
                "start_s": q3(cand.start_s),
                "end_s": q3(cand.end_s),
                "prev_word_idx": cand.prev_word_idx,
                "next_word_idx": cand.next_word_idx,
                "corrected_prev_end_s": q3(cand.corrected_prev_end_s),
                "corrected_next_start_s": (
                    None if cand.corrected_next_start_s is None
                    else q3(cand.corrected_next_start_s)
                ),
            }
            fh.write(_dump(obj) + "\n")


# --- segment CSV --------------------------------------------------------------

@dataclass
class SegmentKey:
    """One CSV row keying an audio interval, with an optional class label."""

    video_id: str
    start_s: float
    end_s: float
    label: Optional[str] = None


def read_segments_csv(path) -> list[SegmentKey]:
    """CSV of intervals: video_id,start_s,end_s with an optional label column."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file") from None
        if header not in (["video_id", "start_s", "end_s"],
                          ["video_id", "start_s", "end_s", "label"]):
            raise ParseError(
                path, 1,
                "header must be video_id,start_s,end_s with optional label",
            )
        has_label = len(header) == 4
        rows: list[SegmentKey] = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise ParseError(
                    path, lineno,
                    f"expected {len(header)} cells, got {len(cells)}",
                )
            try:
                start_s = float(cells[1])
                end_s = float(cells[2])
            except ValueError as exc:
                raise ParseError(path, lineno, f"bad number: {exc}") from None
            if not (math.isfinite(start_s) and math.isfinite(end_s)):
                raise ParseError(path, lineno, "non-finite interval")
            if end_s <= start_s:
                raise ParseError(path, lineno,
                                 f"empty interval [{start_s}, {end_s}]")
            if not cells[0]:
                raise ParseError(path, lineno, "empty video_id")
            label = cells[3] if has_label else None
            if has_label and label not in ("laughter", "other"):
                raise ParseError(path, lineno,
                                 f"label must be laughter or other, got {label!r}")
            rows.append(SegmentKey(cells[0], start_s, end_s, label))
    return rows


# --- provenance sidecars ------------------------------------------------------

def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def sidecar_path(artifact_path) -> Path:
    artifact_path = Path(artifact_path)
    return artifact_path.with_name(artifact_path.stem + ".meta.json")


def write_sidecar(artifact_path, config: dict, inputs: dict | None = None,
                  extra: dict | None = None) -> Path:
    """Write `<artifact stem>.meta.json` recording run provenance.

    The sidecar holds the config, its digest, and a sha256 per named
    input file. No timestamps, so re-running with identical inputs
    reproduces the sidecar byte for byte.
    """
    meta = {
        "artifact": Path(artifact_path).name,
        "config": config,
        "config_digest": config_digest(config),
        "inputs": {
            name: {"path": str(p), "sha256": sha256_file(p)}
            for name, p in sorted((inputs or {}).items())
        },
    }
    if extra:
        meta.update(extra)
    path = sidecar_path(artifact_path)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
