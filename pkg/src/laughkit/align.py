"""Dual-ASR discrepancy mining.

Audience laughter corrupts ASR word timestamps in a systematic, asymmetric
way: one system stretches the word *before* the laugh (its end timestamp
swallows the laugh), the other stretches the word *after* it (its start
timestamp swallows the laugh). Aligning the two transcripts and
intersecting the stretched words recovers the laugh interval and the
correct word boundaries at the same time.

`words_a` is the previous-word-stretching system, `words_b` the
next-word-stretching one. The corrected transcript is system A's word
list with the flanking words repaired: the previous word takes system B's
interval, the next word keeps system A's own.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .errors import ValidationError
from .records import CandidateLaughter, LaughterSegment, VideoRecord, Word

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT_A = "insert_a"
INSERT_B = "insert_b"


@dataclass
class AlignedPair:
    a_idx: Optional[int]
    b_idx: Optional[int]
    op: str


@dataclass
class DualTranscript:
    video_id: str
    words_a: list[Word]
    words_b: list[Word]


@dataclass
class MineConfig:
    """Thresholds for anomaly detection and candidate filtering.

    A word is anomalous when its duration exceeds both an absolute floor
    and a multiple of the per-video median word duration. Candidates
    shorter than `min_candidate_dur` are never emitted, nor are candidates
    that an existing laughter segment already covers by at least
    `max_existing_overlap` of their length.
    """

    abs_dur_s: float = 0.8
    rel_factor: float = 3.0
    min_candidate_dur: float = 0.5
    max_existing_overlap: float = 0.5

    def validate(self) -> None:
        if self.abs_dur_s <= 0:
            raise ValidationError(f"abs_dur_s must be > 0, got {self.abs_dur_s}")
        if self.rel_factor <= 0:
            raise ValidationError(
                f"rel_factor must be > 0, got {self.rel_factor}"
            )
        if self.min_candidate_dur <= 0:
            raise ValidationError(
                f"min_candidate_dur must be > 0, got {self.min_candidate_dur}"
            )
        if not 0.0 < self.max_existing_overlap <= 1.0:
            raise ValidationError(
                "max_existing_overlap must be in (0, 1], got "
                f"{self.max_existing_overlap}"
            )


def _token_of(item) -> str:
    return item.token if isinstance(item, Word) else str(item)


def align_tokens(words_a: Sequence, words_b: Sequence) -> list[AlignedPair]:
    """Minimal-cost token alignment of two transcripts.

    Levenshtein costs over case-folded tokens: match 0, substitute 1,
    insertion on either side 1. Ties break preferring
    match > substitute > insert_a > insert_b. Accepts `Word` lists or
    plain token sequences.
    """
    a = [_token_of(w).casefold() for w in words_a]
    b = [_token_of(w).casefold() for w in words_b]
    n, m = len(a), len(b)

    # Two-row cost DP; full uint8 backpointer table for the traceback.
    back = bytearray(n * m) if n and m else bytearray()
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        ai = a[i - 1]
        row_off = (i - 1) * m
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                best, op = prev[j - 1], 0  # match
            else:
                best, op = prev[j - 1] + 1, 1  # substitute
            up = prev[j] + 1  # consume from A
            if up < best:
                best, op = up, 2
            left = cur[j - 1] + 1  # consume from B
            if left < best:
                best, op = left, 3
            cur[j] = best
            back[row_off + j - 1] = op
        prev = cur

    pairs: list[AlignedPair] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i == 0:
            op = 3
        elif j == 0:
            op = 2
        else:
            op = back[(i - 1) * m + j - 1]
        if op == 0:
            pairs.append(AlignedPair(i - 1, j - 1, MATCH))
            i, j = i - 1, j - 1
        elif op == 1:
            pairs.append(AlignedPair(i - 1, j - 1, SUBSTITUTE))
            i, j = i - 1, j - 1
        elif op == 2:
            pairs.append(AlignedPair(i - 1, None, INSERT_A))
            i -= 1
        else:
            pairs.append(AlignedPair(None, j - 1, INSERT_B))
            j -= 1
    pairs.reverse()
    return pairs


def alignment_cost(pairs: list[AlignedPair]) -> int:
    return sum(1 for p in pairs if p.op != MATCH)


def find_anomalous_words(words: list[Word], cfg: MineConfig) -> list[int]:
    """Indices of words whose duration flags them as laugh-stretched."""
    if not words:
        return []
    durations = [w.end_s - w.start_s for w in words]
    ordered = sorted(durations)
    k = len(ordered)
    median = (
        ordered[k // 2] if k % 2 else 0.5 * (ordered[k // 2 - 1] + ordered[k // 2])
    )
    threshold = max(cfg.abs_dur_s, cfg.rel_factor * median)
    return [i for i, d in enumerate(durations) if d > threshold]


def _ensure_sorted(items, key, what: str) -> None:
    values = [key(x) for x in items]
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValidationError(f"{what} must be sorted by start time")


def _overlap(a0: float, a1: float, b0: float, b1: float) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def extract_candidates(
    dual: DualTranscript,
    existing: list[LaughterSegment],
    cfg: MineConfig | None = None,
) -> tuple[list[CandidateLaughter], list[Word]]:
    """Mine laughter candidates from one video's transcript pair.

    Returns the accepted candidates plus system A's word list with the
    flanking words repaired. Words never overlap an emitted candidate and
    keep their order; only the words around an accepted candidate change.
    """
    cfg = cfg or MineConfig()
    if any(w.video_id != dual.video_id for w in dual.words_a + dual.words_b):
        raise ValidationError("transcript words reference a different video_id")
    _ensure_sorted(dual.words_a, lambda w: w.start_s, "words_a")
    _ensure_sorted(dual.words_b, lambda w: w.start_s, "words_b")
    _ensure_sorted(existing, lambda s: s.start_s, "existing laughter")

    pairs = align_tokens(dual.words_a, dual.words_b)
    anomalous_a = set(find_anomalous_words(dual.words_a, cfg))
    anomalous_b = set(find_anomalous_words(dual.words_b, cfg))

    pair_of_a = {p.a_idx: k for k, p in enumerate(pairs) if p.a_idx is not None}
    b_aligned_to_a = {
        p.a_idx: p.b_idx for p in pairs if p.op in (MATCH, SUBSTITUTE)
    }

    corrected = list(dual.words_a)
    candidates: list[CandidateLaughter] = []
    blockers = [s for s in existing if s.video_id == dual.video_id]
    consumed_b: set[int] = set()

    for a_idx in sorted(anomalous_a):
        a_word = dual.words_a[a_idx]

        # First anomalous successor-region word in B that intersects A's
        # stretched word; B insertions inside the gap qualify too.
        b_hit = None
        for p in pairs[pair_of_a[a_idx] + 1:]:
            if p.b_idx is None:
                continue
            b_word = dual.words_b[p.b_idx]
            if b_word.start_s > a_word.end_s:
                break
            if (
                p.b_idx in anomalous_b
                and p.b_idx not in consumed_b
                and _overlap(a_word.start_s, a_word.end_s,
                             b_word.start_s, b_word.end_s) > 0
            ):
                b_hit = p.b_idx
                break
        if b_hit is None:
            continue
        b_word = dual.words_b[b_hit]

        start = max(a_word.start_s, b_word.start_s)
        end = min(a_word.end_s, b_word.end_s)
        length = end - start
        if length < cfg.min_candidate_dur:
            continue
        covered = any(
            _overlap(start, end, s.start_s, s.end_s)
            >= cfg.max_existing_overlap * length
            for s in blockers
        )
        if covered:
            continue
        consumed_b.add(b_hit)

        # Repair the previous word: take system B's interval when aligned,
        # otherwise just cut the laugh off its end.
        b_prev = b_aligned_to_a.get(a_idx)
        if b_prev is not None:
            new_start = dual.words_b[b_prev].start_s
            new_end = dual.words_b[b_prev].end_s
        else:
            new_start, new_end = a_word.start_s, start
        new_end = min(new_end, start)
        new_start = min(new_start, new_end)
        if a_idx > 0:
            new_start = max(new_start, corrected[a_idx - 1].start_s)
            new_end = max(new_end, new_start)
        corrected[a_idx] = replace(a_word, start_s=new_start, end_s=new_end)

        next_idx: Optional[int] = a_idx + 1 if a_idx + 1 < len(corrected) else None
        if next_idx is not None:
            nxt = corrected[next_idx]
            if nxt.start_s < end:
                corrected[next_idx] = replace(
                    nxt, start_s=end, end_s=max(nxt.end_s, end)
                )

        candidate = CandidateLaughter(
            video_id=dual.video_id,
            start_s=start,
            end_s=end,
            prev_word_idx=a_idx,
            next_word_idx=next_idx,
            corrected_prev_end_s=corrected[a_idx].end_s,
            corrected_next_start_s=(
                corrected[next_idx].start_s if next_idx is not None else None
            ),
        )
        candidates.append(candidate)
        blockers.append(
            LaughterSegment(dual.video_id, start, end, source="asr_gap")
        )

    candidates.sort(key=lambda c: (c.start_s, c.end_s))
    return candidates, corrected


@dataclass
class MiningReport:
    per_video: dict[str, int] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)

    @property
    def total_candidates(self) -> int:
        return sum(self.per_video.values())

    def to_dict(self) -> dict:
        return {
            "per_video": dict(sorted(self.per_video.items())),
            "skipped": sorted(self.skipped),
            "total_candidates": self.total_candidates,
            "videos_mined": len(self.per_video),
        }


def mine_corpus(
    manifest: list[VideoRecord],
    transcripts: dict[str, DualTranscript],
    existing: list[LaughterSegment],
    cfg: MineConfig | None = None,
) -> tuple[list[CandidateLaughter], list[Word], MiningReport]:
    """Run candidate extraction over a whole corpus.

    Videos without a transcript pair are skipped and recorded in the
    report. Corrected words cover mined videos only.
    """
    cfg = cfg or MineConfig()
    by_video: dict[str, list[LaughterSegment]] = {}
    for seg in existing:
        by_video.setdefault(seg.video_id, []).append(seg)

    all_candidates: list[CandidateLaughter] = []
    all_words: list[Word] = []
    report = MiningReport()
    for rec in manifest:
        dual = transcripts.get(rec.video_id)
        if dual is None:
            report.skipped.append(rec.video_id)
            continue
        segs = sorted(by_video.get(rec.video_id, []), key=lambda s: s.start_s)
        cands, corrected = extract_candidates(dual, segs, cfg)
        report.per_video[rec.video_id] = len(cands)
        all_candidates.extend(cands)
        all_words.extend(corrected)
    return all_candidates, all_words, report
