"""Scoring: segment-level IoU matching and token-level metrics.

Segment scoring matches predicted laughter events against gold events
greedily by descending IoU, one-to-one, accepting a pair only when IoU
strictly exceeds the threshold. Token scoring is plain binary
classification over word labels. Both aggregate micro within a language;
the cross-language "average" row is the arithmetic mean of per-language
metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ValidationError
from .records import LabeledSequence, LaughterSegment, VideoRecord


@dataclass
class EvalConfig:
    iou_threshold: float = 0.2

    def validate(self) -> None:
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValidationError(
                f"iou_threshold must be in (0, 1], got {self.iou_threshold}"
            )


def _interval(x) -> tuple:
    if isinstance(x, LaughterSegment):
        return (x.start_s, x.end_s)
    return (float(x[0]), float(x[1]))


def iou(a, b) -> float:
    """Intersection over union of two time intervals, 0 when disjoint."""
    a0, a1 = _interval(a)
    b0, b1 = _interval(b)
    inter = min(a1, b1) - max(a0, b0)
    if inter <= 0.0:
        return 0.0
    union = (a1 - a0) + (b1 - b0) - inter
    return inter / union


def match_segments(
    pred: list[LaughterSegment],
    gold: list[LaughterSegment],
    cfg: EvalConfig | None = None,
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """One-to-one greedy matching for a single video.

    Returns (tp_pairs, fp_pred_indices, fn_gold_indices); tp pairs hold
    (pred_idx, gold_idx). Pairs are taken in descending IoU order, ties
    broken by earlier gold start then earlier pred start.
    """
    cfg = cfg or EvalConfig()
    cfg.validate()
    scored = []
    for gi, g in enumerate(gold):
        for pi, p in enumerate(pred):
            val = iou(p, g)
            if val > cfg.iou_threshold:
                scored.append((-val, g.start_s, p.start_s, pi, gi))
    scored.sort()
    matched_pred: set[int] = set()
    matched_gold: set[int] = set()
    tp_pairs: list[tuple[int, int]] = []
    for _, _, _, pi, gi in scored:
        if pi in matched_pred or gi in matched_gold:
            continue
        matched_pred.add(pi)
        matched_gold.add(gi)
        tp_pairs.append((pi, gi))
    fp = [pi for pi in range(len(pred)) if pi not in matched_pred]
    fn = [gi for gi in range(len(gold)) if gi not in matched_gold]
    return tp_pairs, fp, fn


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return precision, recall, f1


@dataclass
class ClassMetrics:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[2]

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class MetricReport:
    kind: str
    overall: ClassMetrics
    per_language: dict[str, ClassMetrics] = field(default_factory=dict)
    average: Optional[dict] = None
    iou_threshold: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "overall": self.overall.to_dict(),
            "per_language": {
                lang: m.to_dict()
                for lang, m in sorted(self.per_language.items())
            },
        }
        if self.average is not None:
            out["average"] = self.average
        if self.iou_threshold is not None:
            out["iou_threshold"] = self.iou_threshold
        return out


def _language_average(per_language: dict[str, ClassMetrics]) -> Optional[dict]:
    if not per_language:
        return None
    rows = list(per_language.values())
    return {
        "precision": sum(r.precision for r in rows) / len(rows),
        "recall": sum(r.recall for r in rows) / len(rows),
        "f1": sum(r.f1 for r in rows) / len(rows),
    }


def eval_segments(
    pred: list[LaughterSegment],
    gold: list[LaughterSegment],
    cfg: EvalConfig | None = None,
    manifest: list[VideoRecord] | None = None,
) -> MetricReport:
    """Event-level detection metrics, micro-aggregated.

    A manifest supplies the video-to-language mapping for per-language
    rows; without one everything lands in a single 'all' row.
    """
    cfg = cfg or EvalConfig()
    cfg.validate()
    lang_of = {r.video_id: r.language for r in manifest} if manifest else {}

    pred_by_vid: dict[str, list[LaughterSegment]] = {}
    for seg in pred:
        pred_by_vid.setdefault(seg.video_id, []).append(seg)
    gold_by_vid: dict[str, list[LaughterSegment]] = {}
    for seg in gold:
        gold_by_vid.setdefault(seg.video_id, []).append(seg)

    overall = ClassMetrics()
    per_language: dict[str, ClassMetrics] = {}
    for vid in sorted(set(pred_by_vid) | set(gold_by_vid)):
        p = sorted(pred_by_vid.get(vid, []), key=lambda s: s.start_s)
        g = sorted(gold_by_vid.get(vid, []), key=lambda s: s.start_s)
        tp_pairs, fp, fn = match_segments(p, g, cfg)
        lang = lang_of.get(vid, "all")
        row = per_language.setdefault(lang, ClassMetrics())
        for bucket in (overall, row):
            bucket.tp += len(tp_pairs)
            bucket.fp += len(fp)
            bucket.fn += len(fn)
    return MetricReport(
        kind="segments",
        overall=overall,
        per_language=per_language,
        average=_language_average(per_language),
        iou_threshold=cfg.iou_threshold,
    )


def eval_tokens(
    pred: list[LabeledSequence],
    gold: list[LabeledSequence],
) -> MetricReport:
    """Word-level binary metrics for the positive class.

    Token streams must agree exactly with the gold file; the first
    divergent video is named in the error.
    """
    pred_by_vid = {s.video_id: s for s in pred}
    if len(pred_by_vid) != len(pred):
        raise ValidationError("duplicate video_id in predictions")
    gold_ids = [s.video_id for s in gold]
    if len(set(gold_ids)) != len(gold_ids):
        raise ValidationError("duplicate video_id in gold")
    missing = [s.video_id for s in gold if s.video_id not in pred_by_vid]
    if missing:
        raise ValidationError(f"predictions missing video '{missing[0]}'")
    extra = sorted(set(pred_by_vid) - set(gold_ids))
    if extra:
        raise ValidationError(f"predictions contain unknown video '{extra[0]}'")

    overall = ClassMetrics()
    per_language: dict[str, ClassMetrics] = {}
    for g in gold:
        p = pred_by_vid[g.video_id]
        if p.tokens != g.tokens:
            raise ValidationError(
                f"token mismatch for video '{g.video_id}': prediction and "
                "gold must label the same word sequence"
            )
        row = per_language.setdefault(g.language, ClassMetrics())
        for gl, pl in zip(g.labels, p.labels):
            if gl == 1 and pl == 1:
                overall.tp += 1
                row.tp += 1
            elif gl == 0 and pl == 1:
                overall.fp += 1
                row.fp += 1
            elif gl == 1 and pl == 0:
                overall.fn += 1
                row.fn += 1
    return MetricReport(
        kind="tokens",
        overall=overall,
        per_language=per_language,
        average=_language_average(per_language),
    )


def format_metric_table(report: MetricReport) -> str:
    """Aligned text table: one row per language, then average and overall."""
    headers = ["language", "P", "R", "F1", "TP", "FP", "FN"]
    rows = []
    for lang, m in sorted(report.per_language.items()):
        rows.append([lang, f"{m.precision:.3f}", f"{m.recall:.3f}",
                     f"{m.f1:.3f}", str(m.tp), str(m.fp), str(m.fn)])
    if report.average is not None and len(report.per_language) > 1:
        avg = report.average
        rows.append(["avg", f"{avg['precision']:.3f}", f"{avg['recall']:.3f}",
                     f"{avg['f1']:.3f}", "", "", ""])
    m = report.overall
    rows.append(["overall", f"{m.precision:.3f}", f"{m.recall:.3f}",
                 f"{m.f1:.3f}", str(m.tp), str(m.fp), str(m.fn)])
    widths = [
        max(len(headers[c]), max(len(r[c]) for r in rows))
        for c in range(len(headers))
    ]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)
