"""Corpus statistics aggregation over manifest, words and laughter tracks."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .records import LaughterSegment, VideoRecord, Word


@dataclass
class LanguageStats:
    videos: int = 0
    hours: float = 0.0
    words: int = 0
    laughter: int = 0


@dataclass
class StatsReport:
    per_language: dict[str, LanguageStats] = field(default_factory=dict)
    totals: LanguageStats = field(default_factory=LanguageStats)

    def to_dict(self) -> dict:
        rows = {
            lang: vars(stats) for lang, stats in sorted(self.per_language.items())
        }
        return {"per_language": rows, "totals": vars(self.totals)}


def corpus_stats(
    manifest: list[VideoRecord],
    words: list[Word],
    laughter: list[LaughterSegment],
) -> StatsReport:
    """Aggregate per-language video/hour/word/laughter counts.

    Hours are duration sums rounded to 0.1 h per language; the totals row
    aggregates the per-language rows so that it is exactly their
    elementwise sum.
    """
    by_id = {rec.video_id: rec for rec in manifest}

    dangling = sorted(
        {w.video_id for w in words if w.video_id not in by_id}
        | {s.video_id for s in laughter if s.video_id not in by_id}
    )
    if dangling:
        raise ValidationError(
            "records reference unknown video ids: " + ", ".join(dangling)
        )

    max_end: dict[str, float] = {}
    for w in words:
        max_end[w.video_id] = max(max_end.get(w.video_id, 0.0), w.end_s)
    for s in laughter:
        max_end[s.video_id] = max(max_end.get(s.video_id, 0.0), s.end_s)
    too_long = sorted(
        vid for vid, end in max_end.items() if end > by_id[vid].duration_s
    )
    if too_long:
        raise ValidationError(
            "timestamps exceed manifest duration for: " + ", ".join(too_long)
        )

    duration_by_lang: dict[str, float] = {}
    report = StatsReport()
    for rec in manifest:
        row = report.per_language.setdefault(rec.language, LanguageStats())
        row.videos += 1
        duration_by_lang[rec.language] = (
            duration_by_lang.get(rec.language, 0.0) + rec.duration_s
        )
    for w in words:
        report.per_language[by_id[w.video_id].language].words += 1
    for s in laughter:
        report.per_language[by_id[s.video_id].language].laughter += 1

    for lang, row in report.per_language.items():
        row.hours = round(duration_by_lang[lang] / 3600.0, 1)
        report.totals.videos += row.videos
        report.totals.words += row.words
        report.totals.laughter += row.laughter
    report.totals.hours = round(
        sum(row.hours for row in report.per_language.values()), 1
    )
    return report


def format_stats_table(report: StatsReport) -> str:
    """Render the report as an aligned text table."""
    header = f"{'language':<10}{'videos':>8}{'hours':>8}{'words':>10}{'laughter':>10}"
    lines = [header, "-" * len(header)]
    for lang in sorted(report.per_language):
        row = report.per_language[lang]
        lines.append(
            f"{lang:<10}{row.videos:>8}{row.hours:>8.1f}{row.words:>10}{row.laughter:>10}"
        )
    tot = report.totals
    lines.append(
        f"{'total':<10}{tot.videos:>8}{tot.hours:>8.1f}{tot.words:>10}{tot.laughter:>10}"
    )
    return "\n".join(lines)
