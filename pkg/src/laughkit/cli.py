"""Command line front-end.

Eleven subcommands cover the corpus workflow: `stats`, `mine`,
`extract-features`, `train-rf`, `classify`, `merge-laughter`, `label`,
`emit-dataset`, `eval-segments`, `eval-tokens`, and `pipeline` (which
chains mine, extract-features, classify, merge-laughter, label, and
emit-dataset over one output directory).

Conventions shared by every subcommand:

- Options may come from a JSON config file (`--config`); flags win over
  the file. Stage options live under the stage name, e.g.
  `{"mine": {"abs_dur": 0.9}, "seed": 3}`; `seed` and `jobs` may also
  sit at the top level.
- Every artifact gets a `<stem>.meta.json` sidecar holding the exact
  stage config, its digest, and a sha256 per input file. No timestamps,
  so identical inputs reproduce identical artifacts and sidecars.
- One machine-readable JSON summary line per stage goes to stdout.
- Exit 0 on success, 1 on data/validation errors (message carries
  file and line when the error came from a file), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io as lkio
from .align import DualTranscript, MineConfig, mine_corpus
from .audio import load_clip
from .errors import LaughkitError, ParseError, ValidationError
from .evaluation import (
    EvalConfig,
    eval_segments,
    eval_tokens,
    format_metric_table,
)
from .features import extract_features, read_features_csv, write_features_csv
from .features import FeatureRow
from .forest import (
    ForestConfig,
    evaluate_cv,
    filter_candidates,
    load_model,
    save_model,
    train,
)
from .labeling import LabelingConfig, emit_dataset, label_words
from .records import q3
from .stats import corpus_stats, format_stats_table


# --- config plumbing ----------------------------------------------------------

def _load_config(path) -> dict:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ParseError(path, 1, "config must be a JSON object")
    return obj


def _opt(args, config: dict, stage: str, name: str, default):
    """Resolve one option: flag beats config file beats built-in default."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    stage_cfg = config.get(stage)
    if isinstance(stage_cfg, dict) and name in stage_cfg:
        return stage_cfg[name]
    if name in ("seed", "jobs") and name in config:
        return config[name]
    return default


def _summary(stage: str, **fields) -> None:
    print(json.dumps({"stage": stage, **fields}, sort_keys=True))


def _group_words(words):
    grouped: dict[str, list] = {}
    for w in words:
        grouped.setdefault(w.video_id, []).append(w)
    return grouped


def _audio_path(audio_dir: Path, video_id: str) -> Path:
    path = audio_dir / f"{video_id}.wav"
    if not path.exists():
        raise ValidationError(f"no audio for video '{video_id}' under {audio_dir}")
    return path


# --- stage bodies -------------------------------------------------------------
# The pipeline subcommand calls these with explicit paths, so its artifacts
# are byte-identical to running the individual subcommands in order.

def _stage_mine(manifest_p, words_a_p, words_b_p, laughter_p,
                out_candidates, out_words, cfg: MineConfig,
                report_p=None):
    manifest = lkio.read_manifest(manifest_p)
    words_a = _group_words(lkio.read_words(words_a_p))
    words_b = _group_words(lkio.read_words(words_b_p))
    existing = lkio.read_laughter(laughter_p)
    transcripts = {
        vid: DualTranscript(vid, words_a.get(vid, []), words_b.get(vid, []))
        for vid in sorted(set(words_a) | set(words_b))
    }
    candidates, corrected, report = mine_corpus(
        manifest, transcripts, existing, cfg
    )
    stage_cfg = {
        "stage": "mine",
        "abs_dur": cfg.abs_dur_s,
        "rel_factor": cfg.rel_factor,
        "min_dur": cfg.min_candidate_dur,
        "max_overlap": cfg.max_existing_overlap,
    }
    inputs = {"manifest": manifest_p, "words_a": words_a_p,
              "words_b": words_b_p, "laughter": laughter_p}
    lkio.write_candidates(out_candidates, candidates)
    lkio.write_sidecar(out_candidates, stage_cfg, inputs)
    lkio.write_words(out_words, corrected)
    lkio.write_sidecar(out_words, stage_cfg, inputs)
    if report_p is not None:
        blob = dict(report.to_dict())
        blob["config_digest"] = lkio.config_digest(stage_cfg)
        Path(report_p).write_text(
            json.dumps(blob, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    _summary("mine", candidates=len(candidates),
             videos_mined=report.to_dict()["videos_mined"],
             skipped=report.skipped)
    return report


def _read_segment_keys(path):
    """Segment intervals from a CSV or a laughter/candidates JSONL file."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return lkio.read_segments_csv(path)
    with path.open("r", encoding="utf-8") as fh:
        first = ""
        for line in fh:
            if line.strip():
                first = line
                break
    if not first:
        return []
    try:
        probe = json.loads(first)
    except json.JSONDecodeError:
        raise ParseError(path, 1, "expected a CSV or JSONL segment file") \
            from None
    if "prev_word_idx" in probe:
        rows = lkio.read_candidates(path)
    else:
        rows = lkio.read_laughter(path)
    return [lkio.SegmentKey(r.video_id, r.start_s, r.end_s) for r in rows]


def _features_for_video(audio_path: str, intervals):
    out = []
    for start_s, end_s in intervals:
        clip = load_clip(audio_path, start_s, end_s)
        out.append(extract_features(clip))
    return out


def _stage_extract(audio_dir, segments_p, out_p, jobs: int) -> int:
    audio_dir = Path(audio_dir)
    segments = _read_segment_keys(segments_p)
    by_video: dict[str, list[tuple[int, lkio.SegmentKey]]] = {}
    for i, seg in enumerate(segments):
        by_video.setdefault(seg.video_id, []).append((i, seg))

    values = [None] * len(segments)
    tasks = [
        (vid, str(_audio_path(audio_dir, vid)),
         [(seg.start_s, seg.end_s) for _, seg in items])
        for vid, items in sorted(by_video.items())
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                _features_for_video,
                [t[1] for t in tasks], [t[2] for t in tasks],
            ))
    else:
        results = [_features_for_video(t[1], t[2]) for t in tasks]
    for (vid, _, _), vecs in zip(tasks, results):
        for (i, seg), vec in zip(by_video[vid], vecs):
            values[i] = vec

    rows = [
        FeatureRow(seg.video_id, seg.start_s, seg.end_s, vec)
        for seg, vec in zip(segments, values)
    ]
    write_features_csv(out_p, rows)
    lkio.write_sidecar(
        out_p,
        {"stage": "extract-features", "sample_rate": 22050},
        {"segments": segments_p,
         **{f"audio/{vid}": _audio_path(audio_dir, vid) for vid in by_video}},
    )
    _summary("extract-features", segments=len(rows), out=str(out_p))
    return len(rows)


def _stage_classify(model_p, candidates_p, features_p, out_p):
    model = load_model(model_p)
    candidates = lkio.read_candidates(candidates_p)
    features = read_features_csv(features_p)
    accepted = filter_candidates(candidates, features, model)
    lkio.write_laughter(out_p, accepted)
    lkio.write_sidecar(
        out_p, {"stage": "classify"},
        {"model": model_p, "candidates": candidates_p, "features": features_p},
    )
    _summary("classify", candidates=len(candidates), accepted=len(accepted),
             rejected=len(candidates) - len(accepted))
    return candidates, accepted


def _stage_merge(existing_p, accepted_p, out_p):
    existing = lkio.read_laughter(existing_p)
    accepted = lkio.read_laughter(accepted_p)
    merged = sorted(existing + accepted,
                    key=lambda s: (s.video_id, s.start_s, s.end_s))
    lkio.write_laughter(out_p, merged)
    lkio.write_sidecar(
        out_p, {"stage": "merge-laughter"},
        {"existing": existing_p, "accepted": accepted_p},
    )
    _summary("merge-laughter", existing=len(existing), accepted=len(accepted),
             merged=len(merged))
    return merged


def _stage_label(words_p, laughter_p, out_p, scheme: str, manifest_p=None):
    cfg = LabelingConfig(scheme)
    cfg.validate()
    words = lkio.read_words(words_p)
    laughter = lkio.read_laughter(laughter_p)
    durations = {}
    inputs = {"words": words_p, "laughter": laughter_p}
    if manifest_p is not None:
        durations = {
            rec.video_id: rec.duration_s
            for rec in lkio.read_manifest(manifest_p)
        }
        inputs["manifest"] = manifest_p
    laughs_by_video = {}
    for seg in laughter:
        laughs_by_video.setdefault(seg.video_id, []).append(seg)

    counters: dict[str, int] = {}
    n_positive = 0
    with Path(out_p).open("w", encoding="utf-8") as fh:
        for vid, vid_words in _group_words(words).items():
            labels = label_words(
                vid_words, laughs_by_video.get(vid, []), cfg,
                video_duration_s=durations.get(vid), counters=counters,
            )
            n_positive += int(sum(labels))
            for w, label in zip(vid_words, labels):
                fh.write(json.dumps(
                    {"video_id": vid, "idx": w.idx, "label": int(label)},
                    sort_keys=True,
                ) + "\n")
    lkio.write_sidecar(out_p, {"stage": "label", "scheme": scheme}, inputs)
    counts = {"words": len(words), "positive": n_positive,
              "laughs_skipped": counters.get("laughs_skipped", 0)}
    _summary("label", scheme=scheme, **counts)
    return counts


def _stage_emit(manifest_p, words_p, laughter_p, out_p, scheme: str):
    cfg = LabelingConfig(scheme)
    cfg.validate()
    manifest = lkio.read_manifest(manifest_p)
    words = lkio.read_words(words_p)
    laughter = lkio.read_laughter(laughter_p)
    sequences, report = emit_dataset(manifest, words, laughter, cfg)
    lkio.write_dataset(out_p, sequences)
    lkio.write_sidecar(
        out_p, {"stage": "emit-dataset", "scheme": scheme},
        {"manifest": manifest_p, "words": words_p, "laughter": laughter_p},
    )
    blob = report.to_dict()
    _summary("emit-dataset", scheme=scheme, **blob["totals"],
             skipped_no_words=blob["skipped_no_words"])
    return report


# --- subcommands ---------------------------------------------------------------

def cmd_stats(args, config) -> int:
    manifest = lkio.read_manifest(args.manifest)
    words = lkio.read_words(args.words)
    laughter = lkio.read_laughter(args.laughter)
    report = corpus_stats(manifest, words, laughter)
    print(format_stats_table(report))
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    _summary("stats", **vars(report.totals))
    return 0


def _mine_config(args, config) -> MineConfig:
    cfg = MineConfig(
        abs_dur_s=float(_opt(args, config, "mine", "abs_dur", 0.8)),
        rel_factor=float(_opt(args, config, "mine", "rel_factor", 3.0)),
        min_candidate_dur=float(_opt(args, config, "mine", "min_dur", 0.5)),
        max_existing_overlap=float(
            _opt(args, config, "mine", "max_overlap", 0.5)
        ),
    )
    cfg.validate()
    return cfg


def cmd_mine(args, config) -> int:
    _stage_mine(args.manifest, args.words_a, args.words_b, args.laughter,
                args.out_candidates, args.out_words,
                _mine_config(args, config), report_p=args.report)
    return 0


def cmd_extract_features(args, config) -> int:
    jobs = int(_opt(args, config, "extract-features", "jobs", 1))
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")
    _stage_extract(args.audio_dir, args.segments, args.out, jobs)
    return 0


def cmd_train_rf(args, config) -> int:
    features = read_features_csv(args.features)
    labels = lkio.read_segments_csv(args.labels)
    if any(row.label is None for row in labels):
        raise ValidationError(f"{args.labels}: label column is required")
    by_key = {
        (r.video_id, q3(r.start_s), q3(r.end_s)): r.values for r in features
    }
    X, y = [], []
    for row in labels:
        key = (row.video_id, q3(row.start_s), q3(row.end_s))
        if key not in by_key:
            raise ValidationError(
                f"no feature row for labeled segment {key[0]} "
                f"[{key[1]}, {key[2]}]"
            )
        X.append(by_key[key])
        y.append(row.label)

    cfg = ForestConfig(
        n_estimators=int(_opt(args, config, "train-rf", "n_estimators", 50)),
        max_depth=int(_opt(args, config, "train-rf", "max_depth", 13)),
        min_samples_split=int(
            _opt(args, config, "train-rf", "min_samples_split", 2)
        ),
        seed=int(_opt(args, config, "train-rf", "seed", 0)),
    )
    model = train(X, y, cfg=cfg)
    save_model(model, args.out)
    lkio.write_sidecar(
        args.out, {"stage": "train-rf", **cfg.to_dict()},
        {"features": args.features, "labels": args.labels},
    )
    summary = {"examples": len(X), "trees": cfg.n_estimators, "seed": cfg.seed,
               "out": str(args.out)}
    if args.cv:
        cv = evaluate_cv(X, y, cfg=cfg, iterations=int(args.cv))
        summary["cv"] = cv.to_dict()
    _summary("train-rf", **summary)
    return 0


def cmd_classify(args, config) -> int:
    _stage_classify(args.model, args.candidates, args.features, args.out)
    return 0


def cmd_merge_laughter(args, config) -> int:
    _stage_merge(args.existing, args.accepted, args.out)
    return 0


def cmd_label(args, config) -> int:
    scheme = str(_opt(args, config, "label", "scheme", "span"))
    _stage_label(args.words, args.laughter, args.out, scheme,
                 manifest_p=args.manifest)
    return 0


def cmd_emit_dataset(args, config) -> int:
    scheme = str(_opt(args, config, "emit-dataset", "scheme", "span"))
    _stage_emit(args.manifest, args.words, args.laughter, args.out, scheme)
    return 0


def cmd_eval_segments(args, config) -> int:
    cfg = EvalConfig(
        iou_threshold=float(_opt(args, config, "eval-segments", "iou", 0.2))
    )
    pred = lkio.read_laughter(args.pred)
    gold = lkio.read_laughter(args.gold)
    manifest = lkio.read_manifest(args.manifest) if args.manifest else None
    report = eval_segments(pred, gold, cfg, manifest=manifest)
    print(format_metric_table(report))
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    m = report.overall
    _summary("eval-segments", iou=cfg.iou_threshold, precision=m.precision,
             recall=m.recall, f1=m.f1, tp=m.tp, fp=m.fp, fn=m.fn)
    return 0


def cmd_eval_tokens(args, config) -> int:
    pred = lkio.read_predictions(args.pred)
    gold = lkio.read_dataset(args.gold)
    report = eval_tokens(pred, gold)
    if args.by_language:
        print(format_metric_table(report))
    m = report.overall
    summary = {"precision": m.precision, "recall": m.recall, "f1": m.f1,
               "tp": m.tp, "fp": m.fp, "fn": m.fn}
    if args.by_language:
        summary["per_language"] = {
            lang: {"precision": lm.precision, "recall": lm.recall, "f1": lm.f1}
            for lang, lm in sorted(report.per_language.items())
        }
        if report.average is not None:
            summary["average"] = report.average
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    _summary("eval-tokens", **summary)
    return 0


def cmd_pipeline(args, config) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scheme = str(_opt(args, config, "pipeline", "scheme", "span"))
    jobs = int(_opt(args, config, "pipeline", "jobs", 1))
    LabelingConfig(scheme).validate()

    paths = {
        "candidates": out_dir / "candidates.jsonl",
        "words": out_dir / "words_corrected.jsonl",
        "features": out_dir / "candidate_features.csv",
        "accepted": out_dir / "accepted.jsonl",
        "merged": out_dir / "laughter_merged.jsonl",
        "labels": out_dir / "labels.jsonl",
        "dataset": out_dir / "dataset.jsonl",
        "report": out_dir / "mining_report.json",
    }

    _stage_mine(args.manifest, args.words_a, args.words_b, args.laughter,
                paths["candidates"], paths["words"],
                _mine_config(args, config), report_p=paths["report"])
    _stage_extract(args.audio_dir, paths["candidates"], paths["features"],
                   jobs)
    n_candidates = len(lkio.read_candidates(paths["candidates"]))
    if args.model is not None:
        _stage_classify(args.model, paths["candidates"], paths["features"],
                        paths["accepted"])
    elif n_candidates == 0:
        lkio.write_laughter(paths["accepted"], [])
        lkio.write_sidecar(paths["accepted"], {"stage": "classify"},
                           {"candidates": paths["candidates"]})
        _summary("classify", candidates=0, accepted=0, rejected=0)
    else:
        raise ValidationError(
            f"{n_candidates} candidates mined but no --model given"
        )
    _stage_merge(args.laughter, paths["accepted"], paths["merged"])
    _stage_label(paths["words"], paths["merged"], paths["labels"], scheme,
                 manifest_p=args.manifest)
    _stage_emit(args.manifest, paths["words"], paths["merged"],
                paths["dataset"], scheme)
    _summary("pipeline", out_dir=str(out_dir), dataset=str(paths["dataset"]),
             dataset_sha256=lkio.sha256_file(paths["dataset"]))
    return 0


# --- parser --------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", help="JSON config file; flags override it")
    sub.add_argument("--seed", type=int, help="random seed")
    sub.add_argument("--jobs", type=int, help="parallel workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laughkit",
        description="Corpus tools for audience-laughter datasets.",
    )
    subs = parser.add_subparsers(dest="command", metavar="<subcommand>")

    p = subs.add_parser("stats", help="per-language corpus statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--words", required=True)
    p.add_argument("--laughter", required=True)
    p.add_argument("--report", help="also write the table as JSON")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = subs.add_parser(
        "mine", help="recover laughter candidates from dual transcripts"
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--words-a", required=True)
    p.add_argument("--words-b", required=True)
    p.add_argument("--laughter", required=True,
                   help="already-detected laughter for the novelty check")
    p.add_argument("--out-candidates", required=True)
    p.add_argument("--out-words", required=True,
                   help="corrected system-A words")
    p.add_argument("--abs-dur", type=float,
                   help="absolute anomaly floor in seconds (default 0.8)")
    p.add_argument("--rel-factor", type=float,
                   help="relative anomaly factor (default 3.0)")
    p.add_argument("--min-dur", type=float,
                   help="minimum candidate length (default 0.5)")
    p.add_argument("--max-overlap", type=float,
                   help="novelty overlap fraction (default 0.5)")
    p.add_argument("--report", help="write the mining report JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_mine)

    p = subs.add_parser(
        "extract-features", help="acoustic feature CSV for audio segments"
    )
    p.add_argument("--audio-dir", required=True)
    p.add_argument("--segments", required=True,
                   help="CSV (video_id,start_s,end_s[,label]) or JSONL")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_extract_features)

    p = subs.add_parser("train-rf", help="train the laughter classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True,
                   help="CSV: video_id,start_s,end_s,label")
    p.add_argument("--out", required=True)
    p.add_argument("--n-estimators", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-split", type=int)
    p.add_argument("--cv", type=int,
                   help="also report CIs over N stratified splits")
    _add_common(p)
    p.set_defaults(func=cmd_train_rf)

    p = subs.add_parser(
        "classify", help="accept or reject mined candidates"
    )
    p.add_argument("--model", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = subs.add_parser(
        "merge-laughter", help="merge detector and accepted laughter"
    )
    p.add_argument("--existing", required=True)
    p.add_argument("--accepted", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_merge_laughter)

    p = subs.add_parser("label", help="per-word binary labels as JSONL")
    p.add_argument("--words", required=True)
    p.add_argument("--laughter", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", help="for video durations (next_word scheme)")
    p.add_argument("--scheme", choices=("span", "next_word"))
    _add_common(p)
    p.set_defaults(func=cmd_label)

    p = subs.add_parser(
        "emit-dataset", help="labeled sequence dataset as JSONL"
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--words", required=True)
    p.add_argument("--laughter", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scheme", choices=("span", "next_word"))
    _add_common(p)
    p.set_defaults(func=cmd_emit_dataset)

    p = subs.add_parser(
        "eval-segments", help="segment detection metrics at an IoU threshold"
    )
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--iou", type=float, help="IoU threshold (default 0.2)")
    p.add_argument("--manifest", help="enables per-language rows")
    p.add_argument("--report", help="write the report JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_eval_segments)

    p = subs.add_parser(
        "eval-tokens", help="word-level metrics for predicted datasets"
    )
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--by-language", action="store_true",
                   help="print per-language rows and their average")
    p.add_argument("--report", help="write the report JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_eval_tokens)

    p = subs.add_parser(
        "pipeline",
        help="mine, classify, merge, label and emit in one run",
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--words-a", required=True)
    p.add_argument("--words-b", required=True)
    p.add_argument("--laughter", required=True)
    p.add_argument("--audio-dir", required=True)
    p.add_argument("--model",
                   help="forest model JSON; optional only when mining "
                        "finds nothing")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scheme", choices=("span", "next_word"))
    p.add_argument("--abs-dur", type=float)
    p.add_argument("--rel-factor", type=float)
    p.add_argument("--min-dur", type=float)
    p.add_argument("--max-overlap", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        config = _load_config(args.config) if args.config else {}
        return args.func(args, config)
    except LaughkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
