"""Deterministic synthetic demo corpus.

Builds a small multilingual corpus with everything the pipeline touches:
WAV audio, a pair of ASR transcripts whose timestamps disagree around
events, a partial detector laughter track, and ground truth. Laughter
audio is an amplitude-modulated harmonic stack (voiced, ~6 Hz syllable
rate); speech is short noise bursts; distractor noise events are longer
unvoiced bursts that mining will pick up and the classifier must reject.

Event kinds and what the pipeline should do with them:

- laugh_missed: not in the detector track; both transcripts corrupted.
  Mining must recover it and the classifier must accept it.
- laugh_found_clean: in the detector track; transcripts clean. Nothing
  to mine.
- laugh_found_corrupt: in the detector track and transcripts corrupted.
  Mining sees it but the novelty check must drop it.
- noise: not laughter; transcripts corrupted. Mining recovers it and
  the classifier must reject it.

All word and event boundaries sit on a 1 ms grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from . import io as lkio
from .align import DualTranscript
from .records import LANGUAGES, LaughterSegment, VideoRecord, Word, q3

SR = 22050

_VOCAB = {
    "cs": ["takze", "jsem", "tady", "dneska", "rikam", "proste", "videl",
           "jednou", "potom", "vlastne", "trochu", "nikdo"],
    "en": ["so", "anyway", "right", "there", "was", "this", "guy", "and",
           "then", "she", "says", "never"],
    "es": ["entonces", "digo", "claro", "porque", "nunca", "gente", "cosa",
           "luego", "mira", "bueno", "tampoco", "ahora"],
    "fr": ["alors", "donc", "voila", "jamais", "ensuite", "truc", "gens",
           "apres", "enfin", "bref", "encore", "toujours"],
    "hu": ["szoval", "aztan", "mondom", "soha", "ember", "dolog", "akkor",
           "megint", "persze", "kicsit", "senki", "most"],
    "it": ["allora", "quindi", "ecco", "mai", "poi", "roba", "gente",
           "dopo", "insomma", "ancora", "sempre", "nessuno"],
    "pt": ["entao", "depois", "nunca", "gente", "coisa", "olha", "agora",
           "sempre", "ainda", "claro", "tambem", "nada"],
}

KIND_LAUGH_MISSED = "laugh_missed"
KIND_LAUGH_FOUND_CLEAN = "laugh_found_clean"
KIND_LAUGH_FOUND_CORRUPT = "laugh_found_corrupt"
KIND_NOISE = "noise"

_LAUGH_KINDS = (
    KIND_LAUGH_MISSED, KIND_LAUGH_FOUND_CLEAN, KIND_LAUGH_FOUND_CORRUPT
)


@dataclass
class PlantedEvent:
    video_id: str
    start_s: float
    end_s: float
    kind: str

    @property
    def is_laugh(self) -> bool:
        return self.kind in _LAUGH_KINDS

    @property
    def corrupts_transcripts(self) -> bool:
        return self.kind != KIND_LAUGH_FOUND_CLEAN


@dataclass
class DemoCorpus:
    manifest: list[VideoRecord]
    words_canonical: list[Word]
    transcripts: dict[str, DualTranscript]
    detector_laughter: list[LaughterSegment]
    truth_laughter: list[LaughterSegment]
    events: list[PlantedEvent]
    paths: dict = field(default_factory=dict)

    def events_of_kind(self, kind: str) -> list[PlantedEvent]:
        return [e for e in self.events if e.kind == kind]


def _ms(x: float) -> float:
    return round(x, 3)


def _plan_video(rng, video_id: str, language: str):
    """One video's word timeline, events, and transcript pair."""
    vocab = _VOCAB[language]
    n_words = int(rng.integers(40, 65))
    event_plan = []
    # event after word i; keep at least one plain word between events and
    # never attach one to the last word
    slots = list(range(1, n_words - 1))
    rng.shuffle(slots)
    chosen = []
    for s in sorted(slots[: int(rng.integers(4, 7))]):
        if all(abs(s - c) >= 2 for c in chosen):
            chosen.append(s)
    kinds = [KIND_LAUGH_MISSED, KIND_NOISE, KIND_LAUGH_FOUND_CLEAN,
             KIND_LAUGH_FOUND_CORRUPT]
    for k, slot in enumerate(chosen):
        kind = kinds[k % len(kinds)] if k < len(kinds) else str(
            rng.choice(kinds)
        )
        event_plan.append((slot, kind))

    canonical: list[Word] = []
    events: list[PlantedEvent] = []
    plan_by_slot = dict(event_plan)
    t = _ms(float(rng.uniform(0.3, 0.8)))
    for i in range(n_words):
        dur = _ms(float(rng.uniform(0.16, 0.30)))
        token = vocab[int(rng.integers(0, len(vocab)))]
        canonical.append(Word(video_id, i, token, _ms(t), _ms(t + dur)))
        t = _ms(t + dur)
        kind = plan_by_slot.get(i)
        if kind is not None:
            g0 = _ms(t + float(rng.uniform(0.01, 0.05)))
            if kind == KIND_NOISE:
                length = float(rng.uniform(0.8, 1.5))
            else:
                length = float(rng.uniform(1.2, 2.6))
            g1 = _ms(g0 + length)
            events.append(PlantedEvent(video_id, g0, g1, kind))
            t = _ms(g1 + float(rng.uniform(0.05, 0.15)))
        else:
            t = _ms(t + float(rng.uniform(0.05, 0.25)))

    words_a = list(canonical)
    words_b = list(canonical)
    for ev in events:
        if not ev.corrupts_transcripts:
            continue
        i = next(
            k for k in range(len(canonical) - 1)
            if canonical[k].end_s <= ev.start_s
            and canonical[k + 1].start_s >= ev.end_s
        )
        prev = canonical[i]
        nxt = canonical[i + 1]
        words_a[i] = Word(video_id, i, prev.token, prev.start_s, ev.end_s)
        words_b[i + 1] = Word(video_id, i + 1, nxt.token, ev.start_s, nxt.end_s)

    duration = _ms(t + 1.0)
    return canonical, words_a, words_b, events, duration


def _render_audio(rng, duration_s: float, words: list[Word],
                  events: list[PlantedEvent]) -> np.ndarray:
    n = int(round(duration_s * SR))
    x = np.zeros(n)

    def smooth_envelope(length, edge=0.02):
        env = np.ones(length)
        k = max(1, min(length // 4, int(edge * SR)))
        ramp = np.linspace(0.0, 1.0, k)
        env[:k] = ramp
        env[-k:] = ramp[::-1]
        return env

    for w in words:
        lo, hi = int(w.start_s * SR), int(w.end_s * SR)
        if hi <= lo:
            continue
        burst = 0.22 * rng.standard_normal(hi - lo)
        x[lo:hi] += burst * smooth_envelope(hi - lo)

    for ev in events:
        lo, hi = int(ev.start_s * SR), int(ev.end_s * SR)
        if hi <= lo:
            continue
        t = np.arange(hi - lo) / SR
        if ev.is_laugh:
            f0 = float(rng.uniform(220.0, 320.0))
            tone = np.zeros(hi - lo)
            for h in range(1, 6):
                tone += np.sin(2 * np.pi * f0 * h * t + float(rng.uniform(0, 6.28))) / h
            am = 0.55 + 0.45 * np.sin(2 * np.pi * 6.0 * t)
            sig = 0.3 * am * tone / np.max(np.abs(tone))
        else:
            sig = 0.3 * rng.standard_normal(hi - lo)
        x[lo:hi] += sig * smooth_envelope(hi - lo)

    return np.clip(x, -0.99, 0.99)


def build_demo_corpus(out_dir, n_videos: int = 7, seed: int = 7,
                      with_audio: bool = True) -> DemoCorpus:
    """Generate the corpus under out_dir and return it with ground truth.

    Writes manifest.jsonl, words_a.jsonl, words_b.jsonl,
    words_canonical.jsonl, laughter_detector.jsonl, truth_laughter.jsonl,
    train_labels.csv, and audio/<video_id>.wav.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    audio_dir = out_dir / "audio"
    if with_audio:
        audio_dir.mkdir(exist_ok=True)

    manifest: list[VideoRecord] = []
    canonical_all: list[Word] = []
    transcripts: dict[str, DualTranscript] = {}
    detector: list[LaughterSegment] = []
    truth: list[LaughterSegment] = []
    events_all: list[PlantedEvent] = []

    for v in range(n_videos):
        language = LANGUAGES[v % len(LANGUAGES)]
        video_id = f"demo_{language}_{v:02d}"
        rng = np.random.default_rng([seed, v])
        canonical, words_a, words_b, events, duration = _plan_video(
            rng, video_id, language
        )
        split = "test" if v % 3 == 2 else "train"
        manifest.append(
            VideoRecord(video_id, language, f"channel{v % 3}", duration, split)
        )
        canonical_all.extend(canonical)
        transcripts[video_id] = DualTranscript(video_id, words_a, words_b)
        events_all.extend(events)
        for ev in events:
            if not ev.is_laugh:
                continue
            truth.append(
                LaughterSegment(video_id, ev.start_s, ev.end_s, "manual")
            )
            if ev.kind in (KIND_LAUGH_FOUND_CLEAN, KIND_LAUGH_FOUND_CORRUPT):
                detector.append(
                    LaughterSegment(video_id, ev.start_s, ev.end_s,
                                    "detector", 0.9)
                )
        if with_audio:
            audio = _render_audio(rng, duration, canonical, events)
            wavfile.write(
                audio_dir / f"{video_id}.wav", SR,
                (audio * 32767).astype(np.int16),
            )

    paths = {
        "manifest": out_dir / "manifest.jsonl",
        "words_a": out_dir / "words_a.jsonl",
        "words_b": out_dir / "words_b.jsonl",
        "words_canonical": out_dir / "words_canonical.jsonl",
        "laughter_detector": out_dir / "laughter_detector.jsonl",
        "truth_laughter": out_dir / "truth_laughter.jsonl",
        "train_labels": out_dir / "train_labels.csv",
        "audio_dir": audio_dir,
    }
    lkio.write_manifest(paths["manifest"], manifest)
    words_a_all = [w for vid in transcripts.values() for w in vid.words_a]
    words_b_all = [w for vid in transcripts.values() for w in vid.words_b]
    lkio.write_words(paths["words_a"], words_a_all)
    lkio.write_words(paths["words_b"], words_b_all)
    lkio.write_words(paths["words_canonical"], canonical_all)
    lkio.write_laughter(paths["laughter_detector"], detector)
    lkio.write_laughter(paths["truth_laughter"], truth)

    with paths["train_labels"].open("w", encoding="utf-8") as fh:
        fh.write("video_id,start_s,end_s,label\n")
        for ev in events_all:
            label = "laughter" if ev.is_laugh else "other"
            fh.write(f"{ev.video_id},{q3(ev.start_s)},{q3(ev.end_s)},{label}\n")

    return DemoCorpus(
        manifest=manifest,
        words_canonical=canonical_all,
        transcripts=transcripts,
        detector_laughter=detector,
        truth_laughter=truth,
        events=events_all,
        paths=paths,
    )
