"""Acoustic feature vector for audio segments.

One fixed-order 70-dimensional vector per clip: temporal shape, energy,
spectral shape, pitch/periodicity, a 4-12 Hz modulation-energy cue
(laughter syllable rate), chroma, and MFCCs with deltas.

Numerics are arranged so that spectral-shape features are ratios of
spectral mass: scaling the waveform leaves them unchanged (bit-exact for
power-of-two gains), while rms features scale with it and mfcc_1 carries
log energy. Framing: 22050 Hz, 2048-sample Hann windows, hop 512, no
centering, tail samples beyond the last full frame dropped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy.fft import dct
from sklearn.base import BaseEstimator, TransformerMixin

from .audio import TARGET_SR, AudioClip
from .errors import ParseError, ValidationError
from .records import q3

FEATURE_NAMES: tuple = (
    "duration", "voiced_ratio", "voiced_frames", "burst_count",
    "temporal_centroid",
    "rms_mean", "rms_std", "rms_slope", "energy_p90",
    "spectral_bandwidth", "rolloff_85", "rolloff_95", "spectral_flatness",
    "spectral_contrast", "spectral_centroid",
    "pitch_median", "pitch_std", "hnr",
    "mod_energy_4_12",
    *(f"chroma_{i}" for i in range(1, 13)),
    *(f"mfcc_{i}" for i in range(1, 14)),
    *(f"delta_mfcc_{i}" for i in range(1, 14)),
    *(f"delta2_mfcc_{i}" for i in range(1, 14)),
)

N_FEATURES = len(FEATURE_NAMES)

_CHROMA_REF_HZ = 261.6255653005986  # C4
_MIN_CLIP_S = 0.1


@dataclass
class FeatureConfig:
    frame_length: int = 2048
    hop_length: int = 512
    n_mels: int = 40
    n_mfcc: int = 13
    pitch_fmin: float = 60.0
    pitch_fmax: float = 500.0
    pitch_conf_threshold: float = 0.4
    delta_width: int = 9
    silence_power: float = 1e-12
    amin: float = 1e-10


def _frame_signal(x: np.ndarray, frame_length: int, hop: int) -> np.ndarray:
    if len(x) < frame_length:
        x = np.pad(x, (0, frame_length - len(x)))
    n_frames = 1 + (len(x) - frame_length) // hop
    idx = np.arange(frame_length)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def _mel_filterbank(sr: int, n_fft: int, n_mels: int,
                    fmin: float = 20.0) -> np.ndarray:
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sr)
    edges = _mel_to_hz(np.linspace(_hz_to_mel(fmin), _hz_to_mel(sr / 2.0),
                                   n_mels + 2))
    fb = np.zeros((n_mels, len(freqs)))
    for m in range(n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs - lo) / (mid - lo)
        down = (hi - freqs) / (hi - mid)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


def _delta(x: np.ndarray, width: int) -> np.ndarray:
    """Regression-slope deltas along axis 0 with edge replication."""
    half = width // 2
    if len(x) == 1:
        return np.zeros_like(x)
    taps = np.arange(1, half + 1)
    denom = 2.0 * np.sum(taps.astype(np.float64) ** 2)
    padded = np.pad(x, ((half, half), (0, 0)), mode="edge")
    out = np.zeros_like(x, dtype=np.float64)
    t = len(x)
    for n in taps:
        out += n * (padded[half + n:half + n + t] - padded[half - n:half - n + t])
    return out / denom


def _run_count(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    m = mask.astype(np.int8)
    return int(m[0] + np.sum((m[1:] == 1) & (m[:-1] == 0)))


def extract_features(clip: AudioClip, cfg: FeatureConfig | None = None) -> np.ndarray:
    """70-dimensional feature vector in FEATURE_NAMES order."""
    cfg = cfg or FeatureConfig()
    sr = clip.sample_rate
    x = np.asarray(clip.samples, dtype=np.float64)
    duration = clip.end_s - clip.start_s
    if duration < _MIN_CLIP_S - 1e-9:
        raise ValidationError(
            f"clip too short for feature extraction: {duration:.3f} s"
        )

    frames = _frame_signal(x, cfg.frame_length, cfg.hop_length)
    n_frames = len(frames)
    window = np.hanning(cfg.frame_length)

    # energy track
    energy = np.mean(frames ** 2, axis=1)
    rms = np.sqrt(energy)
    rms_mean = float(rms.mean())
    rms_std = float(rms.std())
    if n_frames > 1:
        t = np.arange(n_frames, dtype=np.float64)
        tc = t - t.mean()
        rms_slope = float(np.dot(tc, rms - rms.mean()) / np.dot(tc, tc))
    else:
        rms_slope = 0.0
    energy_p90 = float(np.percentile(energy, 90))

    centers_s = (cfg.hop_length * np.arange(n_frames) + cfg.frame_length / 2.0) / sr
    total_energy = energy.sum()
    if total_energy > 0:
        temporal_centroid = float(
            np.dot(energy, centers_s) / total_energy / (len(x) / sr)
        )
    else:
        temporal_centroid = 0.5

    # power spectra
    spec = np.abs(np.fft.rfft(frames * window, axis=1)) ** 2
    freqs = np.fft.rfftfreq(cfg.frame_length, 1.0 / sr)
    frame_power = spec.sum(axis=1)
    live = frame_power > cfg.silence_power

    if live.any():
        s = spec[live]
        power = frame_power[live]
        centroid_f = s @ freqs / power
        spectral_centroid = float(centroid_f.mean())
        dev = freqs[None, :] - centroid_f[:, None]
        spectral_bandwidth = float(
            np.sqrt((s * dev ** 2).sum(axis=1) / power).mean()
        )
        cum = np.cumsum(s, axis=1)
        roll85 = freqs[np.argmax(cum >= 0.85 * power[:, None], axis=1)]
        roll95 = freqs[np.argmax(cum >= 0.95 * power[:, None], axis=1)]
        rolloff_85 = float(roll85.mean())
        rolloff_95 = float(roll95.mean())

        norm = s / s.max(axis=1, keepdims=True)
        guarded = norm + 1e-12
        flat = np.exp(np.mean(np.log(guarded), axis=1)) / np.mean(guarded, axis=1)
        spectral_flatness = float(flat.mean())

        k = max(1, int(round(0.02 * norm.shape[1])))
        srt = np.sort(norm, axis=1)
        valley = srt[:, :k].mean(axis=1) + 1e-12
        peak = srt[:, -k:].mean(axis=1) + 1e-12
        spectral_contrast = float(np.log(peak / valley).mean())

        in_range = (freqs >= 32.0) & (freqs <= 5000.0)
        cls = np.round(
            12.0 * np.log2(freqs[in_range] / _CHROMA_REF_HZ)
        ).astype(int) % 12
        per_class = np.zeros((len(s), 12))
        sub = s[:, in_range]
        for c in range(12):
            per_class[:, c] = sub[:, cls == c].sum(axis=1)
        chroma = per_class.mean(axis=0)
        chroma_total = chroma.sum()
        chroma = chroma / chroma_total if chroma_total > 0 else np.zeros(12)
    else:
        spectral_centroid = 0.0
        spectral_bandwidth = 0.0
        rolloff_85 = 0.0
        rolloff_95 = 0.0
        spectral_flatness = 1.0
        spectral_contrast = 0.0
        chroma = np.zeros(12)

    # mel / mfcc; silent frames take a flat floor so deltas stay quiet there
    melfb = _mel_filterbank(sr, cfg.frame_length, cfg.n_mels)
    mel = spec @ melfb.T
    logmel = np.full((n_frames, cfg.n_mels), math.log(cfg.amin))
    if live.any():
        mlive = mel[live]
        mmax = mlive.max(axis=1, keepdims=True)
        mmax[mmax <= 0] = 1.0
        logmel[live] = np.log(mlive / mmax + cfg.amin) + np.log(mmax)
    mfcc_frames = dct(logmel, type=2, norm="ortho", axis=1)[:, :cfg.n_mfcc]
    mfcc = mfcc_frames[live].mean(axis=0) if live.any() else np.zeros(cfg.n_mfcc)
    d1_frames = _delta(mfcc_frames, cfg.delta_width)
    d2_frames = _delta(d1_frames, cfg.delta_width)
    delta_mfcc = d1_frames.mean(axis=0)
    delta2_mfcc = d2_frames.mean(axis=0)

    # pitch via normalized autocorrelation of zero-mean windowed frames
    centered = frames - frames.mean(axis=1, keepdims=True)
    wx = centered * window
    n_fft = 2 * cfg.frame_length
    ac = np.fft.irfft(np.abs(np.fft.rfft(wx, n_fft, axis=1)) ** 2, axis=1)
    ac = ac[:, :cfg.frame_length]
    lag_min = max(1, int(sr / cfg.pitch_fmax))
    lag_max = min(cfg.frame_length - 1, int(sr / cfg.pitch_fmin))
    r0 = ac[:, 0].copy()
    r0[r0 <= 0] = 1.0
    band = ac[:, lag_min:lag_max + 1] / r0[:, None]
    best = np.argmax(band, axis=1)
    conf = band[np.arange(n_frames), best]
    conf = np.where(ac[:, 0] > 0, conf, 0.0)
    pitch = sr / (lag_min + best).astype(np.float64)

    median_rms = float(np.median(rms))
    voiced = (rms > 0.5 * median_rms) & (conf > cfg.pitch_conf_threshold)
    voiced_ratio = float(voiced.mean())
    voiced_frames = float(voiced.sum())
    burst_count = float(_run_count(voiced))
    if voiced.any():
        vp = pitch[voiced]
        pitch_median = float(np.median(vp))
        pitch_std = float(vp.std())
        r = np.clip(conf[voiced], 1e-6, 1.0 - 1e-7)
        hnr = float(np.clip(10.0 * np.log10(r / (1.0 - r)), -20.0, 40.0).mean())
    else:
        pitch_median = 0.0
        pitch_std = 0.0
        hnr = 0.0

    # modulation energy of the rms envelope in the 4-12 Hz band
    if n_frames >= 2:
        env = rms - rms.mean()
        espec = np.abs(np.fft.rfft(env)) ** 2
        efreqs = np.fft.rfftfreq(n_frames, cfg.hop_length / sr)
        etotal = espec.sum()
        if etotal > 1e-20:
            sel = (efreqs >= 4.0) & (efreqs <= 12.0)
            mod_energy = float(espec[sel].sum() / etotal)
        else:
            mod_energy = 0.0
    else:
        mod_energy = 0.0

    vec = np.concatenate([
        [duration, voiced_ratio, voiced_frames, burst_count,
         temporal_centroid,
         rms_mean, rms_std, rms_slope, energy_p90,
         spectral_bandwidth, rolloff_85, rolloff_95, spectral_flatness,
         spectral_contrast, spectral_centroid,
         pitch_median, pitch_std, hnr,
         mod_energy],
        chroma,
        mfcc,
        delta_mfcc,
        delta2_mfcc,
    ])
    if not np.all(np.isfinite(vec)):
        bad = [FEATURE_NAMES[i] for i in np.nonzero(~np.isfinite(vec))[0]]
        raise ValidationError(f"non-finite feature values: {bad}")
    return vec


def extract_feature_dict(clip: AudioClip, cfg: FeatureConfig | None = None) -> dict:
    return dict(zip(FEATURE_NAMES, extract_features(clip, cfg)))


class AcousticFeatureExtractor(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper: transform(list of AudioClip) -> matrix.

    Stateless; fit only validates parameters. Exists so the feature step
    can slot into pipelines expecting the fit/transform protocol.
    """

    def __init__(self, frame_length=2048, hop_length=512, n_mels=40,
                 n_mfcc=13, pitch_fmin=60.0, pitch_fmax=500.0,
                 pitch_conf_threshold=0.4, delta_width=9):
        self.frame_length = frame_length
        self.hop_length = hop_length
        self.n_mels = n_mels
        self.n_mfcc = n_mfcc
        self.pitch_fmin = pitch_fmin
        self.pitch_fmax = pitch_fmax
        self.pitch_conf_threshold = pitch_conf_threshold
        self.delta_width = delta_width

    def _config(self) -> FeatureConfig:
        cfg = FeatureConfig(
            frame_length=self.frame_length,
            hop_length=self.hop_length,
            n_mels=self.n_mels,
            n_mfcc=self.n_mfcc,
            pitch_fmin=self.pitch_fmin,
            pitch_fmax=self.pitch_fmax,
            pitch_conf_threshold=self.pitch_conf_threshold,
            delta_width=self.delta_width,
        )
        if cfg.n_mfcc != 13 or cfg.n_mels < cfg.n_mfcc:
            raise ValidationError(
                "n_mfcc must stay 13 to preserve the fixed feature order"
            )
        if cfg.hop_length <= 0 or cfg.frame_length <= 0:
            raise ValidationError("frame_length and hop_length must be positive")
        return cfg

    def fit(self, X=None, y=None):
        self._config()
        return self

    def transform(self, X: Iterable[AudioClip]) -> np.ndarray:
        cfg = self._config()
        rows = [extract_features(clip, cfg) for clip in X]
        if not rows:
            return np.empty((0, N_FEATURES))
        return np.vstack(rows)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FEATURE_NAMES, dtype=object)


# --- CSV export/import --------------------------------------------------------

@dataclass
class FeatureRow:
    video_id: str
    start_s: float
    end_s: float
    values: np.ndarray
    label: Optional[str] = None

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


_KEY_COLUMNS = ("video_id", "start_s", "end_s")


def write_features_csv(path, rows: Iterable[FeatureRow]) -> None:
    """Fixed-order CSV: video_id,start_s,end_s + the 70 feature columns."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(_KEY_COLUMNS) + list(FEATURE_NAMES))
        for row in rows:
            if len(row.values) != N_FEATURES:
                raise ValidationError(
                    f"feature vector for {row.video_id} has {len(row.values)} "
                    f"values, expected {N_FEATURES}"
                )
            writer.writerow(
                [row.video_id, q3(row.start_s), q3(row.end_s)]
                + [repr(float(v)) for v in row.values]
            )


def read_features_csv(path) -> list[FeatureRow]:
    """Parse and validate a features CSV; header order is the contract."""
    path = Path(path)
    expected = list(_KEY_COLUMNS) + list(FEATURE_NAMES)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file") from None
        if header != expected:
            missing = [c for c in expected if c not in header]
            if missing:
                raise ParseError(path, 1, f"missing column '{missing[0]}'")
            raise ParseError(
                path, 1,
                "column order must be video_id,start_s,end_s followed by "
                "the documented feature order",
            )
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(expected):
                raise ParseError(
                    path, lineno,
                    f"expected {len(expected)} cells, got {len(cells)}",
                )
            try:
                start_s = float(cells[1])
                end_s = float(cells[2])
                values = np.array([float(c) for c in cells[3:]])
            except ValueError as exc:
                raise ParseError(path, lineno, f"bad number: {exc}") from None
            if not np.all(np.isfinite(values)) or not math.isfinite(start_s) \
                    or not math.isfinite(end_s):
                raise ParseError(path, lineno, "non-finite value")
            rows.append(FeatureRow(cells[0], start_s, end_s, values))
    return rows
