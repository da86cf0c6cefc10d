"""WAV loading, downmixing, slicing, and resampling to the analysis rate."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import ValidationError

TARGET_SR = 22050

_INT_SCALE = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
}


@dataclass
class AudioClip:
    samples: np.ndarray  # mono float64 in [-1, 1]
    sample_rate: int
    video_id: str
    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def _to_float_mono(data: np.ndarray) -> np.ndarray:
    if data.dtype in _INT_SCALE:
        samples = data.astype(np.float64) / _INT_SCALE[data.dtype]
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValidationError(f"unsupported WAV sample format: {data.dtype}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    elif samples.ndim != 1:
        raise ValidationError(f"unsupported WAV shape: {samples.shape}")
    return np.clip(samples, -1.0, 1.0)


def read_wav(path) -> tuple[int, np.ndarray]:
    """Read a PCM WAV as (sample_rate, mono float64 samples in [-1, 1])."""
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise ValidationError(f"{path}: cannot read WAV: {exc}") from exc
    return rate, _to_float_mono(data)


def resample(samples: np.ndarray, rate: int, target: int = TARGET_SR) -> np.ndarray:
    if rate == target:
        return samples
    g = np.gcd(rate, target)
    return resample_poly(samples, target // g, rate // g)


def load_clip(path, start_s: float, end_s: float,
              video_id: str | None = None) -> AudioClip:
    """Cut [start_s, end_s] out of a WAV file at the analysis rate.

    The slice is taken at the file's native rate, then resampled to
    22050 Hz. Intervals outside the file are an error.
    """
    path = Path(path)
    if end_s <= start_s:
        raise ValidationError(
            f"{path}: empty clip interval [{start_s}, {end_s}]"
        )
    rate, samples = read_wav(path)
    total = len(samples) / rate
    if start_s < 0 or start_s >= total or end_s > total + 1e-6:
        raise ValidationError(
            f"{path}: interval [{start_s}, {end_s}] outside file "
            f"(duration {total:.3f} s)"
        )
    lo = int(round(start_s * rate))
    hi = min(len(samples), lo + int(round((end_s - start_s) * rate)))
    cut = resample(samples[lo:hi], rate)
    return AudioClip(
        samples=np.clip(cut, -1.0, 1.0),
        sample_rate=TARGET_SR,
        video_id=video_id if video_id is not None else path.stem,
        start_s=start_s,
        end_s=end_s,
    )
