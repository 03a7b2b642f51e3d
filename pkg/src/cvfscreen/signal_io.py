"""Audio loading, validation and framing."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

SUPPORTED_RATES = (8000, 16000, 22050, 44100, 48000)
WINDOW_KINDS = ("rectangular", "hamming")


class AudioError(ValueError):
    """Invalid or unsupported audio input."""


class SignalTooShort(AudioError):
    def __init__(self, n_samples: int, required: int):
        super().__init__(f"signal too short: {n_samples} samples, at least {required} required")
        self.n_samples = n_samples
        self.required = required


@dataclass(frozen=True, eq=False)
class AudioSignal:
    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1 or x.size == 0:
            raise AudioError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(x)):
            raise AudioError("samples contain non-finite values")
        if self.sample_rate not in SUPPORTED_RATES:
            raise AudioError(f"unsupported sample rate {self.sample_rate} Hz; "
                             f"expected one of {SUPPORTED_RATES}")
        object.__setattr__(self, "samples", x)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True, eq=False)
class FrameSequence:
    frames: np.ndarray  # shape (frame_count, frame_len)
    frame_len: int
    hop: int
    window_kind: str
    sample_rate: int

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]


def load_wav(path: str | Path) -> AudioSignal:
    """Read a PCM16 or float32 WAV file into a mono, DC-free signal."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"audio file not found: {path}")
    try:
        rate, data = wavfile.read(path)
    except (ValueError, OSError, EOFError) as exc:
        raise AudioError(f"{path}: unreadable WAV file ({exc})") from exc
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise AudioError(f"{path}: unsupported encoding {data.dtype}; expected PCM16 or float32")
    if x.ndim == 2:
        if x.shape[1] not in (1, 2):
            raise AudioError(f"{path}: {x.shape[1]} channels; expected 1 or 2")
        x = x.mean(axis=1)
    if x.size == 0:
        raise AudioError(f"{path}: zero-length audio")
    if rate not in SUPPORTED_RATES:
        raise AudioError(f"{path}: unsupported sample rate {rate} Hz")
    if not np.all(np.isfinite(x)):
        raise AudioError(f"{path}: non-finite samples")
    x = np.clip(x, -1.0, 1.0)
    x = x - x.mean()
    return AudioSignal(x, int(rate), path.name)


def write_wav(path: str | Path, signal: AudioSignal) -> None:
    """Write a signal as 16-bit PCM."""
    pcm = np.clip(np.round(signal.samples * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(Path(path), signal.sample_rate, pcm)


def hamming(n: int) -> np.ndarray:
    if n == 1:
        return np.ones(1)
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def ms_to_samples(ms: float, sample_rate: int) -> int:
    return int(round(ms * sample_rate / 1000.0))


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    if n_samples < frame_len:
        return 0
    return (n_samples - frame_len) // hop + 1


def frame(signal: AudioSignal, frame_ms: float, hop_ms: float,
          window_kind: str = "hamming") -> FrameSequence:
    if not frame_ms >= hop_ms > 0:
        raise ValueError(f"need frame_ms >= hop_ms > 0, got {frame_ms}, {hop_ms}")
    if window_kind not in WINDOW_KINDS:
        raise ValueError(f"unknown window kind {window_kind!r}")
    frame_len = ms_to_samples(frame_ms, signal.sample_rate)
    hop = max(1, ms_to_samples(hop_ms, signal.sample_rate))
    n = frame_count(len(signal), frame_len, hop)
    if n == 0:
        raise SignalTooShort(len(signal), frame_len)
    x = signal.samples
    frames = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop][:n].copy()
    if window_kind == "hamming":
        frames *= hamming(frame_len)
    return FrameSequence(frames, frame_len, hop, window_kind, signal.sample_rate)
