"""Energy + periodicity voice activity detection and voiced/unvoiced segmentation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signal_io import AudioSignal, FrameSequence, SignalTooShort, frame, hamming, ms_to_samples

VOICED = "voiced"
UNVOICED = "unvoiced"

F0_MIN = 75.0
F0_MAX = 400.0
# candidate peaks within this fraction of the band maximum count as the
# fundamental; the smallest such lag wins (guards against octave errors)
OCTAVE_GUARD = 0.9


@dataclass(frozen=True)
class VadConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    energy_floor_ratio: float = 0.03
    voicing_autocorr_min: float = 0.45
    min_segment_ms: float = 50.0
    hangover_frames: int = 2

    def __post_init__(self):
        if not self.frame_ms >= self.hop_ms > 0:
            raise ValueError("need frame_ms >= hop_ms > 0")
        for name in ("energy_floor_ratio", "voicing_autocorr_min"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.min_segment_ms <= 0:
            raise ValueError("min_segment_ms must be positive")
        if self.hangover_frames < 0:
            raise ValueError("hangover_frames must be >= 0")


@dataclass(frozen=True)
class SegmentMap:
    segments: tuple[tuple[float, float, str], ...]
    total_duration_s: float

    def durations(self, kind: str | None = None) -> np.ndarray:
        return np.array([e - s for s, e, k in self.segments if kind is None or k == kind])

    def kinds(self) -> list[str]:
        return [k for _, _, k in self.segments]

    def __len__(self) -> int:
        return len(self.segments)

    def to_table(self) -> str:
        return "".join(f"{s:.6f}\t{e:.6f}\t{k}\n" for s, e, k in self.segments)


@dataclass(frozen=True, eq=False)
class FrameAnalysis:
    """Per-frame quantities shared by the VAD and the pitch tracker."""
    energy: np.ndarray        # Hamming-windowed short-time energy
    autocorr_peak: np.ndarray  # normalized autocorrelation peak in the pitch band
    peak_lag: np.ndarray      # interpolated lag of that peak (samples); 0 when undefined
    peak_amplitude: np.ndarray
    frame_len: int
    hop: int
    sample_rate: int
    n_samples: int
    evidence: np.ndarray = field(default=None)  # raw voicing decisions before hangover

    @property
    def frame_count(self) -> int:
        return self.energy.size


def short_time_energy(frames: FrameSequence | np.ndarray) -> np.ndarray:
    f = frames.frames if isinstance(frames, FrameSequence) else np.asarray(frames, dtype=float)
    if f.ndim != 2 or f.shape[0] == 0:
        raise ValueError("short_time_energy needs at least one frame")
    return np.einsum("ij,ij->i", f, f) / f.shape[1]


def pitch_lag_band(sample_rate: int) -> tuple[int, int]:
    return int(np.ceil(sample_rate / F0_MAX)), int(np.floor(sample_rate / F0_MIN))


def normalized_autocorrelation(frames: np.ndarray, lag_lo: int, lag_hi: int) -> np.ndarray:
    """Window-corrected normalized autocorrelation of Hamming-windowed frames.

    r(l) = (a(l) / a(0)) / (w(l) / w(0)), where a is the autocorrelation of the
    windowed frame and w that of the window itself. A periodic frame peaks
    near 1 at its period; a frame only partly covered by a periodic sound
    stays low until about half the frame is covered. Silent frames give 0.
    """
    n_frames, n = frames.shape
    lag_hi = min(lag_hi, n - 1)
    nfft = 1 << int(np.ceil(np.log2(n + lag_hi + 1)))
    lags = np.arange(lag_lo, lag_hi + 1)

    def acf(x):
        spec = np.fft.rfft(x, nfft, axis=-1)
        return np.fft.irfft(spec.real ** 2 + spec.imag ** 2, nfft, axis=-1)

    wa = acf(hamming(n))
    a = acf(frames)
    zero = a[:, 0]
    out = np.zeros((n_frames, lags.size))
    ok = zero > 1e-20
    out[ok] = (a[ok][:, lags] / zero[ok, None]) / (wa[lags] / wa[0])
    return np.clip(out, -1.0, 1.0)


def _pick_peaks(r: np.ndarray, lag_lo: int) -> tuple[np.ndarray, np.ndarray]:
    """First near-maximal local peak per row; r covers lags lag_lo-1 .. lag_hi+1."""
    inner = r[:, 1:-1]
    local = (inner >= r[:, :-2]) & (inner > r[:, 2:])
    band_max = inner.max(axis=1)
    cand = local & (inner >= OCTAVE_GUARD * band_max[:, None]) & (inner > 0)
    has = cand.any(axis=1)
    idx = np.where(has, cand.argmax(axis=1), inner.argmax(axis=1))
    rows = np.arange(r.shape[0])
    peak = inner[rows, idx]
    left = r[rows, idx]
    right = r[rows, idx + 2]
    curv = left - 2.0 * peak + right
    delta = np.zeros_like(peak)
    nz = curv < -1e-12
    delta[nz] = 0.5 * (left[nz] - right[nz]) / curv[nz]
    delta = np.clip(delta, -0.5, 0.5)
    return np.clip(peak, 0.0, 1.0), lag_lo + idx + delta


def analyze(signal: AudioSignal, cfg: VadConfig = VadConfig()) -> FrameAnalysis:
    """Frame the signal and compute energy, autocorrelation peak and raw voicing."""
    windowed = frame(signal, cfg.frame_ms, cfg.hop_ms, "hamming")
    rect = frame(signal, cfg.frame_ms, cfg.hop_ms, "rectangular").frames
    energy = short_time_energy(windowed)
    lag_lo, lag_hi = pitch_lag_band(signal.sample_rate)
    lag_hi = min(lag_hi, windowed.frame_len - 2)
    if lag_lo > lag_hi:
        raise SignalTooShort(len(signal), 2 * lag_lo)
    r = normalized_autocorrelation(windowed.frames, lag_lo - 1, lag_hi + 1)
    peak, lag = _pick_peaks(r, lag_lo)
    p95 = float(np.percentile(energy, 95))
    evidence = (energy > 0.0) & (energy >= cfg.energy_floor_ratio * p95) & \
        (peak >= cfg.voicing_autocorr_min)
    lag = np.where(evidence, lag, 0.0)
    return FrameAnalysis(
        energy=energy,
        autocorr_peak=peak,
        peak_lag=lag,
        peak_amplitude=np.abs(rect).max(axis=1),
        frame_len=windowed.frame_len,
        hop=windowed.hop,
        sample_rate=signal.sample_rate,
        n_samples=len(signal),
        evidence=evidence,
    )


def bridge_gaps(flags: np.ndarray, max_gap: int) -> np.ndarray:
    """Keep the voiced state through unvoiced gaps of at most ``max_gap`` frames."""
    out = flags.copy()
    if max_gap <= 0 or not flags.any():
        return out
    idx = np.flatnonzero(flags)
    gaps = np.diff(idx) - 1
    for start, gap in zip(idx[:-1], gaps):
        if 0 < gap <= max_gap:
            out[start + 1:start + 1 + gap] = True
    return out


def frame_voicing(signal: AudioSignal, cfg: VadConfig = VadConfig(),
                  analysis: FrameAnalysis | None = None) -> np.ndarray:
    a = analysis if analysis is not None else analyze(signal, cfg)
    return bridge_gaps(a.evidence, cfg.hangover_frames)


def _runs(flags: np.ndarray) -> list[list]:
    """Maximal runs as [first_frame, last_frame_exclusive, voiced]."""
    runs = []
    start = 0
    for i in range(1, flags.size + 1):
        if i == flags.size or flags[i] != flags[start]:
            runs.append([start, i, bool(flags[start])])
            start = i
    return runs


def _merge(runs: list[list]) -> list[list]:
    out = []
    for r in runs:
        if out and out[-1][2] == r[2]:
            out[-1][1] = r[1]
        else:
            out.append(list(r))
    return out


def frame_boundaries(n_frames: int, frame_len: int, hop: int, sample_rate: int,
                     n_samples: int) -> np.ndarray:
    """Time boundaries (s) of the interval each frame stands for.

    Frame i covers hop-wide time centred on its own centre; the first interval
    starts at 0 and the last ends at the recording's end.
    """
    i = np.arange(n_frames + 1, dtype=float)
    b = (i * hop + 0.5 * frame_len - 0.5 * hop) / sample_rate
    b[0] = 0.0
    b[-1] = n_samples / sample_rate
    return b


def segments_from_flags(flags: np.ndarray, bounds: np.ndarray, min_segment_s: float,
                        total: float) -> SegmentMap:
    runs = _runs(flags)
    while len(runs) > 1:
        short = next((j for j, r in enumerate(runs)
                      if bounds[r[1]] - bounds[r[0]] < min_segment_s), None)
        if short is None:
            break
        # flip the short run; it then merges with its (opposite-kind) neighbours
        runs[short][2] = not runs[short][2]
        runs = _merge(runs)
    segs = tuple((float(bounds[a]), float(bounds[b]), VOICED if v else UNVOICED)
                 for a, b, v in runs)
    return SegmentMap(segs, float(total))


def segment_voicing(signal: AudioSignal, cfg: VadConfig = VadConfig(),
                    analysis: FrameAnalysis | None = None) -> SegmentMap:
    a = analysis if analysis is not None else analyze(signal, cfg)
    flags = frame_voicing(signal, cfg, a)
    bounds = frame_boundaries(a.frame_count, a.frame_len, a.hop, a.sample_rate, a.n_samples)
    return segments_from_flags(flags, bounds, cfg.min_segment_ms / 1000.0, signal.duration)


def frame_time_hop(cfg: VadConfig, sample_rate: int) -> float:
    return ms_to_samples(cfg.hop_ms, sample_rate) / sample_rate
