"""Linear acoustic features: duration, energy, spectral, MFCC, prosodic and voice quality."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .signal_io import AudioSignal, frame
from .vad import (UNVOICED, VOICED, FrameAnalysis, SegmentMap, VadConfig, analyze,
                  short_time_energy)

RELEVANT_MIN_S = 0.05
HIST_EDGES = (0.05, 0.1, 0.2, 0.4, 0.8, 1.6, np.inf)
N_MEL = 26
N_MFCC = 12
LOG_FLOOR = 1e-10
INTENSITY_REF = 1e-10


@dataclass(frozen=True, eq=False)
class PitchTrack:
    voiced: np.ndarray          # per-frame flag
    f0: np.ndarray              # Hz, NaN where unvoiced
    period: np.ndarray          # s, NaN where unvoiced
    peak_amplitude: np.ndarray  # per-frame max |sample|
    frame_autocorr: np.ndarray  # normalized autocorrelation peak in [0, 1]

    @property
    def frame_count(self) -> int:
        return self.voiced.size


def _stats(x: np.ndarray) -> tuple[float, float, float, float]:
    """mean, std, max, min, or zeros for an empty sample."""
    if x.size == 0:
        return 0.0, 0.0, 0.0, 0.0
    return float(x.mean()), float(x.std()), float(x.max()), float(x.min())


def lsq_slope(y: np.ndarray) -> float:
    """Least-squares slope of y against its index."""
    if y.size < 2:
        return 0.0
    t = np.arange(y.size, dtype=float)
    t -= t.mean()
    return float(np.dot(t, y - y.mean()) / np.dot(t, t))


def duration_histogram(d: np.ndarray) -> np.ndarray:
    """Counts over the fixed bins [0.05, 0.1], (0.1, 0.2], ..., (1.6, inf)."""
    d = d[d >= RELEVANT_MIN_S]
    idx = np.searchsorted(np.asarray(HIST_EDGES[1:-1]), d, side="left")
    return np.bincount(idx, minlength=len(HIST_EDGES) - 1).astype(float)


def duration_features(seg_map: SegmentMap) -> np.ndarray:
    """11 values per kind (voiced, then unvoiced): mean, max, min, % of time,
    6 histogram counts, and the slope of duration against segment index."""
    if len(seg_map) == 0:
        raise ValueError("empty segment map")
    total = seg_map.total_duration_s
    out = []
    for kind in (VOICED, UNVOICED):
        d = seg_map.durations(kind)
        pct = 100.0 * d.sum() / total if total > 0 and d.size else 0.0
        rel = d[d >= RELEVANT_MIN_S]
        if rel.size == 0:
            out.extend([0.0] * 11)
            continue
        out.extend([rel.mean(), rel.max(), rel.min(), pct])
        out.extend(duration_histogram(rel))
        out.append(lsq_slope(rel))
    return np.array(out, dtype=float)


def energy_features(signal: AudioSignal, cfg: VadConfig = VadConfig(),
                    analysis: FrameAnalysis | None = None) -> np.ndarray:
    """Mean and std of short-time energy and of its first difference.

    The difference mean is taken over absolute values.
    """
    if analysis is not None:
        e = analysis.energy
    else:
        e = short_time_energy(frame(signal, cfg.frame_ms, cfg.hop_ms, "hamming"))
    if e.size < 2:
        raise ValueError("energy features need at least two frames")
    de = np.diff(e)
    return np.array([e.mean(), e.std(), np.abs(de).mean(), de.std()])


def magnitude_spectrum(frames: np.ndarray) -> np.ndarray:
    return np.abs(np.fft.rfft(frames, axis=-1))


def spectral_centroid(frame_: np.ndarray, sample_rate: int) -> float | np.ndarray:
    """Magnitude-weighted mean frequency; accepts one frame or a stack of frames."""
    f = np.asarray(frame_, dtype=float)
    mag = magnitude_spectrum(f)
    freqs = np.arange(mag.shape[-1]) * sample_rate / f.shape[-1]
    total = mag.sum(axis=-1)
    num = mag @ freqs
    out = np.where(total > 0, num / np.where(total > 0, total, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_filterbank(n_fft: int, sample_rate: int, n_filters: int = N_MEL) -> np.ndarray:
    """Triangular filters equally spaced in mel between 0 and Nyquist.

    Returns an (n_fft//2 + 1, n_filters) weight matrix evaluated at the bin
    frequencies k * sample_rate / n_fft.
    """
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_filters + 2))
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    lo, mid, hi = edges[:-2], edges[1:-1], edges[2:]
    f = freqs[:, None]
    up = (f - lo) / (mid - lo)
    down = (hi - f) / (hi - mid)
    return np.maximum(0.0, np.minimum(up, down))


def mfcc(frame_: np.ndarray, sample_rate: int, n_filters: int = N_MEL,
         n_coeffs: int = N_MFCC) -> np.ndarray:
    """c1..c12 of a windowed frame (or stack of frames); c0 is dropped."""
    f = np.asarray(frame_, dtype=float)
    if f.shape[-1] < 64:
        raise ValueError("mfcc needs frames of at least 64 samples")
    fb = mel_filterbank(f.shape[-1], sample_rate, n_filters)
    energies = magnitude_spectrum(f) @ fb
    logmel = np.log(np.maximum(energies, LOG_FLOOR))
    return dct(logmel, type=2, norm="ortho", axis=-1)[..., 1:n_coeffs + 1]


def pitch_track(signal: AudioSignal, cfg: VadConfig = VadConfig(),
                analysis: FrameAnalysis | None = None) -> PitchTrack:
    a = analysis if analysis is not None else analyze(signal, cfg)
    voiced = a.evidence.copy()
    f0 = np.full(a.frame_count, np.nan)
    f0[voiced] = np.clip(a.sample_rate / a.peak_lag[voiced], 75.0, 400.0)
    return PitchTrack(voiced, f0, 1.0 / f0, a.peak_amplitude.copy(), a.autocorr_peak.copy())


def acoustic_features(track: PitchTrack, signal: AudioSignal, cfg: VadConfig = VadConfig(),
                      analysis: FrameAnalysis | None = None) -> np.ndarray:
    """pitch mean/std/max/min, intensity mean/std/max/min (dB), period mean/std, RMS."""
    f0 = track.f0[track.voiced]
    pitch = _stats(f0)
    e = analysis.energy if analysis is not None else short_time_energy(
        frame(signal, cfg.frame_ms, cfg.hop_ms, "hamming"))
    e = e[e > 0]
    intensity = _stats(10.0 * np.log10(e / INTENSITY_REF))
    period = track.period[track.voiced]
    per = (float(period.mean()), float(period.std())) if period.size else (0.0, 0.0)
    rms = float(np.sqrt(np.mean(signal.samples ** 2)))
    return np.array([pitch[0], pitch[1], pitch[2], pitch[3], *intensity, *per, rms])


def _local_perturbation(values: np.ndarray, voiced: np.ndarray) -> float:
    """100 * mean |v_i - v_{i-1}| over consecutive voiced pairs / mean over voiced."""
    pairs = voiced[1:] & voiced[:-1]
    if not pairs.any():
        return 0.0
    diffs = np.abs(np.diff(values))[pairs]
    ref = values[voiced].mean()
    return float(100.0 * diffs.mean() / ref) if ref > 0 else 0.0


def voice_quality(track: PitchTrack) -> np.ndarray:
    """local jitter (%), local shimmer (%), NHR, HNR (dB), mean autocorrelation."""
    v = track.voiced
    if not v.any():
        return np.zeros(5)
    period = np.where(v, track.period, 0.0)
    jitter = _local_perturbation(period, v)
    shimmer = _local_perturbation(track.peak_amplitude, v)
    r = float(track.frame_autocorr[v].mean())
    rc = min(max(r, 1e-6), 1.0 - 1e-6)
    return np.array([jitter, shimmer, (1.0 - rc) / rc, 10.0 * np.log10(rc / (1.0 - rc)), r])


def duration_ratios(track: PitchTrack, seg_map: SegmentMap) -> np.ndarray:
    """Percent of unvoiced frames and degree of voice breaks (percent of time)."""
    n = track.frame_count
    frac = 100.0 * (n - int(track.voiced.sum())) / n if n else 100.0
    voiced_idx = [i for i, (_, _, k) in enumerate(seg_map.segments) if k == VOICED]
    breaks = 0.0
    if len(voiced_idx) >= 2:
        first, last = voiced_idx[0], voiced_idx[-1]
        breaks = sum(e - s for s, e, k in seg_map.segments[first + 1:last] if k == UNVOICED)
    total = seg_map.total_duration_s
    return np.array([frac, 100.0 * breaks / total if total > 0 else 0.0])


def linear_block(signal: AudioSignal, cfg: VadConfig = VadConfig(),
                 analysis: FrameAnalysis | None = None,
                 seg_map: SegmentMap | None = None) -> np.ndarray:
    """All 70 linear features in registry order."""
    from .vad import segment_voicing

    a = analysis if analysis is not None else analyze(signal, cfg)
    seg_map = seg_map if seg_map is not None else segment_voicing(signal, cfg, a)
    windowed = frame(signal, cfg.frame_ms, cfg.hop_ms, "hamming").frames
    centroid = spectral_centroid(windowed, signal.sample_rate)
    cc = mfcc(windowed, signal.sample_rate)
    track = pitch_track(signal, cfg, a)
    parts = [
        duration_features(seg_map),
        energy_features(signal, cfg, a),
        [centroid.mean(), centroid.std()],
        cc.mean(axis=0),
        cc.std(axis=0),
        acoustic_features(track, signal, cfg, a),
        voice_quality(track),
        duration_ratios(track, seg_map),
    ]
    return np.concatenate([np.asarray(p, dtype=float) for p in parts])
