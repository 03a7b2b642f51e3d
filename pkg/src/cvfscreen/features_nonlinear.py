"""Castiglioni fractal dimension and permutation entropy."""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial, log

import numpy as np

from ._backend import kernels
from .signal_io import AudioSignal, SignalTooShort, ms_to_samples

FD_MAX = 10.0
PE_ORDER_RANGE = (3, 7)
MIN_FD_WINDOW = 100


@dataclass(frozen=True)
class NldConfig:
    window_ms: float = 500.0
    window_hop_ms: float = 250.0
    pe_orders: tuple[int, ...] = (3, 5)
    pe_delay: int = 1
    pe_normalized: bool = True

    def __post_init__(self):
        if not self.window_ms >= self.window_hop_ms > 0:
            raise ValueError("need window_ms >= window_hop_ms > 0")
        for m in self.pe_orders:
            if not PE_ORDER_RANGE[0] <= m <= PE_ORDER_RANGE[1]:
                raise ValueError(f"permutation entropy order {m} outside {PE_ORDER_RANGE}")
        if self.pe_delay < 1:
            raise ValueError("pe_delay must be >= 1")

    def window_samples(self, sample_rate: int) -> tuple[int, int]:
        win = ms_to_samples(self.window_ms, sample_rate)
        hop = max(1, ms_to_samples(self.window_hop_ms, sample_rate))
        need = max(MIN_FD_WINDOW, max(self.pe_orders) * self.pe_delay + 1)
        if win < need:
            raise ValueError(f"window of {win} samples is below the {need}-sample minimum")
        return win, hop


def castiglioni_fd(window, fd_max: float = FD_MAX) -> float:
    """Waveform fractal dimension from path length and maximal excursion.

    FD = log10(n-1) / (log10(n-1) + log10(d/L)) with L the summed absolute
    increments and d the largest distance from the first sample. A constant
    window gives 1.0; a vanishing or negative denominator clamps to ``fd_max``.
    """
    y = np.asarray(window, dtype=np.float64)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("castiglioni_fd needs at least 2 samples")
    return float(kernels.castiglioni_fd(y, fd_max))


def _check_pe(n: int, m: int, tau: int) -> None:
    if not PE_ORDER_RANGE[0] <= m <= PE_ORDER_RANGE[1]:
        raise ValueError(f"order m={m} outside {PE_ORDER_RANGE}")
    if tau < 1:
        raise ValueError("delay must be >= 1")
    if n < m * tau + 1:
        raise ValueError(f"window of {n} samples too short for m={m}, tau={tau}")


def ordinal_patterns(x, m: int, tau: int = 1) -> np.ndarray:
    """Integer code of the ordinal pattern at every admissible index.

    Ties rank by position, so equal values keep their temporal order.
    """
    return kernels.ordinal_codes(np.asarray(x, dtype=np.float64), int(m), int(tau))


def entropy_from_counts(counts: np.ndarray, m: int, normalized: bool) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    h = float(-np.sum(p * np.log(p)))
    h = max(h, 0.0)
    return h / log(factorial(m)) if normalized else h


def permutation_entropy(window, m: int = 3, tau: int = 1, normalized: bool = True) -> float:
    x = np.asarray(window, dtype=np.float64)
    _check_pe(x.size, m, tau)
    codes = ordinal_patterns(x, m, tau)
    return entropy_from_counts(np.bincount(codes, minlength=factorial(m)), m, normalized)


def windowed_permutation_entropy(x: np.ndarray, win: int, hop: int, m: int, tau: int,
                                 normalized: bool) -> tuple[np.ndarray, np.ndarray]:
    """PE of every window, reusing one pass of pattern codes over the signal."""
    _check_pe(win, m, tau)
    codes = ordinal_patterns(x, m, tau)
    per_window = win - (m - 1) * tau
    count = (x.size - win) // hop + 1
    nf = factorial(m)
    out = np.empty(count)
    for i in range(count):
        c = np.bincount(codes[i * hop: i * hop + per_window], minlength=nf)
        out[i] = entropy_from_counts(c, m, normalized)
    return out, codes


def _summary(v: np.ndarray) -> tuple[float, float, float, float]:
    return float(v.mean()), float(v.std()), float(v.max()), float(v.min())


def nld_block(signal: AudioSignal, cfg: NldConfig = NldConfig()) -> np.ndarray:
    """The 10 nonlinear features in registry order.

    CFD windowed mean/std/max/min and global; PE(m=3) windowed mean/std;
    PE(m=5) windowed mean/std and global.
    """
    x = signal.samples
    win, hop = cfg.window_samples(signal.sample_rate)
    if x.size < win:
        raise SignalTooShort(x.size, win)
    cfd = kernels.windowed_cfd(x, win, hop, FD_MAX)
    out = [*_summary(cfd), castiglioni_fd(x)]
    lo, hi = min(cfg.pe_orders), max(cfg.pe_orders)
    pe_lo, _ = windowed_permutation_entropy(x, win, hop, lo, cfg.pe_delay, cfg.pe_normalized)
    pe_hi, codes_hi = windowed_permutation_entropy(x, win, hop, hi, cfg.pe_delay,
                                                   cfg.pe_normalized)
    global_hi = entropy_from_counts(np.bincount(codes_hi, minlength=factorial(hi)), hi,
                                    cfg.pe_normalized)
    out += [pe_lo.mean(), pe_lo.std(), pe_hi.mean(), pe_hi.std(), global_hi]
    return np.array(out, dtype=float)
