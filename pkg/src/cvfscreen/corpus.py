"""Corpus manifests and the synthetic verbal-fluency corpus generator."""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .signal_io import SUPPORTED_RATES, AudioSignal, write_wav

LABELS = ("CR", "MCI")
MANIFEST_HEADER = ("path", "label", "subject_id")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    path: Path
    label: str
    subject_id: str


@dataclass(frozen=True)
class Corpus:
    entries: tuple[CorpusEntry, ...]

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(e.label for e in self.entries)
        return {lab: c.get(lab, 0) for lab in LABELS}

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def ingest_manifest(path: str | Path, require_both: bool = True,
                    check_files: bool = True) -> Corpus:
    """Parse a ``path,label,subject_id`` manifest with a header line.

    Relative audio paths resolve against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    base = path.parent
    entries = []
    seen = set()
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != MANIFEST_HEADER:
        raise ManifestError(f"{path}:1: header must be {','.join(MANIFEST_HEADER)}")
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ManifestError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
        p, label, subject = (c.strip() for c in row)
        if label not in LABELS:
            raise ManifestError(f"{path}:{lineno}: unknown label {label!r}; "
                                f"allowed labels are {', '.join(LABELS)}")
        audio = Path(p) if Path(p).is_absolute() else base / p
        key = audio.resolve()
        if key in seen:
            raise ManifestError(f"{path}:{lineno}: duplicate path {p}")
        seen.add(key)
        if check_files and not audio.is_file():
            raise FileNotFoundError(f"{path}:{lineno}: audio file not found: {audio}")
        entries.append(CorpusEntry(audio, label, subject))
    corpus = Corpus(tuple(entries))
    if require_both:
        empty = [lab for lab, n in corpus.counts.items() if n == 0]
        if empty:
            raise ManifestError(f"{path}: class {', '.join(empty)} has no entries")
    return corpus


def write_manifest(path: str | Path, rows: list[tuple[str, str, str]]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        w.writerows(rows)


# -- synthetic corpus ------------------------------------------------------

@dataclass(frozen=True)
class ClassSpec:
    """Generative parameters for one diagnostic group."""
    count: int = 50
    burst_rate: float = 20.0       # word bursts per minute
    burst_ms_mean: float = 450.0
    burst_ms_std: float = 120.0
    f0_mean: float = 150.0         # group mean of the speaker's f0 (Hz)
    f0_spread: float = 20.0        # between-speaker f0 std (Hz)
    jitter: float = 0.005          # relative per-period std
    shimmer: float = 0.03          # relative per-period amplitude std
    pause_cv: float = 0.6          # coefficient of variation of pause lengths
    noise_floor: float = 0.002     # background noise std
    noise_kind: str = "gaussian"   # gaussian | uniform | laplace
    breathiness: float = 0.05      # aspiration noise relative to voiced amplitude
    speaker_spread: float = 0.15   # relative between-speaker spread of the rate/duration/noise parameters
    fixed_bursts: int | None = None  # exact burst count instead of a Poisson draw


@dataclass(frozen=True)
class SynthSpec:
    classes: dict = field(default_factory=lambda: {"CR": ClassSpec(), "MCI": ClassSpec()})
    duration_s: float = 60.0
    sample_rate: int = 16000
    min_pause_ms: float = 200.0

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        classes = {}
        for name, params in d.get("classes", {}).items():
            if name not in LABELS:
                raise ValueError(f"unknown class {name!r} in synth spec")
            classes[name] = ClassSpec(**params)
        kw = {k: d[k] for k in ("duration_s", "sample_rate", "min_pause_ms") if k in d}
        spec = cls(classes=classes, **kw)
        if spec.sample_rate not in SUPPORTED_RATES:
            raise ValueError(f"unsupported sample rate {spec.sample_rate}")
        return spec

    @classmethod
    def load(cls, path: str | Path) -> "SynthSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {"duration_s": self.duration_s, "sample_rate": self.sample_rate,
                "min_pause_ms": self.min_pause_ms,
                "classes": {k: asdict(v) for k, v in self.classes.items()}}


def _noise(rng: np.random.Generator, kind: str, std: float, n: int) -> np.ndarray:
    if std <= 0:
        return np.zeros(n)
    if kind == "gaussian":
        return rng.normal(0.0, std, n)
    if kind == "uniform":
        half = std * np.sqrt(3.0)
        return rng.uniform(-half, half, n)
    if kind == "laplace":
        return rng.laplace(0.0, std / np.sqrt(2.0), n)
    raise ValueError(f"unknown noise kind {kind!r}")


def _burst(rng: np.random.Generator, n: int, fs: int, f0: float, p: ClassSpec) -> np.ndarray:
    """One voiced 'word': a jittered harmonic pulse train under a smooth envelope."""
    periods = []
    total = 0.0
    while total < n / fs:
        t = (1.0 / f0) * (1.0 + p.jitter * rng.standard_normal())
        t = max(t, 0.5 / f0)
        periods.append(t)
        total += t
    periods = np.array(periods)
    starts = np.concatenate([[0.0], np.cumsum(periods)[:-1]])
    gains = np.maximum(1.0 + p.shimmer * rng.standard_normal(periods.size), 0.1)
    t = np.arange(n) / fs
    k = np.searchsorted(starts, t, side="right") - 1
    phase = (t - starts[k]) / periods[k]
    wave = sum((0.6 ** h) * np.sin(2.0 * np.pi * (h + 1) * phase) for h in range(4))
    wave = wave / 2.2 * gains[k]
    ramp = min(int(0.02 * fs), n // 2)
    env = np.ones(n)
    if ramp > 0:
        edge = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
        env[:ramp] = edge
        env[n - ramp:] = edge[::-1]
    breath = p.breathiness * rng.standard_normal(n)
    return env * (wave + breath)


def _speaker(p: ClassSpec, rng: np.random.Generator) -> ClassSpec:
    """Draw one speaker's parameters around the group values."""
    if p.speaker_spread <= 0:
        return p
    names = ("burst_rate", "burst_ms_mean", "pause_cv", "noise_floor", "breathiness")
    factors = np.exp(p.speaker_spread * rng.standard_normal(len(names)))
    return replace(p, **{n: getattr(p, n) * f for n, f in zip(names, factors)})


def synth_recording(p: ClassSpec, spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    p = _speaker(p, rng)
    fs = spec.sample_rate
    n_total = int(round(spec.duration_s * fs))
    x = np.zeros(n_total)
    expected = p.burst_rate * spec.duration_s / 60.0
    min_pause = spec.min_pause_ms / 1000.0
    if p.fixed_bursts is not None:
        n_bursts = int(p.fixed_bursts)
    else:
        n_bursts = int(rng.poisson(expected)) if expected > 0 else 0
        # a large draw on a short recording keeps only the bursts that fit
        n_bursts = min(n_bursts, max(int(np.ceil(spec.duration_s / min_pause)) - 2, 0))
    if n_bursts:
        dur = rng.normal(p.burst_ms_mean, p.burst_ms_std, n_bursts) / 1000.0
        dur = np.clip(dur, 0.08, 3.0 * p.burst_ms_mean / 1000.0)
        budget = spec.duration_s - (n_bursts + 1) * min_pause
        if budget <= 0:
            raise ValueError("too many bursts for the recording duration")
        if dur.sum() > 0.8 * budget:
            dur *= 0.8 * budget / dur.sum()
        spare = budget - dur.sum()
        shape = 1.0 / max(p.pause_cv, 1e-3) ** 2
        w = rng.gamma(shape, 1.0, n_bursts + 1)
        pauses = min_pause + spare * w / w.sum()
        f0 = float(np.clip(rng.normal(p.f0_mean, p.f0_spread), 85.0, 350.0))
        gain = rng.uniform(0.3, 0.6)
        t = 0.0
        for i in range(n_bursts):
            t += pauses[i]
            start = int(round(t * fs))
            n = int(round(dur[i] * fs))
            amp = gain * rng.uniform(0.7, 1.0)
            f0_word = f0 * (1.0 + 0.05 * rng.standard_normal())
            x[start:start + n] += amp * _burst(rng, min(n, n_total - start), fs, f0_word, p)
            t += dur[i]
    x += _noise(rng, p.noise_kind, p.noise_floor, n_total)
    return np.clip(x, -1.0, 1.0)


def synth_corpus(spec: SynthSpec, seed: int, out_dir: str | Path) -> Path:
    """Write one WAV per synthetic subject plus ``manifest.csv``; returns the manifest path."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    rows = []
    for ci, label in enumerate(LABELS):
        p = spec.classes.get(label)
        if p is None:
            continue
        for i in range(p.count):
            rng = np.random.default_rng([seed, ci, i])
            x = synth_recording(p, spec, rng)
            name = f"{label.lower()}_{i:03d}.wav"
            write_wav(out / name, AudioSignal(x, spec.sample_rate, name))
            rows.append((name, label, f"{label}{i:03d}"))
    manifest = out / "manifest.csv"
    write_manifest(manifest, rows)
    return manifest
