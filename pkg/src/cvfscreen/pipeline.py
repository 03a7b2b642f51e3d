"""Feature-matrix assembly, persistence, the two-stage experiment and report rendering."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .evaluation import EvalReport, cross_validate
from .features_linear import linear_block
from .features_nonlinear import NldConfig, nld_block
from .registry import FEATURE_NAMES, FEATURE_SETS, N_FEATURES, feature_set_mask
from .signal_io import AudioSignal, load_wav
from .stats import SelectionResult, select_features
from .svm import SvmConfig
from .vad import VadConfig, analyze, segment_voicing

SELECTION_ALPHA = 0.05


class ExtractionError(RuntimeError):
    def __init__(self, failures: list[tuple[str, str]]):
        lines = "\n".join(f"  {p}: {msg}" for p, msg in failures)
        super().__init__(f"feature extraction failed for {len(failures)} file(s):\n{lines}")
        self.failures = failures


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray             # (rows, 80)
    source_ids: tuple[str, ...]
    labels: tuple[str, ...]
    names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ValueError("values must have one column per feature name")
        if not (self.values.shape[0] == len(self.source_ids) == len(self.labels)):
            raise ValueError("rows, source ids and labels must align")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix contains non-finite values")

    def columns(self, idx: Sequence[int]) -> np.ndarray:
        return self.values[:, np.asarray(idx, dtype=int)]


def extract_features(signal: AudioSignal, vad_cfg: VadConfig = VadConfig(),
                     nld_cfg: NldConfig = NldConfig()) -> np.ndarray:
    """The 80-value feature vector of one recording, in registry order."""
    a = analyze(signal, vad_cfg)
    seg_map = segment_voicing(signal, vad_cfg, a)
    vec = np.concatenate([linear_block(signal, vad_cfg, a, seg_map), nld_block(signal, nld_cfg)])
    assert vec.size == N_FEATURES
    return vec


def _extract_one(args) -> tuple[np.ndarray | None, str | None]:
    path, vad_cfg, nld_cfg = args
    try:
        return extract_features(load_wav(path), vad_cfg, nld_cfg), None
    except Exception as exc:  # collected and reported per file
        return None, f"{type(exc).__name__}: {exc}"


def _check_rates(corpus: Corpus) -> None:
    """Fail when recordings do not all share the most common sample rate."""
    from scipy.io import wavfile

    rates = [int(wavfile.read(e.path, mmap=True)[0]) for e in corpus.entries]
    if not rates:
        return
    common = max(sorted(set(rates)), key=rates.count)
    bad = [(str(e.path), f"sample rate {r} Hz differs from the corpus rate {common} Hz")
           for e, r in zip(corpus.entries, rates) if r != common]
    if bad:
        raise ExtractionError(bad)


def extract_all(corpus: Corpus, vad_cfg: VadConfig = VadConfig(),
                nld_cfg: NldConfig = NldConfig(), workers: int = 1,
                rate_check: bool = False) -> FeatureMatrix:
    """Extract every recording; rows follow manifest order whatever ``workers`` is."""
    jobs = [(e.path, vad_cfg, nld_cfg) for e in corpus.entries]
    if rate_check:
        _check_rates(corpus)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_one, jobs))
    else:
        results = [_extract_one(j) for j in jobs]
    failures = [(str(e.path), err) for e, (_, err) in zip(corpus.entries, results) if err]
    if failures:
        raise ExtractionError(failures)
    values = np.vstack([v for v, _ in results])
    return FeatureMatrix(values, tuple(e.path.name for e in corpus.entries),
                         tuple(e.label for e in corpus.entries))


def write_feature_csv(fm: FeatureMatrix, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source_id", *fm.names, "label"])
    for sid, row, lab in zip(fm.source_ids, fm.values, fm.labels):
        w.writerow([sid, *(f"{v:.9g}" for v in row), lab])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_feature_csv(path: str | Path) -> FeatureMatrix:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty feature file")
    header = rows[0]
    if header[0] != "source_id" or header[-1] != "label":
        raise ValueError(f"{path}: header must start with source_id and end with label")
    names = tuple(header[1:-1])
    if names != FEATURE_NAMES:
        raise ValueError(f"{path}: columns do not match the feature registry")
    try:
        values = np.array([[float(v) for v in r[1:-1]] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    values = values.reshape(len(rows) - 1, len(names))
    return FeatureMatrix(values, tuple(r[0] for r in rows[1:]), tuple(r[-1] for r in rows[1:]),
                         names)


# -- experiment ------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    feature_set: str = "LF+CFD+PE"
    selection: bool = True
    alpha: float = SELECTION_ALPHA
    svm: SvmConfig = SvmConfig()
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"unknown feature set {self.feature_set!r}")


@dataclass(frozen=True)
class StageResult:
    name: str
    feature_names: tuple[str, ...]
    report: EvalReport | None
    diagnostic: str = ""


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    stages: tuple[StageResult, ...]
    selection: SelectionResult | None = None

    @property
    def retained_count(self) -> int | None:
        return None if self.selection is None else len(self.selection.retained)

    @property
    def reduction_pct(self) -> float | None:
        if self.selection is None:
            return None
        total = len(self.selection.results)
        return 100.0 * (total - len(self.selection.retained)) / total


def run_experiment(matrix, labels, cfg: ExperimentConfig = ExperimentConfig(),
                   names: Sequence[str] = FEATURE_NAMES) -> ExperimentResult:
    """Stage 1 cross-validates the masked feature set; stage 2 re-runs it on the
    ANOVA-retained columns."""
    X = np.asarray(matrix, dtype=float)
    mask = feature_set_mask(cfg.feature_set)
    Xs = X[:, mask]
    set_names = tuple(names[i] for i in mask)
    stage1 = cross_validate(Xs, labels, cfg.k, cfg.svm, cfg.seed, cfg.feature_set)
    stages = [StageResult("full", set_names, stage1)]
    selection = None
    if cfg.selection:
        selection = select_features(Xs, labels, cfg.alpha, set_names)
        kept = list(selection.retained)
        kept_names = tuple(set_names[i] for i in kept)
        if not kept:
            stages.append(StageResult("anova", (), None,
                                      f"no feature reached p < {cfg.alpha:g}; stage skipped"))
        else:
            report = cross_validate(Xs[:, kept], labels, cfg.k, cfg.svm, cfg.seed,
                                    cfg.feature_set + "/anova")
            stages.append(StageResult("anova", kept_names, report))
    return ExperimentResult(cfg, tuple(stages), selection)


# -- reports ---------------------------------------------------------------

CSV_COLUMNS = (
    "stage", "feature_set", "n_features", "retained", "reduction_pct", "k", "seed", "n",
    "tn", "fp", "fn", "tp", "cer_neg", "cer_pos", "cer_global", "accuracy", "coverage_095",
    "ci95_lo", "ci95_hi", "ci90_lo", "ci90_hi", "ci80_lo", "ci80_hi", "diagnostic",
    "features",
)


def _f6(v: float) -> str:
    return f"{v:.6f}"


def _csv_rows(result: ExperimentResult) -> list[list[str]]:
    rows = []
    for st in result.stages:
        is_sel = st.name == "anova"
        retained = str(result.retained_count) if is_sel else ""
        reduction = _f6(result.reduction_pct) if is_sel else ""
        base = [st.name, result.config.feature_set, str(len(st.feature_names)), retained,
                reduction, str(result.config.k), str(result.config.seed)]
        r = st.report
        if r is None:
            rows.append(base + [""] * 16 + [st.diagnostic, ""])
            continue
        c = r.confusion
        cer = r.class_cer
        rows.append(base + [
            str(r.n), str(c[0, 0]), str(c[0, 1]), str(c[1, 0]), str(c[1, 1]),
            _f6(cer[0]), _f6(cer[1]), _f6(r.global_cer), _f6(r.accuracy), _f6(r.coverage),
            *(_f6(v) for lvl in (0.95, 0.90, 0.80) for v in r.ci[lvl]),
            st.diagnostic, ";".join(st.feature_names),
        ])
    return rows


def _text(results: Sequence[ExperimentResult]) -> str:
    out = []
    for res in results:
        cfg = res.config
        out.append(f"experiment feature_set={cfg.feature_set} k={cfg.k} seed={cfg.seed} "
                   f"svm=C:{cfg.svm.C:g},kernel:{cfg.svm.kernel}")
        for st in res.stages:
            out.append(f"== stage {st.name}: {len(st.feature_names)} features")
            if st.report is None:
                out.append(f"   {st.diagnostic}")
                continue
            r = st.report
            neg, pos = r.classes
            out.append(f"   confusion (rows true, cols predicted)  {neg:>6} {pos:>6}")
            out.append(f"   {neg:>38} {r.confusion[0, 0]:>6d} {r.confusion[0, 1]:>6d}")
            out.append(f"   {pos:>38} {r.confusion[1, 0]:>6d} {r.confusion[1, 1]:>6d}")
            out.append(f"   CER {neg}: {r.class_cer[0]:.1f}%  CER {pos}: {r.class_cer[1]:.1f}%  "
                       f"global CER: {r.global_cer:.1f}%  accuracy: {r.accuracy:.1f}%")
            out.append(f"   coverage of cases (0.95, logistic-margin approximation): "
                       f"{r.coverage:.1f}%")
            for lvl in (0.95, 0.90, 0.80):
                lo, hi = r.ci[lvl]
                out.append(f"   accuracy CI {int(lvl * 100)}%: [{lo:.1f}, {hi:.1f}]")
        if res.selection is not None:
            out.append(f"== ANOVA selection alpha={res.selection.alpha:g}: "
                       f"{res.retained_count}/{len(res.selection.results)} retained "
                       f"(reduction {res.reduction_pct:.1f}%)")
            for i in res.selection.retained:
                a = res.selection.results[i]
                out.append(f"   {res.selection.feature_names[i]:<22} F={a.F:.4g} p={a.p:.3g}")
        out.append("")
    return "\n".join(out)


def emit_report(results: ExperimentResult | Sequence[ExperimentResult], fmt: str = "text") -> str:
    if isinstance(results, ExperimentResult):
        results = [results]
    if fmt == "text":
        return _text(results)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            w.writerows(_csv_rows(res))
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")
