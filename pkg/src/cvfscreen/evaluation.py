"""Stratified k-fold cross-validation and the reported metrics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .svm import SvmConfig, SvmError, train_smo

Z_SCORES = {0.95: 1.960, 0.90: 1.645, 0.80: 1.282}
COVERAGE_LEVEL = 0.95


def confidence_interval(p_hat: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval for a proportion, clipped to [0, 1]."""
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    try:
        z = Z_SCORES[round(level, 2)]
    except KeyError:
        raise ValueError(f"level must be one of {sorted(Z_SCORES)}") from None
    half = z * np.sqrt(p_hat * (1.0 - p_hat) / n)
    return max(0.0, p_hat - half), min(1.0, p_hat + half)


def margin_confidence(margin: np.ndarray) -> np.ndarray:
    """Confidence in the positive class, 1 / (1 + exp(-2 * margin))."""
    return 1.0 / (1.0 + np.exp(-2.0 * np.asarray(margin, dtype=float)))


def coverage_of_cases(true_positive: np.ndarray, margins: np.ndarray,
                      level: float = COVERAGE_LEVEL) -> float:
    """Percent of instances whose true class is in the smallest class set
    whose summed confidence reaches ``level``."""
    p_pos = margin_confidence(margins)
    top_is_pos = p_pos >= 0.5
    top_conf = np.where(top_is_pos, p_pos, 1.0 - p_pos)
    single = top_conf >= level
    covered = ~single | (top_is_pos == np.asarray(true_positive, dtype=bool))
    return 100.0 * float(covered.mean()) if covered.size else 0.0


@dataclass(frozen=True)
class EvalReport:
    k: int
    classes: tuple[str, str]
    confusion: np.ndarray  # rows = true class, columns = predicted, in ``classes`` order
    coverage: float
    seed: int
    feature_set: str = ""
    n_features: int = 0
    ci: dict = field(default_factory=dict)  # level -> (lo, hi), accuracy in percent

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    @property
    def class_cer(self) -> tuple[float, ...]:
        rows = self.confusion.sum(axis=1)
        errs = rows - np.diag(self.confusion)
        return tuple(100.0 * e / r if r else 0.0 for e, r in zip(errs, rows))

    @property
    def global_cer(self) -> float:
        return 100.0 * (self.n - int(np.trace(self.confusion))) / self.n if self.n else 0.0

    @property
    def accuracy(self) -> float:
        return 100.0 - self.global_cer


def report_from_predictions(classes: tuple[str, str], y_true: Sequence[str],
                            y_pred: Sequence[str], margins: np.ndarray, k: int, seed: int,
                            feature_set: str = "", n_features: int = 0) -> EvalReport:
    index = {c: i for i, c in enumerate(classes)}
    conf = np.zeros((2, 2), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        conf[index[t], index[p]] += 1
    true_pos = np.array([t == classes[1] for t in y_true])
    cov = coverage_of_cases(true_pos, margins)
    n = int(conf.sum())
    acc = float(np.trace(conf)) / n
    ci = {lvl: tuple(100.0 * v for v in confidence_interval(acc, n, lvl))
          for lvl in (0.95, 0.90, 0.80)}
    return EvalReport(k, classes, conf, cov, seed, feature_set, n_features, ci)


def stratified_folds(labels: Sequence[str], k: int, seed: int) -> list[np.ndarray]:
    """Test-index sets of a seeded stratified k-fold partition.

    Each class is shuffled and dealt round-robin, continuing where the
    previous class stopped so fold sizes differ by at most one.
    """
    lab = np.array([str(v) for v in labels])
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    for c in sorted(set(lab.tolist())):
        idx = np.flatnonzero(lab == c)
        if idx.size < k:
            raise ValueError(f"class {c!r} has {idx.size} rows, fewer than k={k}")
        for i in rng.permutation(idx):
            folds[pos % k].append(int(i))
            pos += 1
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def cross_validate(matrix, labels, k: int = 10, cfg: SvmConfig = SvmConfig(), seed: int = 0,
                   feature_set: str = "") -> EvalReport:
    X = np.asarray(matrix, dtype=float)
    lab = [str(v) for v in labels]
    classes = tuple(sorted(set(lab)))
    if len(classes) != 2:
        raise SvmError(f"cross-validation needs exactly 2 classes, got {list(classes)}")
    if k < 2:
        raise ValueError("k must be >= 2")
    folds = stratified_folds(lab, k, seed)
    y_pred: list[str | None] = [None] * len(lab)
    margins = np.zeros(len(lab))
    lab_arr = np.array(lab)
    for f, test in enumerate(folds):
        train = np.setdiff1d(np.arange(len(lab)), test)
        model = train_smo(X[train], lab_arr[train].tolist(), cfg, seed=seed * 1000 + f,
                          classes=classes)
        pred, m = model.predict_many(X[test])
        for i, p, v in zip(test, pred, m):
            y_pred[i] = p
            margins[i] = v
    return report_from_predictions(classes, lab, y_pred, margins, k, seed, feature_set,
                                   X.shape[1])
