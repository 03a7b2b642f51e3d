"""Two-class soft-margin SVM trained with SMO, plus a plain-text model format."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._backend import kernels

KERNELS = ("linear", "rbf")
MAX_STEPS_PER_SAMPLE = 20_000


class SvmError(ValueError):
    pass


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    kernel: str = "linear"
    gamma: float = 0.01
    kkt_tolerance: float = 1e-3
    max_passes: int = 10
    standardize: bool = True

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")
        if self.kernel == "rbf" and self.gamma <= 0:
            raise ValueError("gamma must be positive for the rbf kernel")
        if self.kkt_tolerance <= 0 or self.max_passes < 1:
            raise ValueError("kkt_tolerance must be positive and max_passes >= 1")


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass(eq=False)
class SvmModel:
    support_vectors: np.ndarray  # standardized space
    alphas: np.ndarray
    sv_labels: np.ndarray        # +-1
    bias: float
    kernel: str
    C: float
    gamma: float
    mean: np.ndarray
    scale: np.ndarray
    classes: tuple[str, str]     # classes[0] -> -1, classes[1] -> +1
    steps: int = field(default=0)
    # multipliers for every training row; not serialized
    train_alpha: np.ndarray | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.mean.size

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dimension:
            raise SvmError(f"dimension mismatch: model has {self.dimension} features, "
                           f"input has {X.shape[1]}")
        return (X - self.mean) / self.scale

    def decision_function(self, X) -> np.ndarray:
        Z = self.transform(X)
        if self.alphas.size == 0:
            return np.full(Z.shape[0], self.bias)
        K = kernel_matrix(Z, self.support_vectors, self.kernel, self.gamma)
        return K @ (self.alphas * self.sv_labels) + self.bias

    def predict_many(self, X) -> tuple[list[str], np.ndarray]:
        f = self.decision_function(X)
        return [self.classes[1] if v >= 0 else self.classes[0] for v in f], f

    def save(self, path: str | Path) -> None:
        Path(path).write_text(dumps(self))


def _standardization(X: np.ndarray, enabled: bool) -> tuple[np.ndarray, np.ndarray]:
    if not enabled:
        return np.zeros(X.shape[1]), np.ones(X.shape[1])
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale <= 1e-12 * (1.0 + np.abs(mean))] = 1.0
    return mean, scale


def encode_labels(labels: Sequence) -> tuple[np.ndarray, tuple[str, str]]:
    lab = [str(v) for v in labels]
    classes = sorted(set(lab))
    if len(classes) != 2:
        raise SvmError(f"training needs exactly 2 classes, got {classes}")
    y = np.array([1.0 if v == classes[1] else -1.0 for v in lab])
    return y, (classes[0], classes[1])


def _bias_without_free_vectors(g: np.ndarray, y: np.ndarray, alpha: np.ndarray, C: float,
                               b: float) -> float:
    """Midpoint of the bias interval allowed by the bound constraints.

    With every multiplier at 0 or C the last pairwise update leaves the bias
    arbitrary; any b inside this interval satisfies all KKT conditions.
    """
    at_zero = alpha <= 0.0
    need_low = (at_zero & (y > 0)) | (~at_zero & (y < 0))
    need_high = (at_zero & (y < 0)) | (~at_zero & (y > 0))
    lo = np.max(y[need_low] - g[need_low]) if need_low.any() else -np.inf
    hi = np.min(y[need_high] - g[need_high]) if need_high.any() else np.inf
    if lo > hi:
        return b
    if np.isinf(lo) and np.isinf(hi):
        return b
    if np.isinf(lo):
        return float(hi)
    if np.isinf(hi):
        return float(lo)
    return float(0.5 * (lo + hi))


def train_smo(matrix, labels, cfg: SvmConfig = SvmConfig(), seed: int = 0,
              classes: tuple[str, str] | None = None) -> SvmModel:
    """Fit the soft-margin dual with sequential minimal optimization.

    ``classes`` pins the label-to-sign mapping; by default the sorted class
    names map to (-1, +1).
    """
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(labels):
        raise SvmError("matrix rows and labels must align")
    if not np.all(np.isfinite(X)):
        raise SvmError("non-finite values in training matrix")
    if classes is None:
        y, classes = encode_labels(labels)
    else:
        lab = [str(v) for v in labels]
        if set(lab) - set(classes) or len(set(lab)) != 2:
            raise SvmError(f"training needs both classes {classes}")
        y = np.array([1.0 if v == classes[1] else -1.0 for v in lab])
    mean, scale = _standardization(X, cfg.standardize)
    Z = (X - mean) / scale
    K = kernel_matrix(Z, Z, cfg.kernel, cfg.gamma)
    alpha, b, steps = kernels.smo_solve(K, y, float(cfg.C), float(cfg.kkt_tolerance),
                                        int(cfg.max_passes), int(seed) & ((1 << 64) - 1),
                                        MAX_STEPS_PER_SAMPLE * max(len(y), 1))
    if not np.any((alpha > 0.0) & (alpha < cfg.C)):
        b = _bias_without_free_vectors(K @ (alpha * y), y, alpha, cfg.C, b)
    sv = alpha > 0.0
    return SvmModel(Z[sv].copy(), alpha[sv].copy(), y[sv].copy(), float(b), cfg.kernel,
                    float(cfg.C), float(cfg.gamma), mean, scale, classes, steps, alpha)


def predict(model: SvmModel, x) -> tuple[str, float]:
    """Class of one feature vector and its signed margin; f(x) = 0 goes to the positive class."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise SvmError("predict takes a single feature vector")
    f = float(model.decision_function(x[None, :])[0])
    return (model.classes[1] if f >= 0 else model.classes[0]), f


def kkt_residuals(model: SvmModel, matrix, labels) -> np.ndarray:
    """Per-example KKT violation on the training set, in margin units."""
    y = np.array([1.0 if str(v) == model.classes[1] else -1.0 for v in labels])
    if model.train_alpha is None or model.train_alpha.size != len(y):
        raise SvmError("model carries no multipliers for this training set")
    f = model.decision_function(matrix)
    alpha = model.train_alpha
    r = y * f - 1.0
    at_zero = alpha <= 0.0
    at_c = alpha >= model.C
    free = ~(at_zero | at_c)
    out = np.zeros(len(y))
    out[at_zero] = np.maximum(-r[at_zero], 0.0)
    out[at_c] = np.maximum(r[at_c], 0.0)
    out[free] = np.abs(r[free])
    return out


# -- text serialization ----------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.12g}"


def dumps(model: SvmModel) -> str:
    lines = [
        "cvfscreen-svm 1",
        f"kernel {model.kernel}",
        f"C {_fmt(model.C)}",
        f"gamma {_fmt(model.gamma)}",
        f"dimension {model.dimension}",
        f"classes {model.classes[0]} {model.classes[1]}",
        f"bias {_fmt(model.bias)}",
        "mean " + " ".join(_fmt(v) for v in model.mean),
        "scale " + " ".join(_fmt(v) for v in model.scale),
        f"support_vectors {model.alphas.size}",
    ]
    for a, yv, v in zip(model.alphas, model.sv_labels, model.support_vectors):
        lines.append(" ".join([_fmt(a), str(int(yv))] + [_fmt(t) for t in v]))
    return "\n".join(lines) + "\n"


def loads(text: str) -> SvmModel:
    lines = text.splitlines()
    try:
        if lines[0].split() != ["cvfscreen-svm", "1"]:
            raise SvmError("not a cvfscreen SVM model file")
        head = {}
        for ln in lines[1:10]:
            key, _, rest = ln.partition(" ")
            head[key] = rest
        dim = int(head["dimension"])
        n_sv = int(head["support_vectors"])
        rows = [np.array(ln.split(), dtype=float) for ln in lines[10:10 + n_sv]]
        sv = np.array([r[2:] for r in rows]).reshape(n_sv, dim)
        c0, c1 = head["classes"].split()
        mean = np.array(head["mean"].split(), dtype=float)
        scale = np.array(head["scale"].split(), dtype=float)
        if mean.size != dim or scale.size != dim:
            raise SvmError("standardization rows do not match the dimension")
        return SvmModel(
            support_vectors=sv,
            alphas=np.array([r[0] for r in rows]),
            sv_labels=np.array([r[1] for r in rows]),
            bias=float(head["bias"]),
            kernel=head["kernel"],
            C=float(head["C"]),
            gamma=float(head["gamma"]),
            mean=mean,
            scale=scale,
            classes=(c0, c1),
        )
    except (KeyError, IndexError, ValueError) as exc:
        if isinstance(exc, SvmError):
            raise
        raise SvmError(f"malformed model file: {exc}") from exc


def load_model(path: str | Path) -> SvmModel:
    return loads(Path(path).read_text())
