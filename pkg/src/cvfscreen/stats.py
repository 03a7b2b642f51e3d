"""One-way ANOVA with F-distribution p-values and significance-based feature selection."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import exp, lgamma, log
from typing import Sequence

import numpy as np

CF_TOL = 1e-12
CF_MAX_ITER = 10_000
_TINY = 1e-300


class AnovaError(ValueError):
    pass


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x)
    if x < (a + 1.0) / (a + b + 2.0):
        return exp(ln_front) * _betacf(a, b, x) / a
    return 1.0 - exp(ln_front) * _betacf(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: int, d2: int) -> float:
    """CDF of the F distribution with (d1, d2) degrees of freedom."""
    if d1 <= 0 or d2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0.0:
        return 0.0
    if np.isinf(x):
        return 1.0
    return betainc_reg(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))


def f_sf(x: float, d1: int, d2: int) -> float:
    """Upper tail 1 - F_cdf, computed without cancellation."""
    if x <= 0.0:
        return 1.0
    if np.isinf(x):
        return 0.0
    return betainc_reg(d2 / 2.0, d1 / 2.0, d2 / (d1 * x + d2))


@dataclass(frozen=True)
class AnovaResult:
    F: float
    p: float
    d1: int
    d2: int
    group_means: tuple[float, ...]
    grand_mean: float
    feature_id: int | str | None = None
    ssb: float = 0.0
    ssw: float = 0.0


def anova_oneway(groups: Sequence[Sequence[float]], feature_id=None) -> AnovaResult:
    if len(groups) < 2:
        raise AnovaError("one-way ANOVA needs at least 2 groups")
    arrs = [np.asarray(g, dtype=float).ravel() for g in groups]
    for i, g in enumerate(arrs):
        if g.size < 2:
            raise AnovaError(f"group {i} has {g.size} observation(s); at least 2 required")
        if not np.all(np.isfinite(g)):
            raise AnovaError(f"group {i} contains non-finite values")
    n_total = sum(g.size for g in arrs)
    k = len(arrs)
    if n_total <= k:
        raise AnovaError("need more observations than groups")
    grand = float(np.concatenate(arrs).mean())
    means = [float(g.mean()) for g in arrs]
    ssb = float(sum(g.size * (m - grand) ** 2 for g, m in zip(arrs, means)))
    ssw = float(sum(np.sum((g - m) ** 2) for g, m in zip(arrs, means)))
    d1, d2 = k - 1, n_total - k
    # floating-point residue in a sum of squares is treated as exact zero
    scale = float(sum(np.sum(g ** 2) for g in arrs)) + 1.0
    if ssb <= 1e-14 * scale:
        ssb = 0.0
    if ssw <= 1e-14 * scale:
        ssw = 0.0
    if ssw == 0.0:
        F, p = (0.0, 1.0) if ssb == 0.0 else (np.inf, 0.0)
    else:
        F = (ssb / d1) / (ssw / d2)
        p = min(max(f_sf(F, d1, d2), 0.0), 1.0)
    return AnovaResult(F, p, d1, d2, tuple(means), grand, feature_id, ssb, ssw)


@dataclass(frozen=True)
class SelectionResult:
    alpha: float
    results: tuple[AnovaResult, ...]
    retained: tuple[int, ...]
    feature_names: tuple[str, ...] = field(default=())

    def ranking(self) -> list[int]:
        """All feature indices ordered by (p ascending, index ascending)."""
        return sorted(range(len(self.results)), key=lambda i: (self.results[i].p, i))

    def to_table(self) -> str:
        lines = ["feature_name\tF\tp\tretained"]
        kept = set(self.retained)
        for i in self.ranking():
            r = self.results[i]
            name = self.feature_names[i] if self.feature_names else str(i)
            lines.append(f"{name}\t{r.F:.6g}\t{r.p:.6g}\t{'yes' if i in kept else 'no'}")
        return "\n".join(lines) + "\n"


def select_features(matrix, labels, alpha: float = 0.05,
                    feature_names: Sequence[str] = ()) -> SelectionResult:
    """Per-column one-way ANOVA across label groups; keep columns with p < alpha."""
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise AnovaError("matrix rows and labels must align")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    classes = sorted(set(y.tolist()))
    if len(classes) < 2:
        raise AnovaError("selection needs at least 2 classes")
    masks = [y == c for c in classes]
    for c, m in zip(classes, masks):
        if m.sum() < 2:
            raise AnovaError(f"class {c!r} has fewer than 2 rows")
    # sort rows within each group so the result cannot depend on row order
    results = tuple(
        anova_oneway([np.sort(X[m, j]) for m in masks], feature_id=j) for j in range(X.shape[1])
    )
    retained = tuple(i for i in sorted(range(len(results)), key=lambda i: (results[i].p, i))
                     if results[i].p < alpha)
    return SelectionResult(alpha, results, retained, tuple(feature_names))
