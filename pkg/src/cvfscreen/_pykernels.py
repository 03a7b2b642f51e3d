"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one for one: same arguments, same return
values, same random stream in the SMO solver. The compiled module is
preferred when it imports; see ``_backend``.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# SMO bookkeeping constants, shared with the compiled solver.
STEP_EPS = 1e-12
BOUND_EPS = 1e-8
ROUND_EPS = 1e-12


def _splitmix64(seed: int) -> int:
    z = (seed + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return z or 0x2545F4914F6CDD1D


class XorShift64:
    """xorshift64* generator; the compiled solver draws the identical stream."""

    def __init__(self, seed: int):
        self.state = _splitmix64(int(seed) & _MASK64)

    def below(self, n: int) -> int:
        s = self.state
        s ^= s >> 12
        s ^= (s << 25) & _MASK64
        s ^= s >> 27
        self.state = s
        return (((s * 0x2545F4914F6CDD1D) & _MASK64) >> 11) % n


def ordinal_codes(x: np.ndarray, m: int, tau: int) -> np.ndarray:
    """Lehmer code of the stable ascending argsort of every embedded vector."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    count = x.size - (m - 1) * tau
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    cols = np.stack([x[j * tau: j * tau + count] for j in range(m)], axis=1)
    perm = np.argsort(cols, axis=1, kind="stable")
    code = np.zeros(count, dtype=np.int64)
    for i in range(m):
        smaller = np.zeros(count, dtype=np.int64)
        for j in range(i + 1, m):
            smaller += perm[:, j] < perm[:, i]
        code = code * (m - i) + smaller
    return code


def castiglioni_fd(y: np.ndarray, fd_max: float = 10.0) -> float:
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    length = float(np.sum(np.abs(np.diff(y))))
    if length == 0.0:
        return 1.0
    extent = float(np.max(np.abs(y - y[0])))
    steps = np.log10(n - 1)
    if extent == 0.0:
        return fd_max
    denom = steps + np.log10(extent / length)
    if denom <= 1e-12:
        return fd_max
    return min(float(steps / denom), fd_max)


def windowed_cfd(x: np.ndarray, win: int, hop: int, fd_max: float = 10.0) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size < win:
        return np.zeros(0)
    count = (x.size - win) // hop + 1
    return np.array([castiglioni_fd(x[i * hop: i * hop + win], fd_max) for i in range(count)])


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_passes: int,
              seed: int, max_iter: int) -> tuple[np.ndarray, float, int]:
    """Platt's SMO on a precomputed kernel matrix.

    Returns ``(alpha, bias, steps)`` for the decision function
    ``f(x) = sum_i alpha_i y_i K(x_i, x) + bias``.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.size
    alpha = np.zeros(n)
    rng = XorShift64(seed)
    state = {"b": 0.0, "steps": 0}
    errors = -y.copy()

    def refresh_errors():
        ay = alpha * y
        for k in range(n):
            errors[k] = float(np.dot(K[k], ay)) + state["b"] - y[k]

    def take_step(i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1, a2 = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        e1, e2 = errors[i1], errors[i2]
        s = y1 * y2
        if y1 != y2:
            lo, hi = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            lo, hi = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if hi - lo < STEP_EPS:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        b = state["b"]
        if eta > STEP_EPS:
            a2n = a2 + y2 * (e1 - e2) / eta
            a2n = min(max(a2n, lo), hi)
        else:
            f1 = y1 * (e1 - b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (e2 - b) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - lo)
            h1 = a1 + s * (a2 - hi)
            lobj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12
            hobj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12
            if lobj < hobj - STEP_EPS:
                a2n = lo
            elif lobj > hobj + STEP_EPS:
                a2n = hi
            else:
                a2n = a2
        if a2n < BOUND_EPS:
            a2n = 0.0
        elif a2n > C - BOUND_EPS:
            a2n = C
        if abs(a2n - a2) < STEP_EPS * (a2n + a2 + STEP_EPS):
            return False
        a1n = a1 + s * (a2 - a2n)
        if a1n < BOUND_EPS:
            a2n += s * a1n
            a1n = 0.0
        elif a1n > C - BOUND_EPS:
            a2n += s * (a1n - C)
            a1n = C
        # the shift above can leave rounding residue next to a bound
        if a2n < ROUND_EPS * C:
            a2n = 0.0
        elif a2n > C * (1.0 - ROUND_EPS):
            a2n = C
        d1 = y1 * (a1n - a1)
        d2 = y2 * (a2n - a2)
        b1 = b - e1 - d1 * k11 - d2 * k12
        b2 = b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1n < C:
            bn = b1
        elif 0.0 < a2n < C:
            bn = b2
        else:
            bn = 0.5 * (b1 + b2)
        db = bn - b
        errors[:] = errors + (d1 * K[i1] + d2 * K[i2] + db)
        alpha[i1] = a1n
        alpha[i2] = a2n
        state["b"] = bn
        state["steps"] += 1
        return True

    def examine(i2: int) -> int:
        y2 = y[i2]
        a2 = alpha[i2]
        r2 = errors[i2] * y2
        if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0.0)):
            return 0
        free = np.flatnonzero((alpha > 0.0) & (alpha < C))
        if free.size > 1:
            gaps = np.abs(errors[free] - errors[i2])
            i1 = int(free[int(np.argmax(gaps))])
            if take_step(i1, i2):
                return 1
        if free.size > 0:
            start = rng.below(free.size)
            for off in range(free.size):
                if take_step(int(free[(start + off) % free.size]), i2):
                    return 1
        start = rng.below(n)
        for off in range(n):
            if take_step((start + off) % n, i2):
                return 1
        return 0

    examine_all = True
    quiet_passes = 0
    while state["steps"] < max_iter:
        changed = 0
        if examine_all:
            refresh_errors()
            for i in range(n):
                changed += examine(i)
                if state["steps"] >= max_iter:
                    break
        else:
            for i in range(n):
                if 0.0 < alpha[i] < C:
                    changed += examine(i)
                    if state["steps"] >= max_iter:
                        break
        if examine_all:
            if changed == 0:
                quiet_passes += 1
                if quiet_passes >= max_passes:
                    break
            else:
                quiet_passes = 0
            examine_all = False
        elif changed == 0:
            examine_all = True
    refresh_errors()
    return alpha, float(state["b"]), int(state["steps"])
