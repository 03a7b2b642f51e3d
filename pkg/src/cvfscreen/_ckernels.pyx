# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Semantics match ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log10

cnp.import_array()

ctypedef unsigned long long u64

cdef double STEP_EPS = 1e-12
cdef double BOUND_EPS = 1e-8
cdef double ROUND_EPS = 1e-12


cdef u64 _splitmix64(u64 seed):
    cdef u64 z = seed + <u64>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    z = z ^ (z >> 31)
    if z == 0:
        z = <u64>0x2545F4914F6CDD1D
    return z


cdef inline Py_ssize_t _below(u64* state, Py_ssize_t n) noexcept nogil:
    cdef u64 s = state[0]
    s ^= s >> 12
    s ^= s << 25
    s ^= s >> 27
    state[0] = s
    return <Py_ssize_t>(((s * <u64>0x2545F4914F6CDD1D) >> 11) % <u64>n)


def ordinal_codes(x, int m, int tau):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t count = n - (m - 1) * tau
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    out = np.empty(count, dtype=np.int64)
    cdef long long[::1] ov = out
    cdef int perm[16]
    cdef double vals[16]
    cdef Py_ssize_t t
    cdef int i, j, key, smaller
    cdef double v
    cdef long long code
    with nogil:
        for t in range(count):
            # stable insertion sort of positions by value
            for i in range(m):
                v = xv[t + i * tau]
                j = i - 1
                while j >= 0 and vals[j] > v:
                    vals[j + 1] = vals[j]
                    perm[j + 1] = perm[j]
                    j -= 1
                vals[j + 1] = v
                perm[j + 1] = i
            code = 0
            for i in range(m):
                smaller = 0
                for j in range(i + 1, m):
                    if perm[j] < perm[i]:
                        smaller += 1
                code = code * (m - i) + smaller
            ov[t] = code
    return out


cdef double _cfd(const double* y, Py_ssize_t n, double fd_max) noexcept nogil:
    cdef double length = 0.0, extent = 0.0, d, steps, denom, fd
    cdef Py_ssize_t i
    for i in range(n - 1):
        length += fabs(y[i + 1] - y[i])
    if length == 0.0:
        return 1.0
    for i in range(n):
        d = fabs(y[i] - y[0])
        if d > extent:
            extent = d
    if extent == 0.0:
        return fd_max
    steps = log10(<double>(n - 1))
    denom = steps + log10(extent / length)
    if denom <= 1e-12:
        return fd_max
    fd = steps / denom
    return fd if fd < fd_max else fd_max


def castiglioni_fd(y, double fd_max=10.0):
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    return _cfd(&yv[0], yv.shape[0], fd_max)


def windowed_cfd(x, Py_ssize_t win, Py_ssize_t hop, double fd_max=10.0):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    if xv.shape[0] < win:
        return np.zeros(0)
    cdef Py_ssize_t count = (xv.shape[0] - win) // hop + 1
    out = np.empty(count)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            ov[i] = _cfd(&xv[i * hop], win, fd_max)
    return out


cdef class _Smo:
    cdef double[:, ::1] K
    cdef double[::1] y
    cdef double[::1] alpha
    cdef double[::1] errors
    cdef double C, tol, b
    cdef Py_ssize_t n
    cdef long long steps
    cdef u64 rng

    cdef void refresh(self) noexcept nogil:
        cdef Py_ssize_t k, j
        cdef double acc
        for k in range(self.n):
            acc = 0.0
            for j in range(self.n):
                acc += self.K[k, j] * (self.alpha[j] * self.y[j])
            self.errors[k] = acc + self.b - self.y[k]

    cdef bint take_step(self, Py_ssize_t i1, Py_ssize_t i2) noexcept nogil:
        if i1 == i2:
            return 0
        cdef double C = self.C
        cdef double a1 = self.alpha[i1], a2 = self.alpha[i2]
        cdef double y1 = self.y[i1], y2 = self.y[i2]
        cdef double e1 = self.errors[i1], e2 = self.errors[i2]
        cdef double s = y1 * y2
        cdef double lo, hi, k11, k12, k22, eta, a2n, a1n
        cdef double f1, f2, l1, h1, lobj, hobj, d1, d2, b1, b2, bn, db
        cdef double b = self.b
        cdef Py_ssize_t k
        if y1 != y2:
            lo = a2 - a1 if a2 - a1 > 0.0 else 0.0
            hi = C + a2 - a1 if C + a2 - a1 < C else C
        else:
            lo = a1 + a2 - C if a1 + a2 - C > 0.0 else 0.0
            hi = a1 + a2 if a1 + a2 < C else C
        if hi - lo < STEP_EPS:
            return 0
        k11 = self.K[i1, i1]
        k12 = self.K[i1, i2]
        k22 = self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > STEP_EPS:
            a2n = a2 + y2 * (e1 - e2) / eta
            if a2n < lo:
                a2n = lo
            if a2n > hi:
                a2n = hi
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
        if fabs(a2n - a2) < STEP_EPS * (a2n + a2 + STEP_EPS):
            return 0
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
        for k in range(self.n):
            self.errors[k] = self.errors[k] + ((d1 * self.K[i1, k] + d2 * self.K[i2, k]) + db)
        self.alpha[i1] = a1n
        self.alpha[i2] = a2n
        self.b = bn
        self.steps += 1
        return 1

    cdef int examine(self, Py_ssize_t i2, Py_ssize_t* free, Py_ssize_t nfree) noexcept nogil:
        cdef double y2 = self.y[i2], a2 = self.alpha[i2]
        cdef double r2 = self.errors[i2] * y2
        cdef Py_ssize_t i, best, start, off
        cdef double gap, best_gap
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0.0)):
            return 0
        nfree = 0
        for i in range(self.n):
            if 0.0 < self.alpha[i] < self.C:
                free[nfree] = i
                nfree += 1
        if nfree > 1:
            best = free[0]
            best_gap = -1.0
            for i in range(nfree):
                gap = fabs(self.errors[free[i]] - self.errors[i2])
                if gap > best_gap:
                    best_gap = gap
                    best = free[i]
            if self.take_step(best, i2):
                return 1
        if nfree > 0:
            start = _below(&self.rng, nfree)
            for off in range(nfree):
                if self.take_step(free[(start + off) % nfree], i2):
                    return 1
        start = _below(&self.rng, self.n)
        for off in range(self.n):
            if self.take_step((start + off) % self.n, i2):
                return 1
        return 0


def smo_solve(K, y, double C, double tol, int max_passes, u64 seed, long long max_iter):
    cdef _Smo smo = _Smo()
    Kc = np.ascontiguousarray(K, dtype=np.float64)
    yc = np.ascontiguousarray(y, dtype=np.float64)
    alpha = np.zeros(yc.shape[0])
    errors = -yc.copy()
    free_buf = np.empty(max(yc.shape[0], 1), dtype=np.intp)
    cdef Py_ssize_t[::1] fv = free_buf
    smo.K = Kc
    smo.y = yc
    smo.alpha = alpha
    smo.errors = errors
    smo.C = C
    smo.tol = tol
    smo.b = 0.0
    smo.n = yc.shape[0]
    smo.steps = 0
    smo.rng = _splitmix64(seed)
    cdef bint examine_all = 1
    cdef int quiet = 0
    cdef long long changed
    cdef Py_ssize_t i, n = smo.n
    with nogil:
        while smo.steps < max_iter:
            changed = 0
            if examine_all:
                smo.refresh()
                for i in range(n):
                    changed += smo.examine(i, &fv[0], 0)
                    if smo.steps >= max_iter:
                        break
            else:
                for i in range(n):
                    if 0.0 < smo.alpha[i] < smo.C:
                        changed += smo.examine(i, &fv[0], 0)
                        if smo.steps >= max_iter:
                            break
            if examine_all:
                if changed == 0:
                    quiet += 1
                    if quiet >= max_passes:
                        break
                else:
                    quiet = 0
                examine_all = 0
            elif changed == 0:
                examine_all = 1
        smo.refresh()
    return alpha, float(smo.b), int(smo.steps)


def xorshift_draws(seed, Py_ssize_t n, Py_ssize_t count):
    """First ``count`` draws below ``n`` of the solver's generator (for testing)."""
    cdef u64 state = _splitmix64(<u64>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    return [_below(&state, n) for _ in range(count)]
