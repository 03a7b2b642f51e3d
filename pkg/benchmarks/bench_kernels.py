"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from cvfscreen import _pykernels
from cvfscreen._backend import get_kernels


def _cases():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((100, 80))
    y = np.where(X[:, :5].sum(1) + rng.standard_normal(100) > 0, 1.0, -1.0)
    Z = (X - X.mean(0)) / X.std(0)
    K = Z @ Z.T
    audio = rng.standard_normal(60 * 16000)  # one minute at 16 kHz
    return {
        "smo 100x80 linear": lambda k: k.smo_solve(K, y, 1.0, 1e-3, 10, 0, 2_000_000),
        "ordinal codes m=5, 60 s": lambda k: k.ordinal_codes(audio, 5, 1),
        "windowed CFD 500/250 ms, 60 s": lambda k: k.windowed_cfd(audio, 8000, 4000, 10.0),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        compiled = get_kernels("cython")
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<32}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, fn in _cases().items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:<32}{t_py:>14.2f}")
            continue
        t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<32}{t_py:>14.2f}{t_c:>14.2f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
