"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from qsync import _fallback

try:
    from qsync import _kernels
except ImportError:  # extension not built
    _kernels = None

CASES = {
    "volterra_recursive (n=50k)": lambda m: m.volterra_recursive(1.0, 0.01, 1.0, 1e-3, 50_000),
    "volterra_direct (n=2k)": lambda m: m.volterra_direct(1.0, 0.01, 1.0, 1e-3, 2_000),
    "h_closed_form_array (1M)": None,
    "fnv1a64 (1 MB)": None,
}


def _h_case():
    n = 1_000_000
    lam = np.full(n, 0.01)
    delta = np.linspace(-2, 2, n)
    gamma = np.ones(n)
    t = np.full(n, 500.0)
    return lambda m: m.h_closed_form_array(lam, delta, gamma, t)


def _fnv_case():
    data = np.random.default_rng(0).integers(0, 256, 1 << 20, dtype=np.uint8).tobytes()
    return lambda m: m.fnv1a64(data)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    CASES["h_closed_form_array (1M)"] = _h_case()
    CASES["fnv1a64 (1 MB)"] = _fnv_case()
    print(f"{'kernel':30} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name, fn in CASES.items():
        py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:30} {py:11.4f} {'n/a':>11} {'n/a':>8}")
            continue
        cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        print(f"{name:30} {py:11.4f} {cy:11.4f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
