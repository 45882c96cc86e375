"""Compare the compiled moment kernel with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--cutoffs 4 6 8] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from cvinterferometry._ext import moments_py
from cvinterferometry.fock import _p_function_moments
from cvinterferometry.gaussian import CoherenceParams
from cvinterferometry.teleportation import teleported_state

try:
    from cvinterferometry._ext import moments as moments_c
except ImportError:  # extension not built
    moments_c = None


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cutoffs", type=int, nargs="+", default=[4, 6, 8, 10])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    state = teleported_state(CoherenceParams(0.4, 0.7, 0.3), 0.05)
    _, Q = _p_function_moments(state)
    Q = np.ascontiguousarray(Q, dtype=np.complex128)

    print(f"{'cutoff':>6} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8} {'max |diff|':>11}")
    for c in args.cutoffs:
        t_py = min(timeit.repeat(lambda: moments_py.gaussian_moments(Q, c), number=1, repeat=args.repeat))
        if moments_c is None:
            print(f"{c:>6} {1e3 * t_py:>12.3f} {'n/a':>14}")
            continue
        t_c = min(timeit.repeat(lambda: moments_c.gaussian_moments(Q, c), number=1, repeat=args.repeat))
        diff = np.max(np.abs(moments_py.gaussian_moments(Q, c) - moments_c.gaussian_moments(Q, c)))
        print(f"{c:>6} {1e3 * t_py:>12.3f} {1e3 * t_c:>14.3f} {t_py / t_c:>8.1f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
