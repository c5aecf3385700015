"""Time the numba and numpy kernels on random inputs.

Run with ``python benchmarks/bench_kernels.py``.  Without numba only the numpy
column is filled.
"""
import argparse
import timeit

import numpy as np

from tilerepair import _kernels as k


def ring(rng, n):
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.5, 1.0, n)
    return np.column_stack([r * np.cos(ang), r * np.sin(ang)])


def cases(rng, size):
    a, b = rng.random((size, 2)), rng.random((size, 2)) + 2.0
    poly = ring(rng, size)
    pts = rng.uniform(-1, 1, (20 * size, 2))
    p, q = rng.uniform(-1, 1, (size, 2)), rng.uniform(-1, 1, (size, 2))
    return {
        "min_polyline_distance": (a, b),
        "points_in_ring": (pts, poly),
        "clear_segments": (p, q, poly, 1e-12),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 800])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.Generator(np.random.PCG64(0))
    print(f"{'kernel':<24}{'size':>6}{'numpy ms':>12}{'numba ms':>12}")
    for size in args.sizes:
        for name, inputs in cases(rng, size).items():
            row = []
            for backend in ("numpy", "numba"):
                fn = getattr(k, f"{name}_{backend}", None)
                if fn is None or (backend == "numba" and not k.HAVE_NUMBA):
                    row.append(float("nan"))
                    continue
                fn(*inputs)  # compile
                t = min(timeit.repeat(lambda: fn(*inputs), number=1, repeat=args.repeat))
                row.append(1e3 * t)
            print(f"{name:<24}{size:>6}{row[0]:>12.3f}{row[1]:>12.3f}")


if __name__ == "__main__":
    main()
