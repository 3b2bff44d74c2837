"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 5] [--csv out.csv]

Each kernel is timed on identical inputs with both backends (best of
``--repeat``), and the outputs are checked to agree before timing.
"""

from __future__ import annotations

import argparse
import csv
import sys
import timeit

import numpy as np

from microlax import kernels
from microlax.tensor_core import cubic_mandel


def cases(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    a1, a2 = cubic_mandel(2.0, 0.5, 1.0), cubic_mandel(3.0, 1.0, 1.2)
    g = min(a1[0, 0] - a1[0, 1], a1[2, 2], a2[0, 0] - a2[0, 1], a2[2, 2])
    t1, t2 = np.zeros(3), np.array([0.1, -0.05, 0.02])
    d = rng.uniform(0.0, 1.0, n)
    eps = rng.uniform(-0.2, 0.2, (n, 3))
    e1 = np.array([0.05, 0.02, 0.01])
    theta = np.linspace(0.0, np.pi, 720, endpoint=False)
    geo = np.column_stack([rng.uniform(0, np.pi, (2000, 3)), rng.uniform(0.05, 0.95, 2000), rng.uniform(0, 1, 2000)])
    d1 = rng.uniform(0.0, 1.0, n)
    eps1 = rng.uniform(-2, 2, (n, 1))
    return {
        "relaxed_batch_2d": lambda m: m.relaxed_batch(d, eps, a1, a2, t1, t2, 0.0, 0.01, g),
        "relaxed_batch_1d": lambda m: m.relaxed_batch(d1, eps1, np.eye(1), 2 * np.eye(1), np.zeros(1), np.ones(1), 0.0, 0.0, 0.0),
        "rank1_energies": lambda m: m.rank1_energies(theta, 0.4, e1, a1, a2, t1, t2, 0.0, 0.01),
        "rank2_energies": lambda m: m.rank2_energies(geo, 0.4, e1, a1, a2, t1, t2, 0.0, 0.01),
    }


def _first(x):
    return np.asarray(x[0] if isinstance(x, tuple) else x)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="batch size for relaxed_batch")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv", help="write results to this file")
    args = ap.parse_args(argv)

    mods = kernels.backends()
    if "cython" not in mods:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
    rows = []
    for name, fn in cases(args.n).items():
        ref = _first(fn(mods["python"]))
        times = {}
        for bname, mod in mods.items():
            out = _first(fn(mod))
            if not np.allclose(out, ref, rtol=1e-9, atol=1e-12, equal_nan=True):
                print(f"{name}: {bname} disagrees with the numpy backend", file=sys.stderr)
                return 1
            times[bname] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        rows.append((name, times.get("python"), times.get("cython", float("nan")), speedup))
        print(f"{name:18s} python {times['python'] * 1e3:9.2f} ms   cython {times.get('cython', float('nan')) * 1e3:9.2f} ms   x{speedup:6.1f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "python_s", "cython_s", "speedup"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
