"""Time the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--repeat N] [--csv PATH]

Prints one row per (kernel, backend) with the best wall time over
``--repeat`` runs and the speedup of the compiled backend.
"""

import argparse
import time

import numpy as np

from engagemax.kernels import available_backends
from engagemax.tabular import csv_text, write_csv


def _cases():
    rng = np.random.default_rng(0)
    paths = np.arange(1_000_000, dtype=np.uint64)
    cumw = np.array([0.5, 1.0])
    U = rng.normal(size=(16, 12))
    E = np.exp(U - U.max(axis=1, keepdims=True))
    prior = np.full(16, 1 / 16)
    p0 = np.full(12, 1 / 12)
    x = np.linspace(0, 1, 20_001)
    y = np.sin(9 * x) * x
    m = 20_001
    t = np.linspace(0, 2, m)
    a = np.cos(t[:-1])
    b = np.sin(t[:-1])
    return {
        "uniforms[1e6]": lambda k: k.uniforms(0, paths, 0),
        "sample_dilution[1e6]": lambda k: k.sample_dilution(0, 0, 1_000_000, 2.0, cumw),
        "blahut_arimoto[16x12]": lambda k: k.blahut_arimoto(E, prior, p0, 1e-12, 20_000),
        "upper_hull[2e4]": lambda k: k.upper_hull(x, y),
        "rk4_linear_backward[2e4]": lambda k: k.rk4_linear_backward(t, a, a, a, b, b, b, 1.0),
    }


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(repeat=5):
    backends = available_backends()
    rows = []
    for name, fn in _cases().items():
        times = {b: best_time(lambda: fn(mod), repeat) for b, mod in backends.items()}
        for b, sec in times.items():
            speedup = times["python"] / sec
            rows.append((name, b, sec, speedup))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv", default=None, help="also write the table here")
    args = ap.parse_args()
    header = ("kernel", "backend", "seconds", "speedup_vs_python")
    rows = run(args.repeat)
    print(csv_text(header, rows), end="")
    if args.csv:
        write_csv(args.csv, header, rows)


if __name__ == "__main__":
    main()
