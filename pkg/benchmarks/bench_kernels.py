"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times the pairwise distance matrix on a planted dataset and a batch of
bootstrap dips, checks that both backends return the same numbers, and
prints one line per (kernel, backend).
"""
import argparse
import time

import numpy as np

from dipmsc import kernels
from dipmsc.distance import pairwise_distance_matrix
from dipmsc.synth import GeneratorSpec, generate


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-per", type=int, default=40)
    ap.add_argument("--q-max", type=int, default=4)
    ap.add_argument("--dips", type=int, default=1000)
    ap.add_argument("--dip-n", type=int, default=100)
    args = ap.parse_args()

    X, _, _ = generate(GeneratorSpec(N_per=args.n_per))
    rng = np.random.default_rng(0)
    block = np.ascontiguousarray(np.sort(rng.random((args.dips, args.dip_n)), axis=1))
    names = [n for n in ("cython", "python") if n in kernels.BACKENDS]
    if len(names) < 2:
        print("compiled extension not built; only the python backend is available")

    results = {}
    for name in names:
        t_d, dmat = best_of(lambda: pairwise_distance_matrix(X, args.q_max, backend=name), args.repeat)
        mod = kernels.get_backend(name)
        t_p, dips = best_of(lambda: mod.dip_sorted_rows(block), args.repeat)
        results[name] = (t_d, dmat, t_p, dips)
        print(f"pairwise {X.shape[0]}x{X.shape[0]} (D={X.n_dims}, T={X.length}, q_max={args.q_max})  "
              f"{name:7s} {t_d * 1e3:9.2f} ms")
        print(f"dip x{args.dips} (n={args.dip_n})  {name:7s} {t_p * 1e3:9.2f} ms")

    if len(names) == 2:
        c, p = results["cython"], results["python"]
        print(f"speed-up: distances {p[0] / c[0]:.1f}x, dips {p[2] / c[2]:.1f}x")
        print(f"max |diff|: distances {np.max(np.abs(c[1] - p[1])):.2e}, dips {np.max(np.abs(c[3] - p[3])):.2e}")


if __name__ == "__main__":
    main()
