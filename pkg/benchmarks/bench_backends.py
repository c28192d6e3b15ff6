"""Compare the numba kernels with their pure Python/NumPy twins.

    python benchmarks/bench_backends.py [--repeat N]

Timings exclude the first (compiling) call of each numba function.
"""

import argparse
import time

import numpy as np

from hrvsvm import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    for l in (20, 60):
        pts = rng.normal(size=(l, 2))
        y = np.where(rng.random(l) < 0.5, -1.0, 1.0)
        y[:2] = [1.0, -1.0]
        G = kernels.gram_py(pts, kernels.GAUSSIAN, 1.0, 3, 1.0)
        yield (
            f"gram l={l}",
            lambda p=pts: kernels.gram_py(p, kernels.GAUSSIAN, 1.0, 3, 1.0),
            lambda p=pts: kernels.gram_jit(p, kernels.GAUSSIAN, 1.0, 3, 1.0),
        )
        yield (
            f"smo l={l}",
            lambda G=G, y=y: kernels.smo_py(G, y, 1000.0, 1e-3, 10000, 1e-12, False),
            lambda G=G, y=y: kernels.smo_jit(G, y, 1000.0, 1e-3, 10000, 1e-12, False),
        )
    for n in (300, 3000):
        rr = rng.normal(800, 40, n)
        rr[:: n // 20] *= 1.6
        yield (
            f"ectopic n={n}",
            lambda r=rr: kernels.ectopic_mask_py(r, 0.2),
            lambda r=rr: kernels.ectopic_mask_jit(r, 0.2),
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if kernels.smo_jit is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'case':<16}{'python [ms]':>14}{'numba [ms]':>14}{'speedup':>10}")
    for name, py, jit in cases(rng):
        jit()
        t_py = best_of(py, args.repeat)
        t_jit = best_of(jit, args.repeat)
        print(f"{name:<16}{t_py * 1e3:>14.3f}{t_jit * 1e3:>14.3f}{t_py / t_jit:>9.1f}x")


if __name__ == "__main__":
    main()
