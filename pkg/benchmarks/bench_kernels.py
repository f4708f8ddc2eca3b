"""Benchmark the numba kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py [--frames 20] [--hw 128] [--runs 5]

Shapes default to one main-track target cube (20 frames, 128x128).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from enscore.kernels import nb_backend, np_backend


def _time(fn, *args, runs=5, warmup=2):
    for _ in range(warmup):
        fn(*args)
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return np.mean(times), np.std(times)


def _report(name, args, runs):
    nb_fn = getattr(nb_backend, name)
    np_fn = getattr(np_backend, name)
    m_nb, s_nb = _time(nb_fn, *args, runs=runs)
    m_np, s_np = _time(np_fn, *args, runs=runs)
    speedup = m_np / m_nb if m_nb > 0 else float("inf")
    print(f"{name:<16} numba {m_nb*1e3:8.2f} ± {s_nb*1e3:5.2f} ms   "
          f"numpy {m_np*1e3:8.2f} ± {s_np*1e3:5.2f} ms   speedup {speedup:5.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=20)
    parser.add_argument("--hw", type=int, default=128)
    parser.add_argument("--runs", type=int, default=5)
    args = parser.parse_args()

    t, hw = args.frames, args.hw
    p = hw * hw
    rng = np.random.default_rng(0)
    tn = rng.uniform(-1, 1, (t, p))
    pn = rng.uniform(-1, 1, (t, p))
    valid = (rng.random((t, p)) >= 0.3).astype(np.uint8)
    img = rng.random((hw, hw))

    print(f"series shape ({t}, {p}); frame {hw}x{hw}; {args.runs} timed runs")
    _report("ols_distances", (tn, pn, valid), args.runs)
    _report("w1_pixels", (tn, pn, valid), args.runs)
    _report("gauss_valid", (img,), args.runs)

    a = rng.uniform(-1, 1, 30)
    b = rng.uniform(-1, 1, 25)
    _report("w1_scalar", (a, b), args.runs)


if __name__ == "__main__":
    main()
