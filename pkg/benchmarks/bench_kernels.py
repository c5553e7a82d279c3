#!/usr/bin/env python3
"""Compare the compiled event-loop core against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--events N]

Runs the same workloads through both backends and reports events/second.
The outputs are also checked for bit equality, so this doubles as a smoke
parity test on the benchmarking machine.
"""

import argparse
import math
import time

import numpy as np

from softlorentz._kernels import pure as pure_kern

try:
    from softlorentz._kernels import _core as core_kern
except ImportError:
    core_kern = None

EMPTY_F = np.empty(0)
EMPTY_I = np.empty(0, dtype=np.int64)


def bench_hex(kern, n_events):
    ncap = 0
    s = [np.empty(0) for _ in range(4)]
    ei = [np.empty(ncap, dtype=np.int64) for _ in range(3)]
    ef = [np.empty(ncap) for _ in range(10)]
    t0 = time.perf_counter()
    out = kern.evolve_hex(0.45, 0.0, 0, 0, 0.7, 0.42, 0.0,
                          0.45, 1.52, 1.0 / 6.0, pure_kern.PROFILE_COS,
                          pure_kern.PHASE_GLOBAL, 0.0, 0.0, 7,
                          1e18, n_events, EMPTY_F, EMPTY_I, 0, 0,
                          s[0], s[1], s[2], s[3], EMPTY_F, EMPTY_F,
                          ei[0], ef[0], ef[1], ef[2], ef[3], ei[1], ei[2],
                          ef[4], ef[5], ef[6], ef[7], ef[8], ef[9])
    dt = time.perf_counter() - t0
    return out[1], dt, out


def bench_line(kern, n_events):
    t0 = time.perf_counter()
    out = kern.evolve_line(0, 2.0 / 3.0, 2.0, 0.0, 2.0 / 3.0, 1.0,
                           pure_kern.PROFILE_COS, pure_kern.PHASE_GLOBAL,
                           0.0, 0.0, 99, 1e18, n_events,
                           EMPTY_F, EMPTY_I, 0, 0,
                           EMPTY_F, EMPTY_F, EMPTY_F, EMPTY_F,
                           EMPTY_I, EMPTY_F, EMPTY_F, EMPTY_F, EMPTY_I,
                           EMPTY_F, EMPTY_F, EMPTY_F)
    dt = time.perf_counter() - t0
    return out[1], dt, out


def bench_kicked(kern, n_kicks):
    kg = EMPTY_I
    t0 = time.perf_counter()
    out = kern.kicked_2d(0.3, 1.1, 1.0, 0.2, 10.0, n_kicks, kg,
                         EMPTY_F, EMPTY_F, EMPTY_F, EMPTY_F)
    dt = time.perf_counter() - t0
    return n_kicks, dt, out


def bench_rw(kern, n_steps):
    rng = np.random.default_rng(5)
    b = rng.uniform(-0.45, 0.45, n_steps)
    ph0 = rng.uniform(0.0, 2.0 * math.pi, n_steps)
    ph1 = rng.uniform(0.0, 2.0 * math.pi, n_steps)
    t0 = time.perf_counter()
    out = kern.rw_chain(1.0, 0.0, 0.45, 1.0 / 6.0, pure_kern.PROFILE_COS,
                        0.26, 1e-9, b, ph0, ph1, EMPTY_I,
                        EMPTY_F, EMPTY_F, EMPTY_F, EMPTY_F, EMPTY_F,
                        EMPTY_F, EMPTY_F, EMPTY_F, EMPTY_F, EMPTY_F)
    dt = time.perf_counter() - t0
    return out[1], dt, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--events", type=int, default=200_000,
                        help="events per workload for the compiled core")
    args = parser.parse_args()
    if core_kern is None:
        print("compiled core not available; build with pip install -e .")
        return 1
    workloads = (("hex event loop", bench_hex),
                 ("1d event loop", bench_line),
                 ("kicked map", bench_kicked),
                 ("rw chain", bench_rw))
    print(f"{'workload':<16} {'cython ev/s':>14} {'pure ev/s':>14} "
          f"{'speedup':>9}  parity")
    for name, fn in workloads:
        n_core, dt_core, out_core = fn(core_kern, args.events)
        n_pure = max(args.events // 50, 1000)
        np_done, dt_pure, _ = fn(pure_kern, n_pure)
        # parity on the smaller workload
        _, _, out_small = fn(core_kern, n_pure)
        _, _, out_pure_small = fn(pure_kern, n_pure)
        parity = "bit-identical" if out_small == out_pure_small else "DIFFERS"
        r_core = n_core / dt_core
        r_pure = np_done / dt_pure
        print(f"{name:<16} {r_core:>14.3g} {r_pure:>14.3g} "
              f"{r_core / r_pure:>8.1f}x  {parity}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
