#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat N]

The first numba call includes JIT compilation (or a cache load) and is
reported separately.
"""

import argparse
import time

import numpy as np

from wearsim import kernels
from wearsim.config import load_scenario
from wearsim.engine import simulate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def python_loop(s0, full, floor, load, harvest, events, dt, max_steps):
    s, n = s0, len(load)
    for i in range(max_steps):
        j = i % n
        s = min(s + harvest[j] * dt - load[j] * dt - events[j], full)
        if s <= floor:
            return i + 1
    return max_steps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"numba available: {kernels.HAVE_NUMBA}, default backend: {kernels.BACKEND}\n")
    rows = []

    for name in ("paper-9day", "paper-outdoor-harvest", "paper-indoor-harvest", "paper-sleep"):
        w = load_scenario(name)

        def run(backend):
            return simulate(w.scenario, w.power.profiles, w.power.modes, w.curve, w.battery, w.uplink,
                            backend=backend)

        if kernels.HAVE_NUMBA:
            t0 = time.perf_counter()
            rep = run("numba")
            first = time.perf_counter() - t0
            t_nb = best_of(lambda: run("numba"), args.repeat)
        else:
            rep, first, t_nb = run("numpy"), float("nan"), float("nan")
        t_np = best_of(lambda: run("numpy"), args.repeat)
        rows.append((f"simulate {name}", rep.simulated_time, first, t_nb, t_np))

    rng = np.random.default_rng(0)
    n = 86_400
    load = rng.uniform(1e-4, 1e-2, n)
    harvest = np.zeros(n)
    events = np.zeros(n)
    steps = 30 * n
    prob = (4928.4, 4928.4, 0.0, load * 1e-3, harvest, events, 1.0, steps, 3600)
    t_py = best_of(lambda: python_loop(*prob[:8]), 1)
    t_nb = best_of(lambda: kernels.integrate_numba(*prob), args.repeat) if kernels.HAVE_NUMBA else float("nan")
    t_np = best_of(lambda: kernels.integrate_numpy(*prob), args.repeat)
    rows.append(("integrate 30 d raw kernel", steps, float("nan"), t_nb, t_np))

    ticks = np.sort(rng.choice(5_000_000, 1_000_000, replace=False)).astype(float)
    dist = rng.uniform(0.1, 10, ticks.size)
    t_nb = (best_of(lambda: kernels.merge_runs_numba(ticks, dist, 5.0, 60.0), args.repeat)
            if kernels.HAVE_NUMBA else float("nan"))
    t_np = best_of(lambda: kernels.merge_runs_numpy(ticks, dist, 5.0, 60.0), args.repeat)
    rows.append(("merge_runs 1e6 receptions", ticks.size, float("nan"), t_nb, t_np))

    print(f"{'case':34} {'size':>12} {'numba 1st':>10} {'numba':>10} {'numpy':>10} {'numpy/numba':>12}")
    for case, size, first, nb, npy in rows:
        print(f"{case:34} {size:12.0f} {first:10.3f} {nb:10.4f} {npy:10.4f} {npy / nb:12.1f}")
    print(f"\npure-Python step loop, 30 d: {t_py:.2f} s")


if __name__ == "__main__":
    main()
