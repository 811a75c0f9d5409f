"""Hot loops: fixed-step battery integration and encounter run merging.

Each kernel has a numba version and a pure-numpy version with the same
signature.  Setting ``WEARSIM_NO_NUMBA=1`` (or running without numba
installed) binds the public names to the numpy versions.  The two paths
agree to floating-point round-off, not bit-for-bit; each path on its own
is deterministic.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _flag("WEARSIM_NO_NUMBA")
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# battery integration
# ---------------------------------------------------------------------------
#
# Per step i (day slot j = i % n):
#   s <- min(s + harvest[j]*dt - load[j]*dt - events[j], full)
#   stop when s <= floor
# Returns (steps, depleted, s_final, e_load, e_events, e_harvest, e_discarded,
#          e_unmet, sample_steps, sample_stored).


@njit(cache=True, nogil=True)
def integrate_numba(s0, full, floor, load, harvest, events, dt, max_steps, sample_every):
    n = load.shape[0]
    n_samples = max_steps // sample_every
    sample_steps = np.empty(n_samples, dtype=np.int64)
    sample_stored = np.empty(n_samples, dtype=np.float64)
    k = 0
    s = s0
    e_load = 0.0
    e_events = 0.0
    e_harv = 0.0
    e_disc = 0.0
    e_unmet = 0.0
    depleted = False
    steps = max_steps
    for i in range(max_steps):
        j = i % n
        el = load[j] * dt
        eh = harvest[j] * dt
        ev = events[j]
        e_load += el
        e_harv += eh
        e_events += ev
        s = s + eh - el - ev
        if s > full:
            e_disc += s - full
            s = full
        if s < 0.0:
            e_unmet -= s
            s = 0.0
        if (i + 1) % sample_every == 0 and k < n_samples:
            sample_steps[k] = i + 1
            sample_stored[k] = s
            k += 1
        if s <= floor:
            depleted = True
            steps = i + 1
            break
    return (steps, depleted, s, e_load, e_events, e_harv, e_disc, e_unmet,
            sample_steps[:k], sample_stored[:k])


def integrate_numpy(s0, full, floor, load, harvest, events, dt, max_steps, sample_every,
                    chunk_steps=1 << 20):
    n = load.shape[0]
    reps = max(1, chunk_steps // n)
    # whole days tiled into one chunk; chunks always start at a day boundary
    x_blk = np.tile(harvest * dt - load * dt - events, reps)
    load_blk = np.tile(load, reps)
    harv_blk = np.tile(harvest, reps)
    ev_blk = np.tile(events, reps)
    blk = x_blk.shape[0]
    s = float(s0)
    done = 0
    e_load = e_events = e_harv = e_disc = e_unmet = 0.0
    depleted = False
    samp_steps, samp_stored = [], []
    while done < max_steps:
        m = min(blk, max_steps - done)
        c = s + np.cumsum(x_blk[:m])
        # upper clamp as a one-sided reflection: subtract the running max overshoot
        disc = np.maximum.accumulate(np.maximum(c - full, 0.0))
        st = c - disc
        hit = np.flatnonzero(st <= floor)
        if hit.size:
            m = int(hit[0]) + 1
            st = st[:m]
            disc = disc[:m]
            depleted = True
        e_load += float(np.sum(load_blk[:m])) * dt
        e_harv += float(np.sum(harv_blk[:m])) * dt
        e_events += float(np.sum(ev_blk[:m]))
        e_disc += float(disc[-1])
        first = sample_every - 1 - done % sample_every
        idx = np.arange(first, m, sample_every)
        if idx.size:
            samp_steps.append(idx + done + 1)
            samp_stored.append(np.maximum(st[idx], 0.0))
        s = float(st[-1])
        done += m
        if s < 0.0:
            e_unmet -= s
            s = 0.0
        if depleted:
            break
    ss = np.concatenate(samp_steps).astype(np.int64) if samp_steps else np.empty(0, np.int64)
    sv = np.concatenate(samp_stored) if samp_stored else np.empty(0)
    return done, depleted, s, e_load, e_events, e_harv, e_disc, e_unmet, ss, sv


# ---------------------------------------------------------------------------
# encounter merging
# ---------------------------------------------------------------------------
#
# Given reception ticks (times ascending, with the distance at each tick),
# merge receptions whose spacing is <= max_gap and keep runs whose span is
# >= min_duration.  Returns (start, end, min_distance, samples) arrays.


@njit(cache=True, nogil=True)
def merge_runs_numba(times, dist, max_gap, min_duration):
    n = times.shape[0]
    starts = np.empty(n, dtype=np.float64)
    ends = np.empty(n, dtype=np.float64)
    mins = np.empty(n, dtype=np.float64)
    counts = np.empty(n, dtype=np.int64)
    k = 0
    if n == 0:
        return starts[:0], ends[:0], mins[:0], counts[:0]
    a = times[0]
    b = times[0]
    dmin = dist[0]
    c = 1
    for i in range(1, n + 1):
        if i < n and times[i] - b <= max_gap:
            b = times[i]
            if dist[i] < dmin:
                dmin = dist[i]
            c += 1
            continue
        if b - a >= min_duration:
            starts[k] = a
            ends[k] = b
            mins[k] = dmin
            counts[k] = c
            k += 1
        if i < n:
            a = times[i]
            b = times[i]
            dmin = dist[i]
            c = 1
    return starts[:k], ends[:k], mins[:k], counts[:k]


def merge_runs_numpy(times, dist, max_gap, min_duration):
    times = np.asarray(times, dtype=float)
    dist = np.asarray(dist, dtype=float)
    if times.size == 0:
        return np.empty(0), np.empty(0), np.empty(0), np.empty(0, np.int64)
    breaks = np.flatnonzero(np.diff(times) > max_gap) + 1
    lo = np.concatenate(([0], breaks))
    hi = np.concatenate((breaks, [times.size]))
    starts = times[lo]
    ends = times[hi - 1]
    mins = np.minimum.reduceat(dist, lo)
    counts = (hi - lo).astype(np.int64)
    keep = ends - starts >= min_duration
    return starts[keep], ends[keep], mins[keep], counts[keep]


if USE_NUMBA:
    integrate = integrate_numba
    merge_runs = merge_runs_numba
else:
    integrate = integrate_numpy
    merge_runs = merge_runs_numpy
