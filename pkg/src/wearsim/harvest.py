"""Solar harvesting: illuminance to delivered-to-battery power."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DAY = 86_400


class HarvestError(ValueError):
    pass


@dataclass(frozen=True)
class HarvesterCurve:
    """Calibration points ``(lux, watts)`` already net of MPPT/boost losses.

    ``conversion_efficiency`` is kept as metadata only; the powers are
    battery-side, so applying it again would double-count the loss.
    """

    points: tuple[tuple[float, float], ...]
    conversion_efficiency: float = 0.92

    def __post_init__(self):
        pts = tuple((float(lx), float(w)) for lx, w in self.points)
        object.__setattr__(self, "points", pts)
        if not pts or pts[0] != (0.0, 0.0):
            raise HarvestError("harvester curve must start at (0 lux, 0 W)")
        lux = [p[0] for p in pts]
        watts = [p[1] for p in pts]
        if any(b <= a for a, b in zip(lux, lux[1:])):
            raise HarvestError("harvester curve lux values must be strictly ascending")
        if any(w < 0 for w in watts):
            raise HarvestError("harvester curve powers must be >= 0")
        if any(b < a for a, b in zip(watts, watts[1:])):
            raise HarvestError("harvester curve power must be non-decreasing in lux")

    @property
    def lux(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def watts(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def loglog_point(lux: float, lo: tuple[float, float], hi: tuple[float, float]) -> float:
    """Power at ``lux`` on the power law through two anchor points."""
    (l0, p0), (l1, p1) = lo, hi
    k = math.log(p1 / p0) / math.log(l1 / l0)
    return p0 * (lux / l0) ** k


def harvest_power(curve: HarvesterCurve, illuminance):
    """Piecewise-linear lookup, flat beyond the last calibration point.

    Accepts a scalar or an array of illuminances.
    """
    arr = np.asarray(illuminance, dtype=float)
    if np.any(arr < 0):
        raise HarvestError(f"illuminance must be >= 0, got {illuminance}")
    out = np.interp(arr, curve.lux, curve.watts)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LightSegment:
    start: float
    duration: float
    lux: float


@dataclass(frozen=True)
class LightSchedule:
    segments: tuple[LightSegment, ...] = ()

    def __post_init__(self):
        segs = tuple(
            s if isinstance(s, LightSegment) else LightSegment(*map(float, s)) for s in self.segments
        )
        segs = tuple(sorted(segs, key=lambda s: s.start))
        object.__setattr__(self, "segments", segs)
        total = 0.0
        for s in segs:
            if s.start < 0 or s.duration <= 0 or s.start + s.duration > DAY:
                raise HarvestError(f"light segment {s} must lie within one day")
            if s.lux < 0:
                raise HarvestError(f"light segment {s} has negative illuminance")
            total += s.duration
        for a, b in zip(segs, segs[1:]):
            if a.start + a.duration > b.start:
                raise HarvestError(f"light segments overlap: {a} and {b}")
        if total > DAY:
            raise HarvestError("light schedule covers more than 24 h")

    def lux_at(self, t: float) -> float:
        for s in self.segments:
            if s.start <= t < s.start + s.duration:
                return s.lux
        return 0.0


def schedule_power_at(schedule: LightSchedule, curve: HarvesterCurve, t: float) -> float:
    return harvest_power(curve, schedule.lux_at(t))


def daily_harvest_energy(schedule: LightSchedule, curve: HarvesterCurve) -> float:
    return sum(s.duration * harvest_power(curve, s.lux) for s in schedule.segments)


def day_profile(schedule: LightSchedule, curve: HarvesterCurve, dt: float) -> np.ndarray:
    """Harvest power sampled at the start of every ``dt`` step of one day."""
    n = int(round(DAY / dt))
    lux = np.zeros(n)
    for s in schedule.segments:
        i0 = int(math.ceil(s.start / dt - 1e-9))
        i1 = int(math.ceil((s.start + s.duration) / dt - 1e-9))
        lux[i0:i1] = s.lux
    return harvest_power(curve, lux)
