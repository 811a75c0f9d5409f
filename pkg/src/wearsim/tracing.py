"""BLE proximity tracing between waypoint-driven agents on a plane."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .power import mode_average_power
from .radio import BleAdvertisingSpec

MIN_DISTANCE = 0.01  # m; co-located agents are evaluated at this separation


class TracingError(ValueError):
    pass


@dataclass(frozen=True)
class DeviceAgent:
    id: str
    mobility: tuple[tuple[float, float, float], ...]  # (t_s, x_m, y_m)
    adv: BleAdvertisingSpec = field(default_factory=BleAdvertisingSpec)
    rx_sensitivity: float = -90.0

    def __post_init__(self):
        wp = tuple((float(t), float(x), float(y)) for t, x, y in self.mobility)
        object.__setattr__(self, "mobility", wp)
        if not wp:
            raise TracingError(f"agent {self.id!r} has no waypoints")
        if any(b[0] <= a[0] for a, b in zip(wp, wp[1:])):
            raise TracingError(f"agent {self.id!r}: waypoint times must be strictly increasing")

    def position(self, t):
        wp = np.asarray(self.mobility)
        t = np.asarray(t, dtype=float)
        return np.interp(t, wp[:, 0], wp[:, 1]), np.interp(t, wp[:, 0], wp[:, 2])

    def covers(self, horizon: float) -> bool:
        return self.mobility[0][0] <= 0.0 and self.mobility[-1][0] >= horizon


@dataclass(frozen=True)
class PathLossModel:
    rssi_at_1m: float = -59.0
    exponent: float = 2.0
    noise_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.exponent > 0:
            raise TracingError(f"path-loss exponent must be > 0, got {self.exponent}")
        if self.noise_sigma < 0:
            raise TracingError("noise sigma must be >= 0 dB")


@dataclass(frozen=True)
class EncounterRecord:
    observer: str
    observed: str
    start: float
    end: float
    min_distance: float
    samples: int

    @property
    def duration(self) -> float:
        return self.end - self.start


def rssi_at(model: PathLossModel, distance, rng: np.random.Generator | None = None):
    """Log-distance RSSI in dBm, with optional seeded Gaussian shadowing."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise TracingError(f"distance must be > 0, got {distance}")
    out = model.rssi_at_1m - 10.0 * model.exponent * np.log10(d)
    if model.noise_sigma > 0:
        if rng is None:
            rng = np.random.default_rng(model.rng_seed)
        out = out + rng.normal(0.0, model.noise_sigma, size=d.shape)
    return float(out) if out.ndim == 0 else out


def detection_range(model: PathLossModel, sensitivity: float) -> float:
    """Distance at which the noiseless RSSI equals ``sensitivity``."""
    return 10.0 ** ((model.rssi_at_1m - sensitivity) / (10.0 * model.exponent))


def detect_encounters(agents, model: PathLossModel, horizon: float, min_duration: float,
                      max_gap: float, *, merge=None) -> list[EncounterRecord]:
    """Encounters seen by every observer from every other agent's advertising.

    Each observed agent advertises at ``k * adv.interval`` for ``t < horizon``.
    A packet is received when the RSSI at the current separation reaches the
    observer's sensitivity.  Noise is drawn per ordered pair from a stream
    seeded by ``model.rng_seed`` and the pair's position in the sorted id list.
    """
    if not horizon > 0:
        raise TracingError(f"horizon must be > 0, got {horizon}")
    agents = sorted(agents, key=lambda a: a.id)
    ids = [a.id for a in agents]
    if len(set(ids)) != len(ids):
        raise TracingError("agent ids must be unique")
    for a in agents:
        if not a.covers(horizon):
            raise TracingError(f"agent {a.id!r} waypoints do not cover [0, {horizon}] s")
    merge = merge or kernels.merge_runs
    n = len(agents)
    out: list[EncounterRecord] = []
    for j, observed in enumerate(agents):
        ticks = np.arange(0.0, horizon, observed.adv.interval)
        ox, oy = observed.position(ticks)
        for i, observer in enumerate(agents):
            if i == j:
                continue
            rx, ry = observer.position(ticks)
            d = np.maximum(np.hypot(ox - rx, oy - ry), MIN_DISTANCE)
            rng = None
            if model.noise_sigma > 0:
                rng = np.random.default_rng([model.rng_seed, i * n + j])
            rssi = rssi_at(model, d, rng)
            got = rssi >= observer.rx_sensitivity
            starts, ends, mins, counts = merge(ticks[got], d[got], float(max_gap), float(min_duration))
            for s, e, m, c in zip(starts, ends, mins, counts):
                out.append(EncounterRecord(observer.id, observed.id, float(s), float(e), float(m), int(c)))
    out.sort(key=lambda r: (r.observer, r.observed, r.start))
    return out


def tracing_energy(agent: DeviceAgent, horizon: float, profiles, modes, mode: str = "advertising") -> float:
    """Joules an agent spends staying in advertising mode for ``horizon`` seconds."""
    if horizon < 0:
        raise TracingError(f"horizon must be >= 0, got {horizon}")
    return mode_average_power(modes[mode], profiles) * horizon


def load_agents(path, adv: BleAdvertisingSpec | None = None, rx_sensitivity: float = -90.0) -> list[DeviceAgent]:
    """Read ``id,t_s,x_m,y_m`` rows into agents (rows may be interleaved)."""
    tracks: dict[str, list[tuple[float, float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "t_s", "x_m", "y_m"} - set(reader.fieldnames or ())
        if missing:
            raise TracingError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            tracks.setdefault(row["id"], []).append((float(row["t_s"]), float(row["x_m"]), float(row["y_m"])))
    adv = adv or BleAdvertisingSpec()
    return [DeviceAgent(k, tuple(sorted(v)), adv, rx_sensitivity) for k, v in sorted(tracks.items())]


ENCOUNTER_FIELDS = ("observer", "observed", "start_s", "end_s", "min_distance_m", "samples")


def write_encounters(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ENCOUNTER_FIELDS)
    for r in records:
        w.writerow((r.observer, r.observed, f"{r.start:g}", f"{r.end:g}", f"{r.min_distance:.6g}", r.samples))


def read_encounters(path) -> list[EncounterRecord]:
    with open(Path(path), newline="") as fh:
        return [
            EncounterRecord(r["observer"], r["observed"], float(r["start_s"]), float(r["end_s"]),
                            float(r["min_distance_m"]), int(r["samples"]))
            for r in csv.DictReader(fh)
        ]
