"""Fixed-step lifetime simulation over a repeating daily scenario."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .battery import BatterySpec
from .harvest import DAY, HarvesterCurve, LightSchedule, day_profile, harvest_power
from .power import ModeSpec, mode_breakdown, task_energy
from .radio import UplinkModel, uplink_energy


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ModeSegment:
    start: float
    duration: float
    mode: str


@dataclass(frozen=True)
class Scenario:
    mode_schedule: tuple[ModeSegment, ...]
    light_schedule: LightSchedule = field(default_factory=LightSchedule)
    uplinks_per_day: int = 0
    uplink_times: tuple[float, ...] | None = None
    rssi: float = -90.0
    tasks_per_day: int = 0
    task_duration: float = 0.0
    max_horizon: float = 730.0 * DAY
    dt: float = 1.0
    sample_interval: float = 3600.0

    def __post_init__(self):
        segs = tuple(
            s if isinstance(s, ModeSegment) else ModeSegment(float(s[0]), float(s[1]), str(s[2]))
            for s in self.mode_schedule
        )
        object.__setattr__(self, "mode_schedule", tuple(sorted(segs, key=lambda s: s.start)))
        if self.uplink_times is not None:
            object.__setattr__(self, "uplink_times", tuple(float(t) for t in self.uplink_times))
        self.validate()

    def validate(self):
        dt = self.dt
        if not dt > 0:
            raise ScenarioError(f"dt must be > 0, got {dt}")
        if not _on_grid(DAY, dt):
            raise ScenarioError(f"dt={dt} s must divide one day")
        if not self.max_horizon >= dt:
            raise ScenarioError("max_horizon must be >= dt")
        if not self.mode_schedule:
            raise ScenarioError("mode schedule is empty")
        t = 0.0
        for seg in self.mode_schedule:
            if seg.duration <= 0:
                raise ScenarioError(f"mode segment {seg} has non-positive duration")
            if seg.start > t:
                raise ScenarioError(f"mode schedule gap between {t:g} s and {seg.start:g} s")
            if seg.start < t:
                raise ScenarioError(f"mode schedule overlap at {seg.start:g} s")
            if not (_on_grid(seg.start, dt) and _on_grid(seg.duration, dt)):
                raise ScenarioError(f"mode segment {seg} is not aligned to dt={dt} s")
            t = seg.start + seg.duration
        if t != DAY:
            raise ScenarioError(f"mode schedule covers {t:g} s, expected {DAY} s")
        if self.uplinks_per_day < 0 or self.tasks_per_day < 0:
            raise ScenarioError("event counts must be >= 0")
        if self.task_duration < 0:
            raise ScenarioError("task duration must be >= 0")
        if self.uplink_times is not None:
            if len(self.uplink_times) != self.uplinks_per_day:
                raise ScenarioError(
                    f"{len(self.uplink_times)} uplink times given for uplinks_per_day={self.uplinks_per_day}"
                )
            for u in self.uplink_times:
                if not 0 <= u < DAY or not _on_grid(u, dt):
                    raise ScenarioError(f"uplink time {u} s must be a dt-aligned time of day")
        if self.sample_interval < dt:
            raise ScenarioError("sample interval must be >= dt")

    @property
    def steps_per_day(self) -> int:
        return int(round(DAY / self.dt))

    def uplink_offsets(self) -> tuple[float, ...]:
        if self.uplink_times is not None:
            return self.uplink_times
        return _spread(self.uplinks_per_day, self.dt)

    def task_offsets(self) -> tuple[float, ...]:
        return _spread(self.tasks_per_day, self.dt)


def _on_grid(x: float, dt: float) -> bool:
    q = x / dt
    return abs(q - round(q)) < 1e-9


def _spread(n: int, dt: float) -> tuple[float, ...]:
    """``n`` evenly spaced times of day, snapped down to the step grid."""
    return tuple(math.floor(k * DAY / n / dt) * dt for k in range(n))


@dataclass
class SimReport:
    lifetime: float | None  # seconds until depletion; None if the horizon was survived
    simulated_time: float
    average_load_power: float
    average_harvest_power: float
    component_energy: dict[str, float]
    event_energy: dict[str, float]
    initial_stored: float
    final_stored: float
    consumed: float
    harvested: float
    discarded: float
    unmet: float
    timeseries: dict[str, np.ndarray]
    backend: str = kernels.BACKEND

    @property
    def survived(self) -> bool:
        return self.lifetime is None

    @property
    def lifetime_days(self) -> float:
        return math.inf if self.lifetime is None else self.lifetime / DAY

    @property
    def conservation_residual(self) -> float:
        """Relative mismatch of (initial - final) vs (consumed - net harvest stored)."""
        lhs = self.initial_stored - self.final_stored
        rhs = self.consumed - (self.harvested - self.discarded) - self.unmet
        return abs(lhs - rhs) / max(self.consumed, 1e-300)

    def summary(self) -> dict:
        return {
            "lifetime_s": self.lifetime,
            "lifetime_days": None if self.lifetime is None else self.lifetime / DAY,
            "survived_horizon": self.survived,
            "simulated_time_s": self.simulated_time,
            "average_load_w": self.average_load_power,
            "average_harvest_w": self.average_harvest_power,
            "consumed_j": self.consumed,
            "harvested_j": self.harvested,
            "discarded_j": self.discarded,
            "initial_stored_j": self.initial_stored,
            "final_stored_j": self.final_stored,
            "component_energy_j": dict(self.component_energy),
            "event_energy_j": dict(self.event_energy),
            "backend": self.backend,
        }


@dataclass(frozen=True)
class DayTables:
    """Per-step daily arrays the kernels consume, plus the bookkeeping to
    attribute energy back to components and events."""

    load: np.ndarray
    harvest: np.ndarray
    events: np.ndarray
    mode_index: np.ndarray
    mode_names: tuple[str, ...]
    mode_components: tuple[dict[str, float], ...]
    uplink_slots: np.ndarray
    task_slots: np.ndarray
    uplink_j: float
    task_j: float
    self_discharge: float


def build_day_tables(scenario, profiles, modes, curve, battery, uplink_model) -> DayTables:
    dt = scenario.dt
    n = scenario.steps_per_day
    names = []
    for seg in scenario.mode_schedule:
        if seg.mode not in modes:
            raise ScenarioError(f"mode schedule references undefined mode {seg.mode!r}")
        if seg.mode not in names:
            names.append(seg.mode)
    comps = tuple(mode_breakdown(modes[m], profiles) for m in names)
    powers = np.array([sum(c.values()) for c in comps])
    idx = np.empty(n, dtype=np.int64)
    for seg in scenario.mode_schedule:
        i0 = int(round(seg.start / dt))
        i1 = int(round((seg.start + seg.duration) / dt))
        idx[i0:i1] = names.index(seg.mode)
    load = powers[idx] + battery.self_discharge_w

    harvest = day_profile(scenario.light_schedule, curve, dt)

    events = np.zeros(n)
    up_slots = np.array([int(round(t / dt)) for t in scenario.uplink_offsets()], dtype=np.int64)
    task_slots = np.array([int(round(t / dt)) for t in scenario.task_offsets()], dtype=np.int64)
    e_up = uplink_energy(uplink_model, scenario.rssi) if len(up_slots) else 0.0
    e_task = task_energy(scenario.task_duration, profiles) if len(task_slots) else 0.0
    np.add.at(events, up_slots, e_up)
    np.add.at(events, task_slots, e_task)
    return DayTables(load, harvest, events, idx, tuple(names), comps,
                     np.sort(up_slots), np.sort(task_slots), e_up, e_task, battery.self_discharge_w)


def _fired(slots: np.ndarray, steps, n: int):
    """Number of events with slot ``j`` fired in the first ``steps`` steps."""
    steps = np.asarray(steps, dtype=np.int64)
    return (steps // n) * len(slots) + np.searchsorted(slots, steps % n, side="left")


def simulate(scenario: Scenario, profiles, modes: Mapping[str, ModeSpec], curve: HarvesterCurve,
             battery: BatterySpec, uplink_model: UplinkModel, *, backend: str | None = None) -> SimReport:
    """Run the scenario from a full battery until depletion or ``max_horizon``."""
    tabs = build_day_tables(scenario, profiles, modes, curve, battery, uplink_model)
    dt = scenario.dt
    n = scenario.steps_per_day
    max_steps = int(math.floor(scenario.max_horizon / dt + 1e-9))
    sample_every = max(1, int(round(scenario.sample_interval / dt)))
    if backend is None:
        fn, backend = kernels.integrate, kernels.BACKEND
    elif backend == "numba":
        fn = kernels.integrate_numba
    elif backend == "numpy":
        fn = kernels.integrate_numpy
    else:
        raise ValueError(f"unknown backend {backend!r}")

    full = battery.full_energy
    (steps, depleted, s_final, e_load, e_events, e_harv, e_disc, e_unmet,
     samp_steps, samp_stored) = fn(full, full, battery.floor_energy, tabs.load, tabs.harvest,
                                   tabs.events, dt, max_steps, sample_every)
    steps = int(steps)
    t_end = steps * dt

    days, rem = divmod(steps, n)
    counts = days * np.bincount(tabs.mode_index, minlength=len(tabs.mode_names))
    counts = counts + np.bincount(tabs.mode_index[:rem], minlength=len(tabs.mode_names))
    comp_energy: dict[str, float] = {}
    for m, c in enumerate(counts):
        for comp, p in tabs.mode_components[m].items():
            comp_energy[comp] = comp_energy.get(comp, 0.0) + float(c) * dt * p
    if tabs.self_discharge:
        comp_energy["self_discharge"] = steps * dt * tabs.self_discharge
    n_up = int(_fired(tabs.uplink_slots, steps, n))
    n_task = int(_fired(tabs.task_slots, steps, n))
    event_energy = {"uplink": n_up * tabs.uplink_j, "task": n_task * tabs.task_j}

    ts = _timeseries(tabs, n, dt, full, samp_steps, samp_stored, steps, float(s_final), depleted)
    return SimReport(
        lifetime=t_end if depleted else None,
        simulated_time=t_end,
        average_load_power=(e_load + e_events) / t_end if t_end else 0.0,
        average_harvest_power=e_harv / t_end if t_end else 0.0,
        component_energy=comp_energy,
        event_energy=event_energy,
        initial_stored=full,
        final_stored=float(s_final),
        consumed=float(e_load + e_events),
        harvested=float(e_harv),
        discarded=float(e_disc),
        unmet=float(e_unmet),
        timeseries=ts,
        backend=backend,
    )


def _timeseries(tabs, n, dt, s0, samp_steps, samp_stored, steps, s_final, depleted):
    st = np.concatenate(([0], np.asarray(samp_steps, dtype=np.int64)))
    sv = np.concatenate(([s0], np.asarray(samp_stored, dtype=float)))
    if st[-1] != steps:
        st = np.append(st, steps)
        sv = np.append(sv, s_final)
    else:
        sv[-1] = s_final
    slot = (np.maximum(st, 1) - 1) % n
    up = _fired(tabs.uplink_slots, st, n)
    tk = _fired(tabs.task_slots, st, n)
    labels = []
    for i in range(len(st)):
        tags = []
        if i == 0:
            tags.append("start")
        else:
            if up[i] > up[i - 1]:
                tags.append("uplink")
            if tk[i] > tk[i - 1]:
                tags.append("task")
        if i == len(st) - 1 and i > 0:
            tags.append("depleted" if depleted else "horizon")
        labels.append(";".join(tags))
    return {
        "t_s": st * dt,
        "stored_j": sv,
        "load_w": tabs.load[slot],
        "harvest_w": tabs.harvest[slot],
        "event": np.array(labels, dtype=object),
    }


def closed_form_lifetime(load: float, harvest_daily: float, battery: BatterySpec) -> float:
    """Depletion time for a constant load and a daily harvest averaged over the day.

    Returns ``math.inf`` when the harvest covers the load.
    """
    deficit = load - harvest_daily / DAY
    if deficit <= 0:
        return math.inf
    return battery.usable_energy / deficit


def scenario_average_load(scenario: Scenario, profiles, modes, battery, uplink_model) -> float:
    """Time-averaged battery-side load of one scenario day, events included."""
    tabs = build_day_tables(scenario, profiles, modes, HarvesterCurve(((0, 0),)), battery, uplink_model)
    return float(tabs.load.mean() + tabs.events.sum() / DAY)


def event_driven_lifetime(scenario: Scenario, profiles, modes, curve, battery, uplink_model) -> float:
    """Exact depletion time from walking the piecewise-constant day analytically.

    Independent of the step kernels: loads, harvest and events are taken
    from the schedules directly, and depletion inside an interval is solved
    in closed form.  Returns ``math.inf`` if the horizon is survived.
    """
    bounds = {0.0, float(DAY)}
    for seg in scenario.mode_schedule:
        bounds.add(seg.start)
    for seg in scenario.light_schedule.segments:
        bounds.update((seg.start, seg.start + seg.duration))
    ups = scenario.uplink_offsets()
    tasks = scenario.task_offsets()
    bounds.update(ups)
    bounds.update(tasks)
    edges = sorted(bounds)
    e_up = uplink_energy(uplink_model, scenario.rssi) if ups else 0.0
    e_task = task_energy(scenario.task_duration, profiles) if tasks else 0.0

    mode_p = {name: sum(mode_breakdown(m, profiles).values()) for name, m in modes.items()}
    intervals = []
    for a, b in zip(edges, edges[1:]):
        mode = next(s.mode for s in scenario.mode_schedule if s.start <= a < s.start + s.duration)
        load = mode_p[mode] + battery.self_discharge_w
        harv = harvest_power(curve, scenario.light_schedule.lux_at(a))
        ev = e_up * sum(1 for u in ups if u == a) + e_task * sum(1 for t in tasks if t == a)
        intervals.append((a, b, harv - load, ev))

    full, floor = battery.full_energy, battery.floor_energy
    s = full
    day = 0
    while day * DAY < scenario.max_horizon:
        base = day * DAY
        for a, b, net, ev in intervals:
            s -= ev
            if s <= floor:
                return base + a
            if net < 0:
                t_hit = (s - floor) / -net
                if t_hit < b - a:
                    return base + a + t_hit
            s = min(full, s + net * (b - a))
        day += 1
    return math.inf


def sweep(template: Mapping, grid: Mapping[str, Sequence], *, workers: int = 1,
          backend: str | None = None) -> list[SimReport]:
    """Simulate every point of the cartesian ``grid`` over ``template``.

    ``template`` is a raw config mapping; grid keys use the same dotted
    paths as ``--set`` overrides and are all validated before any run.
    Reports come back in grid order.
    """
    import itertools

    from .config import build, check_override_key

    if not grid:
        return []
    keys = list(grid)
    for k in keys:
        check_override_key(template, k)
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    worlds = [build(template, overrides=p) for p in points]

    def run(w):
        return simulate(w.scenario, w.power.profiles, w.power.modes, w.curve, w.battery, w.uplink,
                        backend=backend)

    if workers <= 1:
        return [run(w) for w in worlds]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, worlds))
