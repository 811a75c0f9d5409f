"""Scenario config files: parsing, defaults, overrides, and object building.

Configs are YAML (JSON also parses).  User files are merged onto the bundled
defaults; list sections whose items carry a ``name`` (rails, components,
modes) merge item-by-item, every other value is replaced wholesale.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .battery import BatterySpec
from .engine import ModeSegment, Scenario
from .harvest import DAY, HarvesterCurve, LightSchedule, LightSegment
from .power import ComponentProfile, ModeSpec, PowerModel, Rail, calibrate_duty
from .radio import BleAdvertisingSpec, UplinkBucket, UplinkModel
from .tracing import PathLossModel


class ConfigError(ValueError):
    pass


class _Named(dict):
    """Schema marker: a list of mappings keyed by their ``name`` field."""


ANY = "*"  # schema marker: arbitrary keys with leaf values

SCHEMA: dict[str, Any] = {
    "name": None,
    "description": None,
    "battery": {"capacity_mah": None, "voltage_v": None, "usable_dod": None, "self_discharge_w": None},
    "rails": _Named(voltage_v=None, efficiency=None),
    "components": _Named(rail=None, currents_ua=ANY),
    "modes": _Named(states=ANY, mcu_duty=None, ble=None, target_power_w=None),
    "harvester": {"points": None, "conversion_efficiency": None},
    "light_schedule": None,
    "nbiot": {"buckets": None, "payload_bytes": None, "psm_uw": None},
    "ble": {"interval_s": None, "tx_power_dbm": None, "payload_bytes": None, "average_power_uw": None},
    "tracing": {
        "rssi_at_1m_dbm": None, "exponent": None, "noise_sigma_db": None, "rng_seed": None,
        "rx_sensitivity_dbm": None, "min_duration_s": None, "max_gap_s": None, "horizon_s": None,
        "agents_csv": None,
    },
    "mode_schedule": None,
    "duty_cycle": {"high": None, "low": None, "fraction": None, "period_s": None},
    "uplinks_per_day": None,
    "uplink_times_s": None,
    "rssi_dbm": None,
    "tasks_per_day": None,
    "task_duration_s": None,
    "max_horizon_s": None,
    "dt_s": None,
    "sample_interval_s": None,
    "sweep": {"grid": None, "workers": None},
}

DUTY_CYCLE_DEFAULTS = {"high": "full", "low": "motion", "fraction": 0.5, "period_s": 60}


# ---------------------------------------------------------------------------
# raw dict handling
# ---------------------------------------------------------------------------

def _data_file(*parts: str):
    return resources.files("wearsim").joinpath("data", *parts)


def default_config() -> dict:
    return yaml.safe_load(_data_file("defaults.yaml").read_text())


def bundled_scenarios() -> dict[str, Path]:
    root = _data_file("scenarios")
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml")}


def resolve_scenario(ref: str | Path) -> Path:
    """A file path, or the name of a bundled scenario."""
    p = Path(ref)
    if p.exists():
        return p
    bundled = bundled_scenarios()
    if str(ref) in bundled:
        return bundled[str(ref)]
    raise ConfigError(f"scenario file not found: {ref}")


def parse_text(text: str, source: str = "<string>") -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        lines = text.splitlines()
        ctx = lines[mark.line] if mark and mark.line < len(lines) else ""
        raise ConfigError(f"{source}: parse error at {where}: {exc.problem}\n    {ctx}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    return data


def read_config(path: str | Path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {p}") from None
    return parse_text(text, str(p))


def check_keys(cfg: Mapping, schema=SCHEMA, path: str = "") -> None:
    """Reject keys the schema does not know, naming the full key path."""
    if not isinstance(cfg, Mapping):
        raise ConfigError(f"{path or '<root>'}: expected a mapping")
    for key, val in cfg.items():
        kp = f"{path}.{key}" if path else str(key)
        if key not in schema:
            raise ConfigError(f"unknown config key: {kp}")
        sub = schema[key]
        if isinstance(sub, _Named):
            if not isinstance(val, list):
                raise ConfigError(f"{kp}: expected a list")
            for i, item in enumerate(val):
                if not isinstance(item, Mapping) or "name" not in item:
                    raise ConfigError(f"{kp}[{i}]: each entry needs a name")
                rest = {k: v for k, v in item.items() if k != "name"}
                check_keys(rest, sub, f"{kp}.{item['name']}")
        elif isinstance(sub, dict):
            check_keys(val, sub, kp)
        elif sub == ANY and not isinstance(val, Mapping):
            raise ConfigError(f"{kp}: expected a mapping")


def merge(base: Mapping, user: Mapping) -> dict:
    out = copy.deepcopy(dict(base))
    for key, val in user.items():
        sub = SCHEMA.get(key)
        if isinstance(sub, _Named) and isinstance(out.get(key), list):
            items = {it["name"]: it for it in out[key]}
            for it in val:
                if it["name"] in items:
                    merged = copy.deepcopy(items[it["name"]])
                    merged.update(copy.deepcopy(it))
                    items[it["name"]] = merged
                else:
                    items[it["name"]] = copy.deepcopy(it)
            out[key] = list(items.values())
        elif isinstance(sub, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **copy.deepcopy(val)}
        else:
            out[key] = copy.deepcopy(val)
    return out


def _walk(cfg: dict, key: str, create: bool):
    """Return (container, leaf_key) for a dotted override path."""
    parts = key.split(".")
    node: Any = cfg
    schema: Any = SCHEMA
    i = 0
    while i < len(parts):
        part = parts[i]
        last = i == len(parts) - 1
        if schema == ANY:
            if last:
                return node, part
            break
        if not isinstance(schema, dict) or part not in schema:
            break
        sub = schema[part]
        if isinstance(sub, _Named):
            # named lists are addressed as <section>.<item name>.<field>
            if i + 2 >= len(parts):
                break
            match = [it for it in node.get(part, []) if it.get("name") == parts[i + 1]]
            if not match:
                break
            node, schema, i = match[0], sub, i + 2
            continue
        if last:
            if sub is None:
                return node, part
            break
        if part not in node and create:
            node[part] = copy.deepcopy(DUTY_CYCLE_DEFAULTS) if part == "duty_cycle" else {}
        node = node.get(part, {})
        schema = sub
        i += 1
    raise ConfigError(f"unknown override key: {key}")


def check_override_key(cfg: Mapping, key: str) -> None:
    _walk(merge(default_config(), cfg), key, create=False)


def apply_overrides(cfg: dict, overrides: Mapping[str, Any]) -> dict:
    out = copy.deepcopy(cfg)
    for key, val in overrides.items():
        node, leaf = _walk(out, key, create=True)
        node[leaf] = val
    return out


def parse_override(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise ConfigError(f"override must look like key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        val = yaml.safe_load(raw) if raw.strip() else ""
    except yaml.YAMLError:
        val = raw
    return key.strip(), val


# ---------------------------------------------------------------------------
# object graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TracingSettings:
    model: PathLossModel
    rx_sensitivity: float
    min_duration: float
    max_gap: float
    horizon: float
    agents_csv: str | None = None


@dataclass(frozen=True)
class World:
    """Everything one run needs, fully validated."""

    power: PowerModel
    curve: HarvesterCurve
    battery: BatterySpec
    uplink: UplinkModel
    ble: BleAdvertisingSpec
    scenario: Scenario
    tracing: TracingSettings
    name: str = ""
    config: dict = field(default_factory=dict, compare=False, repr=False)


def _get(cfg: Mapping, path: str):
    node: Any = cfg
    for part in path.split("."):
        if not isinstance(node, Mapping) or part not in node:
            raise ConfigError(f"missing config key: {path}")
        node = node[part]
    return node


def _num(cfg, path) -> float:
    v = _get(cfg, path)
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {v!r}") from None


def _mode_schedule(cfg) -> tuple[ModeSegment, ...]:
    has_sched = "mode_schedule" in cfg
    has_duty = "duty_cycle" in cfg
    if has_sched and has_duty:
        raise ConfigError("mode_schedule and duty_cycle are mutually exclusive")
    if has_duty:
        dc = {**DUTY_CYCLE_DEFAULTS, **cfg["duty_cycle"]}
        frac = float(dc["fraction"])
        period = float(dc["period_s"])
        if not 0 <= frac <= 1:
            raise ConfigError(f"duty_cycle.fraction must be in [0, 1], got {frac}")
        if period <= 0 or abs(DAY / period - round(DAY / period)) > 1e-9:
            raise ConfigError(f"duty_cycle.period_s must divide one day, got {period}")
        dt = float(cfg.get("dt_s", 1.0))
        high = round(frac * period / dt) * dt
        segs = []
        for k in range(int(round(DAY / period))):
            t0 = k * period
            if high > 0:
                segs.append(ModeSegment(t0, high, str(dc["high"])))
            if period - high > 0:
                segs.append(ModeSegment(t0 + high, period - high, str(dc["low"])))
        return tuple(segs)
    if has_sched:
        out = []
        for i, s in enumerate(cfg["mode_schedule"]):
            try:
                out.append(ModeSegment(float(s["start_s"]), float(s["duration_s"]), str(s["mode"])))
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"mode_schedule[{i}]: needs start_s, duration_s, mode") from None
        return tuple(out)
    return (ModeSegment(0.0, float(DAY), "sleep"),)


def build(user_cfg: Mapping | None = None, overrides: Mapping[str, Any] | None = None,
          base_dir: Path | None = None) -> World:
    """Merge ``user_cfg`` onto the defaults, apply overrides, and validate."""
    user_cfg = dict(user_cfg or {})
    check_keys(user_cfg)
    cfg = merge(default_config(), user_cfg)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    check_keys(cfg)
    try:
        return _build(cfg, base_dir)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def _build(cfg: dict, base_dir: Path | None) -> World:
    rails = {}
    for r in cfg["rails"]:
        rails[r["name"]] = Rail(r["name"], float(r["voltage_v"]), float(r["efficiency"]))
    nb = cfg.get("nbiot", {})
    profiles = {}
    for c in cfg["components"]:
        if c.get("rail") not in rails:
            raise ConfigError(f"components.{c['name']}.rail: unknown rail {c.get('rail')!r}")
        currents = {k: float(v) for k, v in c["currents_ua"].items()}
        rail = rails[c["rail"]]
        if "psm_uw" in nb and "psm" in currents:
            currents["psm"] = float(nb["psm_uw"]) / rail.voltage
        profiles[c["name"]] = ComponentProfile(c["name"], rail, currents)

    modes = {}
    for m in cfg["modes"]:
        name = m["name"]
        states = dict(m["states"])
        for comp in states:
            if comp not in profiles:
                raise ConfigError(f"modes.{name}.states.{comp}: unknown component")
            if states[comp] not in profiles[comp].state_currents:
                raise ConfigError(f"modes.{name}.states.{comp}: unknown state {states[comp]!r}")
        target = m.get("target_power_w")
        target = None if target is None else float(target)
        spec = ModeSpec(name, states, 0.0, bool(m.get("ble", False)), target)
        duty = m.get("mcu_duty", 0.0)
        if duty == "auto":
            if target is None:
                raise ConfigError(f"modes.{name}.mcu_duty: 'auto' needs target_power_w")
            duty = calibrate_duty(spec, profiles, target)
        modes[name] = spec.with_duty(float(duty))
    power = PowerModel(rails, profiles, modes)

    hv = cfg["harvester"]
    curve = HarvesterCurve(tuple((float(p["lux"]), float(p["watts"])) for p in hv["points"]),
                           float(hv.get("conversion_efficiency", 0.92)))
    light = LightSchedule(tuple(
        LightSegment(float(s["start_s"]), float(s["duration_s"]), float(s["lux"]))
        for s in cfg.get("light_schedule", []) or []
    ))

    b = cfg["battery"]
    battery = BatterySpec(float(b["capacity_mah"]), float(b["voltage_v"]), float(b["usable_dod"]),
                          float(b.get("self_discharge_w", 0.0)))

    psm_w = next((p.rail_power("psm") for p in profiles.values() if "psm" in p.state_currents), 0.0)
    uplink = UplinkModel(
        tuple(UplinkBucket(float(x["rssi_min_dbm"]), float(x["rssi_max_dbm"]), float(x["energy_j"]))
              for x in nb["buckets"]),
        int(nb.get("payload_bytes", 983)),
        psm_w,
    )
    bl = cfg["ble"]
    ble = BleAdvertisingSpec(float(bl["interval_s"]), float(bl["tx_power_dbm"]), int(bl["payload_bytes"]),
                             float(bl["average_power_uw"]) * 1e-6)

    times = cfg.get("uplink_times_s")
    scenario = Scenario(
        mode_schedule=_mode_schedule(cfg),
        light_schedule=light,
        uplinks_per_day=int(cfg.get("uplinks_per_day", 0)),
        uplink_times=None if times is None else tuple(float(t) for t in times),
        rssi=_num(cfg, "rssi_dbm"),
        tasks_per_day=int(cfg.get("tasks_per_day", 0)),
        task_duration=_num(cfg, "task_duration_s"),
        max_horizon=_num(cfg, "max_horizon_s"),
        dt=_num(cfg, "dt_s"),
        sample_interval=_num(cfg, "sample_interval_s"),
    )
    for seg in scenario.mode_schedule:
        if seg.mode not in modes:
            raise ConfigError(f"mode_schedule: undefined mode {seg.mode!r}")

    tr = cfg["tracing"]
    agents = tr.get("agents_csv")
    if agents is not None and base_dir is not None and not Path(agents).is_absolute():
        agents = str(base_dir / agents)
    tracing = TracingSettings(
        PathLossModel(float(tr["rssi_at_1m_dbm"]), float(tr["exponent"]), float(tr["noise_sigma_db"]),
                      int(tr["rng_seed"])),
        float(tr["rx_sensitivity_dbm"]), float(tr["min_duration_s"]), float(tr["max_gap_s"]),
        float(tr["horizon_s"]), agents,
    )
    return World(power, curve, battery, uplink, ble, scenario, tracing, str(cfg.get("name", "")), cfg)


def load_scenario(path: str | Path, overrides: Mapping[str, Any] | None = None) -> World:
    """Read a scenario file (or bundled scenario name) into a validated World."""
    p = resolve_scenario(path)
    return build(read_config(p), overrides, base_dir=p.parent)


def serialize(world: World) -> dict:
    """Canonical config mapping that rebuilds an equal World."""
    pm = world.power
    sc = world.scenario
    out = {
        "name": world.name,
        "battery": {
            "capacity_mah": world.battery.capacity_mah,
            "voltage_v": world.battery.nominal_voltage,
            "usable_dod": world.battery.usable_dod,
            "self_discharge_w": world.battery.self_discharge_w,
        },
        "rails": [{"name": r.name, "voltage_v": r.voltage, "efficiency": r.converter_efficiency}
                  for r in pm.rails.values()],
        "components": [{"name": c.name, "rail": c.rail.name, "currents_ua": dict(c.state_currents)}
                       for c in pm.profiles.values()],
        "modes": [{"name": m.name, "states": dict(m.component_states), "mcu_duty": m.mcu_duty_active,
                   "ble": m.ble_advertising, "target_power_w": m.target_power} for m in pm.modes.values()],
        "harvester": {"conversion_efficiency": world.curve.conversion_efficiency,
                      "points": [{"lux": lx, "watts": w} for lx, w in world.curve.points]},
        "light_schedule": [{"start_s": s.start, "duration_s": s.duration, "lux": s.lux}
                           for s in sc.light_schedule.segments],
        "nbiot": {"payload_bytes": world.uplink.payload_bytes,
                  "buckets": [{"rssi_min_dbm": b.rssi_min, "rssi_max_dbm": b.rssi_max, "energy_j": b.energy}
                              for b in world.uplink.buckets]},
        "ble": {"interval_s": world.ble.interval, "tx_power_dbm": world.ble.tx_power,
                "payload_bytes": world.ble.payload, "average_power_uw": world.ble.average_power * 1e6},
        "tracing": {
            "rssi_at_1m_dbm": world.tracing.model.rssi_at_1m, "exponent": world.tracing.model.exponent,
            "noise_sigma_db": world.tracing.model.noise_sigma, "rng_seed": world.tracing.model.rng_seed,
            "rx_sensitivity_dbm": world.tracing.rx_sensitivity, "min_duration_s": world.tracing.min_duration,
            "max_gap_s": world.tracing.max_gap, "horizon_s": world.tracing.horizon,
            "agents_csv": world.tracing.agents_csv,
        },
        "mode_schedule": [{"start_s": s.start, "duration_s": s.duration, "mode": s.mode}
                          for s in sc.mode_schedule],
        "uplinks_per_day": sc.uplinks_per_day,
        "uplink_times_s": None if sc.uplink_times is None else list(sc.uplink_times),
        "rssi_dbm": sc.rssi,
        "tasks_per_day": sc.tasks_per_day,
        "task_duration_s": sc.task_duration,
        "max_horizon_s": sc.max_horizon,
        "dt_s": sc.dt,
        "sample_interval_s": sc.sample_interval,
    }
    if out["uplink_times_s"] is None:
        del out["uplink_times_s"]
    if out["tracing"]["agents_csv"] is None:
        del out["tracing"]["agents_csv"]
    return out


def dump(world: World) -> str:
    return yaml.safe_dump(serialize(world), sort_keys=False)
