"""Reference-figure checks for the bundled model, shared by the CLI."""

from __future__ import annotations

from dataclasses import dataclass

from .config import World, build, load_scenario
from .engine import simulate
from .harvest import DAY, harvest_power
from .power import mode_average_power, task_energy
from .radio import uplink_equivalent_runtime, volume_budget
from .tracing import DeviceAgent, tracing_energy


@dataclass(frozen=True)
class ClaimRow:
    key: str
    description: str
    reference: str
    computed: str
    criterion: str
    passed: bool
    note: str = ""


def _run(world: World):
    return simulate(world.scenario, world.power.profiles, world.power.modes, world.curve,
                    world.battery, world.uplink)


def _within(x, ref, rel):
    return abs(x - ref) <= rel * abs(ref)


def claim_rows(overrides=None) -> list[ClaimRow]:
    base = build({}, overrides)
    pm = base.power
    P = lambda m: mode_average_power(pm.modes[m], pm.profiles)  # noqa: E731
    rows: list[ClaimRow] = []

    def add(key, desc, ref, val, crit, ok, note=""):
        rows.append(ClaimRow(key, desc, ref, val, crit, bool(ok), note))

    sleep, adv, motion, full = P("sleep"), P("advertising"), P("motion"), P("full")
    add("sleep_power", "sleep mode average power", "97 uW", f"{sleep * 1e6:.2f} uW",
        "within 10 %", _within(sleep, 97e-6, 0.10))
    add("advertising_power", "advertising mode average power", "226 uW", f"{adv * 1e6:.2f} uW",
        "within 20 %", _within(adv, 226e-6, 0.20), f"gap {(adv - 226e-6) * 1e6:+.1f} uW")
    add("motion_power", "motion mode (calibrated duty)", "1.75 mW", f"{motion * 1e3:.4f} mW",
        "within 0.1 %", _within(motion, 1.75e-3, 1e-3), f"mcu duty {pm.modes['motion'].mcu_duty_active:.4f}")
    add("full_power", "full mode (calibrated duty)", "10 mW", f"{full * 1e3:.4f} mW",
        "within 0.1 %", _within(full, 10e-3, 1e-3), f"mcu duty {pm.modes['full'].mcu_duty_active:.4f}")
    blend = 0.5 * (motion + full)
    add("duty50_power", "50/50 full/motion blend", "5.9 mW", f"{blend * 1e3:.3f} mW",
        "within 2 %", _within(blend, 5.9e-3, 0.02))

    h500 = harvest_power(base.curve, 500)
    h10k = harvest_power(base.curve, 10_000)
    add("harvest_500lux", "harvest at 500 lux", "73 uW", f"{h500 * 1e6:.1f} uW", "within 1 %",
        _within(h500, 73e-6, 0.01))
    add("harvest_10klux", "harvest at 10 klux", ">= 15 mW", f"{h10k * 1e3:.2f} mW", ">= 15 mW (1 % slack)",
        h10k >= 15e-3 * 0.99)

    life = {}
    for name in ("paper-full", "paper-9day", "paper-advertising", "paper-outdoor-harvest",
                 "paper-indoor-harvest"):
        life[name] = _run(load_scenario(name, overrides)).lifetime_days
    add("full_lifetime", "lifetime, full mode, 1 uplink/day", "5 days", f"{life['paper-full']:.2f} days",
        "in [4.6, 5.7] days", 4.6 <= life["paper-full"] <= 5.7)
    add("duty50_lifetime", "lifetime, 50 % full/motion, 1 uplink/day", "9 days",
        f"{life['paper-9day']:.2f} days", "in [8.0, 9.7] days", 8.0 <= life["paper-9day"] <= 9.7)
    add("advertising_lifetime", "lifetime, advertising mode", "> 1 month",
        f"{life['paper-advertising']:.1f} days", "> 31 days", life["paper-advertising"] > 31)
    add("outdoor_lifetime", "lifetime, 50 % duty with outdoor light", "up to 20 days",
        f"{life['paper-outdoor-harvest']:.2f} days", "in [20, 30] days",
        20 <= life["paper-outdoor-harvest"] <= 30)
    add("indoor_lifetime", "lifetime, advertising with 8 h at 500 lux", "up to 2 months",
        f"{life['paper-indoor-harvest']:.1f} days", ">= 60 days", life["paper-indoor-harvest"] >= 60)

    half = 0.5 * base.battery.full_energy
    n_good, b_good = volume_budget(base.uplink, half, -90)
    n_bad, b_bad = volume_budget(base.uplink, half, -115)
    add("volume_good", "uplink volume on half a battery, RSSI -90 dBm", "2.2 MB",
        f"{b_good / 1e6:.3f} MB ({n_good} uplinks)", "within 10 %", _within(b_good, 2.2e6, 0.10))
    add("volume_poor", "uplink volume on half a battery, RSSI -115 dBm", "0.6 MB",
        f"{b_bad / 1e6:.3f} MB ({n_bad} uplinks)", "within 10 %", _within(b_bad, 0.6e6, 0.10))

    eq_bad = uplink_equivalent_runtime(base.uplink, -115, 10e-3) / 60
    eq_good = uplink_equivalent_runtime(base.uplink, -90, 10e-3) / 60
    add("uplink_equiv_poor", "full-mode runtime equal to one uplink, -115 dBm", "6 min",
        f"{eq_bad:.2f} min", "in [5.4, 7.5] min", 5.4 <= eq_bad <= 7.5)
    add("uplink_equiv_good", "full-mode runtime equal to one uplink, -90 dBm", "1 min",
        f"{eq_good:.2f} min", "reported only", True, "reference figure is a coarse rounding")

    agent = DeviceAgent("a", ((0.0, 0.0, 0.0), (30 * DAY, 0.0, 0.0)))
    e30 = tracing_energy(agent, 30 * DAY, pm.profiles, pm.modes)
    add("tracing_30d", "30 days of advertising energy", "< usable battery",
        f"{e30:.1f} J of {base.battery.usable_energy:.1f} J", "below usable energy",
        e30 < base.battery.usable_energy)

    for ms in (0.021, 0.5):
        e = task_energy(ms, pm.profiles)
        add(f"inference_{int(ms * 1000)}ms", f"one {ms * 1000:g} ms inference on the MCU", "n/a",
            f"{e * 1e3:.3f} mJ", "reported only", True)
    return rows


def format_table(rows: list[ClaimRow]) -> str:
    head = ("claim", "reference", "computed", "criterion", "result")
    body = [(r.description, r.reference, r.computed, r.criterion, ("PASS" if r.passed else "FAIL")
             + (f"  ({r.note})" if r.note else "")) for r in rows]
    widths = [max(len(x[i]) for x in [head, *body]) for i in range(4)]
    lines = []
    for row in [head, *body]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row[:4], widths)) + "  " + row[4])
        if row is head:
            lines.append("-" * (sum(widths) + 8 + 6))
    return "\n".join(lines)
