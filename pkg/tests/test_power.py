import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearsim.power import (
    ComponentProfile,
    ModeSpec,
    PowerModelError,
    Rail,
    calibrate_duty,
    component_power,
    mode_average_power,
    mode_breakdown,
    task_energy,
)

VDD = Rail("vdd", 3.3, 0.9)
V5 = Rail("vdd_max30101", 5.0, 0.8)


def test_stm32_stop_rail_and_battery_side(pm):
    mcu = pm.profiles["stm32"]
    assert mcu.rail_power("stop") == pytest.approx(8.1e-6, rel=0.01)
    assert component_power(mcu, "stop") == pytest.approx(2.45e-6 * 3.3 / 0.9, rel=1e-12)
    assert component_power(mcu, "stop") == pytest.approx(9.0e-6, rel=0.01)


def test_max30101_active(pm):
    max_ = pm.profiles["max30101"]
    assert max_.rail_power("active") == pytest.approx(5.5e-3, rel=1e-12)
    assert component_power(max_, "active") == pytest.approx(6.875e-3, rel=1e-12)


def test_zero_current_is_zero_power():
    p = ComponentProfile("x", VDD, {"off": 0.0})
    assert component_power(p, "off") == 0.0


def test_unknown_state_names_component_and_state(pm):
    with pytest.raises(PowerModelError, match=r"'display'.*'sleeping'"):
        component_power(pm.profiles["display"], "sleeping")


def test_table_rail_side_powers(pm):
    # (component, state, rail-side watts as tabulated); table values are rounded
    rows = [
        ("stm32", "active", 25e-3), ("stm32", "idle", 13.7e-3), ("stm32", "stop", 8.1e-6),
        ("stm32", "ble", 99e-6), ("max30101", "active", 5.5e-3), ("max30101", "shutdown", 3.5e-6),
        ("lsm303", "active", 673e-6), ("lsm303", "shutdown", 6.6e-6), ("lps22hb", "active", 40e-6),
        ("lps22hb", "shutdown", 3.3e-6), ("lsm6ds", "active", 30e-6), ("lsm6ds", "shutdown", 10e-6),
        ("mp34dt", "active", 99e-6), ("mp34dt", "shutdown", 3.3e-6), ("bc95g", "psm", 13.2e-6),
        ("display", "update", 50e-6), ("display", "static", 40e-6),
    ]
    for comp, state, watts in rows:
        assert pm.profiles[comp].rail_power(state) == pytest.approx(watts, rel=0.02), (comp, state)


# hand sum of the sleep composition straight from the currents (uA):
# 3.3 V rail: stm32 stop 2.45, display static 12.1, lsm303 2, lps22hb 1, lsm6ds 3, mp34dt 1, bc95g psm 4
# 5 V rail: max30101 shutdown 0.7
SLEEP_ORACLE = (2.45 + 12.1 + 2 + 1 + 3 + 1 + 4) * 1e-6 * 3.3 / 0.9 + 0.7e-6 * 5.0 / 0.8
ADV_ORACLE = SLEEP_ORACLE + 30e-6 * 3.3 / 0.9


def test_sleep_mode_hand_sum(pm):
    p = mode_average_power(pm.modes["sleep"], pm.profiles)
    assert p == pytest.approx(SLEEP_ORACLE, rel=1e-12)
    assert p == pytest.approx(98.06e-6, rel=1e-3)
    assert abs(p - 97e-6) / 97e-6 <= 0.10


def test_advertising_mode(pm):
    p = mode_average_power(pm.modes["advertising"], pm.profiles)
    assert p == pytest.approx(ADV_ORACLE, rel=1e-12)
    assert abs(p - 226e-6) / 226e-6 <= 0.20


def test_calibrated_modes_hit_targets(pm):
    assert mode_average_power(pm.modes["motion"], pm.profiles) == pytest.approx(1.75e-3, rel=1e-3)
    assert mode_average_power(pm.modes["full"], pm.profiles) == pytest.approx(10e-3, rel=1e-3)


def test_calibrate_boundary_returns_zero(pm):
    sleep = pm.modes["sleep"]
    p0 = mode_average_power(sleep.with_duty(0.0), pm.profiles)
    assert calibrate_duty(sleep, pm.profiles, p0) == 0.0


def _bisect_oracle(mode, profiles, target):
    # independent closed form: power is affine in duty
    p0 = mode_average_power(mode.with_duty(0.0), profiles)
    p1 = mode_average_power(mode.with_duty(1.0), profiles)
    return (target - p0) / (p1 - p0)


def test_calibrate_motion_duty_range(pm):
    d = calibrate_duty(pm.modes["motion"], pm.profiles, 1.75e-3)
    assert 0.05 <= d <= 0.07
    assert d == pytest.approx(_bisect_oracle(pm.modes["motion"], pm.profiles, 1.75e-3), rel=1e-3)


def test_calibrate_full_duty_in_open_interval(pm):
    d = calibrate_duty(pm.modes["full"], pm.profiles, 10e-3)
    assert 0 < d < 1
    p = mode_average_power(pm.modes["full"].with_duty(d), pm.profiles)
    assert abs(p - 10e-3) / 10e-3 <= 1e-3


def test_calibrate_out_of_range_reports_bounds(pm):
    with pytest.raises(PowerModelError, match=r"achievable \["):
        calibrate_duty(pm.modes["motion"], pm.profiles, 1.0)


def test_missing_component_named():
    mode = ModeSpec("m", {"ghost": "on"})
    with pytest.raises(PowerModelError, match="ghost"):
        mode_average_power(mode, [])


@pytest.mark.parametrize("dur, rail_j", [(0.0, 0.0), (0.021, 0.525e-3), (0.5, 12.5e-3)])
def test_task_energy(pm, dur, rail_j):
    e = task_energy(dur, pm.profiles)
    # rail-side figures use the tabulated 25 mW; exact current gives 25.047 mW
    assert e * 0.9 == pytest.approx(rail_j, rel=0.01, abs=1e-15)


def test_task_energy_battery_side(pm):
    assert task_energy(0.021, pm.profiles) == pytest.approx(0.021 * 7.59e-3 * 3.3 / 0.9, rel=1e-12)
    with pytest.raises(PowerModelError):
        task_energy(-1.0, pm.profiles)


def test_rail_invariants():
    with pytest.raises(PowerModelError):
        Rail("r", 3.3, 0.0)
    with pytest.raises(PowerModelError):
        Rail("r", 3.3, 1.01)
    with pytest.raises(PowerModelError):
        Rail("r", 0.0, 0.9)
    with pytest.raises(PowerModelError):
        ComponentProfile("c", VDD, {})
    with pytest.raises(PowerModelError):
        ComponentProfile("c", VDD, {"on": -1})


# --- properties ------------------------------------------------------------

currents = st.floats(0, 20_000, allow_nan=False)
effs = st.floats(0.05, 1.0)


@st.composite
def random_model(draw):
    r1 = Rail("a", draw(st.floats(0.5, 12)), draw(effs))
    r2 = Rail("b", draw(st.floats(0.5, 12)), draw(effs))
    profiles = {
        "stm32": ComponentProfile("stm32", r1, {"active": draw(currents), "stop": draw(currents),
                                                "ble": draw(currents)}),
    }
    states = {"stm32": "stop"}
    for i in range(draw(st.integers(0, 5))):
        name = f"c{i}"
        profiles[name] = ComponentProfile(name, draw(st.sampled_from([r1, r2])),
                                          {"on": draw(currents), "off": draw(currents)})
        states[name] = draw(st.sampled_from(["on", "off"]))
    mode = ModeSpec("m", states, 0.0, draw(st.booleans()))
    return profiles, mode


@settings(max_examples=200, deadline=None)
@given(random_model(), st.floats(0, 1), st.floats(0, 1))
def test_power_monotone_in_duty_when_active_exceeds_stop(model, d1, d2):
    profiles, mode = model
    mcu = profiles["stm32"]
    lo, hi = sorted((d1, d2))
    p_lo = mode_average_power(mode.with_duty(lo), profiles)
    p_hi = mode_average_power(mode.with_duty(hi), profiles)
    if mcu.state_currents["active"] >= mcu.state_currents["stop"]:
        assert p_hi >= p_lo - 1e-15
    else:
        assert p_hi <= p_lo + 1e-15


@settings(max_examples=200, deadline=None)
@given(random_model())
def test_composition_is_linear(model):
    profiles, mode = model
    total = mode_average_power(mode, profiles)
    for comp, state in mode.component_states.items():
        if comp == "stm32":
            continue
        rest = ModeSpec("r", {k: v for k, v in mode.component_states.items() if k != comp},
                        mode.mcu_duty_active, mode.ble_advertising)
        assert total - mode_average_power(rest, profiles) == pytest.approx(
            component_power(profiles[comp], state), rel=1e-9, abs=1e-12 * total)


@settings(max_examples=200, deadline=None)
@given(random_model())
def test_battery_side_at_least_rail_side(model):
    profiles, _ = model
    for p in profiles.values():
        for s in p.state_currents:
            assert component_power(p, s) >= p.rail_power(s)


def test_breakdown_sums_to_total(pm):
    for mode in pm.modes.values():
        assert sum(mode_breakdown(mode, pm.profiles).values()) == pytest.approx(
            mode_average_power(mode, pm.profiles), rel=1e-12)


def test_modes_within_twenty_percent_of_targets(pm):
    for mode in pm.modes.values():
        p = mode_average_power(mode, pm.profiles)
        assert abs(p - mode.target_power) / mode.target_power <= 0.20, mode.name
