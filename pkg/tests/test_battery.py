import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearsim.battery import BatteryError, BatterySpec, BatteryState, apply_net_power, full_energy

SPEC = BatterySpec(370, 3.7, 0.9)


def test_full_energy():
    assert full_energy(SPEC) == pytest.approx(370 * 3.6 * 3.7)
    assert full_energy(SPEC) == pytest.approx(4928.4)
    assert full_energy(BatterySpec(1000, 1.0, 1.0)) == pytest.approx(3600.0)
    assert SPEC.usable_energy == pytest.approx(4435.56)


def test_zero_capacity_rejected():
    with pytest.raises(BatteryError):
        BatterySpec(0, 3.7)
    with pytest.raises(BatteryError):
        BatterySpec(370, 3.7, 0.0)


def test_charge_clamped_at_full():
    s = BatteryState.full(SPEC)
    assert apply_net_power(s, 1e-3, 10).stored_energy == s.stored_energy


def test_discharge_arithmetic():
    s = BatteryState(SPEC, 1000.0)
    assert apply_net_power(s, -10e-3, 100).stored_energy == pytest.approx(999.0)


def test_never_negative():
    s = BatteryState(SPEC, 1.0)
    assert apply_net_power(s, -1.0, 10).stored_energy == 0.0


def test_bad_dt():
    with pytest.raises(BatteryError):
        apply_net_power(BatteryState.full(SPEC), 0.0, 0.0)


def test_constant_load_depletion_time():
    # step with dt = 1 s at -10 mW; usable 4435.56 J -> 443 556 s
    s = BatteryState.full(SPEC)
    dt = 3600.0
    t = 0.0
    while not s.depleted:
        s = apply_net_power(s, -10e-3, dt)
        t += dt
    exact = SPEC.usable_energy / 10e-3
    assert exact == pytest.approx(443_556, abs=1)
    assert exact / 86400 == pytest.approx(5.13, abs=0.01)
    assert exact <= t < exact + dt


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.1, 1000)), max_size=60))
def test_random_walk_stays_in_bounds(walk):
    s = BatteryState.full(SPEC)
    for p, dt in walk:
        s = apply_net_power(s, p, dt)
        assert 0.0 <= s.stored_energy <= SPEC.full_energy
