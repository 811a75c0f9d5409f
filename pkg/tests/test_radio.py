import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearsim.radio import (
    BleAdvertisingSpec,
    RadioError,
    UplinkBucket,
    UplinkModel,
    energy_per_bit,
    uplink_energy,
    uplink_equivalent_runtime,
    volume_budget,
)

HALF = 0.5 * 370 * 3.6 * 3.7


@pytest.mark.parametrize("rssi, joules", [(-90, 1.077), (-100, 1.422), (-115, 4.071),
                                          (-95, 1.077), (-110, 1.422), (-300, 4.071), (20, 1.077)])
def test_bucket_energy(world, rssi, joules):
    assert uplink_energy(world.uplink, rssi) == joules


def test_volume_good_coverage(world):
    n, b = volume_budget(world.uplink, HALF, -90)
    assert n == math.floor(2464.2 / 1.077) == 2288
    assert b == 2288 * 983
    assert abs(b - 2.2e6) / 2.2e6 <= 0.10


def test_volume_poor_coverage(world):
    n, b = volume_budget(world.uplink, HALF, -115)
    assert n == 605
    assert b / 1e6 == pytest.approx(0.595, abs=1e-3)
    assert abs(b - 0.6e6) / 0.6e6 <= 0.10


def test_volume_zero(world):
    assert volume_budget(world.uplink, 0.0, -90) == (0, 0)
    with pytest.raises(RadioError):
        volume_budget(world.uplink, -1.0, -90)


def test_equivalent_runtime(world):
    assert uplink_equivalent_runtime(world.uplink, -90, 10e-3) == pytest.approx(107.7)
    assert uplink_equivalent_runtime(world.uplink, -115, 10e-3) == pytest.approx(407.1)
    a = uplink_equivalent_runtime(world.uplink, -100, 1e-3)
    b = uplink_equivalent_runtime(world.uplink, -100, 2e-3)
    assert a == pytest.approx(2 * b)
    with pytest.raises(RadioError):
        uplink_equivalent_runtime(world.uplink, -90, 0.0)


def test_energy_per_bit(world):
    assert energy_per_bit(world.uplink, -90) == pytest.approx(137e-6, rel=0.01)
    assert energy_per_bit(world.uplink, -115) > energy_per_bit(world.uplink, -90)
    huge = UplinkModel(world.uplink.buckets, payload_bytes=10**12)
    assert energy_per_bit(huge, -90) < 1e-12


def test_bucket_validation():
    inf = math.inf
    with pytest.raises(RadioError):  # gap
        UplinkModel((UplinkBucket(-inf, -100, 2), UplinkBucket(-90, inf, 1)))
    with pytest.raises(RadioError):  # energy rises with better RSSI
        UplinkModel((UplinkBucket(-inf, -100, 1), UplinkBucket(-100, inf, 2)))
    with pytest.raises(RadioError):  # not total
        UplinkModel((UplinkBucket(-120, inf, 1),))


def test_ble_defaults_and_limits():
    b = BleAdvertisingSpec()
    assert (b.interval, b.tx_power, b.payload, b.average_power) == (1.0, 0.0, 31, 99e-6)
    with pytest.raises(RadioError):
        BleAdvertisingSpec(payload=32)
    with pytest.raises(RadioError):
        BleAdvertisingSpec(interval=0)


@settings(max_examples=300, deadline=None)
@given(st.floats(-200, 50))
def test_lookup_total(world, rssi):
    hits = [b for b in world.uplink.buckets if b.contains(rssi)]
    assert len(hits) == 1
    assert uplink_energy(world.uplink, rssi) == hits[0].energy


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e5), st.floats(0, 1e5), st.floats(-200, 50))
def test_volume_monotone_in_energy(world, a, b, rssi):
    lo, hi = sorted((a, b))
    assert volume_budget(world.uplink, lo, rssi)[0] <= volume_budget(world.uplink, hi, rssi)[0]


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e5), st.floats(-200, 50), st.floats(-200, 50))
def test_volume_non_increasing_with_uplink_cost(world, e, r1, r2):
    cheap, dear = sorted((r1, r2), reverse=True)  # better RSSI is cheaper
    assert volume_budget(world.uplink, e, cheap)[0] >= volume_budget(world.uplink, e, dear)[0]
