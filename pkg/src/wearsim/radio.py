"""NB-IoT uplink energy buckets and BLE advertising parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass


class RadioError(ValueError):
    pass


@dataclass(frozen=True)
class UplinkBucket:
    rssi_min: float  # dBm, inclusive; -inf allowed
    rssi_max: float  # dBm, exclusive; +inf allowed
    energy: float  # joules per uplink

    def contains(self, rssi: float) -> bool:
        return self.rssi_min <= rssi < self.rssi_max


@dataclass(frozen=True)
class UplinkModel:
    buckets: tuple[UplinkBucket, ...]
    payload_bytes: int = 983
    psm_power: float = 13.2e-6  # W, rail-side
    throughput_bps: float = 170e3  # metadata only
    link_budget_db: float = 164.0  # metadata only

    def __post_init__(self):
        bs = tuple(b if isinstance(b, UplinkBucket) else UplinkBucket(*b) for b in self.buckets)
        bs = tuple(sorted(bs, key=lambda b: b.rssi_min))
        object.__setattr__(self, "buckets", bs)
        if not bs:
            raise RadioError("uplink model needs at least one RSSI bucket")
        if bs[0].rssi_min != -math.inf or bs[-1].rssi_max != math.inf:
            raise RadioError("RSSI buckets must extend from -inf to +inf")
        for a, b in zip(bs, bs[1:]):
            if a.rssi_max != b.rssi_min:
                raise RadioError(f"RSSI buckets leave a gap or overlap at {a.rssi_max} / {b.rssi_min} dBm")
            if b.energy > a.energy:
                raise RadioError("uplink energy must not increase as RSSI improves")
        for b in bs:
            if b.rssi_min >= b.rssi_max or b.energy < 0:
                raise RadioError(f"invalid bucket {b}")
        if self.payload_bytes < 0:
            raise RadioError("payload must be >= 0 bytes")


def uplink_energy(model: UplinkModel, rssi: float) -> float:
    if not math.isfinite(rssi):
        raise RadioError(f"RSSI must be finite, got {rssi}")
    for b in model.buckets:
        if b.contains(rssi):
            return b.energy
    raise AssertionError("bucket partition is total")


def volume_budget(model: UplinkModel, available_energy: float, rssi: float) -> tuple[int, int]:
    """How many uplinks (and payload bytes) fit into ``available_energy`` joules."""
    if available_energy < 0:
        raise RadioError(f"available energy must be >= 0, got {available_energy}")
    e = uplink_energy(model, rssi)
    n = int(available_energy // e) if e > 0 else 0
    return n, n * model.payload_bytes


def uplink_equivalent_runtime(model: UplinkModel, rssi: float, mode_power: float) -> float:
    """Seconds a load of ``mode_power`` watts could run on one uplink's energy."""
    if not mode_power > 0:
        raise RadioError(f"mode power must be > 0, got {mode_power}")
    return uplink_energy(model, rssi) / mode_power


def energy_per_bit(model: UplinkModel, rssi: float) -> float:
    if not model.payload_bytes > 0:
        raise RadioError("energy per bit needs a positive payload")
    return uplink_energy(model, rssi) / (model.payload_bytes * 8)


@dataclass(frozen=True)
class BleAdvertisingSpec:
    interval: float = 1.0
    tx_power: float = 0.0
    payload: int = 31
    average_power: float = 99e-6  # W, rail-side

    def __post_init__(self):
        if not self.interval > 0:
            raise RadioError(f"advertising interval must be > 0, got {self.interval}")
        if not 0 <= self.payload <= 31:
            raise RadioError(f"legacy advertising payload is at most 31 B, got {self.payload}")
