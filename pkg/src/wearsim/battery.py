"""Battery energy store with usable depth-of-discharge and clamped accounting."""

from __future__ import annotations

from dataclasses import dataclass, replace


class BatteryError(ValueError):
    pass


@dataclass(frozen=True)
class BatterySpec:
    capacity_mah: float = 370.0
    nominal_voltage: float = 3.7
    usable_dod: float = 0.90
    self_discharge_w: float = 0.0

    def __post_init__(self):
        if not self.capacity_mah > 0:
            raise BatteryError(f"capacity must be > 0 mAh, got {self.capacity_mah}")
        if not self.nominal_voltage > 0:
            raise BatteryError(f"nominal voltage must be > 0, got {self.nominal_voltage}")
        if not 0 < self.usable_dod <= 1:
            raise BatteryError(f"usable_dod must be in (0, 1], got {self.usable_dod}")
        if self.self_discharge_w < 0:
            raise BatteryError("self-discharge must be >= 0 W")

    @property
    def full_energy(self) -> float:
        return full_energy(self)

    @property
    def usable_energy(self) -> float:
        return self.full_energy * self.usable_dod

    @property
    def floor_energy(self) -> float:
        """Stored energy at which the battery counts as depleted."""
        return self.full_energy * (1.0 - self.usable_dod)


def full_energy(spec: BatterySpec) -> float:
    """Nominal stored energy in joules (mAh * 3.6 C/mAh * V)."""
    return spec.capacity_mah * 3.6 * spec.nominal_voltage


@dataclass(frozen=True)
class BatteryState:
    spec: BatterySpec
    stored_energy: float

    def __post_init__(self):
        if not 0 <= self.stored_energy <= self.spec.full_energy:
            raise BatteryError(f"stored energy {self.stored_energy} J outside [0, {self.spec.full_energy}]")

    @classmethod
    def full(cls, spec: BatterySpec) -> "BatteryState":
        return cls(spec, spec.full_energy)

    @property
    def depleted(self) -> bool:
        return self.stored_energy <= self.spec.floor_energy


def apply_net_power(state: BatteryState, net_power: float, dt: float) -> BatteryState:
    """Integrate ``net_power`` (harvest minus load, W) over ``dt`` seconds.

    Surplus beyond a full battery is discarded; the store never goes negative.
    """
    if not dt > 0:
        raise BatteryError(f"dt must be > 0, got {dt}")
    e = state.stored_energy + net_power * dt
    e = min(max(e, 0.0), state.spec.full_energy)
    return replace(state, stored_energy=e)
