"""Component power profiles and operation-mode composition.

Currents are stored in microamperes per power state; every public function
returns battery-side watts (rail power divided by the converter efficiency).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

MCU = "stm32"
BLE_STATE = "ble"


class PowerModelError(ValueError):
    pass


@dataclass(frozen=True)
class Rail:
    name: str
    voltage: float
    converter_efficiency: float

    def __post_init__(self):
        if not self.voltage > 0:
            raise PowerModelError(f"rail {self.name!r}: voltage must be > 0, got {self.voltage}")
        if not 0 < self.converter_efficiency <= 1:
            raise PowerModelError(
                f"rail {self.name!r}: efficiency must be in (0, 1], got {self.converter_efficiency}"
            )


@dataclass(frozen=True)
class ComponentProfile:
    name: str
    rail: Rail
    state_currents: Mapping[str, float]  # microamperes

    def __post_init__(self):
        if not self.state_currents:
            raise PowerModelError(f"component {self.name!r} has no power states")
        for state, ua in self.state_currents.items():
            if ua < 0:
                raise PowerModelError(f"component {self.name!r} state {state!r}: negative current {ua}")
        object.__setattr__(self, "state_currents", dict(self.state_currents))

    def rail_power(self, state: str) -> float:
        try:
            ua = self.state_currents[state]
        except KeyError:
            raise PowerModelError(
                f"component {self.name!r} has no state {state!r} "
                f"(known: {', '.join(sorted(self.state_currents))})"
            ) from None
        return ua * 1e-6 * self.rail.voltage


@dataclass(frozen=True)
class ModeSpec:
    name: str
    component_states: Mapping[str, str]
    mcu_duty_active: float = 0.0
    ble_advertising: bool = False
    target_power: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.mcu_duty_active <= 1.0:
            raise PowerModelError(f"mode {self.name!r}: mcu_duty must be in [0, 1], got {self.mcu_duty_active}")
        object.__setattr__(self, "component_states", dict(self.component_states))

    def with_duty(self, duty: float) -> "ModeSpec":
        return ModeSpec(self.name, self.component_states, duty, self.ble_advertising, self.target_power)


def component_power(profile: ComponentProfile, state: str) -> float:
    """Battery-side power of one component in one state, in watts."""
    return profile.rail_power(state) / profile.rail.converter_efficiency


def _profile_map(profiles) -> dict[str, ComponentProfile]:
    if isinstance(profiles, Mapping):
        return dict(profiles)
    return {p.name: p for p in profiles}


def mode_breakdown(mode: ModeSpec, profiles) -> dict[str, float]:
    """Per-component battery-side watts for a mode.

    The MCU entry blends its ``active`` and ``stop`` states by the mode duty;
    BLE advertising appears as its own ``ble`` entry when enabled.
    """
    pmap = _profile_map(profiles)
    out: dict[str, float] = {}
    for comp, state in mode.component_states.items():
        if comp not in pmap:
            raise PowerModelError(f"mode {mode.name!r} references unknown component {comp!r}")
        if comp == MCU and state in ("active", "stop"):
            continue
        out[comp] = component_power(pmap[comp], state)
    if MCU in mode.component_states and mode.component_states[MCU] in ("active", "stop"):
        mcu = pmap[MCU]
        d = mode.mcu_duty_active
        out[MCU] = d * component_power(mcu, "active") + (1.0 - d) * component_power(mcu, "stop")
    if mode.ble_advertising:
        if MCU not in pmap:
            raise PowerModelError(f"mode {mode.name!r} enables BLE but no {MCU!r} profile exists")
        out[BLE_STATE] = component_power(pmap[MCU], BLE_STATE)
    return out


def mode_average_power(mode: ModeSpec, profiles) -> float:
    return sum(mode_breakdown(mode, profiles).values())


def calibrate_duty(mode: ModeSpec, profiles, target: float, rtol: float = 1e-4) -> float:
    """Find the MCU active duty that makes the mode draw ``target`` watts.

    Bisection on a monotone function; ``rtol`` is the relative tolerance on
    power, kept well below the 0.1 % calibration requirement.
    """
    lo_p = mode_average_power(mode.with_duty(0.0), profiles)
    hi_p = mode_average_power(mode.with_duty(1.0), profiles)
    if not lo_p <= target <= hi_p:
        raise PowerModelError(
            f"target {target:.6g} W unreachable for mode {mode.name!r}; achievable [{lo_p:.6g}, {hi_p:.6g}] W"
        )
    if target == lo_p:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        p = mode_average_power(mode.with_duty(mid), profiles)
        if abs(p - target) <= rtol * target:
            return mid
        if p < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def task_energy(duration: float, profiles) -> float:
    """Energy of running the MCU flat out for ``duration`` seconds (joules)."""
    if duration < 0:
        raise PowerModelError(f"task duration must be >= 0, got {duration}")
    return duration * component_power(_profile_map(profiles)[MCU], "active")


@dataclass(frozen=True)
class PowerModel:
    """Rails, component profiles and modes bundled together."""

    rails: Mapping[str, Rail]
    profiles: Mapping[str, ComponentProfile]
    modes: Mapping[str, ModeSpec] = field(default_factory=dict)

    def __post_init__(self):
        for mode in self.modes.values():
            for comp in mode.component_states:
                if comp not in self.profiles:
                    raise PowerModelError(f"mode {mode.name!r} references unknown component {comp!r}")

    def mode_power(self, name: str) -> float:
        try:
            mode = self.modes[name]
        except KeyError:
            raise PowerModelError(f"unknown mode {name!r}") from None
        return mode_average_power(mode, self.profiles)
