"""Energy budget, lifetime and BLE contact-tracing simulator for a multi-sensor wearable."""

from .battery import BatterySpec, BatteryState, apply_net_power, full_energy
from .config import ConfigError, World, build, load_scenario
from .engine import (
    Scenario,
    SimReport,
    closed_form_lifetime,
    event_driven_lifetime,
    simulate,
    sweep,
)
from .harvest import HarvesterCurve, LightSchedule, harvest_power, schedule_power_at
from .kernels import BACKEND
from .power import (
    ComponentProfile,
    ModeSpec,
    Rail,
    calibrate_duty,
    component_power,
    mode_average_power,
    task_energy,
)
from .radio import (
    BleAdvertisingSpec,
    UplinkModel,
    energy_per_bit,
    uplink_energy,
    uplink_equivalent_runtime,
    volume_budget,
)
from .tracing import DeviceAgent, EncounterRecord, PathLossModel, detect_encounters, rssi_at, tracing_energy

__version__ = "0.1.0"
