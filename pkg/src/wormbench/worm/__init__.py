"""Worm propagation: scanning strategies, infection mechanics, ground truth."""

from .config import (
    SCAN_CLASSES,
    LocalPreferenceScan,
    UniformRandomScan,
    VulnerableSelector,
    WormConfig,
    WormConfigError,
    parse_worm_config,
)
from .scanning import choose_target
from .state import (
    INFECTED,
    RECOVERED,
    SUSCEPTIBLE,
    HostInfectionState,
    InfectionRecord,
    matching_pool,
    pick_origins,
    recovery_delay_ms,
    select_vulnerable,
)
from .propagation import TcpWormState, WormRun

__all__ = [
    "SCAN_CLASSES",
    "LocalPreferenceScan",
    "UniformRandomScan",
    "VulnerableSelector",
    "WormConfig",
    "WormConfigError",
    "parse_worm_config",
    "choose_target",
    "INFECTED",
    "RECOVERED",
    "SUSCEPTIBLE",
    "HostInfectionState",
    "InfectionRecord",
    "matching_pool",
    "pick_origins",
    "recovery_delay_ms",
    "select_vulnerable",
    "TcpWormState",
    "WormRun",
]
