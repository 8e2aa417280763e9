"""Background traffic: draw distributions, application profiles, transport."""

from .distributions import (
    Constant,
    DistributionError,
    Pareto,
    ParetoInt,
    Uniform,
    UniformInt,
    distribution_to_json,
    draw_heavy_tailed,
    parse_distribution,
)
from .profiles import (
    DEFAULT_PROFILES,
    MIX_ALIASES,
    MIX_CATEGORY1,
    MIX_CATEGORY2,
    TrafficConfigError,
    TrafficMix,
    TrafficProfile,
    build_mix,
    port_map,
    ports_for_kind,
    select_profile,
)
from .tcp import MSS, TcpConnection, TcpError
from .apps import FlowPlan, FlowRecord, HostStack, TrafficSource, TrafficSystem

__all__ = [
    "FlowPlan",
    "FlowRecord",
    "HostStack",
    "TrafficSource",
    "TrafficSystem",
    "Constant",
    "DistributionError",
    "Pareto",
    "ParetoInt",
    "Uniform",
    "UniformInt",
    "distribution_to_json",
    "draw_heavy_tailed",
    "parse_distribution",
    "DEFAULT_PROFILES",
    "MIX_ALIASES",
    "MIX_CATEGORY1",
    "MIX_CATEGORY2",
    "TrafficConfigError",
    "TrafficMix",
    "TrafficProfile",
    "build_mix",
    "port_map",
    "ports_for_kind",
    "select_profile",
    "MSS",
    "TcpConnection",
    "TcpError",
]
