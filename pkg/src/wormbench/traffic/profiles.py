"""Traffic profiles: per-application behavior parameters and selection mixes.

Each profile carries the nine behavior knobs (request/reply sizing, request
count and pacing, response fan-out and latency, inter-flow gaps, WAN share)
plus its transport and well-known port. The numeric defaults are documented
stand-ins sized for desk-scale runs; scenario files can override any of them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..engine import RngStream
from .distributions import Constant, Pareto, ParetoInt, Uniform, UniformInt, parse_distribution


class TrafficConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrafficProfile:
    name: str
    transport: str  # "tcp" | "udp" | "icmp"
    server_port: int | None  # unique per profile; None for icmp
    server_kind: str | None  # which server role answers; None -> any host
    request_length: object
    reply_length: object
    requests_per_flow: object
    time_between_requests: object  # seconds
    replies_per_request: object
    time_to_respond: object  # seconds, applied per reply
    time_between_flows: object  # seconds
    wan_probability: float = 0.3

    def with_overrides(self, overrides: dict) -> "TrafficProfile":
        fields = {}
        for key, value in overrides.items():
            if key in ("request_length", "reply_length", "requests_per_flow",
                       "time_between_requests", "replies_per_request",
                       "time_to_respond", "time_between_flows"):
                fields[key] = parse_distribution(value)
            elif key == "wan_probability":
                if not 0.0 <= value <= 1.0:
                    raise TrafficConfigError(f"wan_probability must be in [0,1], got {value}")
                fields[key] = float(value)
            else:
                raise TrafficConfigError(f"profile {self.name}: unknown override {key!r}")
        return replace(self, **fields)


DEFAULT_PROFILES: dict[str, TrafficProfile] = {}


def _profile(**kw) -> None:
    p = TrafficProfile(**kw)
    DEFAULT_PROFILES[p.name] = p


_profile(
    name="HTTP", transport="tcp", server_port=80, server_kind="HTTP",
    request_length=UniformInt(300, 800),
    reply_length=ParetoInt(1.3, 2000, cap=2_000_000),
    requests_per_flow=UniformInt(1, 10),
    time_between_requests=Uniform(0.1, 1.0),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.01, 0.1),
    time_between_flows=Pareto(1.5, 2.0, cap=600),
    wan_probability=0.3,
)
_profile(
    name="HTTPS", transport="tcp", server_port=443, server_kind="HTTPS",
    request_length=UniformInt(300, 900),
    reply_length=ParetoInt(1.3, 3000, cap=2_000_000),
    requests_per_flow=UniformInt(1, 8),
    time_between_requests=Uniform(0.1, 1.0),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.01, 0.12),
    time_between_flows=Pareto(1.5, 2.5, cap=600),
    wan_probability=0.3,
)
_profile(
    name="SSH", transport="tcp", server_port=22, server_kind="interactive",
    request_length=UniformInt(60, 200),
    reply_length=ParetoInt(1.8, 100, cap=20_000),
    requests_per_flow=UniformInt(10, 60),
    time_between_requests=Pareto(1.5, 0.2, cap=30),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.005, 0.05),
    time_between_flows=Pareto(1.5, 30, cap=1200),
    wan_probability=0.2,
)
_profile(
    name="FTP", transport="tcp", server_port=21, server_kind="FTP",
    request_length=UniformInt(80, 300),
    reply_length=ParetoInt(1.2, 50_000, cap=10_000_000),
    requests_per_flow=UniformInt(1, 3),
    time_between_requests=Uniform(0.5, 2.0),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.05, 0.2),
    time_between_flows=Pareto(1.5, 60, cap=1800),
    wan_probability=0.4,
)
_profile(
    name="nameserver", transport="udp", server_port=53, server_kind="DNS",
    request_length=UniformInt(50, 90),
    reply_length=UniformInt(90, 400),
    requests_per_flow=UniformInt(1, 3),
    time_between_requests=Uniform(0.01, 0.1),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.001, 0.02),
    time_between_flows=Pareto(1.5, 1.0, cap=120),
    wan_probability=0.3,
)
_profile(
    name="mail", transport="tcp", server_port=25, server_kind="mail",
    request_length=ParetoInt(1.4, 1500, cap=5_000_000),
    reply_length=UniformInt(80, 300),
    requests_per_flow=UniformInt(1, 4),
    time_between_requests=Uniform(0.2, 1.0),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.01, 0.1),
    time_between_flows=Pareto(1.5, 30, cap=1800),
    wan_probability=0.5,
)
_profile(
    name="web", transport="tcp", server_port=8080, server_kind="HTTP",
    request_length=UniformInt(200, 600),
    reply_length=ParetoInt(1.4, 1500, cap=1_000_000),
    requests_per_flow=UniformInt(1, 12),
    time_between_requests=Uniform(0.05, 0.8),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.01, 0.08),
    time_between_flows=Pareto(1.5, 2.0, cap=600),
    wan_probability=0.3,
)
_profile(
    name="backup", transport="tcp", server_port=873, server_kind="backup",
    request_length=UniformInt(100, 200),
    reply_length=ParetoInt(1.2, 200_000, cap=20_000_000),
    requests_per_flow=Constant(1),
    time_between_requests=Constant(1.0),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.1, 0.5),
    time_between_flows=Pareto(1.5, 300, cap=3600),
    wan_probability=0.1,
)
_profile(
    name="interactive", transport="tcp", server_port=5190, server_kind="interactive",
    request_length=UniformInt(50, 300),
    reply_length=ParetoInt(1.7, 200, cap=50_000),
    requests_per_flow=UniformInt(5, 40),
    time_between_requests=Pareto(1.5, 0.5, cap=60),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.01, 0.1),
    time_between_flows=Pareto(1.5, 20, cap=900),
    wan_probability=0.25,
)
_profile(
    name="streaming", transport="udp", server_port=554, server_kind="streaming",
    request_length=UniformInt(200, 400),
    reply_length=Constant(1200),
    requests_per_flow=Constant(1),
    time_between_requests=Constant(1.0),
    replies_per_request=ParetoInt(1.4, 100, cap=5000),
    time_to_respond=Uniform(0.02, 0.04),
    time_between_flows=Pareto(1.5, 60, cap=1800),
    wan_probability=0.2,
)
_profile(
    name="misc", transport="udp", server_port=9000, server_kind="misc",
    request_length=UniformInt(100, 500),
    reply_length=UniformInt(100, 1000),
    requests_per_flow=UniformInt(1, 5),
    time_between_requests=Uniform(0.1, 1.0),
    replies_per_request=Constant(1),
    time_to_respond=Uniform(0.01, 0.1),
    time_between_flows=Pareto(1.5, 10, cap=600),
    wan_probability=0.3,
)
_profile(
    name="ping", transport="icmp", server_port=None, server_kind=None,
    request_length=Constant(64),
    reply_length=Constant(64),
    requests_per_flow=UniformInt(1, 5),
    time_between_requests=Constant(1.0),
    replies_per_request=Constant(1),
    time_to_respond=Constant(0.0),
    time_between_flows=Pareto(1.5, 60, cap=1800),
    wan_probability=0.3,
)

# table names for the fixed mixes map onto canonical profile names
MIX_ALIASES = {"DNS": "nameserver", "Email": "mail", "Ping": "ping"}

# the profile a server "speaks" when it originates a flow of its own kind
CANONICAL_BY_KIND = {
    "HTTP": "HTTP",
    "HTTPS": "HTTPS",
    "DNS": "nameserver",
    "FTP": "FTP",
    "mail": "mail",
    "interactive": "interactive",
    "streaming": "streaming",
    "backup": "backup",
    "misc": "misc",
}

# Category I selection shares (percent/100, sums to 1)
MIX_CATEGORY1 = {
    "HTTP": 0.5385,
    "HTTPS": 0.3813,
    "nameserver": 0.0687,
    "SSH": 0.0078,
    "FTP": 0.0020,
    "mail": 0.0014,
    "ping": 0.0003,
}

# Category II selection shares as published (sum 0.997; normalized at draw time)
MIX_CATEGORY2 = {
    "HTTPS": 0.492,
    "HTTP": 0.355,
    "nameserver": 0.089,
    "FTP": 0.033,
    "mail": 0.028,
}


class TrafficMix:
    """Named profile weights; draws normalize so probabilities sum to one."""

    def __init__(self, weights: dict[str, float], profiles: dict[str, TrafficProfile] | None = None):
        profiles = profiles or DEFAULT_PROFILES
        if not weights:
            raise TrafficConfigError("traffic mix is empty")
        canon: dict[str, float] = {}
        for name, w in weights.items():
            name = MIX_ALIASES.get(name, name)
            if name not in profiles:
                raise TrafficConfigError(f"mix references unknown profile {name!r}")
            if not (isinstance(w, (int, float)) and w > 0):
                raise TrafficConfigError(f"mix weight for {name!r} must be positive, got {w!r}")
            if name in canon:
                raise TrafficConfigError(f"profile {name!r} listed twice in mix")
            canon[name] = float(w)
        total = sum(canon.values())
        if not 0.9 <= total <= 1.1:
            raise TrafficConfigError(f"mix weights sum to {total:.4f}; expected about 1")
        self.weights = canon
        self.profiles = {name: profiles[name] for name in canon}
        self.all_profiles = dict(profiles)  # full table incl. non-mix profiles (dual-role lookups)
        self.names = sorted(canon)
        self._cum = []
        acc = 0.0
        for name in self.names:
            acc += canon[name] / total
            self._cum.append(acc)
        self._cum[-1] = 1.0

    @property
    def probabilities(self) -> dict[str, float]:
        total = sum(self.weights.values())
        return {name: w / total for name, w in self.weights.items()}

    def profile(self, name: str) -> TrafficProfile:
        return self.profiles[name]


def select_profile(mix: TrafficMix, rng: RngStream) -> TrafficProfile:
    u = rng.random()
    names = mix.names
    cum = mix._cum
    for i, c in enumerate(cum):
        if u < c:
            return mix.profiles[names[i]]
    return mix.profiles[names[-1]]


def build_mix(weights: dict[str, float], profile_overrides: dict[str, dict] | None = None) -> TrafficMix:
    """Mix plus optional per-profile parameter overrides from a scenario file."""
    profiles = dict(DEFAULT_PROFILES)
    for name, ov in (profile_overrides or {}).items():
        canon = MIX_ALIASES.get(name, name)
        if canon not in profiles:
            raise TrafficConfigError(f"profile override references unknown profile {name!r}")
        profiles[canon] = profiles[canon].with_overrides(ov)
    return TrafficMix(weights, profiles)


def port_map() -> dict[int, str]:
    """server_port -> profile name; asserts network-wide port uniqueness."""
    out: dict[int, str] = {}
    for p in DEFAULT_PROFILES.values():
        if p.server_port is None:
            continue
        if p.server_port in out:
            raise TrafficConfigError(f"port {p.server_port} claimed by {out[p.server_port]} and {p.name}")
        out[p.server_port] = p.name
    return out


def ports_for_kind(kind: str) -> list[int]:
    """All listening ports a server of `kind` answers (e.g. interactive: 22+5190)."""
    return sorted(
        p.server_port for p in DEFAULT_PROFILES.values()
        if p.server_kind == kind and p.server_port is not None
    )
