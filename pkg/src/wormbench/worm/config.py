"""Worm parameterization: transport, scanning strategy, epidemiology, victims."""

from __future__ import annotations

from dataclasses import dataclass

from ..traffic.distributions import distribution_to_json, parse_distribution

SCAN_CLASSES = ("random", "class_a", "class_b", "subnet")


class WormConfigError(ValueError):
    pass


class UniformRandomScan:
    """Every probe targets a uniform draw over the whole scan range."""

    def __repr__(self):
        return "UniformRandomScan()"

    def to_json(self) -> dict:
        return {"strategy": "uniform"}


class LocalPreferenceScan:
    """Probes prefer nearby address space: each draw first picks a locality
    class by weight, then targets uniformly inside that class."""

    def __init__(self, weights: dict[str, float]):
        unknown = set(weights) - set(SCAN_CLASSES)
        if unknown:
            raise WormConfigError(f"unknown locality classes {sorted(unknown)}; "
                                  f"expected {list(SCAN_CLASSES)}")
        cleaned = {c: float(weights[c]) for c in SCAN_CLASSES if weights.get(c, 0) != 0}
        if not cleaned:
            raise WormConfigError("local preference needs at least one positive weight")
        if any(w < 0 for w in cleaned.values()):
            raise WormConfigError("locality weights must be non-negative")
        total = sum(cleaned.values())
        if abs(total - 1.0) > 1e-9:
            raise WormConfigError(f"locality weights must sum to 1, got {total}")
        self.weights = cleaned

    def draw_class(self, rng) -> str:
        u = rng.random()
        acc = 0.0
        last = "random"
        for c, w in self.weights.items():
            acc += w
            last = c
            if u < acc:
                return c
        return last

    def __repr__(self):
        return f"LocalPreferenceScan({self.weights!r})"

    def to_json(self) -> dict:
        return {"strategy": "local_preference", "weights": dict(self.weights)}


@dataclass(frozen=True)
class VulnerableSelector:
    """Which hosts can be infected: server kinds and/or the "client" role,
    thinned to a fixed-size random sample."""

    kinds: tuple[str, ...]
    count: int

    def __post_init__(self):
        if not self.kinds:
            raise WormConfigError("vulnerable selector needs at least one kind")
        if self.count < 1:
            raise WormConfigError(f"vulnerable count must be >= 1, got {self.count}")

    def to_json(self) -> dict:
        return {"kinds": list(self.kinds), "count": self.count}


@dataclass
class WormConfig:
    name: str
    transport: str  # "udp" | "tcp"
    infection_port: int
    payload_length: int  # UDP probe payload bytes / TCP transfer length
    scanning: object  # UniformRandomScan | LocalPreferenceScan
    recovery_probability: float  # per millisecond; 0 disables recovery (SI)
    vulnerable: VulnerableSelector
    probe_interval: object | None = None  # seconds distribution; UDP only
    concurrent_connections: int | None = None  # TCP only
    scan_range: tuple[str, ...] | None = None  # CIDRs; None -> per-subnet host blocks
    origin: int | None = None  # node id; None -> drawn per run

    def validate(self) -> None:
        if self.transport not in ("udp", "tcp"):
            raise WormConfigError(f"transport must be udp or tcp, got {self.transport!r}")
        if not 0 < self.infection_port < 65536:
            raise WormConfigError(f"bad infection port {self.infection_port}")
        if self.payload_length < 1:
            raise WormConfigError(f"payload_length must be positive, got {self.payload_length}")
        if not 0.0 <= self.recovery_probability < 1.0:
            raise WormConfigError(
                f"recovery_probability must be in [0, 1), got {self.recovery_probability}")
        if not isinstance(self.scanning, (UniformRandomScan, LocalPreferenceScan)):
            raise WormConfigError(f"bad scanning strategy {self.scanning!r}")
        if self.transport == "udp":
            if self.probe_interval is None:
                raise WormConfigError("udp worm needs probe_interval")
            if self.concurrent_connections is not None:
                raise WormConfigError("concurrent_connections is a tcp-only field")
        else:
            if self.concurrent_connections is None or self.concurrent_connections < 1:
                raise WormConfigError("tcp worm needs concurrent_connections >= 1")
            if self.probe_interval is not None:
                raise WormConfigError("probe_interval is a udp-only field")

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "transport": self.transport,
            "infection_port": self.infection_port,
            "payload_length": self.payload_length,
            "scanning": self.scanning.to_json(),
            "recovery_probability": self.recovery_probability,
            "vulnerable": self.vulnerable.to_json(),
        }
        if self.probe_interval is not None:
            out["probe_interval"] = distribution_to_json(self.probe_interval)
        if self.concurrent_connections is not None:
            out["concurrent_connections"] = self.concurrent_connections
        if self.scan_range is not None:
            out["scan_range"] = list(self.scan_range)
        if self.origin is not None:
            out["origin"] = self.origin
        return out


_REQUIRED = ("name", "transport", "infection_port", "payload_length",
             "scanning", "recovery_probability", "vulnerable")
_OPTIONAL = ("probe_interval", "concurrent_connections", "scan_range", "origin")


def parse_worm_config(obj: dict) -> WormConfig:
    """Strict scenario-file form; unknown keys are errors, not typos to ignore."""
    if not isinstance(obj, dict):
        raise WormConfigError(f"worm config must be an object, got {type(obj).__name__}")
    unknown = set(obj) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise WormConfigError(f"unknown worm config keys {sorted(unknown)}")
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise WormConfigError(f"worm config missing {missing}")

    scan = obj["scanning"]
    if not isinstance(scan, dict) or "strategy" not in scan:
        raise WormConfigError("scanning must be an object with a 'strategy' key")
    if scan["strategy"] == "uniform":
        extra = set(scan) - {"strategy"}
        if extra:
            raise WormConfigError(f"uniform scanning takes no extra keys, got {sorted(extra)}")
        scanning = UniformRandomScan()
    elif scan["strategy"] == "local_preference":
        extra = set(scan) - {"strategy", "weights"}
        if extra or "weights" not in scan:
            raise WormConfigError("local_preference scanning needs exactly a 'weights' object")
        scanning = LocalPreferenceScan(scan["weights"])
    else:
        raise WormConfigError(f"unknown scanning strategy {scan['strategy']!r}")

    vul = obj["vulnerable"]
    if not isinstance(vul, dict) or set(vul) != {"kinds", "count"}:
        raise WormConfigError("vulnerable must be {'kinds': [...], 'count': n}")
    selector = VulnerableSelector(tuple(vul["kinds"]), int(vul["count"]))

    cfg = WormConfig(
        name=str(obj["name"]),
        transport=obj["transport"],
        infection_port=int(obj["infection_port"]),
        payload_length=int(obj["payload_length"]),
        scanning=scanning,
        recovery_probability=float(obj["recovery_probability"]),
        vulnerable=selector,
        probe_interval=parse_distribution(obj["probe_interval"]) if "probe_interval" in obj else None,
        concurrent_connections=int(obj["concurrent_connections"]) if "concurrent_connections" in obj else None,
        scan_range=tuple(obj["scan_range"]) if "scan_range" in obj else None,
        origin=int(obj["origin"]) if "origin" in obj else None,
    )
    cfg.validate()
    return cfg
