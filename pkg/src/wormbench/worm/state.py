"""Infection bookkeeping: per-host epidemic state, ground truth, population draws."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..engine import RngStream
from .config import VulnerableSelector, WormConfigError

SUSCEPTIBLE = "susceptible"
INFECTED = "infected"
RECOVERED = "recovered"


@dataclass
class HostInfectionState:
    status: str = SUSCEPTIBLE
    infected_at: int | None = None
    infector: int | None = None  # node id; None for the origin


@dataclass(frozen=True)
class InfectionRecord:
    time_ns: int
    attacker_addr: int
    victim_addr: int
    transport: str
    flow_id: int  # links the record to the infecting packets in the pcaps
    src_port: int = 0  # attacker-side port of the infecting flow
    dst_port: int = 0


def recovery_delay_ms(p: float, rng: RngStream) -> int | None:
    """Milliseconds until recovery under a per-millisecond Bernoulli trial.

    Drawn once per infection from the geometric law instead of simulating one
    check per millisecond; the survival distribution is identical:
    P(still infected after t ms) = (1-p)^t. Returns None when p == 0 (SI).
    """
    if p <= 0.0:
        return None
    if p >= 1.0:
        return 1
    u = rng.random()
    if u <= 0.0:
        return 1
    return max(1, math.ceil(math.log1p(-u) / math.log1p(-p)))


def matching_pool(topology, selector: VulnerableSelector) -> list[int]:
    """Host ids matching the selector kinds ("client" matches non-servers)."""
    ids = []
    for n in topology.hosts():
        kind = n.server_kind if n.server_kind is not None else "client"
        if kind in selector.kinds:
            ids.append(n.id)
    return sorted(ids)


def select_vulnerable(topology, selector: VulnerableSelector, rng: RngStream) -> list[int]:
    pool = matching_pool(topology, selector)
    if selector.count > len(pool):
        raise WormConfigError(
            f"vulnerable count {selector.count} exceeds the {len(pool)} hosts "
            f"matching kinds {list(selector.kinds)}")
    return sorted(rng.sample(pool, selector.count))


def pick_origins(vulnerable: list[int], runs: int, rng: RngStream) -> list[int]:
    """Distinct origin per propagation run, drawn from the vulnerable set."""
    if runs < 1:
        raise WormConfigError(f"need at least one run, got {runs}")
    if runs > len(vulnerable):
        raise WormConfigError(
            f"{runs} runs need {runs} distinct origins but only "
            f"{len(vulnerable)} hosts are vulnerable")
    return list(rng.sample(sorted(vulnerable), runs))
