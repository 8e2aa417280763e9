"""Class-aligned address plan: AS -> /8, subnet -> /16, members numbered sequentially.

The alignment is what gives worm scan locality ("same class A/B", "same
subnet") real topological meaning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..engine import RngStream
from ..packets import cidr_range, ip_str
from .model import Topology, TopologyError

AS_OCTET_BASE = 10
MAX_AS = 200
MAX_SUBNETS_PER_AS = 250


class IntervalSet:
    """Sorted, disjoint, inclusive integer intervals with uniform sampling."""

    __slots__ = ("intervals", "size")

    def __init__(self, intervals: list[tuple[int, int]]):
        merged: list[tuple[int, int]] = []
        for lo, hi in sorted(intervals):
            if lo > hi:
                continue
            if merged and lo <= merged[-1][1] + 1:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        self.intervals = merged
        self.size = sum(hi - lo + 1 for lo, hi in merged)

    @classmethod
    def from_cidrs(cls, blocks: list[str]) -> "IntervalSet":
        return cls([cidr_range(b) for b in blocks])

    def __bool__(self) -> bool:
        return self.size > 0

    def __contains__(self, addr: int) -> bool:
        for lo, hi in self.intervals:
            if lo <= addr <= hi:
                return True
        return False

    def intersect(self, lo: int, hi: int) -> "IntervalSet":
        return IntervalSet([(max(lo, a), min(hi, b)) for a, b in self.intervals])

    def draw(self, rng: RngStream) -> int:
        if self.size == 0:
            raise ValueError("drawing from an empty interval set")
        k = rng.randint(0, self.size - 1)
        for lo, hi in self.intervals:
            span = hi - lo + 1
            if k < span:
                return lo + k
            k -= span
        raise AssertionError("unreachable")


@dataclass
class AddressPlan:
    node_addr: dict[int, int] = field(default_factory=dict)
    addr_node: dict[int, int] = field(default_factory=dict)
    as_base: dict[int, int] = field(default_factory=dict)  # as_id -> /8 base address
    subnet_base: dict[tuple[int, int], int] = field(default_factory=dict)  # (as_id, index) -> /16 base
    subnet_of_node: dict[int, tuple[int, int]] = field(default_factory=dict)
    prefix16_anchor: dict[int, int] = field(default_factory=dict)  # /16 base -> router node id
    prefix8_anchor: dict[int, int] = field(default_factory=dict)  # /8 base -> router node id

    def address_of(self, node_id: int) -> int:
        return self.node_addr[node_id]

    def node_of(self, addr: int) -> int | None:
        return self.addr_node.get(addr)

    def anchor_of(self, addr: int) -> int | None:
        """Last router on the path toward an unassigned address, if any prefix matches."""
        a = self.prefix16_anchor.get(addr & 0xFFFF0000)
        if a is not None:
            return a
        return self.prefix8_anchor.get(addr & 0xFF000000)

    def class_a_interval(self, addr: int) -> tuple[int, int]:
        base = addr & 0xFF000000
        return base, base | 0x00FFFFFF

    def class_b_interval(self, addr: int) -> tuple[int, int]:
        base = addr & 0xFFFF0000
        return base, base | 0x0000FFFF

    def subnet_interval(self, node_id: int) -> tuple[int, int]:
        base = self.subnet_base[self.subnet_of_node[node_id]]
        return base, base | 0x0000FFFF

    def host_blocks(self, block_bits: int = 22) -> list[str]:
        """One CIDR block per subnet, anchored at the subnet base (default /22)."""
        return [f"{ip_str(base)}/{block_bits}" for base in sorted(self.subnet_base.values())]


_ROLE_ORDER = {"server": 0, "client": 0, "core": 1, "gateway": 2, "edge": 3}


def assign_addresses(topology: Topology) -> AddressPlan:
    """Number every node: (10+n).m.x.y for AS n, subnet m, member x.y >= 1.

    Hosts are numbered first (the first host of a subnet is always x.y = 0.1),
    then routers, by node id inside each group; host addresses stay dense at
    the low end of the subnet, which keeps compressed scan ranges meaningful.
    """
    plan = AddressPlan()
    as_ids = sorted({s.as_id for s in topology.subnets})
    if len(as_ids) > MAX_AS:
        raise TopologyError(f"address plan supports at most {MAX_AS} ASs, got {len(as_ids)}")
    for i, as_id in enumerate(as_ids):
        plan.as_base[as_id] = (AS_OCTET_BASE + i) << 24

    by_as: dict[int, list] = {}
    for s in topology.subnets:
        by_as.setdefault(s.as_id, []).append(s)
    for as_id, subnets in by_as.items():
        if len(subnets) > MAX_SUBNETS_PER_AS:
            raise TopologyError(f"AS {as_id} has {len(subnets)} subnets; at most {MAX_SUBNETS_PER_AS}")
        for s in sorted(subnets, key=lambda s: s.index):
            base = plan.as_base[as_id] | (s.index << 16)
            plan.subnet_base[(as_id, s.index)] = base
            members = sorted(s.node_ids, key=lambda nid: (_ROLE_ORDER[topology.nodes[nid].role], nid))
            if len(members) > 0xFFFE:
                raise TopologyError(f"subnet ({as_id},{s.index}) too large to number")
            for offset, nid in enumerate(members, start=1):
                addr = base + offset
                plan.node_addr[nid] = addr
                plan.addr_node[addr] = nid
                plan.subnet_of_node[nid] = (as_id, s.index)
                topology.nodes[nid].address = addr
            edges = [nid for nid in members if topology.nodes[nid].role == "edge"]
            routers = [nid for nid in members if topology.nodes[nid].is_router]
            anchor = min(edges) if edges else (min(routers) if routers else None)
            if anchor is not None:
                plan.prefix16_anchor[base] = anchor
        cores = [n.id for n in topology.nodes if n.as_id == as_id and n.role == "core"]
        routers = [n.id for n in topology.nodes if n.as_id == as_id and n.is_router]
        as_anchor = min(cores) if cores else (min(routers) if routers else None)
        if as_anchor is not None:
            plan.prefix8_anchor[plan.as_base[as_id]] = as_anchor

    topology.plan = plan
    return plan


def plan_from_existing(topology: Topology) -> AddressPlan:
    """Rebuild an AddressPlan from addresses already present on the nodes."""
    plan = AddressPlan()
    for n in topology.nodes:
        if n.address is None:
            raise TopologyError(f"node {n.id} has no address")
        if n.address in plan.addr_node:
            raise TopologyError(f"duplicate address {ip_str(n.address)}")
        plan.node_addr[n.id] = n.address
        plan.addr_node[n.address] = n.id
    for s in topology.subnets:
        if not s.node_ids:
            continue
        sample = topology.nodes[s.node_ids[0]]
        base16 = sample.address & 0xFFFF0000
        plan.subnet_base[(s.as_id, s.index)] = base16
        plan.as_base.setdefault(s.as_id, sample.address & 0xFF000000)
        for nid in s.node_ids:
            plan.subnet_of_node[nid] = (s.as_id, s.index)
        routers = [nid for nid in s.node_ids if topology.nodes[nid].is_router]
        edges = [nid for nid in routers if topology.nodes[nid].role == "edge"]
        anchor = min(edges) if edges else (min(routers) if routers else None)
        if anchor is not None:
            plan.prefix16_anchor[base16] = anchor
    for as_id, base in plan.as_base.items():
        cores = [n.id for n in topology.nodes if n.as_id == as_id and n.role == "core"]
        routers = [n.id for n in topology.nodes if n.as_id == as_id and n.is_router]
        anchor = min(cores) if cores else (min(routers) if routers else None)
        if anchor is not None:
            plan.prefix8_anchor[base] = anchor
    topology.plan = plan
    return plan
