"""Topology builders: the two fixed categories plus generic AS expansion.

Link parameters follow the per-layer tables for each category; hosts are spread
over edge routers as evenly as divisibility allows, and server roles are dealt
round-robin so servers land on distinct edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..engine import MS, US, RngStream
from .addressing import assign_addresses
from .model import LinkSpec, Node, Subnet, Topology, TopologyError
from .pfp import PfpParams, generate_pfp

GBPS = 1_000_000_000
MBPS = 1_000_000

# bandwidth / propagation delay per adjacent layer pair
CATEGORY1_LINKS = {
    ("core", "core"): (50 * GBPS, 3 * MS),
    ("core", "gateway"): (20 * GBPS, 2 * MS),
    ("gateway", "edge"): (10 * GBPS, 250 * US),
    ("edge", "server"): (2_500_000_000, 5 * US),
    ("edge", "client"): (100 * MBPS, 5 * US),
}

CATEGORY2_LINKS = {
    ("core", "core"): (40 * GBPS, 4 * MS),
    ("core", "gateway"): (16 * GBPS, 2_500_000),
    ("gateway", "edge"): (8 * GBPS, 300 * US),
    ("edge", "server"): (2 * GBPS, 10 * US),
    ("edge", "client"): (80 * MBPS, 10 * US),
}

# servers of each kind placed in every subnet of the fixed categories
CATEGORY1_SERVER_MIX = {"HTTP": 7, "HTTPS": 3, "DNS": 2, "FTP": 1, "mail": 1, "interactive": 1}
CATEGORY2_SERVER_MIX = {"HTTP": 6, "HTTPS": 3, "DNS": 2, "FTP": 1, "mail": 1, "interactive": 1}

DEFAULT_QUEUE_CAPACITY = 100


@dataclass
class AsLayout:
    """Shape of one AS: router counts, host total, and the server mix."""

    cores: int = 1
    gateways: int = 2
    edges: int = 4
    hosts: int = 40
    server_mix: dict = field(default_factory=dict)
    gateway_dual_homed: bool = False

    def validate(self) -> None:
        if self.cores < 1 or self.gateways < 1 or self.edges < 1:
            raise TopologyError("an AS needs at least one router per layer")
        if self.hosts < 1:
            raise TopologyError("an AS with zero hosts cannot source traffic")
        if sum(self.server_mix.values()) > self.hosts:
            raise TopologyError("server mix exceeds host count")


class _Builder:
    def __init__(self, link_params: dict):
        self.nodes: list[Node] = []
        self.links: list[LinkSpec] = []
        self.subnets: list[Subnet] = []
        self.link_params = link_params

    def add_node(self, role: str, as_id: int, subnet_id: int, server_kind: str | None = None) -> int:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, role, as_id, subnet_id, server_kind))
        return nid

    def connect(self, a: int, b: int, layer_pair: tuple[str, str]) -> None:
        bw, delay = self.link_params[layer_pair]
        self.links.append(LinkSpec(a, b, bw, delay, DEFAULT_QUEUE_CAPACITY))


def expand_as(builder: _Builder, as_id: int, layout: AsLayout, subnet_ids: list[int] | None = None) -> dict:
    """Grow one AS inside `builder`: core mesh, gateways, edges, hosts.

    Returns the node ids per layer. With one subnet id the whole AS is that
    subnet; multiple ids split gateways/edges/hosts evenly across them (cores
    go to the subnet they index into).
    """
    layout.validate()
    subnet_ids = subnet_ids or [0]
    ns = len(subnet_ids)

    cores = [builder.add_node("core", as_id, subnet_ids[i % ns]) for i in range(layout.cores)]
    for i, c in enumerate(cores):
        for c2 in cores[i + 1:]:
            builder.connect(c, c2, ("core", "core"))

    gateways = []
    for g in range(layout.gateways):
        gid = builder.add_node("gateway", as_id, subnet_ids[(g * ns) // layout.gateways])
        gateways.append(gid)
        home = cores[g % layout.cores]
        builder.connect(gid, home, ("core", "gateway"))
        if layout.gateway_dual_homed and layout.cores > 1:
            builder.connect(gid, cores[(g % layout.cores + 1) % layout.cores], ("core", "gateway"))

    edges = []
    for e in range(layout.edges):
        eid = builder.add_node("edge", as_id, subnet_ids[(e * ns) // layout.edges])
        edges.append(eid)
        builder.connect(eid, gateways[e % layout.gateways], ("gateway", "edge"))

    # role plan: server kinds first (sorted for determinism), then clients
    roles: list[tuple[str, str | None]] = []
    for kind in sorted(layout.server_mix):
        roles.extend([("server", kind)] * layout.server_mix[kind])
    roles.extend([("client", None)] * (layout.hosts - len(roles)))

    hosts = []
    for i, (role, kind) in enumerate(roles):
        edge = edges[i % layout.edges]
        hid = builder.add_node(role, as_id, builder.nodes[edge].subnet_id, kind)
        hosts.append(hid)
        builder.connect(hid, edge, ("edge", role))

    return {"cores": cores, "gateways": gateways, "edges": edges, "hosts": hosts}


def _collect_subnets(builder: _Builder) -> None:
    groups: dict[tuple[int, int], list[int]] = {}
    for n in builder.nodes:
        groups.setdefault((n.as_id, n.subnet_id), []).append(n.id)
    builder.subnets = [Subnet(a, s, ids) for (a, s), ids in sorted(groups.items())]


def build_category1() -> Topology:
    """Fixed four-subnet ISP topology: 4 core, 8 gateway, 16 edge, 200 hosts."""
    b = _Builder(CATEGORY1_LINKS)
    cores = [b.add_node("core", 0, s) for s in range(4)]
    for i in range(4):
        for j in range(i + 1, 4):
            b.connect(cores[i], cores[j], ("core", "core"))

    gateways = []
    for g in range(8):
        s = g // 2
        gid = b.add_node("gateway", 0, s)
        gateways.append(gid)
        b.connect(gid, cores[s], ("core", "gateway"))
        b.connect(gid, cores[(s + 1) % 4], ("core", "gateway"))

    edges = []
    for e in range(16):
        s = e // 4
        eid = b.add_node("edge", 0, s)
        edges.append(eid)
        b.connect(eid, gateways[e // 2], ("gateway", "edge"))

    for s in range(4):
        subnet_edges = edges[4 * s: 4 * s + 4]
        roles: list[tuple[str, str | None]] = []
        for kind in sorted(CATEGORY1_SERVER_MIX):
            roles.extend([("server", kind)] * CATEGORY1_SERVER_MIX[kind])
        roles.extend([("client", None)] * (50 - len(roles)))
        for i, (role, kind) in enumerate(roles):
            hid = b.add_node(role, 0, s, kind)
            b.connect(hid, subnet_edges[i % 4], ("edge", role))

    _collect_subnets(b)
    topo = Topology("category1", b.nodes, b.links, b.subnets)
    assign_addresses(topo)
    return topo


def build_category2(rng: RngStream, pfp_params: PfpParams | None = None) -> Topology:
    """Ten-AS topology grown from a PFP AS graph: 10/20/152 routers, 1162 hosts."""
    as_graph = generate_pfp(10, pfp_params or PfpParams(), rng)
    b = _Builder(CATEGORY2_LINKS)

    edge_counts = [16, 16] + [15] * 8  # 152 edge routers
    host_cursor = 0
    layers = []
    for as_id in range(10):
        n_edges = edge_counts[as_id]
        n_hosts = 0
        for _ in range(n_edges):
            n_hosts += 8 if host_cursor < 98 else 7
            host_cursor += 1
        layout = AsLayout(
            cores=1,
            gateways=2,
            edges=n_edges,
            hosts=n_hosts,
            server_mix=dict(CATEGORY2_SERVER_MIX),
        )
        layers.append(expand_as(b, as_id, layout, subnet_ids=[0]))

    for i, j in sorted(as_graph.edges()):
        b.connect(layers[i]["cores"][0], layers[j]["cores"][0], ("core", "core"))

    _collect_subnets(b)
    topo = Topology("category2", b.nodes, b.links, b.subnets)
    assign_addresses(topo)
    return topo


def build_pfp_topology(
    as_count: int,
    rng: RngStream,
    pfp_params: PfpParams | None = None,
    layout: AsLayout | None = None,
) -> Topology:
    """Custom topology: PFP AS graph expanded with one layout per AS."""
    if as_count < 3:
        raise TopologyError("pfp topologies need at least 3 ASs")
    as_graph = generate_pfp(as_count, pfp_params or PfpParams(), rng)
    base = layout or AsLayout(server_mix={"HTTP": 2, "HTTPS": 1, "DNS": 1, "FTP": 1, "mail": 1, "interactive": 1})
    b = _Builder(CATEGORY2_LINKS)
    layers = [expand_as(b, as_id, base, subnet_ids=[0]) for as_id in range(as_count)]
    for i, j in sorted(as_graph.edges()):
        b.connect(layers[i]["cores"][0], layers[j]["cores"][0], ("core", "core"))
    _collect_subnets(b)
    topo = Topology("pfp", b.nodes, b.links, b.subnets)
    assign_addresses(topo)
    return topo


def build_single_as(layout: AsLayout, link_params: dict | None = None, category: str = "custom") -> Topology:
    """One AS, one subnet. Useful for small controlled experiments."""
    b = _Builder(link_params or CATEGORY1_LINKS)
    expand_as(b, 0, layout, subnet_ids=[0])
    _collect_subnets(b)
    topo = Topology(category, b.nodes, b.links, b.subnets)
    assign_addresses(topo)
    return topo
