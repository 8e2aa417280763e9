"""Topology data model and JSON import/export."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..packets import ip_int, ip_str

ROLE_CORE = "core"
ROLE_GATEWAY = "gateway"
ROLE_EDGE = "edge"
ROLE_CLIENT = "client"
ROLE_SERVER = "server"

ROUTER_ROLES = (ROLE_CORE, ROLE_GATEWAY, ROLE_EDGE)
HOST_ROLES = (ROLE_CLIENT, ROLE_SERVER)

SERVER_KINDS = ("HTTP", "HTTPS", "FTP", "DNS", "mail", "streaming", "backup", "interactive", "misc")


class TopologyError(Exception):
    pass


@dataclass(slots=True)
class Node:
    id: int
    role: str
    as_id: int
    subnet_id: int  # subnet index within the AS
    server_kind: str | None = None
    address: int | None = None

    @property
    def is_host(self) -> bool:
        return self.role in HOST_ROLES

    @property
    def is_router(self) -> bool:
        return self.role in ROUTER_ROLES


@dataclass(slots=True)
class LinkSpec:
    a: int
    b: int
    bandwidth_bps: int
    delay_ns: int
    queue_capacity: int = 100


@dataclass(slots=True)
class Subnet:
    as_id: int
    index: int
    node_ids: list[int] = field(default_factory=list)


class Topology:
    def __init__(self, category: str, nodes: list[Node], links: list[LinkSpec], subnets: list[Subnet]):
        self.category = category
        self.nodes = nodes
        self.links = links
        self.subnets = subnets
        self.plan = None  # AddressPlan, set by assign_addresses
        self._adjacency: dict[int, list[int]] | None = None
        self.validate()

    def validate(self) -> None:
        ids = [n.id for n in self.nodes]
        if ids != list(range(len(ids))):
            raise TopologyError("node ids must be dense and sorted")
        for n in self.nodes:
            if n.role == ROLE_SERVER and n.server_kind not in SERVER_KINDS:
                raise TopologyError(f"server node {n.id} has unknown kind {n.server_kind!r}")
        seen = set()
        for l in self.links:
            if not (0 <= l.a < len(ids) and 0 <= l.b < len(ids)) or l.a == l.b:
                raise TopologyError(f"link ({l.a},{l.b}) references bad nodes")
            key = (min(l.a, l.b), max(l.a, l.b))
            if key in seen:
                raise TopologyError(f"duplicate link {key}")
            seen.add(key)
        in_subnet = [nid for s in self.subnets for nid in s.node_ids]
        if sorted(in_subnet) != ids:
            raise TopologyError("subnets must partition the node set")

    @property
    def adjacency(self) -> dict[int, list[int]]:
        if self._adjacency is None:
            adj: dict[int, list[int]] = {n.id: [] for n in self.nodes}
            for l in self.links:
                adj[l.a].append(l.b)
                adj[l.b].append(l.a)
            for v in adj.values():
                v.sort()
            self._adjacency = adj
        return self._adjacency

    def hosts(self) -> list[Node]:
        return [n for n in self.nodes if n.is_host]

    def routers(self) -> list[Node]:
        return [n for n in self.nodes if n.is_router]

    def servers(self, kind: str | None = None) -> list[Node]:
        out = [n for n in self.nodes if n.role == ROLE_SERVER]
        if kind is not None:
            out = [n for n in out if n.server_kind == kind]
        return out

    def clients(self) -> list[Node]:
        return [n for n in self.nodes if n.role == ROLE_CLIENT]

    def degree_sequence(self) -> list[int]:
        adj = self.adjacency
        return [len(adj[n.id]) for n in self.nodes]

    def link_between(self, a: int, b: int) -> LinkSpec | None:
        for l in self.links:
            if {l.a, l.b} == {a, b}:
                return l
        return None

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        adj = self.adjacency
        seen = {0}
        stack = [0]
        while stack:
            for nbr in adj[stack.pop()]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return len(seen) == len(self.nodes)

    # --- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format": "wormbench-topology",
            "version": 1,
            "category": self.category,
            "nodes": [
                {
                    "id": n.id,
                    "role": n.role,
                    "as_id": n.as_id,
                    "subnet_id": n.subnet_id,
                    "server_kind": n.server_kind,
                    "address": ip_str(n.address) if n.address is not None else None,
                }
                for n in self.nodes
            ],
            "links": [
                [l.a, l.b, l.bandwidth_bps, l.delay_ns, l.queue_capacity] for l in self.links
            ],
            "subnets": [
                {"as_id": s.as_id, "index": s.index, "node_ids": s.node_ids} for s in self.subnets
            ],
        }

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=1)
            f.write("\n")

    @classmethod
    def from_json(cls, doc: dict) -> "Topology":
        if doc.get("format") != "wormbench-topology":
            raise TopologyError("not a topology file")
        nodes = [
            Node(
                id=d["id"],
                role=d["role"],
                as_id=d["as_id"],
                subnet_id=d["subnet_id"],
                server_kind=d.get("server_kind"),
                address=ip_int(d["address"]) if d.get("address") else None,
            )
            for d in doc["nodes"]
        ]
        links = [LinkSpec(*row) for row in doc["links"]]
        subnets = [Subnet(s["as_id"], s["index"], list(s["node_ids"])) for s in doc["subnets"]]
        topo = cls(doc.get("category", "external"), nodes, links, subnets)
        if not topo.is_connected():
            raise TopologyError("imported topology is disconnected")
        return topo

    @classmethod
    def load(cls, path) -> "Topology":
        with open(path) as f:
            doc = json.load(f)
        topo = cls.from_json(doc)
        if any(n.address is not None for n in topo.nodes):
            from .addressing import plan_from_existing

            topo.plan = plan_from_existing(topo)
        return topo
