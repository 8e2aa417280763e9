"""Per-node trace recording: wires the network tap into pcap writers.

Default capture set is every host (client and server). Routers can be added
for transit visibility; each on-path router then records the packet once per
traversal. Idle nodes still get a header-only file so the per-node index is
complete.
"""

from __future__ import annotations

import os

from ..engine import SimTime
from ..network import Network
from ..packets import Packet, ip_str
from ..topology.model import Topology
from .pcap import PcapWriter


def capture_points(topology: Topology, include_routers: bool = False) -> set[int]:
    """Node ids whose traffic gets a pcap file."""
    points = {n.id for n in topology.nodes if n.is_host}
    if include_routers:
        points |= {n.id for n in topology.nodes if n.is_router}
    return points


class TraceRecorder:
    """Owns one PcapWriter per captured node for the duration of a run."""

    def __init__(self, network: Network, out_dir: str, *,
                 include_routers: bool = False, payload_seed: int = 0,
                 l4_checksums: bool = False):
        self.network = network
        self.out_dir = out_dir
        self.nodes = capture_points(network.topology, include_routers)
        os.makedirs(out_dir, exist_ok=True)
        plan = network.plan
        self.writers: dict[int, PcapWriter] = {}
        for nid in sorted(self.nodes):
            addr = plan.address_of(nid)
            path = os.path.join(out_dir, f"{ip_str(addr)}.pcap")
            self.writers[nid] = PcapWriter(path, payload_seed=payload_seed,
                                           l4_checksums=l4_checksums)
        self._installed = False

    def install(self) -> None:
        if self.network.tap is not None:
            raise RuntimeError("network already has a tap installed")
        self.network.tap = self._tap
        # host-only capture matches the fabric's default tap set exactly; an
        # explicit set is only needed once routers join in
        self.network.tap_nodes = None if self.nodes == capture_points(
            self.network.topology) else set(self.nodes)
        self._installed = True

    def _tap(self, node: int, pkt: Packet, t: SimTime) -> None:
        w = self.writers.get(node)
        if w is not None:
            w.write(pkt, t)

    def close(self) -> None:
        if self._installed:
            self.network.tap = None
            self.network.tap_nodes = None
            self._installed = False
        for w in self.writers.values():
            w.close()

    def index(self) -> dict[str, dict]:
        """Per-file summary keyed by node address, for the run manifest."""
        plan = self.network.plan
        out = {}
        for nid in sorted(self.writers):
            w = self.writers[nid]
            out[ip_str(plan.address_of(nid))] = {
                "node": nid,
                "file": os.path.basename(w.path),
                "records": w.count,
            }
        return out

    def total_records(self) -> int:
        return sum(w.count for w in self.writers.values())
