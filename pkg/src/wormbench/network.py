"""Forwarding fabric: glues the event loop, the link model, and routing.

Packets move store-and-forward, one link at a time. Each hop is a fresh
transmit() on the outgoing link, so serialization delay accrues per hop and
congestion shows up wherever queues actually fill. Addresses that resolve to
no node are carried as far as their longest matching prefix (its anchor
router) and die there, which is what makes wild scans consume edge bandwidth
without ever producing a reply.
"""

from __future__ import annotations

from typing import Callable, Optional

from .engine import Engine, Event, EventKind, Link, SimTime
from .packets import Packet, ip_str


class NetworkError(RuntimeError):
    pass


class Network:
    def __init__(self, engine: Engine, topology, routes):
        self.engine = engine
        self.topology = topology
        self.routes = routes
        self.plan = topology.plan
        if self.plan is None:
            raise NetworkError("topology has no address plan")
        self._links: dict[tuple[int, int], Link] = {}
        for spec in topology.links:
            link = Link(spec.a, spec.b, spec.bandwidth_bps, spec.delay_ns, spec.queue_capacity)
            self._links[(spec.a, spec.b)] = link
            self._links[(spec.b, spec.a)] = link

        self.host_handlers: dict[int, Callable[[Packet, SimTime], None]] = {}
        self.tap: Optional[Callable[[int, Packet, SimTime], None]] = None
        self.tap_nodes: Optional[set[int]] = None  # None -> tap every host

        self.submitted = {"background": 0, "worm": 0}
        self.delivered = {"background": 0, "worm": 0}
        self.dropped = {"background": 0, "worm": 0}
        self.dead_addressed = 0
        self.worm_links: set[tuple[int, int]] = set()  # directed (from, to) hops worm bytes crossed

        # offered/carried background byte series, for the burstiness estimators
        self.series_bin_ns: SimTime = 10_000_000
        self.series_submitted: list[int] = []
        self.series_delivered: list[int] = []

        self._rtt_cache: dict[tuple[int, int], SimTime] = {}

        engine.subscribe(EventKind.PACKET_ARRIVAL, self._on_arrival)

    # ------------------------------------------------------------- sending

    def submit(self, pkt: Packet, from_node: int) -> None:
        """Hand a packet from a host NIC to the fabric at the current clock."""
        now = self.engine.now
        self.submitted[pkt.origin] += 1
        if pkt.origin == "background":
            self._bump_series(self.series_submitted, now, pkt.size_bytes)
        self._tap(from_node, pkt, now)
        self._forward(pkt, from_node, now)

    def register_host(self, node_id: int, handler: Callable[[Packet, SimTime], None]) -> None:
        if node_id in self.host_handlers:
            raise NetworkError(f"node {node_id} already has a handler")
        self.host_handlers[node_id] = handler

    # ------------------------------------------------------------- internals

    def _tap(self, node_id: int, pkt: Packet, t: SimTime) -> None:
        if self.tap is None:
            return
        if self.tap_nodes is None:
            if not self.topology.nodes[node_id].is_host:
                return
        elif node_id not in self.tap_nodes:
            return
        self.tap(node_id, pkt, t)

    def _forward(self, pkt: Packet, at_node: int, now: SimTime) -> None:
        dst = self.plan.node_of(pkt.dst_addr)
        if dst is None:
            anchor = self.plan.anchor_of(pkt.dst_addr)
            if anchor is None or at_node == anchor:
                self.dead_addressed += 1
                return
            target = anchor
        else:
            if at_node == dst:  # self-addressed: loop back without touching a link
                self._deliver(pkt, at_node, now)
                return
            target = dst
        nh = self.routes.next_hop(at_node, target)
        link = self._links.get((at_node, nh))
        if link is None:
            raise NetworkError(f"no link {at_node}->{nh} for {ip_str(pkt.dst_addr)}")
        if pkt.origin == "worm":
            self.worm_links.add((at_node, nh))
        arrival = link.transmit(nh, pkt.size_bytes, now)
        if arrival is None:
            self.dropped[pkt.origin] += 1
            self.engine.count(f"drop.{pkt.origin}")
            return
        self.engine.schedule(arrival, EventKind.PACKET_ARRIVAL, target=nh, payload=pkt)

    def _on_arrival(self, ev: Event) -> None:
        pkt: Packet = ev.payload
        node = ev.target
        dst = self.plan.node_of(pkt.dst_addr)
        if dst == node:
            self._deliver(pkt, node, ev.time)
        else:
            # transit hop; records only when a router is an explicit capture point
            if self.tap_nodes is not None and node in self.tap_nodes:
                self._tap(node, pkt, ev.time)
            self._forward(pkt, node, ev.time)

    def _bump_series(self, series: list[int], t: SimTime, nbytes: int) -> None:
        i = t // self.series_bin_ns
        if i >= len(series):
            series.extend([0] * (i + 1 - len(series)))
        series[i] += nbytes

    def rtt_estimate(self, src: int, dst_addr: int) -> SimTime:
        """Round trip over the current route: propagation plus full-size
        store-and-forward serialization at every hop, both ways."""
        dst = self.plan.node_of(dst_addr)
        if dst is None:
            dst = self.plan.anchor_of(dst_addr)
        if dst is None or dst == src:
            return 0
        key = (src, dst)
        cached = self._rtt_cache.get(key)
        if cached is not None:
            return cached
        one_way = 0
        cur = src
        for _ in range(len(self.topology.nodes)):
            nh = self.routes.next_hop(cur, dst)
            link = self._links[(cur, nh)]
            one_way += link.delay_ns + link.serialization_ns(1500)
            cur = nh
            if cur == dst:
                break
        else:
            raise NetworkError(f"route walk did not terminate from {src}")
        rtt = 2 * one_way
        self._rtt_cache[key] = rtt
        return rtt

    def _deliver(self, pkt: Packet, node: int, t: SimTime) -> None:
        self.delivered[pkt.origin] += 1
        if pkt.origin == "background":
            self._bump_series(self.series_delivered, t, pkt.size_bytes)
        self._tap(node, pkt, t)
        handler = self.host_handlers.get(node)
        if handler is not None:
            handler(pkt, t)
        else:
            self.engine.count("delivered.unhandled")

    # ------------------------------------------------------------- stats

    def stats(self) -> dict:
        return {
            "submitted": dict(self.submitted),
            "delivered": dict(self.delivered),
            "dropped": dict(self.dropped),
            "dead_addressed": self.dead_addressed,
            "worm_link_count": len(self.worm_links),
        }
