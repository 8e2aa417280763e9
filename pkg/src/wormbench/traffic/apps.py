"""Host stacks and the background applications that ride on them.

Every behavioral draw for a flow (sizes, counts, pacing, the peer) comes from
the client host's own labeled stream, in a fixed order, and is frozen into a
FlowPlan before the first packet leaves. Servers read the plan from a shared
registry keyed by flow id instead of re-drawing, so adding or removing worm
traffic never shifts a background host's random sequence - paired runs stay
draw-for-draw identical.

Per host, flows run one at a time: an ON period (the flow) followed by an OFF
period (the profile's inter-flow gap). Heavy-tailed sizes and gaps are what
give the aggregate series its long-range dependence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..engine import Engine, SimTime, seconds
from ..network import Network
from ..packets import (
    ACK,
    PROTO_ICMP,
    PROTO_TCP,
    PROTO_UDP,
    RST,
    SYN,
    Packet,
)
from .profiles import CANONICAL_BY_KIND, TrafficMix, TrafficProfile, select_profile
from .tcp import TcpConnection

EPHEMERAL_LO = 49152
EPHEMERAL_HI = 65535
# background and worm agents draw source ports from disjoint halves of the
# dynamic range, so adding worm traffic can never force a background port
# redraw (paired runs stay draw-for-draw identical)
BG_PORT_LO, BG_PORT_HI = EPHEMERAL_LO, 61439
WORM_PORT_LO, WORM_PORT_HI = 61440, EPHEMERAL_HI
MAX_UDP_PAYLOAD = 1472  # one ethernet-sized datagram after IP+UDP headers
UDP_REPLY_GRACE_NS = 5_000_000_000  # lost replies end the flow 5 s after the last is due
FLOW_HARD_DEADLINE_NS = 600_000_000_000  # safety net: no background flow outlives 600 s

ICMP_ECHO_REQUEST = 8
ICMP_ECHO_REPLY = 0


@dataclass(slots=True)
class FlowPlan:
    """Everything a flow will do, drawn up front on the client."""

    flow_id: int
    profile_name: str
    transport: str
    client_node: int
    server_node: int
    client_addr: int
    server_addr: int
    client_port: int
    server_port: int
    request_sizes: list[int]
    gaps_ns: list[int]  # applied after each request's replies (len = requests - 1)
    reply_sizes: list[list[int]]
    reply_delays_ns: list[list[int]]  # per-reply server think time
    request_cum: list[int] = field(default_factory=list)
    reply_cum: list[int] = field(default_factory=list)

    def __post_init__(self):
        acc = 0
        self.request_cum = []
        for s in self.request_sizes:
            acc += s
            self.request_cum.append(acc)
        acc = 0
        self.reply_cum = []
        for sizes in self.reply_sizes:
            acc += sum(sizes)
            self.reply_cum.append(acc)

    @property
    def request_total(self) -> int:
        return self.request_cum[-1] if self.request_cum else 0

    @property
    def reply_total(self) -> int:
        return self.reply_cum[-1] if self.reply_cum else 0


@dataclass(slots=True)
class FlowRecord:
    flow_id: int
    profile: str
    transport: str
    src_node: int
    dst_node: int
    src_addr: int
    dst_addr: int
    src_port: int
    dst_port: int
    start_ns: int
    end_ns: int
    request_bytes: int
    reply_bytes_expected: int
    reply_bytes_received: int
    status: str  # complete | timeout | stalled | failed:<reason>


class HostStack:
    """Per-host NIC-and-sockets layer: port table, demux, TCP plumbing.

    Listeners are registered per (port, origin) so a worm service and a
    background service can share a port number on the same victim; origin is
    simulator bookkeeping standing in for payload inspection.
    """

    def __init__(self, system: "TrafficSystem", node_id: int):
        self.system = system
        self.node_id = node_id
        self.addr = system.network.plan.address_of(node_id)
        self.rng = system.engine.rng_stream(f"traffic.host.{node_id}")
        self.tcp_conns: dict[tuple[int, int, int], TcpConnection] = {}
        self._armed: dict[tuple[int, int, int], int] = {}
        self.tcp_listeners: dict[tuple[int, str], Callable] = {}
        self.udp_listeners: dict[tuple[int, str], Callable] = {}
        self.icmp_flows: dict[int, Callable] = {}
        self.ports_in_use: set[int] = set()
        system.network.register_host(node_id, self.handle)

    # --------------------------------------------------------------- ports

    def alloc_port(self, rng, lo: int = BG_PORT_LO, hi: int = BG_PORT_HI) -> int:
        """Draw an unused ephemeral port from the caller's stream."""
        for _ in range(64):
            p = rng.randint(lo, hi)
            if p not in self.ports_in_use:
                self.ports_in_use.add(p)
                return p
        for p in range(lo, hi + 1):  # saturated: scan
            if p not in self.ports_in_use:
                self.ports_in_use.add(p)
                return p
        raise RuntimeError(f"node {self.node_id}: ephemeral ports exhausted")

    def release_port(self, port: int) -> None:
        self.ports_in_use.discard(port)

    # --------------------------------------------------------------- sending

    def transmit(self, pkt: Packet) -> None:
        pkt.uid = self.system.next_uid()
        self.system.network.submit(pkt, self.node_id)

    def udp_packet(self, dst_addr: int, sport: int, dport: int, payload_len: int,
                   flow_id: int, datagram_seq: int, origin: str) -> Packet:
        return Packet(
            uid=0, src_addr=self.addr, dst_addr=dst_addr, protocol=PROTO_UDP,
            src_port=sport, dst_port=dport, payload_len=min(payload_len, MAX_UDP_PAYLOAD),
            tcp_seq=datagram_seq, flow_id=flow_id, origin=origin,
        )

    def icmp_packet(self, dst_addr: int, icmp_type: int, payload_len: int,
                    flow_id: int, seq: int, origin: str) -> Packet:
        return Packet(
            uid=0, src_addr=self.addr, dst_addr=dst_addr, protocol=PROTO_ICMP,
            payload_len=min(payload_len, MAX_UDP_PAYLOAD), icmp_type=icmp_type,
            tcp_seq=seq, flow_id=flow_id, origin=origin,
        )

    # --------------------------------------------------------------- tcp

    def tcp_connect(self, raddr: int, rport: int, lport: int, flow_id: int,
                    origin: str) -> TcpConnection:
        rtt = self.system.network.rtt_estimate(self.node_id, raddr)
        conn = TcpConnection(
            self._tcp_factory(raddr, lport, rport, flow_id, origin),
            rto_ns=2 * rtt,
        )
        key = (lport, raddr, rport)
        if key in self.tcp_conns:
            raise RuntimeError(f"node {self.node_id}: connection key {key} busy")
        self.tcp_conns[key] = conn
        self._armed[key] = -1
        return conn

    def tcp_listen(self, port: int, origin: str, accept: Callable) -> None:
        """accept(conn, syn_packet) -> bool wires callbacks; False refuses."""
        self.tcp_listeners[(port, origin)] = accept

    def udp_bind(self, port: int, origin: str, handler: Callable) -> None:
        self.udp_listeners[(port, origin)] = handler

    def udp_unbind(self, port: int, origin: str) -> None:
        self.udp_listeners.pop((port, origin), None)

    def icmp_bind(self, flow_id: int, handler: Callable) -> None:
        self.icmp_flows[flow_id] = handler

    def icmp_unbind(self, flow_id: int) -> None:
        self.icmp_flows.pop(flow_id, None)

    def _tcp_factory(self, raddr: int, lport: int, rport: int, flow_id: int, origin: str):
        def make(seq: int, ack: int, flags: int, payload_len: int) -> Packet:
            return Packet(
                uid=0, src_addr=self.addr, dst_addr=raddr, protocol=PROTO_TCP,
                src_port=lport, dst_port=rport, payload_len=payload_len,
                tcp_seq=seq, tcp_ack=ack, tcp_flags=flags,
                flow_id=flow_id, origin=origin,
            )
        return make

    def pump(self, key: tuple[int, int, int], pkts: list[Packet]) -> None:
        """Transmit a connection's output and keep its timer armed."""
        for p in pkts:
            self.transmit(p)
        conn = self.tcp_conns.get(key)
        if conn is None:
            return
        if conn.wants_timer and self._armed.get(key) != conn.timer_epoch:
            self._armed[key] = conn.timer_epoch
            self.system.engine.at(
                self.system.engine.now + conn.rto_ns, self._tcp_timer, key, conn.timer_epoch
            )

    def _tcp_timer(self, key, epoch: int) -> None:
        conn = self.tcp_conns.get(key)
        if conn is not None:
            self.pump(key, conn.on_timer(epoch))

    def retire_conn(self, key: tuple[int, int, int], linger_ns: SimTime) -> None:
        """Drop a finished connection after a linger (it may still re-ACK dups)."""
        def _drop():
            self.tcp_conns.pop(key, None)
            self._armed.pop(key, None)
        self.system.engine.at(self.system.engine.now + linger_ns, _drop)

    # --------------------------------------------------------------- receive

    def handle(self, pkt: Packet, t: SimTime) -> None:
        if pkt.protocol == PROTO_TCP:
            self._handle_tcp(pkt)
        elif pkt.protocol == PROTO_UDP:
            handler = self.udp_listeners.get((pkt.dst_port, pkt.origin))
            if handler is not None:
                handler(self, pkt, t)
            # unanswered datagrams just vanish, like a filtered port
        else:
            self._handle_icmp(pkt, t)

    def _handle_tcp(self, pkt: Packet) -> None:
        key = (pkt.dst_port, pkt.src_addr, pkt.src_port)
        conn = self.tcp_conns.get(key)
        if conn is not None:
            self.pump(key, conn.on_packet(pkt))
            return
        if pkt.tcp_flags & SYN and not pkt.tcp_flags & ACK:
            accept = self.tcp_listeners.get((pkt.dst_port, pkt.origin))
            if accept is not None:
                conn = TcpConnection(
                    self._tcp_factory(pkt.src_addr, pkt.dst_port, pkt.src_port,
                                      pkt.flow_id, pkt.origin),
                    rto_ns=2 * self.system.network.rtt_estimate(self.node_id, pkt.src_addr),
                    passive=True,
                )
                conn.listen()
                if accept(self, conn, pkt):
                    self.tcp_conns[key] = conn
                    self._armed[key] = -1
                    self.pump(key, conn.on_packet(pkt))
                    return
        if pkt.tcp_flags & RST:
            return  # never answer a reset with a reset
        self.transmit(Packet(
            uid=0, src_addr=self.addr, dst_addr=pkt.src_addr, protocol=PROTO_TCP,
            src_port=pkt.dst_port, dst_port=pkt.src_port,
            tcp_seq=0, tcp_ack=pkt.tcp_seq + pkt.payload_len + 1, tcp_flags=RST | ACK,
            flow_id=pkt.flow_id, origin=pkt.origin,
        ))

    def _handle_icmp(self, pkt: Packet, t: SimTime) -> None:
        if pkt.icmp_type == ICMP_ECHO_REQUEST:
            self.transmit(Packet(
                uid=0, src_addr=self.addr, dst_addr=pkt.src_addr, protocol=PROTO_ICMP,
                payload_len=pkt.payload_len, icmp_type=ICMP_ECHO_REPLY,
                tcp_seq=pkt.tcp_seq, flow_id=pkt.flow_id, origin=pkt.origin,
            ))
        elif pkt.icmp_type == ICMP_ECHO_REPLY:
            handler = self.icmp_flows.get(pkt.flow_id)
            if handler is not None:
                handler(pkt, t)


class TrafficSystem:
    """Shared wiring for one run: stacks on every host, servers listening,
    a traffic source looping on every host, and the flow bookkeeping."""

    def __init__(self, engine: Engine, network: Network, mix: TrafficMix):
        self.engine = engine
        self.network = network
        self.mix = mix
        topo = network.topology
        self.flow_plans: dict[int, FlowPlan] = {}
        self.flow_log: list[FlowRecord] = []
        self._uid = 0
        self.stacks: dict[int, HostStack] = {}
        self.sources: dict[int, TrafficSource] = {}
        self.hosts = [n.id for n in topo.hosts()]
        self.servers_by_kind: dict[str, list[int]] = {}
        for n in topo.servers():
            self.servers_by_kind.setdefault(n.server_kind, []).append(n.id)
        for ids in self.servers_by_kind.values():
            ids.sort()
        self.subnet_key = {n.id: (n.as_id, n.subnet_id) for n in topo.nodes}
        self.node_kind = {n.id: n.server_kind for n in topo.nodes}

    def next_uid(self) -> int:
        self._uid += 1
        return self._uid

    def install(self, start_sources: bool = True) -> None:
        topo = self.network.topology
        for node in topo.hosts():
            stack = HostStack(self, node.id)
            self.stacks[node.id] = stack
            if node.server_kind is not None:
                install_server(self, stack, node.server_kind)
        if start_sources:
            for node_id in self.hosts:
                src = TrafficSource(self, self.stacks[node_id])
                self.sources[node_id] = src
                src.start()

    def finish_flow(self, record: FlowRecord) -> None:
        self.flow_log.append(record)
        self.flow_plans.pop(record.flow_id, None)
        src = self.sources.get(record.src_node)
        if src is not None:
            src.flow_finished()


# ----------------------------------------------------------------- servers


def install_server(system: TrafficSystem, stack: HostStack, kind: str) -> None:
    """Listen on every port mapped to this server kind, TCP and UDP alike."""
    for profile in system.mix.all_profiles.values():
        if profile.server_kind != kind or profile.server_port is None:
            continue
        if profile.transport == "tcp":
            stack.tcp_listen(profile.server_port, "background", _accept_background)
        elif profile.transport == "udp":
            stack.udp_bind(profile.server_port, "background", _udp_serve)


def _accept_background(stack: HostStack, conn: TcpConnection, syn: Packet) -> bool:
    plan = stack.system.flow_plans.get(syn.flow_id)
    if plan is None:
        return False  # stray or stale: refuse with a reset
    _TcpServerSession(stack, conn, plan, (syn.dst_port, syn.src_addr, syn.src_port))
    return True


class _TcpServerSession:
    """Replays the plan's scripted replies as the request bytes land."""

    def __init__(self, stack: HostStack, conn: TcpConnection, plan: FlowPlan, key):
        self.stack = stack
        self.conn = conn
        self.plan = plan
        self.key = key
        self.received = 0
        self.req_index = 0
        self.pending_replies = 0
        self.close_when_drained = False
        self.dead = False
        conn.on_data = self._on_data
        conn.on_peer_fin = self._on_peer_fin
        conn.on_closed = self._on_end
        conn.on_failed = lambda reason: self._on_end()

    def _on_data(self, off: int, ln: int) -> None:
        self.received += ln
        plan = self.plan
        while (self.req_index < len(plan.request_cum)
               and self.received >= plan.request_cum[self.req_index]):
            k = self.req_index
            self.req_index += 1
            t = self.stack.system.engine.now
            for size, delay in zip(plan.reply_sizes[k], plan.reply_delays_ns[k]):
                t += delay
                self.pending_replies += 1
                self.stack.system.engine.at(t, self._send_reply, size)

    def _send_reply(self, size: int) -> None:
        self.pending_replies -= 1
        if self.dead:
            return
        self.stack.pump(self.key, self.conn.send(size))
        if self.pending_replies == 0 and self.close_when_drained:
            self.stack.pump(self.key, self.conn.close())

    def _on_peer_fin(self) -> None:
        if self.pending_replies == 0:
            self.stack.pump(self.key, self.conn.close())
        else:
            self.close_when_drained = True

    def _on_end(self) -> None:
        self.dead = True
        self.stack.retire_conn(self.key, 4 * self.conn.rto_ns)


def _udp_serve(stack: HostStack, pkt: Packet, t: SimTime) -> None:
    plan = stack.system.flow_plans.get(pkt.flow_id)
    if plan is None or pkt.tcp_seq >= len(plan.reply_sizes):
        return
    k = pkt.tcp_seq
    when = t
    base = sum(len(s) for s in plan.reply_sizes[:k])
    for j, (size, delay) in enumerate(zip(plan.reply_sizes[k], plan.reply_delays_ns[k])):
        when += delay
        reply = stack.udp_packet(plan.client_addr, pkt.dst_port, pkt.src_port,
                                 size, plan.flow_id, 1_000_000 + base + j, "background")
        stack.system.engine.at(when, stack.transmit, reply)


# ----------------------------------------------------------------- clients


class TrafficSource:
    """The per-host ON/OFF loop: gap, flow, gap, flow, ..."""

    def __init__(self, system: TrafficSystem, stack: HostStack):
        self.system = system
        self.stack = stack
        self.rng = stack.rng
        self.node_id = stack.node_id
        self.flow_counter = 0
        self.flows_started = 0
        self.flows_skipped = 0

    def start(self) -> None:
        self._schedule_next()

    def flow_finished(self) -> None:
        self._schedule_next()

    def _schedule_next(self) -> None:
        profile = self._draw_profile()
        gap_ns = seconds(profile.time_between_flows.draw(self.rng))
        self.system.engine.at(self.system.engine.now + gap_ns, self._begin_flow, profile)

    def _draw_profile(self) -> TrafficProfile:
        kind = self.system.node_kind.get(self.node_id)
        if kind is not None and self.rng.random() < 0.5:
            name = CANONICAL_BY_KIND.get(kind)
            if name is not None:
                peers = [s for s in self.system.servers_by_kind.get(kind, []) if s != self.node_id]
                if peers:
                    return self.system.mix.all_profiles[name]
        return select_profile(self.system.mix, self.rng)

    def _begin_flow(self, profile: TrafficProfile) -> None:
        target = self._pick_target(profile)
        if target is None:
            self.flows_skipped += 1
            self._schedule_next()
            return
        plan = self._build_plan(profile, target)
        self.system.flow_plans[plan.flow_id] = plan
        self.flows_started += 1
        if profile.transport == "tcp":
            _TcpClientFlow(self, plan).start()
        elif profile.transport == "udp":
            _UdpClientFlow(self, plan).start()
        else:
            _PingFlow(self, plan).start()

    def _pick_target(self, profile: TrafficProfile) -> Optional[int]:
        if profile.server_kind is None:
            pool = self.system.hosts
        else:
            pool = self.system.servers_by_kind.get(profile.server_kind, [])
        mine = self.system.subnet_key[self.node_id]
        local = [n for n in pool if n != self.node_id and self.system.subnet_key[n] == mine]
        remote = [n for n in pool if n != self.node_id and self.system.subnet_key[n] != mine]
        if not local and not remote:
            return None
        if self.rng.random() < profile.wan_probability:
            chosen = remote or local
        else:
            chosen = local or remote
        return self.rng.choice(chosen)

    def _build_plan(self, profile: TrafficProfile, target: int) -> FlowPlan:
        rng = self.rng
        clip = profile.transport != "tcp"

        def size(dist):
            v = max(1, int(dist.draw(rng)))
            return min(v, MAX_UDP_PAYLOAD) if clip else v

        n_req = max(1, int(profile.requests_per_flow.draw(rng)))
        request_sizes = [size(profile.request_length) for _ in range(n_req)]
        gaps = [seconds(profile.time_between_requests.draw(rng)) for _ in range(n_req - 1)]
        reply_sizes: list[list[int]] = []
        reply_delays: list[list[int]] = []
        for _ in range(n_req):
            n_rep = max(1, int(profile.replies_per_request.draw(rng)))
            reply_sizes.append([size(profile.reply_length) for _ in range(n_rep)])
            reply_delays.append([seconds(profile.time_to_respond.draw(rng)) for _ in range(n_rep)])
        self.flow_counter += 1
        flow_id = self.node_id * 10_000_000 + self.flow_counter
        plan_port = self.stack.alloc_port(rng)
        sys = self.system
        return FlowPlan(
            flow_id=flow_id,
            profile_name=profile.name,
            transport=profile.transport,
            client_node=self.node_id,
            server_node=target,
            client_addr=self.stack.addr,
            server_addr=sys.network.plan.address_of(target),
            client_port=plan_port,
            server_port=profile.server_port or 0,
            request_sizes=request_sizes,
            gaps_ns=gaps,
            reply_sizes=reply_sizes,
            reply_delays_ns=reply_delays,
        )


class _FlowBase:
    def __init__(self, source: TrafficSource, plan: FlowPlan):
        self.source = source
        self.stack = source.stack
        self.system = source.system
        self.engine = source.system.engine
        self.plan = plan
        self.start_ns = self.engine.now
        self.received = 0
        self.finished = False

    def finalize(self, status: str) -> None:
        if self.finished:
            return
        self.finished = True
        plan = self.plan
        self.stack.release_port(plan.client_port)
        self.system.finish_flow(FlowRecord(
            flow_id=plan.flow_id,
            profile=plan.profile_name,
            transport=plan.transport,
            src_node=plan.client_node,
            dst_node=plan.server_node,
            src_addr=plan.client_addr,
            dst_addr=plan.server_addr,
            src_port=plan.client_port,
            dst_port=plan.server_port,
            start_ns=self.start_ns,
            end_ns=self.engine.now,
            request_bytes=plan.request_total,
            reply_bytes_expected=plan.reply_total,
            reply_bytes_received=self.received,
            status=status,
        ))


class _TcpClientFlow(_FlowBase):
    def __init__(self, source: TrafficSource, plan: FlowPlan):
        super().__init__(source, plan)
        self.req_index = 0
        self.key = (plan.client_port, plan.server_addr, plan.server_port)
        self.conn: TcpConnection | None = None

    def start(self) -> None:
        plan = self.plan
        conn = self.stack.tcp_connect(plan.server_addr, plan.server_port,
                                      plan.client_port, plan.flow_id, "background")
        self.conn = conn
        conn.on_established = self._established
        conn.on_data = self._on_data
        conn.on_closed = lambda: self._end("complete")
        conn.on_failed = lambda reason: self._end(f"failed:{reason}")
        conn.on_peer_fin = self._on_peer_fin
        self.engine.at(self.engine.now + FLOW_HARD_DEADLINE_NS, self._hard_deadline)
        self.stack.pump(self.key, conn.open())

    def _established(self) -> None:
        self._send_request(0)

    def _send_request(self, k: int) -> None:
        if self.finished or self.conn.state != "established" or self.conn.close_requested:
            return
        self.req_index = k
        self.stack.pump(self.key, self.conn.send(self.plan.request_sizes[k]))

    def _on_data(self, off: int, ln: int) -> None:
        self.received += ln
        plan = self.plan
        k = self.req_index
        if self.received >= plan.reply_cum[k]:
            if k + 1 < len(plan.request_sizes):
                self.engine.at(self.engine.now + plan.gaps_ns[k], self._send_request, k + 1)
            else:
                self.stack.pump(self.key, self.conn.close())

    def _on_peer_fin(self) -> None:
        # server closing early (e.g. its reply side failed): follow suit
        if not self.conn.close_requested and self.conn.state in ("established", "fin_wait"):
            self.stack.pump(self.key, self.conn.close())

    def _hard_deadline(self) -> None:
        if not self.finished:
            self.stack.pump(self.key, self.conn.abort())
            self._end("stalled")

    def _end(self, status: str) -> None:
        if self.finished:
            return
        if status == "complete" and self.received < self.plan.reply_total:
            status = "truncated"
        self.stack.retire_conn(self.key, 4 * self.conn.rto_ns)
        self.finalize(status)


class _UdpClientFlow(_FlowBase):
    def start(self) -> None:
        plan = self.plan
        self.stack.udp_bind(plan.client_port, "background", self._on_datagram)
        t = self.engine.now
        last_sent = t
        for k, size in enumerate(plan.request_sizes):
            self.engine.at(t, self._send_request, k, size)
            last_sent = t
            if k < len(plan.gaps_ns):
                t += plan.gaps_ns[k]
        tail = sum(plan.reply_delays_ns[-1]) if plan.reply_delays_ns else 0
        self.engine.at(last_sent + tail + UDP_REPLY_GRACE_NS, self._deadline)

    def _send_request(self, k: int, size: int) -> None:
        if self.finished:
            return
        plan = self.plan
        self.stack.transmit(self.stack.udp_packet(
            plan.server_addr, plan.client_port, plan.server_port,
            size, plan.flow_id, k, "background"))

    def _on_datagram(self, stack: HostStack, pkt: Packet, t: SimTime) -> None:
        if self.finished:
            return
        self.received += pkt.payload_len
        if self.received >= self.plan.reply_total:
            self._end("complete")

    def _deadline(self) -> None:
        if not self.finished:
            self._end("timeout")

    def _end(self, status: str) -> None:
        self.stack.udp_unbind(self.plan.client_port, "background")
        self.finalize(status)


class _PingFlow(_FlowBase):
    def __init__(self, source: TrafficSource, plan: FlowPlan):
        super().__init__(source, plan)
        self.replies = 0

    def start(self) -> None:
        plan = self.plan
        self.stack.icmp_bind(plan.flow_id, self._on_reply)
        t = self.engine.now
        last = t
        for k, size in enumerate(plan.request_sizes):
            self.engine.at(t, self._send_echo, k, size)
            last = t
            if k < len(plan.gaps_ns):
                t += plan.gaps_ns[k]
        self.engine.at(last + UDP_REPLY_GRACE_NS, self._deadline)

    def _send_echo(self, k: int, size: int) -> None:
        if self.finished:
            return
        self.stack.transmit(self.stack.icmp_packet(
            self.plan.server_addr, ICMP_ECHO_REQUEST, size, self.plan.flow_id, k, "background"))

    def _on_reply(self, pkt: Packet, t: SimTime) -> None:
        if self.finished:
            return
        self.replies += 1
        self.received += pkt.payload_len
        if self.replies >= len(self.plan.request_sizes):
            self._end("complete")

    def _deadline(self) -> None:
        if not self.finished:
            self._end("timeout")

    def _end(self, status: str) -> None:
        self.stack.icmp_unbind(self.plan.flow_id)
        self.finalize(status)
