"""The propagation machine: scanning loops, infection handshakes, recovery.

One WormRun drives one epidemic over an installed TrafficSystem. Infected
hosts scan through the same host stacks and links as background flows, so the
two traffic classes compete for queue slots and serialization time. Every
behavioral draw comes from the scanning host's "worm.host.<id>" stream;
background streams are never touched.
"""

from __future__ import annotations

from typing import Optional

from ..engine import MS, Engine, SimTime, seconds
from ..network import Network
from ..packets import PROTO_UDP, Packet
from ..topology.addressing import IntervalSet
from ..traffic.apps import WORM_PORT_HI, WORM_PORT_LO, HostStack, TrafficSystem
from ..traffic.tcp import TcpConnection
from .config import WormConfig, WormConfigError
from .scanning import choose_target
from .state import (
    INFECTED,
    RECOVERED,
    SUSCEPTIBLE,
    HostInfectionState,
    InfectionRecord,
    recovery_delay_ms,
)

RESPAWN_GAP_NS = 1  # breaks same-instant respawn chains without skewing timing
DORMANT_RETRY_NS = 10 * MS  # re-poll cadence when a host has nothing to attack
_SELF_REDRAWS = 16


class TcpWormState:
    """Per-infected-host bundle of concurrent infection workers."""

    __slots__ = ("owner", "slots", "threads")

    def __init__(self, owner: int, slots: int):
        self.owner = owner
        self.slots = slots
        self.threads: list[_WormThread] = []


class WormRun:
    """One origin, one epidemic, one ground-truth tree."""

    def __init__(self, engine: Engine, network: Network, system: TrafficSystem,
                 config: WormConfig, vulnerable: list[int], origin: int,
                 start_ns: SimTime):
        config.validate()
        self.engine = engine
        self.network = network
        self.system = system
        self.config = config
        self.plan = network.plan
        self.origin = origin
        self.start_ns = start_ns

        blocks = list(config.scan_range) if config.scan_range else self.plan.host_blocks()
        self.scan_pool = IntervalSet.from_cidrs(blocks)
        if not self.scan_pool:
            raise WormConfigError("scan range resolves to zero addresses")

        self.state: dict[int, HostInfectionState] = {
            nid: HostInfectionState() for nid in vulnerable}
        if origin not in self.state:
            raise WormConfigError(f"origin node {origin} is not in the vulnerable population")

        self.records: list[InfectionRecord] = []
        self.transitions: list[tuple[SimTime, int, str]] = []
        self.scan_counts = {"random": 0, "class_a": 0, "class_b": 0,
                            "subnet": 0, "fallback": 0}
        self.probes_sent = 0
        self.thread_outcomes = {"delivered": 0, "refused": 0, "timeout": 0, "reset": 0}
        self._flow_counter: dict[int, int] = {}
        self._tcp_state: dict[int, TcpWormState] = {}

        self._install_victim_services()
        engine.at(start_ns, self._seed)

    # ------------------------------------------------------------ plumbing

    def _rng(self, node: int):
        return self.engine.rng_stream(f"worm.host.{node}")

    def _draw_target(self, node: int, rng) -> tuple[Optional[int], Optional[str]]:
        # A scanner never attacks its own address: loopback delivery is
        # synchronous, so a self-connect would finish in zero simulated time
        # and a single-address pool would starve the event loop.
        own = self.plan.address_of(node)
        for _ in range(_SELF_REDRAWS):
            target, scope = choose_target(self.plan, node, self.scan_pool, rng,
                                          self.config.scanning)
            if target != own:
                return target, scope
        return None, None

    def _next_flow_id(self, node: int) -> int:
        c = self._flow_counter.get(node, 0) + 1
        self._flow_counter[node] = c
        return node * 10_000_000 + 8_000_000 + c

    def _install_victim_services(self) -> None:
        port = self.config.infection_port
        for nid in self.state:
            stack = self.system.stacks[nid]
            if self.config.transport == "udp":
                stack.udp_bind(port, "worm", self._udp_probe_received)
            else:
                stack.tcp_listen(port, "worm", self._accept_infection)

    def status_of(self, node: int) -> str:
        st = self.state.get(node)
        return st.status if st is not None else SUSCEPTIBLE

    def count_by_status(self) -> dict[str, int]:
        out = {SUSCEPTIBLE: 0, INFECTED: 0, RECOVERED: 0}
        for st in self.state.values():
            out[st.status] += 1
        return out

    # ----------------------------------------------------------- epidemic

    def _seed(self) -> None:
        if not self._infect(self.origin, None, 0, self.engine.now):
            raise WormConfigError(f"origin node {self.origin} could not be seeded")

    def _infect(self, node: int, infector: Optional[int], flow_id: int,
                t: SimTime, src_port: int = 0, dst_port: int = 0) -> bool:
        st = self.state.get(node)
        if st is None or st.status != SUSCEPTIBLE:
            return False
        st.status = INFECTED
        st.infected_at = t
        st.infector = infector
        self.transitions.append((t, node, INFECTED))
        if infector is not None:
            self.records.append(InfectionRecord(
                time_ns=t,
                attacker_addr=self.plan.address_of(infector),
                victim_addr=self.plan.address_of(node),
                transport=self.config.transport,
                flow_id=flow_id,
                src_port=src_port,
                dst_port=dst_port,
            ))
        delay_ms = recovery_delay_ms(self.config.recovery_probability, self._rng(node))
        if delay_ms is not None:
            self.engine.at(t + delay_ms * MS, self._recover, node)
        # zero activation delay: the new host scans from the instant it turns
        if self.config.transport == "udp":
            self.engine.at(t, self._udp_tick, node)
        else:
            tstate = TcpWormState(node, self.config.concurrent_connections)
            self._tcp_state[node] = tstate
            self.engine.at(t, self._fill_slots, node)
        return True

    def _recover(self, node: int) -> None:
        st = self.state[node]
        if st.status != INFECTED:
            return
        st.status = RECOVERED
        self.transitions.append((self.engine.now, node, RECOVERED))
        tstate = self._tcp_state.pop(node, None)
        if tstate is not None:
            for th in list(tstate.threads):  # mid-transfer connections are reset
                th.abort()
            tstate.threads.clear()

    # ----------------------------------------------------------- udp worm

    def _udp_tick(self, node: int) -> None:
        if self.state[node].status != INFECTED:
            return
        rng = self._rng(node)
        target, scope = self._draw_target(node, rng)
        if target is not None:
            self.scan_counts[scope] += 1
            stack = self.system.stacks[node]
            stack.transmit(Packet(
                uid=0, src_addr=stack.addr, dst_addr=target, protocol=PROTO_UDP,
                src_port=rng.randint(WORM_PORT_LO, WORM_PORT_HI),
                dst_port=self.config.infection_port,
                payload_len=self.config.payload_length,
                flow_id=self._next_flow_id(node), origin="worm",
            ))
            self.probes_sent += 1
        gap = max(1, seconds(self.config.probe_interval.draw(rng)))
        self.engine.at(self.engine.now + gap, self._udp_tick, node)

    def _udp_probe_received(self, stack: HostStack, pkt: Packet, t: SimTime) -> None:
        if pkt.payload_len >= self.config.payload_length:
            attacker = self.plan.node_of(pkt.src_addr)
            if attacker is not None:
                self._infect(stack.node_id, attacker, pkt.flow_id, t,
                             pkt.src_port, pkt.dst_port)

    # ----------------------------------------------------------- tcp worm

    def _fill_slots(self, node: int) -> None:
        tstate = self._tcp_state.get(node)
        if tstate is None or self.state[node].status != INFECTED:
            return
        while len(tstate.threads) < tstate.slots:
            target, scope = self._draw_target(node, self._rng(node))
            if target is None:
                self.engine.at(self.engine.now + DORMANT_RETRY_NS,
                               self._fill_slots, node)
                return
            self.scan_counts[scope] += 1
            _WormThread(self, node, tstate, target)

    def _accept_infection(self, stack: HostStack, conn: TcpConnection,
                          syn: Packet) -> bool:
        _VictimSession(self, stack, conn, syn)
        return True


class _WormThread:
    """One infection attempt: scan a target, connect, push the payload."""

    __slots__ = ("run", "node", "tstate", "stack", "target", "lport", "flow_id",
                 "key", "conn", "done")

    def __init__(self, run: WormRun, node: int, tstate: TcpWormState, target: int):
        self.run = run
        self.node = node
        self.tstate = tstate
        self.stack = run.system.stacks[node]
        rng = run._rng(node)
        self.target = target
        port = run.config.infection_port
        lport = self.stack.alloc_port(rng, WORM_PORT_LO, WORM_PORT_HI)
        while (lport, self.target, port) in self.stack.tcp_conns:
            # a lingering retired connection still owns this exact key
            self.stack.release_port(lport)
            lport = self.stack.alloc_port(rng, WORM_PORT_LO, WORM_PORT_HI)
        self.lport = lport
        self.flow_id = run._next_flow_id(node)
        self.key = (lport, self.target, port)
        self.done = False
        conn = self.stack.tcp_connect(self.target, port, lport, self.flow_id, "worm")
        self.conn = conn
        conn.on_established = self._push_payload
        conn.on_closed = lambda: self._finish("delivered")
        conn.on_failed = self._finish
        tstate.threads.append(self)
        run.probes_sent += 1
        self.stack.pump(self.key, conn.open())

    def _push_payload(self) -> None:
        pkts = self.conn.send(self.run.config.payload_length)
        pkts += self.conn.close()
        self.stack.pump(self.key, pkts)

    def _finish(self, reason: str) -> None:
        if self.done:
            return
        self.done = True
        self.run.thread_outcomes[reason] = self.run.thread_outcomes.get(reason, 0) + 1
        self.stack.release_port(self.lport)
        self.stack.retire_conn(self.key, 4 * self.conn.rto_ns)
        if self in self.tstate.threads:
            self.tstate.threads.remove(self)
        self.run.engine.at(self.run.engine.now + RESPAWN_GAP_NS,
                           self.run._fill_slots, self.node)

    def abort(self) -> None:
        """Owner recovered: reset the connection and do not respawn."""
        if self.done:
            return
        self.done = True
        self.stack.pump(self.key, self.conn.abort())
        self.stack.release_port(self.lport)
        self.stack.retire_conn(self.key, 4 * self.conn.rto_ns)


class _VictimSession:
    """Receiving side of an infection connection on a vulnerable host.

    The service accepts regardless of current status (an infected or recovered
    host still runs the vulnerable daemon); only a full payload into a
    susceptible host flips state.
    """

    __slots__ = ("run", "stack", "conn", "key", "attacker_addr", "attacker_port",
                 "flow_id", "received", "fired")

    def __init__(self, run: WormRun, stack: HostStack, conn: TcpConnection,
                 syn: Packet):
        self.run = run
        self.stack = stack
        self.conn = conn
        self.key = (syn.dst_port, syn.src_addr, syn.src_port)
        self.attacker_addr = syn.src_addr
        self.attacker_port = syn.src_port
        self.flow_id = syn.flow_id
        self.received = 0
        self.fired = False
        conn.on_data = self._on_data
        conn.on_peer_fin = self._on_peer_fin
        conn.on_closed = self._retire
        conn.on_failed = lambda reason: self._retire()

    def _on_data(self, off: int, ln: int) -> None:
        self.received += ln
        if self.received >= self.run.config.payload_length and not self.fired:
            self.fired = True  # ground-truth instant: final payload byte received
            attacker = self.run.plan.node_of(self.attacker_addr)
            if attacker is not None:
                self.run._infect(self.stack.node_id, attacker, self.flow_id,
                                 self.run.engine.now, self.attacker_port,
                                 self.run.config.infection_port)

    def _on_peer_fin(self) -> None:
        if not self.conn.close_requested and self.conn.state in ("established", "fin_wait"):
            self.stack.pump(self.key, self.conn.close())

    def _retire(self) -> None:
        self.stack.retire_conn(self.key, 4 * self.conn.rto_ns)
