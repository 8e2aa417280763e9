"""Reliable byte-stream transport for background flows and worm transfers.

Deliberately small: cumulative ACKs only, a fixed per-connection
retransmission timeout, and go-back-N recovery (on timeout the send cursor
rewinds to the oldest unacknowledged byte and re-pumping resumes under the
congestion window). The receiver is in-order only: anything past a gap is
discarded and answered with a duplicate cumulative ACK. No SACK, no fast
retransmit, no window scaling. Congestion control is classic slow start plus
linear increase, counted in whole segments.

Connections are engine-independent. Every method that can produce traffic
returns the packets to transmit; the caller owns delivery and timers. Timer
contract: whenever `wants_timer` is true the caller must have a timer armed
for `timer_epoch`, firing `rto_ns` after the arming call; stale epochs are
ignored, so lazy cancellation is fine.
"""

from __future__ import annotations

from typing import Callable, Optional

from ..engine import MS, SimTime
from ..packets import ACK, FIN, PSH, RST, SYN, Packet

MSS = 1460
MIN_RTO_NS: SimTime = 10 * MS

CLOSED = "closed"
LISTEN = "listen"
SYN_SENT = "syn_sent"
SYN_RCVD = "syn_rcvd"
ESTABLISHED = "established"
FIN_WAIT = "fin_wait"


class TcpError(RuntimeError):
    pass


class TcpConnection:
    """One directional pair of a simplified TCP conversation.

    make_packet(seq, ack, flags, payload_len) supplies addressed packets;
    the connection itself never sees addresses. Sequence numbers are
    relative: SYN occupies 0, data starts at 1, FIN takes one number after
    the last data byte. Callbacks fire synchronously from within the method
    that triggered them; re-entrant send()/close() calls are safe because
    pumping is idempotent under the window.
    """

    def __init__(
        self,
        make_packet: Callable[[int, int, int, int], Packet],
        *,
        rto_ns: SimTime,
        mss: int = MSS,
        initial_cwnd: int = 2,
        initial_ssthresh: int = 64,
        max_retrans: int = 5,
        max_syn_retries: int = 3,
        passive: bool = False,
    ):
        self._make = make_packet
        self.rto_ns = max(int(rto_ns), MIN_RTO_NS)
        self.mss = mss
        self.max_retrans = max_retrans
        self.max_syn_retries = max_syn_retries
        self.passive = passive

        self.state = CLOSED
        self.snd_una = 0
        self.snd_nxt = 0
        self.rcv_nxt = 0
        self.app_send_total = 0
        self.close_requested = False
        self.peer_fin_received = False

        self.cwnd = initial_cwnd
        self.ssthresh = initial_ssthresh
        self._cwnd_frac = 0

        self.wants_timer = False
        self.timer_epoch = 0
        self._retrans_rounds = 0
        self._syn_retries = 0
        self._high_water = 0
        self._drain_mark = 0

        self.data_segments_sent = 0
        self.data_segments_retransmitted = 0
        self.timeouts = 0
        self.failed_reason: Optional[str] = None

        self.on_established: Optional[Callable[[], None]] = None
        self.on_data: Optional[Callable[[int, int], None]] = None
        self.on_peer_fin: Optional[Callable[[], None]] = None
        self.on_closed: Optional[Callable[[], None]] = None
        self.on_failed: Optional[Callable[[str], None]] = None
        self.on_drained: Optional[Callable[[], None]] = None

    # ------------------------------------------------------------- app API

    def open(self) -> list[Packet]:
        if self.state != CLOSED or self.passive:
            raise TcpError(f"open() in state {self.state}")
        self.state = SYN_SENT
        self.snd_una = 0
        self.snd_nxt = 1
        self._restart_timer()
        return [self._make(0, 0, SYN, 0)]

    def listen(self) -> None:
        if self.state != CLOSED or not self.passive:
            raise TcpError(f"listen() in state {self.state}")
        self.state = LISTEN

    def send(self, nbytes: int) -> list[Packet]:
        if nbytes <= 0:
            raise TcpError(f"send of {nbytes} bytes")
        if self.state not in (SYN_SENT, SYN_RCVD, ESTABLISHED) or self.close_requested:
            raise TcpError(f"send() in state {self.state} (close_requested={self.close_requested})")
        self.app_send_total += nbytes
        if self.state == ESTABLISHED:
            return self._pump()
        return []

    def close(self) -> list[Packet]:
        """Half-close after all queued data; FIN rides out once the stream is fully emitted."""
        if self.state in (CLOSED, LISTEN):
            raise TcpError(f"close() in state {self.state}")
        if self.close_requested:
            return []
        self.close_requested = True
        if self.state in (ESTABLISHED, FIN_WAIT):
            return self._pump()
        return []

    def abort(self) -> list[Packet]:
        if self.state in (CLOSED, LISTEN):
            self.state = CLOSED
            return []
        pkt = self._make(self.snd_nxt, self.rcv_nxt, RST | ACK, 0)
        self.state = CLOSED
        self._stop_timer()
        return [pkt]

    # ------------------------------------------------------------- timers

    def on_timer(self, epoch: int) -> list[Packet]:
        if not self.wants_timer or epoch != self.timer_epoch or self.state == CLOSED:
            return []
        if self.state == SYN_SENT:
            if self._syn_retries >= self.max_syn_retries:
                self._fail("timeout")
                return []
            self._syn_retries += 1
            self._restart_timer()
            return [self._make(0, 0, SYN, 0)]
        if self.state == SYN_RCVD:
            if self._syn_retries >= self.max_syn_retries:
                self._fail("timeout")
                return []
            self._syn_retries += 1
            self._restart_timer()
            return [self._make(0, self.rcv_nxt, SYN | ACK, 0)]
        # established / fin_wait retransmission round
        if self.snd_una == self.snd_nxt:
            self._stop_timer()
            return []
        if self._retrans_rounds >= self.max_retrans:
            self._fail("timeout")
            return []
        self._retrans_rounds += 1
        self.timeouts += 1
        flight = self._flight_segments()
        self.ssthresh = max(flight // 2, 2)
        self.cwnd = 1
        self._cwnd_frac = 0
        self.snd_nxt = self.snd_una  # go back: everything past the gap re-pumps
        out = self._pump()
        self._restart_timer()
        return out

    # ------------------------------------------------------------- receive

    def on_packet(self, pkt: Packet) -> list[Packet]:
        if self.state == CLOSED:
            # After a graceful close, keep re-ACKing seq-consuming repeats so a
            # peer whose final ACK was dropped is not stranded mid-teardown.
            if self.failed_reason is None and self.rcv_nxt and (
                pkt.payload_len or pkt.tcp_flags & (FIN | SYN)
            ):
                return [self._make(self.snd_nxt, self.rcv_nxt, ACK, 0)]
            return []
        if self.state == LISTEN:
            if pkt.tcp_flags & SYN and not pkt.tcp_flags & ACK:
                self.rcv_nxt = pkt.tcp_seq + 1
                self.snd_una = 0
                self.snd_nxt = 1
                self.state = SYN_RCVD
                self._restart_timer()
                return [self._make(0, self.rcv_nxt, SYN | ACK, 0)]
            return []
        if pkt.tcp_flags & RST:
            self._fail("refused" if self.state == SYN_SENT else "reset")
            return []
        if self.state == SYN_SENT:
            if pkt.tcp_flags & SYN and pkt.tcp_flags & ACK and pkt.tcp_ack == self.snd_nxt:
                self.snd_una = pkt.tcp_ack
                self.rcv_nxt = pkt.tcp_seq + 1
                self._become_established()
                out = [self._emit_ack()]
                out += self._pump()
                if self.snd_una == self.snd_nxt:
                    self._stop_timer()
                else:
                    self._restart_timer()
                return out
            return []
        if self.state == SYN_RCVD:
            if pkt.tcp_flags & SYN:  # our SYN-ACK was lost; peer repeats
                self._restart_timer()
                return [self._make(0, self.rcv_nxt, SYN | ACK, 0)]
            if pkt.tcp_flags & ACK and pkt.tcp_ack == self.snd_nxt:
                self.snd_una = pkt.tcp_ack
                self._become_established()
                self._stop_timer()
                out = self._pump()
                if self.snd_una != self.snd_nxt:
                    self._restart_timer()
                # piggybacked payload or FIN continues below
                return out + self._receive_segment(pkt)
            return []
        # established / fin_wait
        if pkt.tcp_flags & SYN:  # stale handshake repeat: re-ACK it
            return [self._emit_ack()]
        out: list[Packet] = []
        if pkt.tcp_flags & ACK:
            out += self._handle_ack(pkt.tcp_ack)
        if self.state in (ESTABLISHED, FIN_WAIT):  # _handle_ack may have closed us
            out += self._receive_segment(pkt)
        return out

    # ------------------------------------------------------------- internals

    def _become_established(self) -> None:
        self.state = ESTABLISHED
        self._syn_retries = 0
        if self.on_established:
            self.on_established()

    def _data_end(self) -> int:
        return 1 + self.app_send_total

    def _flight_segments(self) -> int:
        return (self.snd_nxt - self.snd_una + self.mss - 1) // self.mss

    def _emit_ack(self) -> Packet:
        return self._make(self.snd_nxt, self.rcv_nxt, ACK, 0)

    def _restart_timer(self) -> None:
        self.timer_epoch += 1
        self.wants_timer = True

    def _stop_timer(self) -> None:
        self.timer_epoch += 1
        self.wants_timer = False

    def _fail(self, reason: str) -> None:
        self.state = CLOSED
        self.failed_reason = reason
        self._stop_timer()
        if self.on_failed:
            self.on_failed(reason)

    def _pump(self) -> list[Packet]:
        """Emit data (and the trailing FIN) as far as the window allows."""
        out: list[Packet] = []
        if self.state not in (ESTABLISHED, FIN_WAIT):
            return out
        end = self._data_end()
        while self.snd_nxt < end and self._flight_segments() < self.cwnd:
            chunk = min(self.mss, end - self.snd_nxt)
            flags = ACK | (PSH if self.snd_nxt + chunk == end else 0)
            out.append(self._make(self.snd_nxt, self.rcv_nxt, flags, chunk))
            self.data_segments_sent += 1
            if self.snd_nxt < self._high_water:
                self.data_segments_retransmitted += 1
            self.snd_nxt += chunk
        if self.close_requested and self.snd_nxt == end:
            out.append(self._make(self.snd_nxt, self.rcv_nxt, FIN | ACK, 0))
            self.snd_nxt += 1
            if self.state == ESTABLISHED:
                self.state = FIN_WAIT
        if self.snd_nxt > self._high_water:
            self._high_water = self.snd_nxt
        if out and not self.wants_timer:
            self._restart_timer()
        return out

    def _handle_ack(self, ack: int) -> list[Packet]:
        if ack <= self.snd_una:
            return []  # duplicate or stale; no fast retransmit here
        if ack > self.snd_nxt:
            ack = self.snd_nxt
        self.snd_una = ack
        self._retrans_rounds = 0
        if self.cwnd < self.ssthresh:
            self.cwnd += 1
        else:
            self._cwnd_frac += 1
            if self._cwnd_frac >= self.cwnd:
                self.cwnd += 1
                self._cwnd_frac = 0
        acked_data = min(self.snd_una - 1, self.app_send_total)
        if acked_data == self.app_send_total and acked_data > self._drain_mark:
            self._drain_mark = acked_data
            if self.on_drained:
                self.on_drained()  # may re-enter send()/close() via the host stack
        out = self._pump()
        if self.snd_una == self.snd_nxt:
            self._stop_timer()
        else:
            self._restart_timer()
        self._check_closed()
        return out

    def _receive_segment(self, pkt: Packet) -> list[Packet]:
        """In-order byte delivery plus FIN accounting; returns ACKs to send."""
        seg = pkt.tcp_seq
        consumed = False
        if pkt.payload_len:
            consumed = True
            end = seg + pkt.payload_len
            if seg > self.rcv_nxt:
                return [self._emit_ack()]  # past a gap: discard, duplicate ACK
            if end > self.rcv_nxt:
                offset = self.rcv_nxt - 1
                length = end - self.rcv_nxt
                self.rcv_nxt = end
                if self.on_data:
                    self.on_data(offset, length)
            # fully duplicate payload falls through to a plain re-ACK
        if pkt.tcp_flags & FIN:
            fin_pos = seg + pkt.payload_len
            if fin_pos > self.rcv_nxt:
                return [self._emit_ack()]
            consumed = True
            if fin_pos == self.rcv_nxt and not self.peer_fin_received:
                self.peer_fin_received = True
                self.rcv_nxt += 1
                if self.on_peer_fin:
                    self.on_peer_fin()  # may re-enter close()
            self._check_closed()
        if consumed:
            return [self._emit_ack()]  # even if that FIN just closed us: peer needs its ACK
        return []

    def _check_closed(self) -> None:
        if (
            self.state == FIN_WAIT
            and self.peer_fin_received
            and self.snd_una == self.snd_nxt
            and self.snd_nxt == self._data_end() + 1
        ):
            self.state = CLOSED
            self._stop_timer()
            if self.on_closed:
                self.on_closed()
