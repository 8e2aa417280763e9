"""Discrete-event core: integer-nanosecond clock, ordered event queue, links, RNG streams.

Everything that happens in a run flows through one Engine instance. Events are
totally ordered by (time, insertion sequence), so identically-timed events run
in the order they were scheduled and a fixed seed reproduces a run exactly.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Callable

SimTime = int  # nanoseconds since run start

NS = 1
US = 1_000
MS = 1_000_000
SECOND = 1_000_000_000


def seconds(s: float) -> SimTime:
    return int(round(s * SECOND))


class EngineError(Exception):
    pass


class EventKind(IntEnum):
    PACKET_ARRIVAL = 0
    TIMER_EXPIRY = 1
    FLOW_START = 2
    PROBE_DUE = 3
    RECOVERY_CHECK = 4


@dataclass(slots=True)
class Event:
    time: SimTime
    seq: int
    kind: EventKind
    target: int  # node id the event concerns (-1 when not node-bound)
    payload: Any = None


class RngStream:
    """A labeled deterministic random stream derived from (seed, label).

    Derivation goes through SHA-256 so labels can be arbitrary strings and
    streams with different labels are statistically independent.
    """

    __slots__ = ("label", "_rng")

    def __init__(self, seed: int, label: str):
        digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
        self.label = label
        self._rng = random.Random(int.from_bytes(digest[:16], "big"))

    def random(self) -> float:
        return self._rng.random()

    def uniform(self, a: float, b: float) -> float:
        return self._rng.uniform(a, b)

    def randint(self, a: int, b: int) -> int:
        return self._rng.randint(a, b)

    def choice(self, seq):
        return self._rng.choice(seq)

    def sample(self, seq, k: int):
        return self._rng.sample(seq, k)

    def shuffle(self, seq) -> None:
        self._rng.shuffle(seq)

    def getrandbits(self, k: int) -> int:
        return self._rng.getrandbits(k)

    def expovariate(self, lambd: float) -> float:
        return self._rng.expovariate(lambd)


@dataclass(slots=True)
class _LinkDir:
    """One direction of a link: the serializer plus its drop-tail FIFO."""

    busy_until: SimTime = 0
    ends: list = field(default_factory=list)  # serialization-end times of packets in the buffer


class Link:
    """Full-duplex point-to-point link with per-direction FIFO output buffers.

    A packet submitted at t starts serializing at max(t, busy_until) and is
    delivered serialization_time + propagation delay later. A packet that would
    find more than queue_capacity packets already waiting (the one on the wire
    does not count) is dropped.
    """

    __slots__ = ("a", "b", "bandwidth_bps", "delay_ns", "queue_capacity", "_dirs", "drops")

    def __init__(self, a: int, b: int, bandwidth_bps: int, delay_ns: int, queue_capacity: int = 100):
        if bandwidth_bps <= 0 or delay_ns < 0 or queue_capacity < 1 or a == b:
            raise EngineError(f"bad link parameters for ({a},{b})")
        self.a = a
        self.b = b
        self.bandwidth_bps = bandwidth_bps
        self.delay_ns = delay_ns
        self.queue_capacity = queue_capacity
        self._dirs = {b: _LinkDir(), a: _LinkDir()}  # keyed by destination endpoint
        self.drops = 0

    def endpoints(self) -> tuple[int, int]:
        return (self.a, self.b)

    def other(self, node: int) -> int:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise EngineError(f"node {node} not on link ({self.a},{self.b})")

    def serialization_ns(self, size_bytes: int) -> int:
        # ceil so accounted utilization never exceeds capacity
        return -((-size_bytes * 8 * SECOND) // self.bandwidth_bps)

    def transmit(self, toward: int, size_bytes: int, t: SimTime) -> SimTime | None:
        """Submit size_bytes toward endpoint `toward` at time t.

        Returns the delivery time, or None if the buffer was full and the
        packet was dropped.
        """
        if size_bytes < 28:
            raise EngineError(f"packet below minimum header size: {size_bytes}")
        d = self._dirs.get(toward)
        if d is None:
            raise EngineError(f"endpoint {toward} not on link ({self.a},{self.b})")
        ends = d.ends
        while ends and ends[0] <= t:
            ends.pop(0)
        if ends and len(ends) - 1 >= self.queue_capacity:
            self.drops += 1
            return None
        start = d.busy_until if d.busy_until > t else t
        end = start + self.serialization_ns(size_bytes)
        d.busy_until = end
        ends.append(end)
        return end + self.delay_ns


class Engine:
    """Single-threaded event loop with labeled RNG streams and shared counters."""

    def __init__(self, seed: int):
        self.seed = seed
        self.now: SimTime = 0
        self._heap: list = []
        self._seq = 0
        self._cancelled: set[int] = set()
        self._handlers: dict[EventKind, Callable[[Event], None]] = {}
        self._streams: dict[str, RngStream] = {}
        self.events_processed = 0
        self.counters: dict[str, int] = {}

    def rng_stream(self, label: str) -> RngStream:
        s = self._streams.get(label)
        if s is None:
            s = RngStream(self.seed, label)
            self._streams[label] = s
        return s

    def subscribe(self, kind: EventKind, handler: Callable[[Event], None]) -> None:
        self._handlers[kind] = handler

    def schedule(self, time: SimTime, kind: EventKind, target: int = -1, payload: Any = None) -> int:
        """Queue an event; returns its sequence id (usable with cancel)."""
        if time < self.now:
            raise EngineError(f"scheduling in the past: {time} < clock {self.now}")
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._heap, (time, seq, kind, target, payload))
        return seq

    def cancel(self, seq: int) -> None:
        self._cancelled.add(seq)

    def at(self, time: SimTime, fn: Callable, *args) -> int:
        """Convenience timer: run fn(*args) at `time`."""
        return self.schedule(time, EventKind.TIMER_EXPIRY, -1, (fn, args))

    def count(self, key: str, n: int = 1) -> None:
        self.counters[key] = self.counters.get(key, 0) + n

    def run_until(self, t_end: SimTime) -> dict:
        """Process events in (time, seq) order through t_end inclusive.

        Returns a snapshot of run statistics; the clock is left at t_end.
        """
        heap = self._heap
        cancelled = self._cancelled
        handlers = self._handlers
        timer_kind = EventKind.TIMER_EXPIRY
        while heap and heap[0][0] <= t_end:
            time, seq, kind, target, payload = heapq.heappop(heap)
            if cancelled:
                if seq in cancelled:
                    cancelled.discard(seq)
                    continue
            self.now = time
            self.events_processed += 1
            if kind == timer_kind and target == -1:
                fn, args = payload
                fn(*args)
            else:
                handlers[kind](Event(time, seq, kind, target, payload))
        self.now = t_end
        stats = {"events_processed": self.events_processed, "final_clock": self.now}
        stats.update(self.counters)
        return stats

    def pending(self) -> int:
        return len(self._heap) - len(self._cancelled)
