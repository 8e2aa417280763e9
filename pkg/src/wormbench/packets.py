"""Packet model and raw-IPv4 wire serialization.

Packets travel the simulator as lightweight records; bytes are produced once,
on first capture, and cached so both endpoint traces carry identical content.
Payloads are a deterministic function of (payload seed, flow id, stream
offset), which keeps retransmitted TCP segments byte-identical.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass, field

PROTO_ICMP = 1
PROTO_TCP = 6
PROTO_UDP = 17

IP_HEADER = 20
UDP_HEADER = 8
TCP_HEADER = 20
ICMP_HEADER = 8

# TCP flag bits
FIN = 0x01
SYN = 0x02
RST = 0x04
PSH = 0x08
ACK = 0x10

_TRANSPORT_NAMES = {PROTO_ICMP: "icmp", PROTO_TCP: "tcp", PROTO_UDP: "udp"}


def ip_str(addr: int) -> str:
    return f"{addr >> 24 & 255}.{addr >> 16 & 255}.{addr >> 8 & 255}.{addr & 255}"


def ip_int(dotted: str) -> int:
    parts = dotted.split(".")
    if len(parts) != 4:
        raise ValueError(f"bad IPv4 address: {dotted!r}")
    value = 0
    for p in parts:
        o = int(p)
        if not 0 <= o <= 255:
            raise ValueError(f"bad IPv4 address: {dotted!r}")
        value = (value << 8) | o
    return value


def cidr_range(block: str) -> tuple[int, int]:
    """'10.0.0.0/22' -> inclusive (lo, hi) address pair."""
    base, _, bits = block.partition("/")
    prefix = int(bits) if bits else 32
    if not 0 <= prefix <= 32:
        raise ValueError(f"bad prefix length in {block!r}")
    lo = ip_int(base) & ~((1 << (32 - prefix)) - 1) & 0xFFFFFFFF
    return lo, lo + (1 << (32 - prefix)) - 1


def checksum16(data: bytes) -> int:
    """RFC 1071 ones-complement sum over 16-bit big-endian words."""
    if len(data) & 1:
        data = data + b"\x00"
    s = sum(struct.unpack(f"!{len(data) // 2}H", data))
    s = (s & 0xFFFF) + (s >> 16)
    s = (s & 0xFFFF) + (s >> 16)
    return ~s & 0xFFFF


@dataclass(slots=True)
class Packet:
    uid: int
    src_addr: int
    dst_addr: int
    protocol: int
    src_port: int = 0
    dst_port: int = 0
    payload_len: int = 0
    tcp_seq: int = 0
    tcp_ack: int = 0
    tcp_flags: int = 0
    icmp_type: int = 0
    flow_id: int = 0
    origin: str = "background"  # or "worm"; never serialized into pcap bytes
    _wire: bytes | None = field(default=None, repr=False)

    @property
    def size_bytes(self) -> int:
        if self.protocol == PROTO_TCP:
            return IP_HEADER + TCP_HEADER + self.payload_len
        if self.protocol == PROTO_UDP:
            return IP_HEADER + UDP_HEADER + self.payload_len
        return IP_HEADER + ICMP_HEADER + self.payload_len

    @property
    def transport(self) -> str:
        return _TRANSPORT_NAMES.get(self.protocol, str(self.protocol))


def payload_bytes(payload_seed: int, flow_id: int, offset: int, n: int) -> bytes:
    if n == 0:
        return b""
    key = (payload_seed * 0x9E3779B97F4A7C15 + flow_id * 0x100000001B3 + offset) & 0xFFFFFFFFFFFFFFFF
    return random.Random(key).randbytes(n)


def serialize(pkt: Packet, payload_seed: int, l4_checksums: bool = False) -> bytes:
    """Render pkt as a raw IPv4 datagram (linktype 101 framing: IP is layer 1).

    The IPv4 header checksum is always correct. TCP/UDP checksums are zero
    unless l4_checksums is set; ICMP checksums are always computed.
    """
    if pkt._wire is not None:
        return pkt._wire

    payload = payload_bytes(payload_seed, pkt.flow_id, pkt.tcp_seq, pkt.payload_len)

    if pkt.protocol == PROTO_TCP:
        l4 = struct.pack(
            "!HHIIHHHH",
            pkt.src_port,
            pkt.dst_port,
            pkt.tcp_seq & 0xFFFFFFFF,
            pkt.tcp_ack & 0xFFFFFFFF,
            (5 << 12) | pkt.tcp_flags,
            65535,
            0,
            0,
        ) + payload
        if l4_checksums:
            l4 = _with_l4_checksum(pkt, l4, offset=16)
    elif pkt.protocol == PROTO_UDP:
        l4 = struct.pack("!HHHH", pkt.src_port, pkt.dst_port, UDP_HEADER + pkt.payload_len, 0) + payload
        if l4_checksums:
            l4 = _with_l4_checksum(pkt, l4, offset=6)
    elif pkt.protocol == PROTO_ICMP:
        # echo request/reply; id carries the low flow bits, checksum always real
        hdr = struct.pack("!BBHHH", pkt.icmp_type, 0, 0, pkt.flow_id & 0xFFFF, pkt.tcp_seq & 0xFFFF)
        csum = checksum16(hdr + payload)
        l4 = struct.pack("!BBHHH", pkt.icmp_type, 0, csum, pkt.flow_id & 0xFFFF, pkt.tcp_seq & 0xFFFF) + payload
    else:
        raise ValueError(f"unknown protocol {pkt.protocol}")

    total = IP_HEADER + len(l4)
    ip = struct.pack(
        "!BBHHHBBHII",
        0x45,
        0,
        total,
        pkt.uid & 0xFFFF,
        0x4000,  # DF, no fragmentation
        64,
        pkt.protocol,
        0,
        pkt.src_addr,
        pkt.dst_addr,
    )
    ip = ip[:10] + struct.pack("!H", checksum16(ip)) + ip[12:]
    wire = ip + l4
    pkt._wire = wire
    return wire


def _with_l4_checksum(pkt: Packet, l4: bytes, offset: int) -> bytes:
    pseudo = struct.pack("!IIBBH", pkt.src_addr, pkt.dst_addr, 0, pkt.protocol, len(l4))
    csum = checksum16(pseudo + l4)
    if csum == 0:
        csum = 0xFFFF
    return l4[:offset] + struct.pack("!H", csum) + l4[offset + 2:]


def decode_endpoints(wire: bytes) -> tuple[int, int, int, int, int]:
    """Inverse of serialize for matching purposes: (proto, src, dst, sport, dport).

    Ports are 0 for ICMP. Only the fixed 20-byte header layout serialize
    emits is accepted.
    """
    if len(wire) < IP_HEADER or wire[0] != 0x45:
        raise ValueError("not a raw IPv4 datagram from this writer")
    proto = wire[9]
    src, dst = struct.unpack_from("!II", wire, 12)
    if proto in (PROTO_TCP, PROTO_UDP) and len(wire) >= IP_HEADER + 4:
        sport, dport = struct.unpack_from("!HH", wire, IP_HEADER)
    else:
        sport = dport = 0
    return proto, src, dst, sport, dport
