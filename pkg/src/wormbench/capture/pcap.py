"""Classic pcap (v2.4) container writer for raw-IPv4 traces.

Files use the little-endian microsecond variant: magic 0xa1b2c3d4 written
native-little so the first four bytes on disk read d4 c3 b2 a1. Linktype 101
(raw IPv4) because the simulation has no MAC layer; fabricating Ethernet
headers would add bytes with no information. Internal nanosecond timestamps
are truncated to microseconds in record headers.

Writers buffer and reopen the file per flush instead of holding descriptors,
so a run with a thousand-host topology never exhausts the fd table.
"""

from __future__ import annotations

import os
import struct

from ..engine import SimTime
from ..packets import Packet, serialize

PCAP_MAGIC = 0xA1B2C3D4  # microsecond timestamps
PCAP_VERSION = (2, 4)
LINKTYPE_RAW_IPV4 = 101
SNAPLEN = 65535

_GLOBAL_HEADER = struct.Struct("<IHHiIII")
_RECORD_HEADER = struct.Struct("<IIII")
_FLUSH_BYTES = 256 * 1024


class CaptureError(Exception):
    pass


class PcapWriter:
    """Append-only pcap file; one per captured node."""

    __slots__ = ("path", "linktype", "payload_seed", "l4_checksums",
                 "count", "last_ts", "_buf", "_closed")

    def __init__(self, path: str, linktype: int = LINKTYPE_RAW_IPV4, *,
                 payload_seed: int = 0, l4_checksums: bool = False):
        self.path = path
        self.linktype = linktype
        self.payload_seed = payload_seed
        self.l4_checksums = l4_checksums
        self.count = 0
        self.last_ts: SimTime = 0
        self._buf = bytearray()
        self._closed = False
        try:
            with open(path, "wb") as fh:
                fh.write(_GLOBAL_HEADER.pack(
                    PCAP_MAGIC, PCAP_VERSION[0], PCAP_VERSION[1],
                    0, 0, SNAPLEN, linktype))
        except OSError as exc:
            raise CaptureError(f"cannot open capture file {path}: {exc}") from exc

    def write(self, pkt: Packet, t: SimTime) -> None:
        if self._closed:
            raise CaptureError(f"write to closed capture {self.path}")
        if t < self.last_ts:
            # event ordering bug upstream; never mask it by reordering records
            raise CaptureError(
                f"timestamp regression in {self.path}: {t} after {self.last_ts}")
        self.last_ts = t
        wire = serialize(pkt, self.payload_seed, self.l4_checksums)
        self._buf += _RECORD_HEADER.pack(
            t // 1_000_000_000, (t % 1_000_000_000) // 1_000,
            len(wire), len(wire))
        self._buf += wire
        self.count += 1
        if len(self._buf) >= _FLUSH_BYTES:
            self.flush()

    def flush(self) -> None:
        if not self._buf:
            return
        try:
            with open(self.path, "ab") as fh:
                fh.write(self._buf)
        except OSError as exc:
            raise CaptureError(f"cannot append to {self.path}: {exc}") from exc
        self._buf.clear()

    def close(self) -> None:
        if not self._closed:
            self.flush()
            self._closed = True

    @property
    def file_size(self) -> int:
        return os.path.getsize(self.path) + len(self._buf)


def open_pcap(path: str, linktype: int = LINKTYPE_RAW_IPV4, *,
              payload_seed: int = 0, l4_checksums: bool = False) -> PcapWriter:
    return PcapWriter(path, linktype, payload_seed=payload_seed,
                      l4_checksums=l4_checksums)


def write_packet(writer: PcapWriter, pkt: Packet, t: SimTime) -> None:
    writer.write(pkt, t)


def read_pcap(path: str) -> tuple[int, list[tuple[SimTime, bytes]]]:
    """Read a capture back as (linktype, [(timestamp_ns, raw_datagram)]).

    Only the little-endian microsecond variant this writer emits is
    understood; timestamps come back in nanoseconds with the truncated
    sub-microsecond part lost.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise CaptureError(f"cannot read capture file {path}: {exc}") from exc
    if len(blob) < _GLOBAL_HEADER.size:
        raise CaptureError(f"{path}: truncated global header")
    magic, vmaj, vmin, _tz, _sig, _snap, linktype = _GLOBAL_HEADER.unpack_from(blob, 0)
    if magic != PCAP_MAGIC:
        raise CaptureError(f"{path}: bad magic {magic:#x}")
    if (vmaj, vmin) != PCAP_VERSION:
        raise CaptureError(f"{path}: unsupported version {vmaj}.{vmin}")
    records = []
    off = _GLOBAL_HEADER.size
    while off < len(blob):
        if off + _RECORD_HEADER.size > len(blob):
            raise CaptureError(f"{path}: truncated record header at {off}")
        sec, usec, incl, orig = _RECORD_HEADER.unpack_from(blob, off)
        off += _RECORD_HEADER.size
        if incl != orig or off + incl > len(blob):
            raise CaptureError(f"{path}: truncated record body at {off}")
        records.append((sec * 1_000_000_000 + usec * 1_000, blob[off:off + incl]))
        off += incl
    return linktype, records
