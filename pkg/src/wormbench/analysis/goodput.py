"""Reply-payload goodput measured from flow logs.

Goodput here is the application payload the client end actually received,
spread uniformly over each flow's lifetime; headers, retransmissions, and
unfinished request bytes never count. Reply bytes dominate every built-in
profile, so this is the measure that shows background flows losing ground
when something else competes for their links.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .series import AnalysisError, TimeSeries


@dataclass(frozen=True)
class FlowRow:
    flow_id: int
    profile: str
    transport: str
    src_node: int
    dst_node: int
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    start_ns: int
    end_ns: int
    request_bytes: int
    reply_bytes_expected: int
    reply_bytes_received: int
    status: str


_INT_FIELDS = ("flow_id", "src_node", "dst_node", "src_port", "dst_port",
               "start_ns", "end_ns", "request_bytes", "reply_bytes_expected",
               "reply_bytes_received")


def read_flow_log(path: str) -> list[FlowRow]:
    rows: list[FlowRow] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "flow_id" not in reader.fieldnames:
            raise AnalysisError(f"{path}: missing flow-log header")
        for lineno, raw in enumerate(reader, start=2):
            try:
                kwargs = {k: v for k, v in raw.items()}
                for k in _INT_FIELDS:
                    kwargs[k] = int(kwargs[k])
                rows.append(FlowRow(**kwargs))
            except (TypeError, ValueError) as exc:
                raise AnalysisError(f"{path}:{lineno}: {exc}") from exc
    return rows


def goodput_series(flows: Iterable[FlowRow], window_ns: int, *,
                   t0: Optional[int] = None, t1: Optional[int] = None,
                   selector: Optional[Callable[[FlowRow], bool]] = None) -> TimeSeries:
    """Received reply bytes per window, as bits/second.

    Each flow's received bytes are smeared uniformly across [start, end];
    zero-length flows credit their single window. Windows run from t0
    (default: earliest selected start) to t1 (default: latest end).
    """
    if window_ns <= 0:
        raise AnalysisError(f"window must be positive, got {window_ns}")
    chosen = [f for f in flows if selector is None or selector(f)]
    if not chosen:
        return TimeSeries(bin_ns=window_ns, start_ns=t0 or 0, values=(0.0,))
    lo = min(f.start_ns for f in chosen) if t0 is None else t0
    hi = max(f.end_ns for f in chosen) if t1 is None else t1
    if hi <= lo:
        hi = lo + window_ns
    n = (hi - lo + window_ns - 1) // window_ns
    acc = [0.0] * n

    for f in chosen:
        if f.reply_bytes_received <= 0:
            continue
        a, b = max(f.start_ns, lo), min(f.end_ns, hi)
        if b < a:
            continue
        if f.end_ns == f.start_ns:
            i = min((a - lo) // window_ns, n - 1)
            acc[i] += f.reply_bytes_received
            continue
        rate = f.reply_bytes_received / (f.end_ns - f.start_ns)  # bytes per ns
        i = (a - lo) // window_ns
        while i < n:
            w_lo = lo + i * window_ns
            w_hi = w_lo + window_ns
            overlap = min(b, w_hi) - max(a, w_lo)
            if overlap <= 0:
                break
            acc[i] += rate * overlap
            i += 1

    factor = 8.0 / (window_ns / 1e9)  # bytes/window -> bits/second
    return TimeSeries(bin_ns=window_ns, start_ns=lo,
                      values=tuple(v * factor for v in acc))


def mean_goodput(flows: Iterable[FlowRow], *, t0: int, t1: int,
                 selector: Optional[Callable[[FlowRow], bool]] = None) -> float:
    """Average received-reply bits/second over [t0, t1)."""
    if t1 <= t0:
        raise AnalysisError("empty measurement interval")
    total = 0.0
    for f in flows:
        if selector is not None and not selector(f):
            continue
        if f.reply_bytes_received <= 0:
            continue
        if f.end_ns == f.start_ns:
            if t0 <= f.start_ns < t1:
                total += f.reply_bytes_received
            continue
        overlap = min(f.end_ns, t1) - max(f.start_ns, t0)
        if overlap > 0:
            total += f.reply_bytes_received * overlap / (f.end_ns - f.start_ns)
    return total * 8.0 / ((t1 - t0) / 1e9)
