"""Infection-progress readouts over ground-truth logs."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .series import AnalysisError, TimeSeries


@dataclass(frozen=True)
class GroundTruthRow:
    time_ns: int
    attacker_ip: str
    victim_ip: str
    transport: str
    flow_id: int


def read_ground_truth(path: str) -> list[GroundTruthRow]:
    """Parse a ground-truth CSV; malformed rows name their line number."""
    rows: list[GroundTruthRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, raw in enumerate(reader, start=1):
            if lineno == 1:
                if raw and raw[0] == "time_ns":
                    continue
                raise AnalysisError(f"{path}:1: missing ground-truth header")
            if not raw:
                continue
            if len(raw) != 5:
                raise AnalysisError(
                    f"{path}:{lineno}: expected 5 fields, got {len(raw)}")
            try:
                rows.append(GroundTruthRow(
                    time_ns=int(raw[0]), attacker_ip=raw[1], victim_ip=raw[2],
                    transport=raw[3], flow_id=int(raw[4])))
            except ValueError as exc:
                raise AnalysisError(f"{path}:{lineno}: {exc}") from exc
    return rows


def infection_curve(rows: list[GroundTruthRow], bin_ns: int, *,
                    origin_time_ns: int, end_ns: int | None = None) -> TimeSeries:
    """Cumulative infected count per bin, counting the origin from its start.

    Victims are deduplicated by address, so the final value is always
    1 + the number of distinct victims, even on a log that somehow repeats
    one.
    """
    if bin_ns <= 0:
        raise AnalysisError(f"bin width must be positive, got {bin_ns}")
    events = sorted((r.time_ns, r.victim_ip) for r in rows)
    if events and events[0][0] < origin_time_ns:
        raise AnalysisError(
            f"infection at {events[0][0]} precedes origin start {origin_time_ns}")
    last = events[-1][0] if events else origin_time_ns
    horizon = last if end_ns is None else max(end_ns, origin_time_ns)
    n_bins = max(1, (horizon - origin_time_ns) // bin_ns + 1)

    values = []
    seen: set[str] = set()
    i = 0
    for b in range(n_bins):
        edge = origin_time_ns + (b + 1) * bin_ns
        while i < len(events) and events[i][0] < edge:
            seen.add(events[i][1])
            i += 1
        values.append(1 + len(seen))
    return TimeSeries(bin_ns=bin_ns, start_ns=origin_time_ns, values=tuple(values))
