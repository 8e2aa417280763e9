"""Run and dataset manifests, ground-truth and log exports.

Everything written here is deterministic for a fixed seed except the
generation wall-clock stamp, which is excluded from the determinism hash so
two reruns of the same scenario hash identically.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from datetime import datetime, timezone
from typing import Iterable, Optional

from ..packets import ip_str
from ..traffic.apps import FlowRecord
from ..worm.state import InfectionRecord
from .pcap import CaptureError

GROUND_TRUTH_HEADER = ("time_ns", "attacker_ip", "victim_ip", "transport", "flow_id")
WORM_FLOWS_HEADER = ("flow_id", "src_ip", "src_port", "dst_ip", "dst_port",
                     "transport", "time_ns")
FLOW_LOG_HEADER = ("flow_id", "profile", "transport", "src_node", "dst_node",
                   "src_ip", "dst_ip", "src_port", "dst_port", "start_ns",
                   "end_ns", "request_bytes", "reply_bytes_expected",
                   "reply_bytes_received", "status")
SERIES_HEADER = ("bin_start_ns", "submitted_bytes", "delivered_bytes")


def write_ground_truth(path: str, records: Iterable[InfectionRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GROUND_TRUTH_HEADER)
        for r in records:
            w.writerow((r.time_ns, ip_str(r.attacker_addr), ip_str(r.victim_addr),
                        r.transport, r.flow_id))


def write_worm_flows(path: str, records: Iterable[InfectionRecord]) -> None:
    """Index of infection-linked flows only, so consistency checks can find
    the infecting packets without parsing every scan probe."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(WORM_FLOWS_HEADER)
        for r in records:
            w.writerow((r.flow_id, ip_str(r.attacker_addr), r.src_port,
                        ip_str(r.victim_addr), r.dst_port, r.transport,
                        r.time_ns))


def write_flow_log(path: str, records: Iterable[FlowRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FLOW_LOG_HEADER)
        for r in records:
            w.writerow((r.flow_id, r.profile, r.transport, r.src_node,
                        r.dst_node, ip_str(r.src_addr), ip_str(r.dst_addr),
                        r.src_port, r.dst_port, r.start_ns, r.end_ns,
                        r.request_bytes, r.reply_bytes_expected,
                        r.reply_bytes_received, r.status))


def write_series(path: str, bin_ns: int, submitted: list[int],
                 delivered: list[int]) -> None:
    n = max(len(submitted), len(delivered))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_HEADER)
        for i in range(n):
            w.writerow((i * bin_ns,
                        submitted[i] if i < len(submitted) else 0,
                        delivered[i] if i < len(delivered) else 0))


def files_digest(root: str, rel_paths: Iterable[str]) -> str:
    """SHA-256 over (path, content) pairs in sorted path order."""
    h = hashlib.sha256()
    for rel in sorted(rel_paths):
        h.update(rel.encode())
        h.update(b"\x00")
        with open(os.path.join(root, rel), "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
        h.update(b"\x01")
    return h.hexdigest()


def _missing(root: str, rel_paths: Iterable[str]) -> list[str]:
    return [p for p in rel_paths if not os.path.isfile(os.path.join(root, p))]


def write_run_manifest(run_dir: str, *, scenario_name: str, run_index: int,
                       engine_seed: int, origin_node: int, origin_addr: int,
                       worm_config: dict, topology_ref: str,
                       pcap_index: dict[str, dict], file_map: dict[str, str],
                       stats: dict, l4_checksums: bool = False) -> str:
    """Write <run_dir>/manifest.json and return its path.

    The determinism hash covers every pcap and every file in file_map; the
    wall-clock stamp is the only field allowed to differ between identical
    reruns.
    """
    hashed = [os.path.join("hosts", e["file"]) for e in pcap_index.values()]
    hashed += list(file_map.values())
    gaps = _missing(run_dir, hashed)
    if gaps:
        raise CaptureError("run output incomplete, missing: " + ", ".join(sorted(gaps)))
    manifest = {
        "schema": "wormbench-run-1",
        "scenario": scenario_name,
        "run": run_index,
        "engine_seed": engine_seed,
        "origin": {"node": origin_node, "address": ip_str(origin_addr)},
        "worm": worm_config,
        "topology": topology_ref,
        "hosts": pcap_index,
        "files": dict(file_map),
        "stats": stats,
        "capture_notes": {
            "linktype": 101,
            "timestamps": "nanosecond simulation times truncated to microseconds",
            "l4_checksums": bool(l4_checksums),
        },
        "determinism_hash": files_digest(run_dir, hashed),
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    path = os.path.join(run_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def finalize_dataset(dataset_dir: str, *, scenario: dict, seed: int,
                     topology_file: str,
                     run_dirs: Optional[list[str]] = None) -> str:
    """Write <dataset_dir>/manifest.json summarizing all runs.

    Every run directory must already hold a validated run manifest; any gap
    (missing run manifest, missing referenced file) aborts with a list.
    """
    if run_dirs is None:
        run_dirs = sorted(
            d for d in os.listdir(dataset_dir)
            if d.startswith("run_") and os.path.isdir(os.path.join(dataset_dir, d)))
    gaps = _missing(dataset_dir, [topology_file])
    runs = []
    for d in run_dirs:
        mpath = os.path.join(dataset_dir, d, "manifest.json")
        if not os.path.isfile(mpath):
            gaps.append(os.path.join(d, "manifest.json"))
            continue
        with open(mpath) as fh:
            m = json.load(fh)
        sub = _missing(os.path.join(dataset_dir, d),
                       [os.path.join("hosts", e["file"]) for e in m["hosts"].values()]
                       + list(m["files"].values()))
        gaps += [os.path.join(d, p) for p in sub]
        runs.append({
            "dir": d,
            "run": m["run"],
            "engine_seed": m["engine_seed"],
            "origin": m["origin"],
            "determinism_hash": m["determinism_hash"],
            "stats": m["stats"],
        })
    if gaps:
        raise CaptureError("dataset incomplete, missing: " + ", ".join(sorted(gaps)))
    combined = hashlib.sha256(
        "".join(r["determinism_hash"] for r in runs).encode()).hexdigest()
    manifest = {
        "schema": "wormbench-dataset-1",
        "scenario": scenario,
        "seed": seed,
        "topology": topology_file,
        "runs": runs,
        "determinism_hash": combined,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    path = os.path.join(dataset_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
