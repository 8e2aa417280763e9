"""Dataset validation report: structural and statistical checks as JSON.

Each check lands in one of four states: pass, fail, skipped (check does
not apply to this dataset and says why), unrunnable (inputs missing or too
small to decide). Only fail flips the report's overall verdict, so a tiny
smoke dataset can be structurally valid while its statistics are honestly
marked undecidable.
"""

from __future__ import annotations

import csv
import json
import os
from collections import defaultdict

from ..capture.manifest import files_digest
from ..capture.pcap import read_pcap
from ..packets import PROTO_TCP, PROTO_UDP, decode_endpoints, ip_int
from .epidemic import read_ground_truth
from .hurst import AnalysisError, estimate_hurst
from .powerlaw import degree_powerlaw_fit

HURST_BAND = (0.6, 0.95)
MIN_FIT_R2 = 0.9
# below this many post-warmup bins the estimator's run-to-run spread
# straddles the acceptance band, so the check refuses to rule
MIN_HURST_BINS = 5000


def _check(name: str, status: str, **detail) -> dict:
    return {"name": name, "status": status, "detail": detail}


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def validate_dataset(dataset_dir: str) -> dict:
    checks = [_structure(dataset_dir)]
    if checks[0]["status"] == "pass":
        manifest = _load_json(os.path.join(dataset_dir, "manifest.json"))
        checks.append(_determinism(dataset_dir, manifest))
        checks.append(_degree_fit(dataset_dir, manifest))
        checks.append(_background_hurst(dataset_dir, manifest))
        checks.append(_worm_consistency(dataset_dir, manifest))
    return {
        "schema": "wormbench-validation-1",
        "dataset": os.path.abspath(dataset_dir),
        "checks": checks,
        "passed": all(c["status"] != "fail" for c in checks),
    }


# ------------------------------------------------------------------ checks


def _structure(root: str) -> dict:
    """Everything the manifests promise must exist on disk."""
    top = os.path.join(root, "manifest.json")
    if not os.path.isfile(top):
        return _check("structure", "fail", missing=["manifest.json"])
    try:
        manifest = _load_json(top)
    except (OSError, json.JSONDecodeError) as exc:
        return _check("structure", "fail", error=f"manifest.json: {exc}")

    missing = []
    topo = manifest.get("topology", "topology.json")
    if not os.path.isfile(os.path.join(root, topo)):
        missing.append(topo)
    runs = manifest.get("runs", [])
    if not runs:
        missing.append("run directories")
    for entry in runs:
        rdir = os.path.join(root, entry["dir"])
        rman = os.path.join(rdir, "manifest.json")
        if not os.path.isfile(rman):
            missing.append(os.path.join(entry["dir"], "manifest.json"))
            continue
        m = _load_json(rman)
        rel = [os.path.join("hosts", e["file"]) for e in m["hosts"].values()]
        rel += list(m["files"].values())
        missing += [os.path.join(entry["dir"], p) for p in rel
                    if not os.path.isfile(os.path.join(rdir, p))]
    if missing:
        return _check("structure", "fail", missing=sorted(missing))
    return _check("structure", "pass", runs=len(runs))


def _determinism(root: str, manifest: dict) -> dict:
    """Recomputed content hashes must match the ones written at generation."""
    bad = []
    for entry in manifest["runs"]:
        rdir = os.path.join(root, entry["dir"])
        m = _load_json(os.path.join(rdir, "manifest.json"))
        rel = [os.path.join("hosts", e["file"]) for e in m["hosts"].values()]
        rel += list(m["files"].values())
        actual = files_digest(rdir, rel)
        if actual != m["determinism_hash"]:
            bad.append({"run": entry["dir"], "expected": m["determinism_hash"],
                        "actual": actual})
    if bad:
        return _check("determinism", "fail", mismatches=bad)
    return _check("determinism", "pass", runs=len(manifest["runs"]))


def _degree_fit(root: str, manifest: dict) -> dict:
    """Tail power-law fit on the AS-level graph, for grown topologies only."""
    kind = manifest.get("scenario", {}).get("topology", {}).get("kind")
    if kind not in ("pfp", "category2"):
        return _check("degree_fit", "skipped",
                      reason=f"topology kind {kind!r} is a fixed reference "
                             "layout, not a grown graph")
    doc = _load_json(os.path.join(root, manifest["topology"]))
    as_of = {n["id"]: n["as_id"] for n in doc["nodes"]}
    degree: dict[int, int] = defaultdict(int)
    seen = set()
    for a, b, *_ in doc["links"]:
        if as_of[a] != as_of[b]:
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            degree[as_of[a]] += 1
            degree[as_of[b]] += 1
    try:
        fit = degree_powerlaw_fit(list(degree.values()))
    except AnalysisError as exc:
        return _check("degree_fit", "unrunnable", reason=str(exc),
                      as_nodes=len(degree))
    if fit.degenerate:
        return _check("degree_fit", "unrunnable",
                      reason="too few distinct tail degrees",
                      tail_points=fit.tail_points)
    ok = fit.r_squared >= MIN_FIT_R2
    return _check("degree_fit", "pass" if ok else "fail",
                  exponent=fit.exponent, r_squared=fit.r_squared,
                  threshold=MIN_FIT_R2)


def _background_hurst(root: str, manifest: dict) -> dict:
    """Long-range dependence of the offered background byte process."""
    warmup_s = float(manifest.get("scenario", {}).get("warmup", 0.0))
    results = []
    for entry in manifest["runs"]:
        rdir = os.path.join(root, entry["dir"])
        m = _load_json(os.path.join(rdir, "manifest.json"))
        path = os.path.join(rdir, m["files"]["background_series"])
        bins, submitted = [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                bins.append(int(row["bin_start_ns"]))
                submitted.append(int(row["submitted_bytes"]))
        if len(bins) < 2:
            return _check("background_hurst", "unrunnable",
                          reason=f"{entry['dir']}: series has {len(bins)} bins")
        bin_ns = bins[1] - bins[0]
        start = int(warmup_s * 1e9)
        values = [v for t, v in zip(bins, submitted) if t >= start]
        if len(values) < MIN_HURST_BINS:
            return _check("background_hurst", "unrunnable",
                          reason=f"{entry['dir']}: {len(values)} post-warmup bins, "
                                 f"need {MIN_HURST_BINS} for a stable estimate")
        try:
            est = estimate_hurst(values)
        except AnalysisError as exc:
            return _check("background_hurst", "unrunnable",
                          reason=f"{entry['dir']}: {exc}", bins=len(values),
                          bin_ns=bin_ns)
        results.append({"run": entry["dir"], "h": est.h,
                        "r_squared": est.r_squared})
    lo, hi = HURST_BAND
    ok = all(lo <= r["h"] <= hi and r["r_squared"] >= MIN_FIT_R2
             for r in results)
    return _check("background_hurst", "pass" if ok else "fail",
                  runs=results, band=list(HURST_BAND), min_r_squared=MIN_FIT_R2)


def _tuple_index(pcap_path: str) -> dict[tuple, list[int]]:
    """First-seen timestamps per (proto, src, dst, sport, dport)."""
    _, records = read_pcap(pcap_path)
    index: dict[tuple, list[int]] = defaultdict(list)
    for t, wire in records:
        try:
            index[decode_endpoints(wire)].append(t)
        except ValueError:
            continue
    return index


def _worm_consistency(root: str, manifest: dict) -> dict:
    """Ground truth must be a single-rooted tree whose infecting flows are
    visible in both endpoint captures with attacker-before-victim times."""
    runs = manifest["runs"]
    if any(_load_json(os.path.join(root, e["dir"], "manifest.json"))["worm"] is None
           for e in runs):
        return _check("worm_consistency", "skipped",
                      reason="worm-free scenario: no ground truth to check")
    problems = []
    checked = 0
    for entry in runs:
        rdir = os.path.join(root, entry["dir"])
        m = _load_json(os.path.join(rdir, "manifest.json"))
        gt = read_ground_truth(os.path.join(rdir, m["files"]["ground_truth"]))
        origin_ip = m["origin"]["address"]

        parents: dict[str, str] = {}
        for rec in sorted(gt, key=lambda r: r.time_ns):
            if rec.victim_ip in parents:
                problems.append(f"{entry['dir']}: {rec.victim_ip} infected twice")
                continue
            if rec.attacker_ip != origin_ip and rec.attacker_ip not in parents:
                problems.append(
                    f"{entry['dir']}: attacker {rec.attacker_ip} at {rec.time_ns} "
                    "was never infected itself")
            parents[rec.victim_ip] = rec.attacker_ip
        if origin_ip in parents:
            problems.append(f"{entry['dir']}: origin {origin_ip} appears as victim")

        flows = []
        with open(os.path.join(rdir, m["files"]["worm_flows"]), newline="") as fh:
            for row in csv.DictReader(fh):
                flows.append(row)
        if len(flows) != len(gt):
            problems.append(f"{entry['dir']}: {len(gt)} infections but "
                            f"{len(flows)} worm flows")

        indexes: dict[str, dict] = {}

        def host_index(ip: str):
            if ip not in indexes:
                f = m["hosts"].get(ip)
                if f is None:
                    return None
                indexes[ip] = _tuple_index(os.path.join(rdir, "hosts", f["file"]))
            return indexes[ip]

        for row in flows:
            proto = PROTO_UDP if row["transport"] == "udp" else PROTO_TCP
            key = (proto,
                   ip_int(row["src_ip"]), ip_int(row["dst_ip"]),
                   int(row["src_port"]), int(row["dst_port"]))
            src_idx = host_index(row["src_ip"])
            dst_idx = host_index(row["dst_ip"])
            where = f"{entry['dir']}: flow {row['flow_id']}"
            if src_idx is None or dst_idx is None:
                problems.append(f"{where}: endpoint capture missing")
                continue
            if not src_idx.get(key):
                problems.append(f"{where}: not in attacker capture")
                continue
            if not dst_idx.get(key):
                problems.append(f"{where}: not in victim capture")
                continue
            if min(src_idx[key]) > min(dst_idx[key]):
                problems.append(f"{where}: victim saw the flow before the attacker")
            checked += 1
    if problems:
        return _check("worm_consistency", "fail", problems=problems[:50],
                      problem_count=len(problems), flows_checked=checked)
    return _check("worm_consistency", "pass", flows_checked=checked)


__all__ = ["validate_dataset", "HURST_BAND", "MIN_FIT_R2", "MIN_HURST_BINS"]
