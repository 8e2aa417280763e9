"""Scenario files: strict parsing, validation, and the eight stock presets.

A scenario pins everything a dataset needs: topology recipe, traffic mix and
profile overrides, worm parameterization, durations, run count, and seed.
Unknown keys are hard errors; a silent typo in a benchmark config is worse
than a failed run.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from ..traffic.profiles import (
    MIX_CATEGORY1,
    MIX_CATEGORY2,
    TrafficConfigError,
    build_mix,
)
from ..worm.config import WormConfig, WormConfigError, parse_worm_config


class ScenarioError(ValueError):
    pass


_TOPOLOGY_KINDS = ("category1", "category2", "pfp", "file")
_TOPOLOGY_KEYS = {
    "category1": set(),
    "category2": set(),
    "pfp": {"as_count", "p", "q", "delta", "cores", "gateways", "edges",
            "hosts", "server_mix", "gateway_dual_homed"},
    "file": {"path"},
}
_MIXES = {"category1": MIX_CATEGORY1, "category2": MIX_CATEGORY2}

_SCENARIO_KEYS = {"name", "topology", "traffic", "worm", "duration", "warmup",
                  "worm_start", "runs", "seed", "capture", "output", "notes"}
_CAPTURE_KEYS = {"router_taps", "l4_checksums"}
_TRAFFIC_KEYS = {"mix", "overrides"}


@dataclass
class Scenario:
    name: str
    topology: dict
    traffic: dict
    worm: Optional[WormConfig]
    duration_s: float
    warmup_s: float
    worm_start_s: float
    runs: int
    seed: int
    router_taps: bool = False
    l4_checksums: bool = False
    output: Optional[str] = None
    notes: Optional[str] = None

    def build_mix(self):
        return build_mix(_MIXES[self.traffic["mix"]],
                         self.traffic.get("overrides"))

    def validate(self) -> None:
        if not self.name:
            raise ScenarioError("scenario needs a non-empty name")
        kind = self.topology.get("kind")
        if kind not in _TOPOLOGY_KINDS:
            raise ScenarioError(
                f"topology.kind must be one of {_TOPOLOGY_KINDS}, got {kind!r}")
        extra = set(self.topology) - {"kind"} - _TOPOLOGY_KEYS[kind]
        if extra:
            raise ScenarioError(
                f"topology kind {kind!r} does not take keys {sorted(extra)}")
        if kind == "file" and "path" not in self.topology:
            raise ScenarioError("topology kind 'file' needs a path")
        if self.traffic.get("mix") not in _MIXES:
            raise ScenarioError(
                f"traffic.mix must be one of {sorted(_MIXES)}, "
                f"got {self.traffic.get('mix')!r}")
        try:
            self.build_mix()  # surfaces unknown profiles/overrides early
        except TrafficConfigError as exc:
            raise ScenarioError(f"traffic: {exc}") from exc
        if self.worm is not None:
            self.worm.validate()
        if self.duration_s <= 0:
            raise ScenarioError(f"duration must be positive, got {self.duration_s}")
        if self.warmup_s < 0:
            raise ScenarioError(f"warmup must be >= 0, got {self.warmup_s}")
        if self.duration_s <= self.warmup_s:
            raise ScenarioError(
                f"duration ({self.duration_s} s) must exceed warmup ({self.warmup_s} s)")
        if self.worm is not None and not (
                self.warmup_s <= self.worm_start_s < self.duration_s):
            raise ScenarioError(
                f"worm_start ({self.worm_start_s} s) must lie in "
                f"[warmup, duration) = [{self.warmup_s}, {self.duration_s})")
        if self.runs < 1:
            raise ScenarioError(f"runs must be >= 1, got {self.runs}")

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "topology": copy.deepcopy(self.topology),
            "traffic": copy.deepcopy(self.traffic),
            "worm": self.worm.to_json() if self.worm else None,
            "duration": self.duration_s,
            "warmup": self.warmup_s,
            "worm_start": self.worm_start_s,
            "runs": self.runs,
            "seed": self.seed,
            "capture": {"router_taps": self.router_taps,
                        "l4_checksums": self.l4_checksums},
        }
        if self.output is not None:
            out["output"] = self.output
        if self.notes is not None:
            out["notes"] = self.notes
        return out


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return data[key]


def build_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    extra = set(data) - _SCENARIO_KEYS
    if extra:
        raise ScenarioError(f"unknown scenario keys {sorted(extra)}")
    traffic = data.get("traffic", {"mix": "category1"})
    if not isinstance(traffic, dict) or set(traffic) - _TRAFFIC_KEYS:
        raise ScenarioError(
            f"traffic section takes keys {sorted(_TRAFFIC_KEYS)}, got {traffic!r}")
    capture = data.get("capture", {})
    if not isinstance(capture, dict) or set(capture) - _CAPTURE_KEYS:
        raise ScenarioError(
            f"capture section takes keys {sorted(_CAPTURE_KEYS)}, got {capture!r}")
    worm_doc = data.get("worm")
    try:
        worm = parse_worm_config(worm_doc) if worm_doc is not None else None
    except WormConfigError as exc:
        raise ScenarioError(f"worm: {exc}") from exc
    warmup = float(data.get("warmup", 60.0))
    sc = Scenario(
        name=str(_require(data, "name", "scenario")),
        topology=dict(_require(data, "topology", "scenario")),
        traffic={"mix": traffic.get("mix", "category1"),
                 "overrides": traffic.get("overrides") or {}},
        worm=worm,
        duration_s=float(data.get("duration", 300.0)),
        warmup_s=warmup,
        worm_start_s=float(data.get("worm_start", warmup + 60.0)),
        runs=int(data.get("runs", 3)),
        seed=int(data.get("seed", 1)),
        router_taps=bool(capture.get("router_taps", False)),
        l4_checksums=bool(capture.get("l4_checksums", False)),
        output=data.get("output"),
        notes=data.get("notes"),
    )
    sc.validate()
    return sc


def parse_scenario(path: str) -> Scenario:
    if not os.path.isfile(path):
        raise ScenarioError(f"scenario file not found: {path}")
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: scenario must be a JSON object")
    if "preset" in data:
        base = preset_data(str(data["preset"]))
        rest = {k: v for k, v in data.items() if k != "preset"}
        extra = set(rest) - _SCENARIO_KEYS
        if extra:
            raise ScenarioError(f"unknown scenario keys {sorted(extra)}")
        data = _merge(base, rest)
    return build_scenario(data)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if key in ("worm", "traffic", "capture") and isinstance(value, dict) \
                and isinstance(out.get(key), dict):
            out[key] = {**out[key], **copy.deepcopy(value)}
        else:
            out[key] = copy.deepcopy(value)
    return out


# ------------------------------------------------------------------ presets
# Eight stock datasets: two topology categories, UDP and TCP worms, uniform
# and locality-biased scanning. Payload lengths and infection ports are
# documented stand-ins modeled on the original outbreaks (376 B probes on
# 1434/udp, 4 KiB transfers on 80/tcp).

_CLASS_AB_WEIGHTS = {"random": 1 / 8, "class_a": 4 / 8, "class_b": 3 / 8}
_SUBNET_WEIGHTS = {"random": 0.3, "subnet": 0.7}

_STAND_IN_NOTE = ("payload_length and infection_port are stand-ins styled "
                  "after the historical worms; scan_range defaults to the "
                  "topology's host blocks")


def _worm(name, transport, scanning, recovery, count, kinds, **kw) -> dict:
    doc = {
        "name": name,
        "transport": transport,
        "infection_port": 1434 if transport == "udp" else 80,
        "payload_length": 376 if transport == "udp" else 4096,
        "scanning": scanning,
        "recovery_probability": recovery,
        "vulnerable": {"kinds": list(kinds), "count": count},
    }
    doc.update(kw)
    return doc


def _preset(name, topology_kind, mix, worm_doc) -> dict:
    return {
        "name": name,
        "topology": {"kind": topology_kind},
        "traffic": {"mix": mix},
        "worm": worm_doc,
        "duration": 300.0,
        "warmup": 60.0,
        "worm_start": 120.0,
        "runs": 3,
        "seed": 1,
        "notes": _STAND_IN_NOTE,
    }


_UNIFORM = {"strategy": "uniform"}
_LP_AB = {"strategy": "local_preference", "weights": _CLASS_AB_WEIGHTS}
_LP_SUBNET = {"strategy": "local_preference", "weights": _SUBNET_WEIGHTS}


_PRESETS: dict[str, dict] = {
    "cat1-set1": _preset(
        "cat1-set1", "category1", "category1",
        _worm("Slammer", "udp", _UNIFORM, 1e-4, 30,
              ("HTTP", "HTTPS", "client"),
              probe_interval={"dist": "uniform", "low": 0.004, "high": 0.008})),
    "cat1-set2": _preset(
        "cat1-set2", "category1", "category1",
        _worm("Quasi Slammer", "udp", _LP_AB, 1e-4, 28, ("HTTP",),
              probe_interval={"dist": "uniform", "low": 0.005, "high": 0.010})),
    "cat1-set3": _preset(
        "cat1-set3", "category1", "category1",
        _worm("Quasi Slammer", "udp", _LP_SUBNET, 1e-4, 35, ("client",),
              probe_interval={"dist": "uniform", "low": 0.005, "high": 0.010})),
    "cat1-set4": _preset(
        "cat1-set4", "category1", "category1",
        _worm("Code Red I", "tcp", _UNIFORM, 1e-4, 28, ("HTTP",),
              concurrent_connections=23)),
    "cat1-set5": _preset(
        "cat1-set5", "category1", "category1",
        _worm("Code Red II", "tcp", _LP_AB, 1e-4, 28, ("HTTP",),
              concurrent_connections=25)),
    "cat1-set6": _preset(
        "cat1-set6", "category1", "category1",
        _worm("Quasi Code Red II", "tcp", _LP_SUBNET, 1e-4, 35, ("client",),
              concurrent_connections=25)),
    "cat2-set1": _preset(
        "cat2-set1", "category2", "category2",
        _worm("Quasi Code Red II", "tcp", _LP_SUBNET, 1e-5, 52, ("HTTP",),
              concurrent_connections=20)),
    "cat2-set2": _preset(
        "cat2-set2", "category2", "category2",
        _worm("Quasi Slammer", "udp", _LP_SUBNET, 1e-5, 52, ("HTTP",),
              probe_interval={"dist": "uniform", "low": 0.010, "high": 0.012})),
}

PRESET_IDS = tuple(sorted(_PRESETS))


def preset_data(preset_id: str) -> dict:
    if preset_id not in _PRESETS:
        raise ScenarioError(
            f"unknown preset {preset_id!r}; valid ids: {', '.join(PRESET_IDS)}")
    return copy.deepcopy(_PRESETS[preset_id])


def preset(preset_id: str) -> Scenario:
    return build_scenario(preset_data(preset_id))
