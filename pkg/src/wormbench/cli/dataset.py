"""Dataset generation: one scenario, N propagation runs, one output tree.

The topology and the vulnerable population are fixed per dataset; each run
gets its own origin and a derived engine seed, so adding runs never changes
the outputs of earlier ones. Layout:

    <out>/<scenario-name>/
        topology.json
        manifest.json
        run_1/ hosts/<ip>.pcap ...  ground_truth.csv  worm_flows.csv
               flows.csv  background_series.csv  manifest.json
"""

from __future__ import annotations

import json
import os
from typing import Optional

from ..capture.manifest import (
    finalize_dataset,
    write_flow_log,
    write_ground_truth,
    write_run_manifest,
    write_series,
    write_worm_flows,
)
from ..capture.recorder import TraceRecorder
from ..engine import Engine, RngStream, seconds
from ..network import Network
from ..topology import (
    AsLayout,
    PfpParams,
    Topology,
    build_category1,
    build_category2,
    build_pfp_topology,
    compute_routes,
)
from ..traffic import TrafficSystem
from ..worm import WormRun, pick_origins, select_vulnerable
from .scenario import Scenario, ScenarioError


def mix_seed(seed: int, k: int) -> int:
    """splitmix64 of (seed, k): decorrelated per-run engine seeds."""
    z = (seed + k * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def build_topology(scenario: Scenario) -> Topology:
    spec = scenario.topology
    kind = spec["kind"]
    if kind == "category1":
        return build_category1()
    if kind == "category2":
        return build_category2(RngStream(scenario.seed, "topology"))
    if kind == "pfp":
        layout_keys = ("cores", "gateways", "edges", "hosts", "server_mix",
                       "gateway_dual_homed")
        layout = None
        if any(k in spec for k in layout_keys):
            layout = AsLayout(
                cores=int(spec.get("cores", 1)),
                gateways=int(spec.get("gateways", 2)),
                edges=int(spec.get("edges", 4)),
                hosts=int(spec.get("hosts", 40)),
                server_mix=spec.get("server_mix")
                or {"HTTP": 2, "HTTPS": 1, "DNS": 1, "FTP": 1, "mail": 1},
                gateway_dual_homed=bool(spec.get("gateway_dual_homed", False)),
            )
        params = PfpParams(p=float(spec.get("p", 0.3)), q=float(spec.get("q", 0.1)),
                           delta=float(spec.get("delta", 0.048)))
        return build_pfp_topology(int(spec.get("as_count", 3)),
                                  RngStream(scenario.seed, "topology"),
                                  params, layout)
    if kind == "file":
        with open(spec["path"]) as fh:
            return Topology.from_json(json.load(fh))
    raise ScenarioError(f"unknown topology kind {kind!r}")


class Simulation:
    """Shared per-dataset state: topology, routes, population, origins."""

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        self.topology = build_topology(scenario)
        self.routes = compute_routes(self.topology)
        pop_rng = RngStream(scenario.seed, "worm.population")
        if scenario.worm is not None:
            self.vulnerable = select_vulnerable(self.topology,
                                                scenario.worm.vulnerable, pop_rng)
            if scenario.worm.origin is not None:
                if scenario.worm.origin not in self.vulnerable:
                    raise ScenarioError(
                        f"configured origin {scenario.worm.origin} is not in "
                        f"the drawn vulnerable population")
                self.origins = [scenario.worm.origin] * scenario.runs
            else:
                self.origins = pick_origins(self.vulnerable, scenario.runs, pop_rng)
        else:
            self.vulnerable = []
            self.origins = [None] * scenario.runs

    def run_one(self, k: int, run_dir: str) -> dict:
        """Execute run k (1-based) and write its outputs; returns stats."""
        sc = self.scenario
        engine_seed = mix_seed(sc.seed, k)
        engine = Engine(seed=engine_seed)
        network = Network(engine, self.topology, self.routes)
        system = TrafficSystem(engine, network, sc.build_mix())
        system.install()

        worm: Optional[WormRun] = None
        origin = self.origins[k - 1]
        if sc.worm is not None:
            worm = WormRun(engine, network, system, sc.worm,
                           self.vulnerable, origin, seconds(sc.worm_start_s))

        os.makedirs(run_dir, exist_ok=True)
        recorder = TraceRecorder(network, os.path.join(run_dir, "hosts"),
                                 include_routers=sc.router_taps,
                                 payload_seed=engine_seed,
                                 l4_checksums=sc.l4_checksums)
        # capture starts when the warm-up ends, so every trace carries
        # pre-infection background
        engine.at(seconds(sc.warmup_s), recorder.install)
        engine.run_until(seconds(sc.duration_s))
        recorder.close()

        write_ground_truth(os.path.join(run_dir, "ground_truth.csv"),
                           worm.records if worm else [])
        write_worm_flows(os.path.join(run_dir, "worm_flows.csv"),
                         worm.records if worm else [])
        write_flow_log(os.path.join(run_dir, "flows.csv"), system.flow_log)
        write_series(os.path.join(run_dir, "background_series.csv"),
                     network.series_bin_ns, network.series_submitted,
                     network.series_delivered)

        stats = {
            "events": engine.events_processed,
            "network": network.stats(),
            "flows": {
                "total": len(system.flow_log),
                "complete": sum(1 for r in system.flow_log if r.status == "complete"),
            },
            "worm": None,
        }
        if worm is not None:
            stats["worm"] = {
                "infections": len(worm.records),
                "status_counts": worm.count_by_status(),
                "probes_sent": worm.probes_sent,
                "scan_counts": dict(worm.scan_counts),
                "thread_outcomes": dict(worm.thread_outcomes),
            }

        plan = self.topology.plan
        write_run_manifest(
            run_dir,
            scenario_name=sc.name,
            run_index=k,
            engine_seed=engine_seed,
            origin_node=-1 if origin is None else origin,
            origin_addr=0 if origin is None else plan.address_of(origin),
            worm_config=sc.worm.to_json() if sc.worm else None,
            topology_ref="../topology.json",
            pcap_index=recorder.index(),
            file_map={"ground_truth": "ground_truth.csv",
                      "worm_flows": "worm_flows.csv",
                      "flow_log": "flows.csv",
                      "background_series": "background_series.csv"},
            stats=stats,
            l4_checksums=sc.l4_checksums,
        )
        return stats


def run_dataset(scenario: Scenario, out_dir: Optional[str] = None) -> str:
    """Generate the whole dataset; returns the dataset manifest path."""
    sim = Simulation(scenario)
    root = os.path.join(out_dir or scenario.output or ".", scenario.name)
    os.makedirs(root, exist_ok=True)
    sim.topology.save(os.path.join(root, "topology.json"))
    for k in range(1, scenario.runs + 1):
        sim.run_one(k, os.path.join(root, f"run_{k}"))
    return finalize_dataset(root, scenario=scenario.to_json(),
                            seed=scenario.seed, topology_file="topology.json")
