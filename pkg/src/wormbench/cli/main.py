"""Command-line front end. Thin by design: every verb is one or two
library calls, so scripted use of the package is never second-class.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..capture.pcap import CaptureError
from ..engine import RngStream
from ..topology import (
    AsLayout,
    PfpParams,
    TopologyError,
    build_category1,
    build_category2,
    build_pfp_topology,
)
from ..worm import WormConfigError
from .dataset import run_dataset
from .scenario import PRESET_IDS, ScenarioError, build_scenario, parse_scenario, preset

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wormbench",
        description="Deterministic worm-propagation benchmark dataset generator")
    sub = parser.add_subparsers(dest="verb", required=True)

    gen = sub.add_parser("generate", help="run a scenario and write a dataset")
    src = gen.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESET_IDS),
                     help="built-in scenario id")
    src.add_argument("--scenario", help="scenario JSON file")
    gen.add_argument("--seed", type=int, help="override the scenario seed")
    gen.add_argument("--out", help="output directory (default: scenario output or cwd)")
    gen.add_argument("--runs", type=int, help="override the number of runs")
    gen.add_argument("--duration", type=float, help="override duration, seconds")
    gen.add_argument("--router-taps", action="store_true",
                     help="also capture at routers (transit records)")

    val = sub.add_parser("validate", help="check a generated dataset")
    val.add_argument("dir", help="dataset directory (contains manifest.json)")
    val.add_argument("--report", help="write the JSON report here as well")

    topo = sub.add_parser("topology", help="emit a topology JSON file")
    kind = topo.add_mutually_exclusive_group(required=True)
    kind.add_argument("--category1", action="store_true")
    kind.add_argument("--category2", action="store_true")
    kind.add_argument("--pfp", type=int, metavar="AS_COUNT")
    topo.add_argument("--seed", type=int, default=1)
    topo.add_argument("--p", type=float, default=0.3)
    topo.add_argument("--q", type=float, default=0.1)
    topo.add_argument("--delta", type=float, default=0.048)
    topo.add_argument("--hosts", type=int, default=40,
                      help="hosts per autonomous system (pfp only)")
    topo.add_argument("--out", required=True, help="output file")

    pre = sub.add_parser("presets", help="list built-in scenarios")
    pre.add_argument("--list", action="store_true", help="print ids, one per line")
    pre.add_argument("--show", metavar="ID", help="dump one preset as JSON")
    return parser


def _generate(args) -> int:
    if args.preset:
        scenario = preset(args.preset)
    else:
        scenario = parse_scenario(args.scenario)
    overrides = scenario.to_json()
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.duration is not None:
        overrides["duration"] = args.duration
    if args.router_taps:
        overrides.setdefault("capture", {})["router_taps"] = True
    scenario = build_scenario(overrides)
    manifest = run_dataset(scenario, args.out)
    print(manifest)
    return EXIT_OK


def _validate(args) -> int:
    from ..analysis import validate_dataset

    report = validate_dataset(args.dir)
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def _topology(args) -> int:
    if args.category1:
        topo = build_category1()
    elif args.category2:
        topo = build_category2(RngStream(args.seed, "topology"))
    else:
        params = PfpParams(p=args.p, q=args.q, delta=args.delta)
        layout = None if args.hosts == 40 else AsLayout(
            hosts=args.hosts,
            server_mix={"HTTP": 2, "HTTPS": 1, "DNS": 1, "FTP": 1, "mail": 1})
        topo = build_pfp_topology(args.pfp, RngStream(args.seed, "topology"),
                                  params, layout)
    topo.save(args.out)
    print(args.out)
    return EXIT_OK


def _presets(args) -> int:
    if args.show:
        print(json.dumps(preset(args.show).to_json(), indent=2, sort_keys=True))
        return EXIT_OK
    for pid in sorted(PRESET_IDS):
        print(pid)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"generate": _generate, "validate": _validate,
               "topology": _topology, "presets": _presets}[args.verb]
    try:
        return handler(args)
    except (ScenarioError, WormConfigError, TopologyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CaptureError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
