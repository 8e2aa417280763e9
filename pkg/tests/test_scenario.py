"""Scenario schema strictness and stock-configuration fidelity.

The fidelity test re-transcribes the eight stock configurations as literal
data, independently of how scenario.py constructs them, so any drift in
either place fails loudly.
"""

import json

import pytest

from wormbench.cli import (
    PRESET_IDS,
    ScenarioError,
    build_scenario,
    parse_scenario,
    preset,
    preset_data,
)
from wormbench.traffic.profiles import MIX_CATEGORY1, MIX_CATEGORY2
from wormbench.worm.config import LocalPreferenceScan, UniformRandomScan


def minimal(**kw) -> dict:
    doc = {"name": "t", "topology": {"kind": "category1"}}
    doc.update(kw)
    return doc


# --------------------------------------------------------------- fidelity

LP_AB = {"random": 1 / 8, "class_a": 4 / 8, "class_b": 3 / 8}
LP_SUBNET = {"random": 0.3, "subnet": 0.7}

# one row per stock dataset: (id, worm name, transport, probe interval
# seconds or None, concurrent connections or None, scanning, recovery per
# ms, vulnerable count, vulnerable kinds, topology kind)
STOCK_ROWS = [
    ("cat1-set1", "Slammer", "udp", (0.004, 0.008), None, "uniform", None,
     1e-4, 30, ["HTTP", "HTTPS", "client"], "category1"),
    ("cat1-set2", "Quasi Slammer", "udp", (0.005, 0.010), None,
     "local_preference", LP_AB, 1e-4, 28, ["HTTP"], "category1"),
    ("cat1-set3", "Quasi Slammer", "udp", (0.005, 0.010), None,
     "local_preference", LP_SUBNET, 1e-4, 35, ["client"], "category1"),
    ("cat1-set4", "Code Red I", "tcp", None, 23, "uniform", None,
     1e-4, 28, ["HTTP"], "category1"),
    ("cat1-set5", "Code Red II", "tcp", None, 25, "local_preference", LP_AB,
     1e-4, 28, ["HTTP"], "category1"),
    ("cat1-set6", "Quasi Code Red II", "tcp", None, 25, "local_preference",
     LP_SUBNET, 1e-4, 35, ["client"], "category1"),
    ("cat2-set1", "Quasi Code Red II", "tcp", None, 20, "local_preference",
     LP_SUBNET, 1e-5, 52, ["HTTP"], "category2"),
    ("cat2-set2", "Quasi Slammer", "udp", (0.010, 0.012), None,
     "local_preference", LP_SUBNET, 1e-5, 52, ["HTTP"], "category2"),
]


def test_stock_ids_complete():
    assert sorted(PRESET_IDS) == sorted(r[0] for r in STOCK_ROWS)


@pytest.mark.parametrize("row", STOCK_ROWS, ids=[r[0] for r in STOCK_ROWS])
def test_stock_configuration_fidelity(row):
    (pid, name, transport, interval, conns, strategy, weights,
     recovery, count, kinds, topo_kind) = row
    sc = preset(pid)
    w = sc.worm
    assert sc.name == pid
    assert sc.topology == {"kind": topo_kind}
    assert sc.traffic["mix"] == topo_kind  # mix follows the category
    assert w.name == name
    assert w.transport == transport
    assert w.recovery_probability == recovery
    assert w.vulnerable.count == count
    assert sorted(w.vulnerable.kinds) == sorted(kinds)
    if transport == "udp":
        assert w.concurrent_connections is None
        lo, hi = interval
        assert (w.probe_interval.low, w.probe_interval.high) == (lo, hi)
    else:
        assert w.probe_interval is None
        assert w.concurrent_connections == conns
    if strategy == "uniform":
        assert isinstance(w.scanning, UniformRandomScan)
    else:
        assert isinstance(w.scanning, LocalPreferenceScan)
        assert w.scanning.weights == pytest.approx(weights)
    # shared defaults: length of the simulated day
    assert (sc.duration_s, sc.warmup_s, sc.worm_start_s) == (300.0, 60.0, 120.0)
    assert (sc.runs, sc.seed) == (3, 1)


def test_stock_mixes_match_published_fractions():
    assert MIX_CATEGORY1 == pytest.approx({
        "HTTP": 0.5385, "HTTPS": 0.3813, "nameserver": 0.0687, "SSH": 0.0078,
        "FTP": 0.0020, "mail": 0.0014, "ping": 0.0003}, abs=5e-5)
    assert MIX_CATEGORY2 == pytest.approx({
        "HTTPS": 0.492, "HTTP": 0.355, "nameserver": 0.089, "FTP": 0.033,
        "mail": 0.028}, abs=5e-5)


def test_unknown_stock_id_lists_valid_ones():
    with pytest.raises(ScenarioError, match="cat1-set1.*cat2-set2"):
        preset_data("cat3-set9")


# ---------------------------------------------------------- strict schema


def test_unknown_top_level_key_rejected():
    with pytest.raises(ScenarioError, match="worm_speed"):
        build_scenario(minimal(worm_speed=9))


def test_unknown_capture_key_rejected():
    with pytest.raises(ScenarioError, match="capture"):
        build_scenario(minimal(capture={"pcapng": True}))


def test_unknown_worm_key_rejected():
    doc = preset_data("cat1-set1")
    doc["worm"]["spray"] = 1
    with pytest.raises(ScenarioError, match="spray"):
        build_scenario(doc)


def test_missing_name_rejected():
    with pytest.raises(ScenarioError, match="name"):
        build_scenario({"topology": {"kind": "category1"}})


def test_duration_must_exceed_warmup():
    with pytest.raises(ScenarioError, match="duration.*warmup"):
        build_scenario(minimal(duration=10.0, warmup=60.0))


def test_locality_weights_must_sum_to_one():
    doc = preset_data("cat1-set3")
    doc["worm"]["scanning"] = {
        "strategy": "local_preference",
        "weights": {"random": 0.3, "subnet": 0.6}}
    with pytest.raises(ScenarioError, match="sum to 1"):
        build_scenario(doc)


def test_worm_start_inside_run_window():
    doc = preset_data("cat1-set1")
    doc["worm_start"] = 400.0  # past the 300 s duration
    with pytest.raises(ScenarioError, match="worm_start"):
        build_scenario(doc)
    doc["worm_start"] = 10.0  # before the 60 s warmup
    with pytest.raises(ScenarioError, match="worm_start"):
        build_scenario(doc)


def test_runs_must_be_positive():
    with pytest.raises(ScenarioError, match="runs"):
        build_scenario(minimal(runs=0))


def test_unknown_mix_rejected():
    with pytest.raises(ScenarioError, match="mix"):
        build_scenario(minimal(traffic={"mix": "category9"}))


def test_unknown_profile_override_rejected():
    with pytest.raises(ScenarioError, match="gopher"):
        build_scenario(minimal(traffic={
            "mix": "category1", "overrides": {"gopher": {"request_len": 1}}}))


def test_file_topology_needs_path():
    with pytest.raises(ScenarioError, match="path"):
        build_scenario(minimal(topology={"kind": "file"}))


def test_unknown_topology_kind_rejected():
    with pytest.raises(ScenarioError, match="ring"):
        build_scenario(minimal(topology={"kind": "ring"}))


# ------------------------------------------------------------- file layer


def test_parse_scenario_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="not found"):
        parse_scenario(str(tmp_path / "absent.json"))


def test_parse_scenario_rejects_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ScenarioError, match="JSON"):
        parse_scenario(str(p))


def test_preset_reference_with_overrides(tmp_path):
    p = tmp_path / "variant.json"
    p.write_text(json.dumps({
        "preset": "cat1-set1",
        "name": "short-slammer",
        "duration": 30.0, "warmup": 5.0, "worm_start": 10.0, "runs": 1,
        "worm": {"vulnerable": {"count": 5, "kinds": ["client"]}},
    }))
    sc = parse_scenario(str(p))
    assert sc.name == "short-slammer"
    assert sc.runs == 1
    assert sc.worm.name == "Slammer"  # base kept
    assert sc.worm.vulnerable.count == 5  # override applied
    assert sc.worm.transport == "udp"


def test_preset_reference_rejects_unknown_key(tmp_path):
    p = tmp_path / "variant.json"
    p.write_text(json.dumps({"preset": "cat1-set1", "sneaky": 1}))
    with pytest.raises(ScenarioError, match="sneaky"):
        parse_scenario(str(p))


def test_to_json_round_trip():
    for pid in PRESET_IDS:
        sc = preset(pid)
        again = build_scenario(sc.to_json())
        assert again.to_json() == sc.to_json()


def test_build_mix_normalizes_weights():
    mix = preset("cat1-set1").build_mix()
    total = sum(mix.weights.values())
    assert total == pytest.approx(1.0, abs=1e-9)
